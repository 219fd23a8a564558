const ITERATIONS: usize = 500;
const STEP: f64 = 0.1;

/// One-vs-rest logistic regression trained by batch gradient descent on
/// z-scored inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Logistic {
    /// Per class: bias followed by weights.
    weights: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Logistic {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, l2: f64) -> Logistic {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let weights = (0..n_classes)
            .map(|class| {
                let mut w = vec![0.0; d + 1];
                let mut grad = vec![0.0; d + 1];
                for _ in 0..ITERATIONS {
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for (row, &label) in x.iter().zip(y) {
                        let z = w[0] + row.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>();
                        let err = sigmoid(z) - f64::from(u8::from(label == class));
                        grad[0] += err;
                        for (g, v) in grad[1..].iter_mut().zip(row) {
                            *g += err * v;
                        }
                    }
                    w[0] -= STEP * grad[0] / n;
                    for j in 1..=d {
                        w[j] -= STEP * (grad[j] / n + l2 * w[j]);
                    }
                }
                w
            })
            .collect();
        Logistic { weights }
    }

    /// One-vs-rest scores normalised to sum to one.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let scores: Vec<f64> = self
            .weights
            .iter()
            .map(|w| sigmoid(w[0] + row.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>()))
            .collect();
        let total: f64 = scores.iter().sum();
        if total > 0.0 && total.is_finite() {
            scores.iter().map(|s| s / total).collect()
        } else {
            vec![1.0 / scores.len() as f64; scores.len()]
        }
    }
}
