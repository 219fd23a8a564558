/// Gaussian naive Bayes. Variances are smoothed by `epsilon * max variance`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, epsilon: f64) -> GaussianNb {
        let d = x.first().map_or(0, Vec::len);
        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        for (row, &c) in x.iter().zip(y) {
            counts[c] += 1;
            for j in 0..d {
                means[c][j] += row[j];
            }
        }
        for c in 0..n_classes {
            if counts[c] > 0 {
                means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
            }
        }
        let mut variances = vec![vec![0.0; d]; n_classes];
        for (row, &c) in x.iter().zip(y) {
            for j in 0..d {
                variances[c][j] += (row[j] - means[c][j]).powi(2) / counts[c] as f64;
            }
        }
        let n = x.len() as f64;
        let mut max_var: f64 = 0.0;
        for j in 0..d {
            let mu = x.iter().map(|r| r[j]).sum::<f64>() / n;
            max_var = max_var.max(x.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / n);
        }
        let smoothing = epsilon * if max_var > 0.0 { max_var } else { 1.0 };
        variances.iter_mut().flatten().for_each(|v| *v += smoothing);
        GaussianNb {
            log_prior: counts
                .iter()
                .map(|&c| if c > 0 { (c as f64 / n).ln() } else { f64::NEG_INFINITY })
                .collect(),
            means,
            variances,
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let joint: Vec<f64> = self
            .log_prior
            .iter()
            .enumerate()
            .map(|(c, &lp)| {
                if lp == f64::NEG_INFINITY {
                    return lp;
                }
                lp + row
                    .iter()
                    .zip(self.means[c].iter().zip(&self.variances[c]))
                    .map(|(x, (m, v))| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / v))
                    .sum::<f64>()
            })
            .collect();
        softmax(&joint)
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}
