use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    Uniform,
    InverseDistance,
}

/// Brute-force k-nearest-neighbours over pre-scaled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    k: usize,
    weighting: Weighting,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    n_classes: usize,
}

impl Knn {
    pub fn fit(x: Vec<Vec<f64>>, y: Vec<usize>, n_classes: usize, k: usize, weighting: Weighting) -> Knn {
        Knn { k, weighting, x, y, n_classes }
    }

    /// Vote fractions among the `k` nearest training rows. Equal distances
    /// are resolved by training order.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, t)| (t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), i))
            .collect();
        let k = self.k.clamp(1, dist.len());
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &mut dist[..k];
        nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut votes = vec![0.0; self.n_classes];
        match self.weighting {
            Weighting::Uniform => nearest.iter().for_each(|&(_, i)| votes[self.y[i]] += 1.0),
            Weighting::InverseDistance if nearest[0].0 == 0.0 => nearest
                .iter()
                .filter(|(d, _)| *d == 0.0)
                .for_each(|&(_, i)| votes[self.y[i]] += 1.0),
            Weighting::InverseDistance => nearest.iter().for_each(|&(d, i)| votes[self.y[i]] += 1.0 / d),
        }
        let total: f64 = votes.iter().sum();
        votes.iter_mut().for_each(|v| *v /= total);
        votes
    }
}
