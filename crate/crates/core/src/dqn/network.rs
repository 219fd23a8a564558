use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Fully connected layer, weights stored row-major as `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn uniform(inputs: usize, outputs: usize, scale: f64, rng: &mut impl Rng) -> Dense {
        let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
        Dense {
            inputs,
            outputs,
            weights: draw(inputs * outputs),
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

/// Multi-layer perceptron with ReLU hidden layers and a linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations of every layer for one input, kept for backpropagation.
struct Trace {
    /// `inputs[l]` is the input of layer `l`; the last entry is the output.
    activations: Vec<Vec<f64>>,
}

impl Mlp {
    /// Weights drawn uniformly from `[-scale, scale]`, biases zero.
    pub fn new(sizes: &[usize], scale: f64, seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mlp {
            layers: sizes
                .windows(2)
                .map(|w| Dense::uniform(w[0], w[1], scale, &mut rng))
                .collect(),
        }
    }

    /// Every parameter, biases included, uniform in `[-scale, scale]`.
    pub fn randomized(sizes: &[usize], scale: f64, seed: u64) -> Mlp {
        let mut net = Mlp::zeros(sizes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flat: Vec<f64> = (0..net.n_params()).map(|_| rng.gen_range(-scale..=scale)).collect();
        net.set_params(&flat);
        net
    }

    pub fn zeros(sizes: &[usize]) -> Mlp {
        Mlp::new(sizes, 0.0, 0)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).activations.pop().expect("output layer")
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut activations = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(&activations[l]);
            if l < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(z);
        }
        Trace { activations }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "parameter count");
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
    }

    /// Mean squared error between output `heads[i]` for input `inputs[i]`
    /// and `targets[i]`, with its gradient in [`params`](Self::params) order.
    pub fn mse_gradient(&self, inputs: &[Vec<f64>], heads: &[usize], targets: &[f64]) -> (f64, Vec<f64>) {
        let n = inputs.len() as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
            .collect();
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for ((x, &head), &y) in inputs.iter().zip(heads).zip(targets) {
            let trace = self.trace(x);
            let out = &trace.activations[last + 1];
            let err = out[head] - y;
            loss += err * err / n;
            // d loss / d pre-activation of the current layer
            let mut delta = vec![0.0; out.len()];
            delta[head] = 2.0 * err / n;
            for l in (0..=last).rev() {
                let layer = &self.layers[l];
                let input = &trace.activations[l];
                let (gw, gb) = &mut grads[l];
                for o in 0..layer.outputs {
                    if delta[o] == 0.0 {
                        continue;
                    }
                    gb[o] += delta[o];
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, v) in row.iter_mut().zip(input) {
                        *g += delta[o] * v;
                    }
                }
                if l == 0 {
                    break;
                }
                let mut back = vec![0.0; layer.inputs];
                for (row, &d) in layer.weights.chunks(layer.inputs).zip(&delta) {
                    if d == 0.0 {
                        continue;
                    }
                    for (b, w) in back.iter_mut().zip(row) {
                        *b += d * w;
                    }
                }
                // ReLU derivative of the previous layer's output
                for (b, a) in back.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = back;
            }
        }
        let flat = grads.into_iter().flat_map(|(w, b)| w.into_iter().chain(b)).collect();
        (loss, flat)
    }

    /// `theta -= step * gradient`.
    pub fn descend(&mut self, gradient: &[f64], step: f64) {
        let updated: Vec<f64> = self.params().iter().zip(gradient).map(|(p, g)| p - step * g).collect();
        self.set_params(&updated);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_hidden_linear_output() {
        let mut net = Mlp::zeros(&[2, 2, 1]);
        net.set_params(&[1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 1.0, 0.5]);
        // hidden = relu([x0, x1 - 1]); out = h0 + h1 + 0.5
        assert_eq!(net.forward(&[2.0, 0.5]), vec![2.5]);
        assert_eq!(net.forward(&[2.0, 3.0]), vec![4.5]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let net = Mlp::randomized(&[5, 7, 6, 4], 0.5, 3);
        let inputs = vec![vec![1.0, 0.0, 1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 1.0]];
        let heads = [2, 0];
        let targets = [0.7, -0.3];
        let (_, analytic) = net.mse_gradient(&inputs, &heads, &targets);
        let base = net.params();
        let h = 1e-5;
        for k in 0..base.len() {
            let mut probe = net.clone();
            let mut p = base.clone();
            p[k] += h;
            probe.set_params(&p);
            let up = probe.mse_gradient(&inputs, &heads, &targets).0;
            p[k] -= 2.0 * h;
            probe.set_params(&p);
            let down = probe.mse_gradient(&inputs, &heads, &targets).0;
            let numeric = (up - down) / (2.0 * h);
            let scale = numeric.abs().max(analytic[k].abs()).max(1e-6);
            assert!((numeric - analytic[k]).abs() / scale < 1e-4, "param {k}: {numeric} vs {}", analytic[k]);
        }
    }
}
