//! One-hidden-layer perceptron: sigmoid hidden units, softmax output,
//! cross-entropy loss, per-sample gradient descent with momentum.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nb::softmax_logs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    /// `n_hidden` rows of `n_in + 1` weights, bias last.
    pub w1: Vec<f64>,
    /// `n_out` rows of `n_hidden + 1` weights, bias last.
    pub w2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
}

const INIT_RANGE: f64 = 0.05;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Mlp {
    pub fn random<R: Rng>(n_in: usize, n_hidden: usize, n_out: usize, rng: &mut R) -> Self {
        let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
        let w1 = draw(n_hidden * (n_in + 1));
        let w2 = draw(n_out * (n_hidden + 1));
        Mlp {
            n_in,
            n_hidden,
            n_out,
            w1,
            w2,
        }
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.w2.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.w1.iter().chain(&self.w2).copied().collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (a, b) = p.split_at(self.w1.len());
        self.w1.copy_from_slice(a);
        self.w2.copy_from_slice(b);
    }

    fn hidden(&self, x: &[f64], h: &mut [f64]) {
        let stride = self.n_in + 1;
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * stride..(j + 1) * stride];
            let z: f64 = row[..self.n_in].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + row[self.n_in];
            *hj = sigmoid(z);
        }
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        let stride = self.n_hidden + 1;
        let logits: Vec<f64> = (0..self.n_out)
            .map(|c| {
                let row = &self.w2[c * stride..(c + 1) * stride];
                row[..self.n_hidden].iter().zip(h).map(|(w, v)| w * v).sum::<f64>() + row[self.n_hidden]
            })
            .collect();
        softmax_logs(&logits)
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.n_hidden];
        self.hidden(x, &mut h);
        self.output(&h)
    }

    /// Adds the cross-entropy gradient of one sample into `grad` (layout as
    /// [`Mlp::params`]) and returns the sample's loss.
    fn accumulate(&self, x: &[f64], y: usize, h: &mut [f64], grad: &mut [f64]) -> f64 {
        self.hidden(x, h);
        let p = self.output(h);
        let (g1, g2) = grad.split_at_mut(self.w1.len());
        let s2 = self.n_hidden + 1;
        let mut dh = vec![0.0; self.n_hidden];
        for c in 0..self.n_out {
            let d = p[c] - f64::from(u8::from(c == y));
            let row = &mut g2[c * s2..(c + 1) * s2];
            for j in 0..self.n_hidden {
                row[j] += d * h[j];
                dh[j] += d * self.w2[c * s2 + j];
            }
            row[self.n_hidden] += d;
        }
        let s1 = self.n_in + 1;
        for j in 0..self.n_hidden {
            let dz = dh[j] * h[j] * (1.0 - h[j]);
            let row = &mut g1[j * s1..(j + 1) * s1];
            for (g, v) in row[..self.n_in].iter_mut().zip(x) {
                *g += dz * v;
            }
            row[self.n_in] += dz;
        }
        -p[y].max(f64::MIN_POSITIVE).ln()
    }

    /// Mean cross-entropy over the samples and its analytic gradient.
    pub fn loss_and_grad(&self, x: &[Vec<f64>], y: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.param_count()];
        let mut h = vec![0.0; self.n_hidden];
        let mut loss = 0.0;
        for (r, &l) in x.iter().zip(y) {
            loss += self.accumulate(r, l, &mut h, &mut grad);
        }
        let n = y.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }
}

pub fn fit_mlp<R: Rng>(x: &[Vec<f64>], y: &[usize], classes: usize, p: MlpParams, rng: &mut R) -> Mlp {
    let nf = x.first().map_or(0, Vec::len);
    let mut net = Mlp::random(nf, p.hidden, classes, rng);
    let mut params = net.params();
    let mut velocity = vec![0.0; params.len()];
    let mut grad = vec![0.0; params.len()];
    let mut h = vec![0.0; p.hidden];
    let mut order: Vec<usize> = (0..y.len()).collect();
    for _ in 0..p.epochs {
        order.shuffle(rng);
        for &i in &order {
            grad.iter_mut().for_each(|g| *g = 0.0);
            net.accumulate(&x[i], y[i], &mut h, &mut grad);
            for ((w, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = p.momentum * *v - p.learning_rate * g;
                *w += *v;
            }
            net.set_params(&params);
        }
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut net = Mlp::random(3, 4, 3, &mut rng);
        let mut p = net.params();
        p.iter_mut().for_each(|w| *w *= 20.0);
        net.set_params(&p);
        let x: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y = vec![0, 1, 2, 1, 0];
        let (_, g) = net.loss_and_grad(&x, &y);
        let eps = 1e-5;
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k] += eps;
            net.set_params(&q);
            let up = net.loss_and_grad(&x, &y).0;
            q[k] -= 2.0 * eps;
            net.set_params(&q);
            let down = net.loss_and_grad(&x, &y).0;
            let num = (up - down) / (2.0 * eps);
            assert!((num - g[k]).abs() <= 1e-4 * num.abs().max(g[k].abs()).max(1e-3));
        }
    }

    #[test]
    fn learns_xor() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = vec![0, 1, 1, 0];
        let p = MlpParams {
            hidden: 4,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 3000,
        };
        let net = fit_mlp(&x, &y, 2, p, &mut ChaCha8Rng::seed_from_u64(5));
        for (r, &l) in x.iter().zip(&y) {
            assert!(net.proba(r)[l] > 0.5);
        }
    }
}
