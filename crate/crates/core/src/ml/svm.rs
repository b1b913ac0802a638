//! One-vs-rest linear SVM trained by epoch-wise subgradient descent on the
//! regularised hinge loss.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nb::softmax_logs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    /// One weight vector per class, bias last.
    pub w: Vec<Vec<f64>>,
}

const ETA0: f64 = 0.1;

pub fn fit_svm<R: Rng>(x: &[Vec<f64>], y: &[usize], classes: usize, lambda: f64, epochs: usize, rng: &mut R) -> LinearSvm {
    let nf = x.first().map_or(0, Vec::len);
    let mut w = vec![vec![0.0; nf + 1]; classes];
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            let eta = ETA0 / (1.0 + ETA0 * lambda * t as f64);
            t += 1;
            for (c, wc) in w.iter_mut().enumerate() {
                let target = if y[i] == c { 1.0 } else { -1.0 };
                let margin = target * (dot(wc, &x[i]) + wc[nf]);
                for v in wc[..nf].iter_mut() {
                    *v *= 1.0 - eta * lambda;
                }
                if margin < 1.0 {
                    for (v, xi) in wc[..nf].iter_mut().zip(&x[i]) {
                        *v += eta * target * xi;
                    }
                    wc[nf] += eta * target;
                }
            }
        }
    }
    LinearSvm { w }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl LinearSvm {
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.w.iter().map(|wc| dot(wc, x) + wc[x.len()]).collect()
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        softmax_logs(&self.margins(x))
    }
}
