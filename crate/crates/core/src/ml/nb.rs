//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

pub const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Laplace-smoothed class priors, in log space.
    pub log_prior: Vec<f64>,
    /// Per class; empty for classes absent from training.
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

pub fn fit_nb(x: &[Vec<f64>], y: &[usize], classes: usize) -> NaiveBayes {
    fit_nb_floored(x, y, classes, VAR_FLOOR)
}

pub(crate) fn fit_nb_floored(x: &[Vec<f64>], y: &[usize], classes: usize, floor: f64) -> NaiveBayes {
    let nf = x.first().map_or(0, Vec::len);
    let mut count = vec![0usize; classes];
    let mut sum = vec![vec![0.0; nf]; classes];
    for (r, &c) in x.iter().zip(y) {
        count[c] += 1;
        for (s, v) in sum[c].iter_mut().zip(r) {
            *s += v;
        }
    }
    let mut mean = vec![Vec::new(); classes];
    let mut var = vec![Vec::new(); classes];
    for c in 0..classes {
        if count[c] == 0 {
            continue;
        }
        mean[c] = sum[c].iter().map(|s| s / count[c] as f64).collect();
        let mut v = vec![0.0; nf];
        for (r, _) in x.iter().zip(y).filter(|(_, &l)| l == c) {
            for j in 0..nf {
                let d = r[j] - mean[c][j];
                v[j] += d * d;
            }
        }
        var[c] = v.iter().map(|s| (s / count[c] as f64).max(floor)).collect();
    }
    let n = y.len() as f64;
    let log_prior = count
        .iter()
        .map(|&k| ((k as f64 + 1.0) / (n + classes as f64)).ln())
        .collect();
    NaiveBayes { log_prior, mean, var }
}

impl NaiveBayes {
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = (0..self.log_prior.len())
            .map(|c| {
                if self.mean[c].is_empty() {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = x
                    .iter()
                    .zip(&self.mean[c])
                    .zip(&self.var[c])
                    .map(|((v, m), s2)| -0.5 * ((v - m) * (v - m) / s2 + (2.0 * std::f64::consts::PI * s2).ln()))
                    .sum();
                self.log_prior[c] + ll
            })
            .collect();
        softmax_logs(&logs)
    }
}

/// Normalises log-weights into probabilities without overflow.
pub(crate) fn softmax_logs(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0 / logs.len() as f64; logs.len()];
    }
    let e: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(x: f64, m: f64, v: f64) -> f64 {
        (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
    }

    #[test]
    fn two_cluster_posterior() {
        let x = vec![vec![1.0], vec![2.0], vec![10.0], vec![11.0]];
        let m = fit_nb(&x, &[0, 0, 1, 1], 2);
        let p = m.proba(&[1.5]);
        // By hand: both classes have variance 0.25 and equal priors.
        let a = gauss(1.5, 1.5, 0.25);
        let b = gauss(1.5, 10.5, 0.25);
        assert!((p[0] - a / (a + b)).abs() < 1e-12);
        assert!(p[0] > 0.99);
    }

    #[test]
    fn equal_evidence_is_uniform() {
        let x = vec![vec![1.0], vec![3.0], vec![1.0], vec![3.0]];
        let p = fit_nb(&x, &[0, 0, 1, 1], 2).proba(&[2.0]);
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn absent_class_gets_nothing() {
        let x = vec![vec![1.0], vec![2.0], vec![5.0]];
        let p = fit_nb(&x, &[0, 0, 2], 3).proba(&[1.0]);
        assert_eq!(p[1], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
