//! k-nearest neighbours over stored (standardised) training rows.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub classes: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

impl Knn {
    pub fn new(x: &[Vec<f64>], y: &[usize], classes: usize, k: usize) -> Self {
        Knn {
            k,
            classes,
            x: x.to_vec(),
            y: y.to_vec(),
        }
    }

    /// Vote fractions of the `k` nearest rows. Equal distances prefer the
    /// lower class index.
    pub fn proba(&self, q: &[f64]) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(r, &l)| (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), l))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(d.len()).max(1);
        let mut votes = vec![0.0; self.classes];
        for &(_, l) in &d[..k] {
            votes[l] += 1.0;
        }
        votes.iter().map(|v| v / k as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_neighbour_recalls_training_rows() {
        let x = vec![vec![0.0, 1.0], vec![3.0, -1.0], vec![0.5, 0.5]];
        let y = vec![1, 0, 2];
        let m = Knn::new(&x, &y, 3, 1);
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(m.proba(r)[l], 1.0);
        }
    }

    #[test]
    fn distance_ties_prefer_low_class() {
        let m = Knn::new(&[vec![1.0], vec![-1.0]], &[1, 0], 2, 1);
        assert_eq!(m.proba(&[0.0]), vec![1.0, 0.0]);
    }
}
