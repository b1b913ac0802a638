//! Seeded synthetic datasets for sanity checks.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::model_rng;

/// Two Gaussian clusters (unit standard deviation) in two features whose
/// centres lie `gap + 4` apart along the first feature, with samples
/// clipped to two standard deviations of their centre. Any `gap >= 0`
/// therefore leaves an empty band of width `gap` between the classes.
/// Classes alternate, so counts differ by at most one.
pub fn separable(n: usize, gap: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = model_rng(seed);
    let noise: Normal<f64> = Normal::new(0.0, 1.0).expect("valid normal");
    let half = gap / 2.0 + 2.0;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let centre = if c == 0 { -half } else { half };
        let a = centre + noise.sample(&mut rng).clamp(-2.0, 2.0);
        let b: f64 = noise.sample(&mut rng) * 3.0 + rng.gen_range(-0.5..0.5);
        x.push(vec![a, b]);
        y.push(c);
    }
    (x, y)
}
