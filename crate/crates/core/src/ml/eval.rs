use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{argmax, train_rows, Classifier, ClassifierSpec, MlError, TrainedModel};
use crate::dataset::Dataset;

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_pairs(classes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::new(classes);
        for (a, p) in pairs {
            m.add(a, p);
        }
        m
    }

    pub fn add(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn tp(&self, c: usize) -> u64 {
        self.counts[c][c]
    }

    pub fn fp(&self, c: usize) -> u64 {
        (0..self.classes()).filter(|&a| a != c).map(|a| self.counts[a][c]).sum()
    }

    pub fn fn_(&self, c: usize) -> u64 {
        (0..self.classes()).filter(|&p| p != c).map(|p| self.counts[c][p]).sum()
    }

    pub fn tn(&self, c: usize) -> u64 {
        self.total() - self.tp(c) - self.fp(c) - self.fn_(c)
    }
}

/// Share of correctly classified instances.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<Ratio<u64>, MlError> {
    let total = cm.total();
    if total == 0 {
        return Err(MlError::EmptyInput);
    }
    Ok(Ratio::new(cm.trace(), total))
}

/// Probability that a random positive outscores a random negative, ties
/// counting half.
pub fn auc(scores: &[(f64, bool)]) -> Result<Ratio<u64>, MlError> {
    if scores.is_empty() {
        return Err(MlError::EmptyInput);
    }
    let mut s: Vec<(f64, bool)> = scores.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut twice_wins, mut neg_below) = (0u64, 0u64);
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < s.len() && s[j].0 == s[i].0 {
            if s[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice_wins += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    let p = s.iter().filter(|x| x.1).count() as u64;
    let n = s.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(MlError::Degenerate(1));
    }
    Ok(Ratio::new(twice_wins, 2 * p * n))
}

/// One-vs-rest AUC averaged with class-frequency weights. Classes that are
/// absent, or that cover every row, are skipped. `None` when nothing is
/// left.
pub fn weighted_auc(dists: &[Vec<f64>], labels: &[usize], classes: usize) -> Option<f64> {
    let (mut sum, mut weight) = (0.0, 0.0);
    for c in 0..classes {
        let scores: Vec<(f64, bool)> = dists.iter().zip(labels).map(|(d, &l)| (d[c], l == c)).collect();
        if let Ok(a) = auc(&scores) {
            let w = labels.iter().filter(|&&l| l == c).count() as f64;
            sum += w * (*a.numer() as f64 / *a.denom() as f64);
            weight += w;
        }
    }
    (weight > 0.0).then(|| sum / weight)
}

/// Fold index per record. Each class is shuffled with a generator seeded
/// by `seed`, then all classes are dealt round-robin in class order, so
/// fold sizes differ by at most one and every class is spread as evenly as
/// its size allows.
pub fn stratified_folds(labels: &[usize], classes: usize, k: usize, seed: u64) -> Result<Vec<usize>, MlError> {
    if k < 2 {
        return Err(MlError::Folds(format!("k = {k}; at least 2 folds are needed")));
    }
    if k > labels.len() {
        return Err(MlError::Folds(format!("k = {k} exceeds {} records", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..classes.max(labels.iter().map(|l| l + 1).max().unwrap_or(0)) {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub accuracies: Vec<f64>,
    /// `None` for folds where no class admits a one-vs-rest AUC.
    pub aucs: Vec<Option<f64>>,
    pub confusions: Vec<ConfusionMatrix>,
    pub mean_accuracy: f64,
    pub mean_auc: Option<f64>,
    /// Test rows over training rows, 1 / (k - 1).
    pub test_train_ratio: f64,
}

/// Cross-validation with a custom learner. Folds train in parallel and are
/// collected in fold order.
pub fn cross_validate_with<M, F>(
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    k: usize,
    seed: u64,
    fit: F,
) -> Result<FoldScores, MlError>
where
    M: Classifier,
    F: Fn(&[Vec<f64>], &[usize]) -> Result<M, MlError> + Sync,
{
    let fold_of = stratified_folds(y, classes, k, seed)?;
    let per_fold = (0..k)
        .into_par_iter()
        .map(|f| {
            let (mut tx, mut ty, mut qx, mut qy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for i in 0..y.len() {
                if fold_of[i] == f {
                    qx.push(x[i].clone());
                    qy.push(y[i]);
                } else {
                    tx.push(x[i].clone());
                    ty.push(y[i]);
                }
            }
            let model = fit(&tx, &ty)?;
            let mut cm = ConfusionMatrix::new(classes);
            let mut dists = Vec::with_capacity(qx.len());
            for (r, &l) in qx.iter().zip(&qy) {
                let d = model.distribution(r)?;
                cm.add(l, argmax(&d));
                dists.push(d);
            }
            let acc = accuracy(&cm)?;
            Ok((*acc.numer() as f64 / *acc.denom() as f64, weighted_auc(&dists, &qy, classes), cm))
        })
        .collect::<Result<Vec<_>, MlError>>()?;

    let accuracies: Vec<f64> = per_fold.iter().map(|p| p.0).collect();
    let aucs: Vec<Option<f64>> = per_fold.iter().map(|p| p.1).collect();
    let present: Vec<f64> = aucs.iter().flatten().copied().collect();
    Ok(FoldScores {
        k,
        fold_of,
        mean_accuracy: accuracies.iter().sum::<f64>() / k as f64,
        mean_auc: (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64),
        accuracies,
        aucs,
        confusions: per_fold.into_iter().map(|p| p.2).collect(),
        test_train_ratio: 1.0 / (k as f64 - 1.0),
    })
}

pub fn cross_validate_rows(
    x: &[Vec<f64>],
    y: &[usize],
    class_names: &[String],
    spec: &ClassifierSpec,
    k: usize,
    seed: u64,
) -> Result<FoldScores, MlError> {
    spec.params.validate(spec.kind)?;
    cross_validate_with(x, y, class_names.len(), k, seed, |tx, ty| {
        // A class with a single record leaves one fold's training rows
        // without it; a binary dataset can then train on one class only.
        // Every learner would predict that class, so predict it directly.
        if let Some(&only) = ty.first().filter(|&&c| ty.iter().all(|&l| l == c)) {
            return Ok(FoldModel::Constant(only, class_names.len()));
        }
        train_rows(tx, ty, class_names, spec).map(|m| FoldModel::Trained(Box::new(m)))
    })
}

enum FoldModel {
    Trained(Box<TrainedModel>),
    Constant(usize, usize),
}

impl Classifier for FoldModel {
    fn distribution(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        match self {
            FoldModel::Trained(m) => m.distribution(x),
            FoldModel::Constant(c, n) => {
                let mut d = vec![0.0; *n];
                d[*c] = 1.0;
                Ok(d)
            }
        }
    }
}

pub fn cross_validate(ds: &Dataset, spec: &ClassifierSpec, k: usize, seed: u64) -> Result<FoldScores, MlError> {
    cross_validate_rows(&ds.features(), &ds.labels(), &ds.class_names, spec, k, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Improvement,
    Degradation,
    NotSignificant,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Improvement => "improvement",
            Verdict::Degradation => "degradation",
            Verdict::NotSignificant => "not-significant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub mean_diff: f64,
    pub t: f64,
    pub df: usize,
    pub alpha: f64,
    /// Two-tailed critical value of Student's t at `alpha`.
    pub critical: f64,
    /// `Improvement` means the first sample is significantly higher.
    pub verdict: Verdict,
}

/// Paired t-test on per-fold scores with the variance inflated by
/// `test_train_ratio` to account for overlapping training sets.
///
/// With zero variance the statistic is 0 when the mean difference is 0 and
/// the difference counts as significant otherwise (t is then reported as
/// an infinity of the matching sign).
pub fn corrected_t_test_paired(a: &[f64], b: &[f64], test_train_ratio: f64, alpha: f64) -> Result<TTestResult, MlError> {
    let k = a.len();
    if k != b.len() {
        return Err(MlError::Folds("paired samples differ in length".into()));
    }
    if k < 2 {
        return Err(MlError::Folds("the t-test needs at least 2 folds".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MlError::InvalidParam(format!("alpha {alpha} outside (0, 1)")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let kf = k as f64;
    let mean = d.iter().sum::<f64>() / kf;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (kf - 1.0);
    let df = k - 1;
    let critical = StudentsT::new(0.0, 1.0, df as f64)
        .expect("df >= 1")
        .inverse_cdf(1.0 - alpha / 2.0);
    let t = if var > 0.0 {
        mean / ((1.0 / kf + test_train_ratio) * var).sqrt()
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    };
    let verdict = if t > critical {
        Verdict::Improvement
    } else if t < -critical {
        Verdict::Degradation
    } else {
        Verdict::NotSignificant
    };
    Ok(TTestResult {
        mean_diff: mean,
        t,
        df,
        alpha,
        critical,
        verdict,
    })
}

/// Compares two cross-validation runs made over the same folds.
pub fn corrected_t_test(a: &FoldScores, b: &FoldScores, alpha: f64) -> Result<TTestResult, MlError> {
    if a.k != b.k || a.fold_of != b.fold_of {
        return Err(MlError::Folds("scores come from different fold assignments".into()));
    }
    corrected_t_test_paired(&a.accuracies, &b.accuracies, a.test_train_ratio, alpha)
}
