//! Classifiers, cross-validation and model comparison.
//!
//! Every learner trains on z-scored features using statistics of its own
//! training rows only. All randomness comes from a ChaCha8 generator seeded
//! with [`ClassifierSpec::seed`] (see [`model_rng`]).

mod ensemble;
mod eval;
mod knn;
mod mlp;
mod nb;
mod report;
mod svm;
pub mod synthetic;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

pub use ensemble::{AdaBoost, Stacking};
pub use eval::{
    accuracy, auc, corrected_t_test, corrected_t_test_paired, cross_validate, cross_validate_rows,
    cross_validate_with, stratified_folds, weighted_auc, ConfusionMatrix, FoldScores, TTestResult, Verdict,
};
pub use knn::Knn;
pub use mlp::{fit_mlp, Mlp, MlpParams};
pub use nb::NaiveBayes;
pub use report::{evaluate_all, EvaluationReport};
pub use svm::LinearSvm;
pub use tree::{fit_tree, Tree, TreeNode, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlError {
    #[error("training data has {0} represented class(es); at least 2 are needed")]
    Degenerate(usize),
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("expected {expected} features, got {got}")]
    Schema { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidParam(String),
    #[error("empty input")]
    EmptyInput,
    #[error("{0}")]
    Folds(String),
    #[error("model file: {0}")]
    Persist(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    NaiveBayes,
    Knn,
    DecisionTree,
    LinearSvm,
    Mlp,
    Bagging,
    AdaBoost,
    RandomForest,
    Stacking,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 9] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::Knn,
        ClassifierKind::DecisionTree,
        ClassifierKind::LinearSvm,
        ClassifierKind::Mlp,
        ClassifierKind::Bagging,
        ClassifierKind::AdaBoost,
        ClassifierKind::RandomForest,
        ClassifierKind::Stacking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "NaiveBayes",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::DecisionTree => "DecisionTree",
            ClassifierKind::LinearSvm => "LinearSVM",
            ClassifierKind::Mlp => "MLP",
            ClassifierKind::Bagging => "Bagging",
            ClassifierKind::AdaBoost => "AdaBoost",
            ClassifierKind::RandomForest => "RandomForest",
            ClassifierKind::Stacking => "Stacking",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let k = s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        Ok(match k.as_str() {
            "naivebayes" | "nb" => ClassifierKind::NaiveBayes,
            "knn" => ClassifierKind::Knn,
            "decisiontree" | "dt" | "tree" | "j48" => ClassifierKind::DecisionTree,
            "linearsvm" | "svm" => ClassifierKind::LinearSvm,
            "mlp" => ClassifierKind::Mlp,
            "bagging" => ClassifierKind::Bagging,
            "adaboost" | "boosting" => ClassifierKind::AdaBoost,
            "randomforest" | "rf" => ClassifierKind::RandomForest,
            "stacking" => ClassifierKind::Stacking,
            _ => return Err(format!("unknown classifier `{s}`")),
        })
    }
}

/// Hyperparameters of every kind; each learner reads only its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub k: usize,
    pub min_leaf: usize,
    pub max_depth: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    /// Hidden units; `None` means ceil((features + classes) / 2).
    pub mlp_hidden: Option<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub mlp_epochs: usize,
    /// Ensemble members, or boosting rounds.
    pub iterations: usize,
    /// Random-forest features per split; `None` means ceil(sqrt(features)).
    pub features_per_split: Option<usize>,
    /// Bootstrap resampling for bagging and random forests.
    pub bootstrap: bool,
    /// Internal folds producing the stacking meta-features.
    pub stacking_folds: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            k: 3,
            min_leaf: 2,
            max_depth: 25,
            svm_lambda: 1e-3,
            svm_epochs: 200,
            mlp_hidden: None,
            learning_rate: 0.3,
            momentum: 0.2,
            mlp_epochs: 500,
            iterations: 10,
            features_per_split: None,
            bootstrap: true,
            stacking_folds: 10,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self, kind: ClassifierKind) -> Result<(), MlError> {
        let bad = |m: &str| Err(MlError::InvalidParam(m.to_string()));
        use ClassifierKind::*;
        match kind {
            Knn if self.k == 0 => return bad("k must be at least 1"),
            LinearSvm if self.svm_epochs == 0 => return bad("svm_epochs must be at least 1"),
            LinearSvm if !(self.svm_lambda > 0.0 && self.svm_lambda.is_finite()) => {
                return bad("svm_lambda must be positive")
            }
            Mlp if self.mlp_epochs == 0 => return bad("mlp_epochs must be at least 1"),
            Mlp if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) => {
                return bad("learning_rate must be positive")
            }
            Mlp if !(0.0..1.0).contains(&self.momentum) => return bad("momentum must lie in [0, 1)"),
            Mlp if self.mlp_hidden == Some(0) => return bad("mlp_hidden must be at least 1"),
            Bagging | AdaBoost | RandomForest if self.iterations == 0 => return bad("iterations must be at least 1"),
            RandomForest if self.features_per_split == Some(0) => return bad("features_per_split must be at least 1"),
            Stacking if self.stacking_folds < 2 => return bad("stacking_folds must be at least 2"),
            _ => {}
        }
        if matches!(kind, DecisionTree | Bagging | AdaBoost | RandomForest | Stacking) && self.min_leaf == 0 {
            return bad("min_leaf must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn tree(&self) -> TreeParams {
        TreeParams {
            min_leaf: self.min_leaf,
            max_depth: self.max_depth,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub params: Hyperparams,
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        ClassifierSpec {
            kind,
            params: Hyperparams::default(),
            seed,
        }
    }

    /// The nine default specs, in report order.
    pub fn all(seed: u64) -> Vec<Self> {
        ClassifierKind::ALL.iter().map(|&k| Self::new(k, seed)).collect()
    }
}

/// The generator behind every random choice a learner makes.
pub fn model_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant features store 1.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let nf = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..nf).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..nf)
            .map(|j| {
                let v = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                let s = v.sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Learned parameters of each kind, on standardised inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Learned {
    NaiveBayes(NaiveBayes),
    Knn(Knn),
    DecisionTree(Tree),
    LinearSvm(LinearSvm),
    Mlp(Mlp),
    Bagging(Vec<Tree>),
    AdaBoost(AdaBoost),
    RandomForest(Vec<Tree>),
    Stacking(Box<Stacking>),
}

impl Learned {
    pub fn proba(&self, x: &[f64], classes: usize) -> Vec<f64> {
        match self {
            Learned::NaiveBayes(m) => m.proba(x),
            Learned::Knn(m) => m.proba(x),
            Learned::DecisionTree(t) => t.proba(x).to_vec(),
            Learned::LinearSvm(m) => m.proba(x),
            Learned::Mlp(m) => m.proba(x),
            Learned::Bagging(ts) => ensemble::vote(ts, x, classes),
            Learned::AdaBoost(m) => m.proba(x, classes),
            Learned::RandomForest(ts) => ensemble::average(ts, x, classes),
            Learned::Stacking(m) => m.proba(x, classes),
        }
    }
}

/// Fits one learner on already standardised rows.
pub(crate) fn fit_learned(
    spec: &ClassifierSpec,
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
) -> Result<Learned, MlError> {
    let hp = &spec.params;
    let mut rng = model_rng(spec.seed);
    let nf = x.first().map_or(0, Vec::len);
    let w = vec![1.0; y.len()];
    Ok(match spec.kind {
        ClassifierKind::NaiveBayes => Learned::NaiveBayes(nb::fit_nb(x, y, classes)),
        ClassifierKind::Knn => Learned::Knn(Knn::new(x, y, classes, hp.k)),
        ClassifierKind::DecisionTree => Learned::DecisionTree(fit_tree(x, y, &w, classes, hp.tree(), &mut rng)),
        ClassifierKind::LinearSvm => {
            Learned::LinearSvm(svm::fit_svm(x, y, classes, hp.svm_lambda, hp.svm_epochs, &mut rng))
        }
        ClassifierKind::Mlp => {
            let p = MlpParams {
                hidden: hp.mlp_hidden.unwrap_or((nf + classes).div_ceil(2)),
                learning_rate: hp.learning_rate,
                momentum: hp.momentum,
                epochs: hp.mlp_epochs,
            };
            Learned::Mlp(fit_mlp(x, y, classes, p, &mut rng))
        }
        ClassifierKind::Bagging => Learned::Bagging(ensemble::fit_bagging(x, y, classes, hp, &mut rng)),
        ClassifierKind::AdaBoost => Learned::AdaBoost(ensemble::fit_adaboost(x, y, classes, hp, &mut rng).0),
        ClassifierKind::RandomForest => Learned::RandomForest(ensemble::fit_forest(x, y, classes, hp, &mut rng)),
        ClassifierKind::Stacking => Learned::Stacking(Box::new(ensemble::fit_stacking(x, y, classes, hp, spec.seed)?)),
    })
}

/// A distribution-producing classifier over raw feature rows.
pub trait Classifier {
    fn distribution(&self, x: &[f64]) -> Result<Vec<f64>, MlError>;

    fn predict(&self, x: &[f64]) -> Result<(usize, Vec<f64>), MlError> {
        let d = self.distribution(x)?;
        Ok((argmax(&d), d))
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub spec: ClassifierSpec,
    pub class_names: Vec<String>,
    pub standardizer: Standardizer,
    pub learned: Learned,
    /// Free-form provenance, e.g. digests of the training inputs.
    #[serde(default)]
    pub meta: std::collections::BTreeMap<String, String>,
}

pub(crate) fn check_rows(x: &[Vec<f64>], y: &[usize], classes: usize) -> Result<(), MlError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(MlError::EmptyInput);
    }
    let nf = x[0].len();
    for (i, r) in x.iter().enumerate() {
        if r.len() != nf {
            return Err(MlError::Schema {
                expected: nf,
                got: r.len(),
            });
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(MlError::NonFinite { row: i, col: j });
        }
    }
    let mut present = vec![false; classes];
    for &l in y {
        if l >= classes {
            return Err(MlError::InvalidParam(format!("label {l} out of range")));
        }
        present[l] = true;
    }
    let n = present.iter().filter(|&&p| p).count();
    if n < 2 {
        return Err(MlError::Degenerate(n));
    }
    Ok(())
}

pub fn train_rows(
    x: &[Vec<f64>],
    y: &[usize],
    class_names: &[String],
    spec: &ClassifierSpec,
) -> Result<TrainedModel, MlError> {
    spec.params.validate(spec.kind)?;
    check_rows(x, y, class_names.len())?;
    let standardizer = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
    let learned = fit_learned(spec, &z, y, class_names.len())?;
    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        class_names: class_names.to_vec(),
        standardizer,
        learned,
        meta: Default::default(),
    })
}

pub fn train(ds: &Dataset, spec: &ClassifierSpec) -> Result<TrainedModel, MlError> {
    train_rows(&ds.features(), &ds.labels(), &ds.class_names, spec)
}

impl TrainedModel {
    pub fn feature_count(&self) -> usize {
        self.standardizer.mean.len()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        let m: TrainedModel = serde_json::from_str(text).map_err(|e| MlError::Persist(e.to_string()))?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(MlError::Persist(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }
}

impl Classifier for TrainedModel {
    fn distribution(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        if x.len() != self.feature_count() {
            return Err(MlError::Schema {
                expected: self.feature_count(),
                got: x.len(),
            });
        }
        if let Some(col) = x.iter().position(|v| !v.is_finite()) {
            return Err(MlError::NonFinite { row: 0, col });
        }
        let raw = self.learned.proba(&self.standardizer.apply(x), self.class_names.len());
        Ok(normalize(raw))
    }
}

pub fn predict(model: &TrainedModel, x: &[f64]) -> Result<(usize, Vec<f64>), MlError> {
    model.predict(x)
}

pub(crate) fn normalize(mut d: Vec<f64>) -> Vec<f64> {
    let s: f64 = d.iter().sum();
    if s > 0.0 && s.is_finite() && d.iter().all(|v| *v >= 0.0) {
        d.iter_mut().for_each(|v| *v /= s);
    } else {
        let u = 1.0 / d.len() as f64;
        d.iter_mut().for_each(|v| *v = u);
    }
    d
}
