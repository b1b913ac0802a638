use serde::{Deserialize, Serialize};

use super::eval::{corrected_t_test, cross_validate, FoldScores, Verdict};
use super::{ClassifierSpec, MlError};
use crate::dataset::Dataset;

/// Cross-validated scores of several classifiers on one dataset, plus the
/// pairwise corrected t-test verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub case_id: String,
    pub k: usize,
    pub seed: u64,
    pub alpha: f64,
    pub names: Vec<String>,
    pub scores: Vec<FoldScores>,
    /// `significance[i][j]`: row classifier `i` against column `j`;
    /// `None` on the diagonal.
    pub significance: Vec<Vec<Option<Verdict>>>,
}

/// Runs every spec over the same folds. Specs run one after another; each
/// cross-validation parallelises over its folds.
pub fn evaluate_all(
    ds: &Dataset,
    specs: &[ClassifierSpec],
    k: usize,
    seed: u64,
    alpha: f64,
) -> Result<EvaluationReport, MlError> {
    let scores = specs
        .iter()
        .map(|s| cross_validate(ds, s, k, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let n = specs.len();
    let mut significance = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                significance[i][j] = Some(corrected_t_test(&scores[i], &scores[j], alpha)?.verdict);
            }
        }
    }
    Ok(EvaluationReport {
        case_id: ds.case_id.to_string(),
        k,
        seed,
        alpha,
        names: specs.iter().map(|s| s.kind.name().to_string()).collect(),
        scores,
        significance,
    })
}

impl EvaluationReport {
    pub fn mean_accuracy(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.scores[i].mean_accuracy)
    }

    /// Per-fold accuracies, a summary and the significance matrix as three
    /// comma-separated sections.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# case {} k={} seed={} alpha={}\n", self.case_id, self.k, self.seed, self.alpha);
        out.push_str("classifier");
        for f in 1..=self.k {
            out.push_str(&format!(",fold{f}"));
        }
        out.push('\n');
        for (name, s) in self.names.iter().zip(&self.scores) {
            out.push_str(name);
            for a in &s.accuracies {
                out.push_str(&format!(",{a:.6}"));
            }
            out.push('\n');
        }
        out.push_str("\nclassifier,mean_accuracy,mean_auc\n");
        for (name, s) in self.names.iter().zip(&self.scores) {
            let auc = s.mean_auc.map_or("NA".to_string(), |a| format!("{a:.6}"));
            out.push_str(&format!("{name},{:.6},{auc}\n", s.mean_accuracy));
        }
        out.push_str("\nclassifier");
        for n in &self.names {
            out.push_str(&format!(",{n}"));
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.significance) {
            out.push_str(name);
            for v in row {
                out.push(',');
                out.push_str(v.map_or("-", Verdict::as_str));
            }
            out.push('\n');
        }
        out
    }
}
