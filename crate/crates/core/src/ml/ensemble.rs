//! Bagging, SAMME boosting, random forests and stacking over the single
//! learners.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eval::stratified_folds;
use super::knn::Knn;
use super::nb::{fit_nb, fit_nb_floored, NaiveBayes};
use super::tree::{fit_tree, Tree, TreeParams};
use super::{argmax, Hyperparams, MlError};

fn subset(x: &[Vec<f64>], y: &[usize], idx: &[usize]) -> (Vec<Vec<f64>>, Vec<usize>) {
    (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
}

fn bootstrap<R: Rng>(n: usize, enabled: bool, rng: &mut R) -> Vec<usize> {
    if enabled {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    }
}

/// Fraction of members whose most likely class is each class.
pub(crate) fn vote(trees: &[Tree], x: &[f64], classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    for t in trees {
        v[argmax(t.proba(x))] += 1.0;
    }
    v.iter().map(|c| c / trees.len() as f64).collect()
}

pub(crate) fn average(trees: &[Tree], x: &[f64], classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    for t in trees {
        for (a, p) in v.iter_mut().zip(t.proba(x)) {
            *a += p;
        }
    }
    v.iter().map(|c| c / trees.len() as f64).collect()
}

pub(crate) fn fit_bagging<R: Rng>(x: &[Vec<f64>], y: &[usize], classes: usize, hp: &Hyperparams, rng: &mut R) -> Vec<Tree> {
    (0..hp.iterations)
        .map(|_| {
            let (bx, by) = subset(x, y, &bootstrap(y.len(), hp.bootstrap, rng));
            fit_tree(&bx, &by, &vec![1.0; by.len()], classes, hp.tree(), rng)
        })
        .collect()
}

pub(crate) fn fit_forest<R: Rng>(x: &[Vec<f64>], y: &[usize], classes: usize, hp: &Hyperparams, rng: &mut R) -> Vec<Tree> {
    let nf = x.first().map_or(0, Vec::len);
    let m = hp
        .features_per_split
        .unwrap_or_else(|| (nf as f64).sqrt().ceil() as usize);
    let params = TreeParams {
        features_per_split: Some(m),
        ..hp.tree()
    };
    (0..hp.iterations)
        .map(|_| {
            let (bx, by) = subset(x, y, &bootstrap(y.len(), hp.bootstrap, rng));
            fit_tree(&bx, &by, &vec![1.0; by.len()], classes, params, rng)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    /// `(alpha, tree)` per accepted round.
    pub members: Vec<(f64, Tree)>,
}

impl AdaBoost {
    /// Alpha-weighted votes, normalised to sum to one.
    pub fn proba(&self, x: &[f64], classes: usize) -> Vec<f64> {
        let mut v = vec![0.0; classes];
        let total: f64 = self.members.iter().map(|m| m.0).sum();
        for (a, t) in &self.members {
            v[argmax(t.proba(x))] += a / total;
        }
        v
    }
}

/// Error below which a round counts as perfect; caps alpha.
const MIN_ERROR: f64 = 1e-10;

fn weighted_error(t: &Tree, x: &[Vec<f64>], y: &[usize], w: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .filter(|((r, &l), _)| argmax(t.proba(r)) != l)
        .map(|(_, wi)| wi)
        .sum()
}

/// SAMME. Returns the ensemble and the sample weights each round started
/// from.
pub(crate) fn fit_adaboost<R: Rng>(
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    hp: &Hyperparams,
    rng: &mut R,
) -> (AdaBoost, Vec<Vec<f64>>) {
    let n = y.len();
    let k = classes.max(2) as f64;
    let limit = 1.0 - 1.0 / k;
    let mut w = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut history = Vec::new();
    for _ in 0..hp.iterations {
        history.push(w.clone());
        let mut tree = fit_tree(x, y, &w, classes, hp.tree(), rng);
        let mut err = weighted_error(&tree, x, y, &w);
        if err >= limit {
            let dist = WeightedIndex::new(&w).expect("weights are positive");
            let idx: Vec<usize> = (0..n).map(|_| dist.sample(rng)).collect();
            let (bx, by) = subset(x, y, &idx);
            let retry = fit_tree(&bx, &by, &vec![1.0; n], classes, hp.tree(), rng);
            let retry_err = weighted_error(&retry, x, y, &w);
            if retry_err >= limit {
                if members.is_empty() {
                    members.push((1.0, tree));
                }
                break;
            }
            tree = retry;
            err = retry_err;
        }
        let e = err.max(MIN_ERROR);
        let alpha = ((1.0 - e) / e).ln() + (k - 1.0).ln();
        let missed: Vec<bool> = x.iter().zip(y).map(|(r, &l)| argmax(tree.proba(r)) != l).collect();
        members.push((alpha, tree));
        if err < MIN_ERROR {
            break;
        }
        for (wi, m) in w.iter_mut().zip(&missed) {
            if *m {
                *wi *= alpha.exp();
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= s);
    }
    (AdaBoost { members }, history)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stacking {
    pub nb: NaiveBayes,
    pub knn: Knn,
    pub tree: Tree,
    /// Naive Bayes over the concatenated base distributions.
    pub meta: NaiveBayes,
}

struct Bases {
    nb: NaiveBayes,
    knn: Knn,
    tree: Tree,
}

impl Bases {
    fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, hp: &Hyperparams) -> Self {
        // A tree over every feature never consults its generator.
        let mut no_draws = super::model_rng(0);
        Bases {
            nb: fit_nb(x, y, classes),
            knn: Knn::new(x, y, classes, hp.k),
            tree: fit_tree(x, y, &vec![1.0; y.len()], classes, hp.tree(), &mut no_draws),
        }
    }

    fn meta_features(nb: &NaiveBayes, knn: &Knn, tree: &Tree, x: &[f64]) -> Vec<f64> {
        let mut f = nb.proba(x);
        f.extend(knn.proba(x));
        f.extend_from_slice(tree.proba(x));
        f
    }
}

/// Variance floor of the meta-learner. Its inputs are probabilities that
/// are often constant within a class (a pure leaf says 1.0 for every
/// training row), and a near-zero variance would let one such column veto
/// every other.
const META_VAR_FLOOR: f64 = 1e-2;

pub(crate) fn fit_stacking(
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    hp: &Hyperparams,
    seed: u64,
) -> Result<Stacking, MlError> {
    let n = y.len();
    let folds = hp.stacking_folds.min(n);
    let fold_of = stratified_folds(y, classes, folds, seed)?;
    let mut meta_x = vec![Vec::new(); n];
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let (tx, ty) = subset(x, y, &train);
        let b = Bases::fit(&tx, &ty, classes, hp);
        for i in (0..n).filter(|&i| fold_of[i] == f) {
            meta_x[i] = Bases::meta_features(&b.nb, &b.knn, &b.tree, &x[i]);
        }
    }
    let meta = fit_nb_floored(&meta_x, y, classes, META_VAR_FLOOR);
    let b = Bases::fit(x, y, classes, hp);
    Ok(Stacking {
        nb: b.nb,
        knn: b.knn,
        tree: b.tree,
        meta,
    })
}

impl Stacking {
    pub fn proba(&self, x: &[f64], _classes: usize) -> Vec<f64> {
        self.meta
            .proba(&Bases::meta_features(&self.nb, &self.knn, &self.tree, x))
    }
}
