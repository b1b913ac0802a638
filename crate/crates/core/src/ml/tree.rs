//! Binary numeric decision tree grown by gain ratio, pre-pruned by leaf
//! size and depth.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: usize,
    /// Features examined per split; `None` examines all of them.
    pub features_per_split: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        dist: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn proba(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { dist } => return dist,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

fn entropy(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    gain_ratio: f64,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    w: &'a [f64],
    classes: usize,
    params: TreeParams,
    nodes: Vec<TreeNode>,
}

/// Grows a tree on weighted samples. `rng` is drawn from only when
/// `features_per_split` is smaller than the feature count.
pub fn fit_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[usize],
    w: &[f64],
    classes: usize,
    params: TreeParams,
    rng: &mut R,
) -> Tree {
    let mut b = Builder {
        x,
        y,
        w,
        classes,
        params,
        nodes: Vec::new(),
    };
    let idx: Vec<usize> = (0..y.len()).collect();
    b.grow(idx, 0, rng);
    Tree { nodes: b.nodes }
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> (Vec<f64>, f64) {
        let mut c = vec![0.0; self.classes];
        for &i in idx {
            c[self.y[i]] += self.w[i];
        }
        let t = c.iter().sum();
        (c, t)
    }

    fn grow<R: Rng>(&mut self, idx: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let (counts, total) = self.counts(&idx);
        let me = self.nodes.len();
        let dist: Vec<f64> = if total > 0.0 {
            counts.iter().map(|c| c / total).collect()
        } else {
            vec![1.0 / self.classes as f64; self.classes]
        };
        self.nodes.push(TreeNode::Leaf { dist });

        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf {
            return me;
        }
        let Some(best) = self.best_split(&idx, &counts, total, rng) else {
            return me;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][best.feature] <= best.threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[me] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        me
    }

    fn best_split<R: Rng>(&self, idx: &[usize], counts: &[f64], total: f64, rng: &mut R) -> Option<Candidate> {
        let nf = self.x[idx[0]].len();
        let features: Vec<usize> = match self.params.features_per_split {
            Some(m) if m < nf => {
                let mut f = sample(rng, nf, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..nf).collect(),
        };
        let base = entropy(counts, total);
        let cands: Vec<Candidate> = features
            .into_iter()
            .filter_map(|f| self.best_threshold(idx, f, base, total))
            .collect();
        if cands.is_empty() {
            return None;
        }
        // Gain ratio alone favours lopsided splits with tiny split info, so
        // only splits with at least average gain compete on ratio.
        let avg = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
        cands
            .into_iter()
            .filter(|c| c.gain >= avg - 1e-12)
            .fold(None, |best: Option<Candidate>, c| match best {
                Some(b) if b.gain_ratio >= c.gain_ratio => Some(b),
                _ => Some(c),
            })
    }

    /// Highest-gain midpoint threshold on feature `f`.
    fn best_threshold(&self, idx: &[usize], f: usize, base: f64, total: f64) -> Option<Candidate> {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
        let min_leaf = self.params.min_leaf.max(1);
        let mut left = vec![0.0; self.classes];
        let mut right = vec![0.0; self.classes];
        for &i in &order {
            right[self.y[i]] += self.w[i];
        }
        let (mut lw, mut rw) = (0.0, total);
        let mut best: Option<Candidate> = None;
        for k in 0..order.len() - 1 {
            let i = order[k];
            left[self.y[i]] += self.w[i];
            right[self.y[i]] -= self.w[i];
            lw += self.w[i];
            rw -= self.w[i];
            let (a, b) = (self.x[i][f], self.x[order[k + 1]][f]);
            if a == b || k + 1 < min_leaf || order.len() - k - 1 < min_leaf {
                continue;
            }
            if lw <= 0.0 || rw <= 0.0 {
                continue;
            }
            let cond = (lw * entropy(&left, lw) + rw * entropy(&right, rw)) / total;
            let gain = base - cond;
            if gain <= 1e-12 {
                continue;
            }
            if best.is_none_or(|c| gain > c.gain) {
                let split_info = entropy(&[lw, rw], total);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    gain,
                    gain_ratio: gain / split_info.max(1e-12),
                });
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const P: TreeParams = TreeParams {
        min_leaf: 2,
        max_depth: 25,
        features_per_split: None,
    };

    fn fit(x: &[Vec<f64>], y: &[usize]) -> Tree {
        fit_tree(x, y, &vec![1.0; y.len()], 2, P, &mut ChaCha8Rng::seed_from_u64(0))
    }

    #[test]
    fn single_split_near_five() {
        let xs: Vec<f64> = (0..10).map(|v| v as f64).collect();
        let y: Vec<usize> = xs.iter().map(|&v| usize::from(v >= 5.0)).collect();
        let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
        let t = fit(&x, &y);
        assert_eq!(t.depth(), 1);
        let TreeNode::Split { threshold, .. } = t.nodes[0] else { panic!() };
        // Exhaustive scan: the only zero-error cut lies in (4, 5).
        let zero_error: Vec<f64> = (0..9)
            .map(|k| (xs[k] + xs[k + 1]) / 2.0)
            .filter(|&c| xs.iter().zip(&y).all(|(&v, &l)| (v > c) == (l == 1)))
            .collect();
        assert_eq!(zero_error, vec![threshold]);
        assert!(x.iter().zip(&y).all(|(r, &l)| t.proba(r)[l] == 1.0));
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let x: Vec<Vec<f64>> = (0..40).map(|v| vec![v as f64, (v * 7 % 13) as f64]).collect();
        let y: Vec<usize> = (0..40).map(|v| (v * 7 % 3 == 0) as usize).collect();
        let shallow = fit_tree(
            &x,
            &y,
            &[1.0; 40],
            2,
            TreeParams { max_depth: 2, ..P },
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(shallow.depth() <= 2);
        let t = fit(&x, &y);
        for n in &t.nodes {
            if let TreeNode::Split { left, right, .. } = n {
                for child in [left, right] {
                    let reach = x.iter().filter(|r| reaches(&t, r, *child)).count();
                    assert!(reach >= 2);
                }
            }
        }
    }

    fn reaches(t: &Tree, x: &[f64], target: usize) -> bool {
        let mut i = 0;
        loop {
            if i == target {
                return true;
            }
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => return false,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    #[test]
    fn constant_features_give_a_leaf() {
        let x = vec![vec![1.0]; 6];
        let y = vec![0, 1, 0, 1, 0, 0];
        let t = fit(&x, &y);
        assert_eq!(t.nodes.len(), 1);
        assert!((t.proba(&[1.0])[0] - 4.0 / 6.0).abs() < 1e-12);
    }
}
