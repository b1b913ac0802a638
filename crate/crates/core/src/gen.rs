//! Random DFG corpora.
//!
//! Nodes get a random rank (a permutation) and edges only ever point from
//! a lower to a higher rank, so every graph is acyclic by construction.
//! Each graph draws its node count, density, task-type count and a parent
//! window (how far back in rank order a parent may sit) from the ranges in
//! [`GenParams`]. Generation of graph `i` depends only on `(seed, i)`.

use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfg::{serialize_dfg, Dfg, Node};

/// At most this many parents per node.
pub const MAX_PARENTS: usize = 2;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("cannot write corpus to {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub node_count_range: (u32, u32),
    /// Target average edges per node, drawn per graph. Equal bounds pin a
    /// single target.
    pub edges_per_node_range: (f64, f64),
    pub task_type_count_range: (u32, u32),
    /// Task type ids are drawn from `1..=type_pool`.
    pub type_pool: u32,
    pub seed: u64,
    pub corpus_size: usize,
    /// Index of the corpus's first graph. Corpora with disjoint index
    /// ranges under one seed share no graph streams, which is how held-out
    /// sets are drawn.
    #[serde(default)]
    pub first_index: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            node_count_range: (5, 1000),
            edges_per_node_range: (0.0, 2.0),
            task_type_count_range: (3, 16),
            type_pool: 16,
            seed: 1,
            corpus_size: 258,
            first_index: 0,
        }
    }
}

impl GenParams {
    pub fn with_edges_per_node_target(mut self, target: f64) -> Self {
        self.edges_per_node_range = (target, target);
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidParams(m.to_string()));
        let (nlo, nhi) = self.node_count_range;
        if nlo > nhi {
            return bad("node_count_range is empty");
        }
        let (elo, ehi) = self.edges_per_node_range;
        if !(0.0..=MAX_PARENTS as f64).contains(&elo) || !(elo..=MAX_PARENTS as f64).contains(&ehi) {
            return bad("edges_per_node_range must be a nonempty subrange of [0, 2]");
        }
        let (tlo, thi) = self.task_type_count_range;
        if tlo == 0 || tlo > thi {
            return bad("task_type_count_range must be nonempty and start at 1 or more");
        }
        if self.type_pool < thi {
            return bad("type_pool smaller than the largest task type count");
        }
        Ok(())
    }
}

/// Source of the per-graph parameter draws. [`Uniform`] is the default;
/// other shapes can be plugged in through [`generate_dfg_with`].
pub trait ParamDistribution: Sync {
    /// Integer in `lo..=hi`.
    fn sample_int(&self, lo: u64, hi: u64, rng: &mut dyn RngCore) -> u64;
    /// Real in `[lo, hi]`.
    fn sample_real(&self, lo: f64, hi: f64, rng: &mut dyn RngCore) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl ParamDistribution for Uniform {
    fn sample_int(&self, lo: u64, hi: u64, rng: &mut dyn RngCore) -> u64 {
        rng.gen_range(lo..=hi)
    }

    fn sample_real(&self, lo: f64, hi: f64, rng: &mut dyn RngCore) -> f64 {
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    }
}

pub fn dfg_id(index: usize) -> String {
    format!("g{index:04}")
}

pub fn generate_dfg(params: &GenParams, index: usize) -> Dfg {
    generate_dfg_with(params, index, &Uniform)
}

pub fn generate_dfg_with(params: &GenParams, index: usize, dist: &dyn ParamDistribution) -> Dfg {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);

    let n = dist.sample_int(
        params.node_count_range.0 as u64,
        params.node_count_range.1 as u64,
        &mut rng,
    ) as usize;
    let density = dist.sample_real(params.edges_per_node_range.0, params.edges_per_node_range.1, &mut rng);
    let type_count = dist.sample_int(
        params.task_type_count_range.0 as u64,
        params.task_type_count_range.1 as u64,
        &mut rng,
    ) as usize;
    let window = dist.sample_int(2, (n.saturating_sub(1)).max(2) as u64, &mut rng) as usize;

    // id_at_rank[r] is the node id holding rank r.
    let mut id_at_rank: Vec<u32> = (0..n as u32).collect();
    id_at_rank.shuffle(&mut rng);

    let pool: Vec<u32> = (1..=params.type_pool).collect();
    let chosen: Vec<u32> = pool
        .choose_multiple(&mut rng, type_count.min(pool.len()))
        .copied()
        .collect();
    // Every chosen type appears at least once when the graph is large enough.
    let mut types_by_rank: Vec<u32> = (0..n)
        .map(|r| {
            if r < chosen.len() {
                chosen[r]
            } else {
                chosen[rng.gen_range(0..chosen.len())]
            }
        })
        .collect();
    types_by_rank.shuffle(&mut rng);

    let mut edges = Vec::new();
    for r in 1..n {
        let wanted = parent_count(density, &mut rng).min(r).min(MAX_PARENTS);
        if wanted == 0 {
            continue;
        }
        let lo = r.saturating_sub(window);
        let candidates: Vec<usize> = (lo..r).collect();
        let wanted = wanted.min(candidates.len());
        let mut parents: Vec<usize> = candidates.choose_multiple(&mut rng, wanted).copied().collect();
        parents.sort_unstable();
        for p in parents {
            edges.push((id_at_rank[p], id_at_rank[r]));
        }
    }
    edges.sort_unstable();

    let mut nodes: Vec<Node> = (0..n)
        .map(|r| Node {
            id: id_at_rank[r],
            task_type: types_by_rank[r],
        })
        .collect();
    nodes.sort_unstable_by_key(|node| node.id);

    Dfg::new(dfg_id(index), nodes, edges).expect("rank-ordered graphs are valid")
}

/// Number of parents with expectation `density` (at most two).
fn parent_count(density: f64, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    if density <= 1.0 {
        usize::from(u < density)
    } else {
        1 + usize::from(u < density - 1.0)
    }
}

pub fn generate_corpus(params: &GenParams) -> Result<Vec<Dfg>, GenError> {
    params.validate()?;
    if params.corpus_size == 0 {
        return Err(GenError::InvalidParams("corpus_size must be at least 1".into()));
    }
    let start = params.first_index;
    Ok((start..start + params.corpus_size)
        .into_par_iter()
        .map(|i| generate_dfg(params, i))
        .collect())
}

/// Writes one `<id>.dfg` file per graph plus a `corpus.csv` manifest of
/// `id,file,seed,index` rows.
pub fn write_corpus(dir: &Path, params: &GenParams, corpus: &[Dfg]) -> Result<(), GenError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| GenError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = String::from("id,file,seed,index\n");
    for (offset, dfg) in corpus.iter().enumerate() {
        let index = params.first_index + offset;
        let file = format!("{}.dfg", dfg.id());
        let path = dir.join(&file);
        fs::write(&path, serialize_dfg(dfg)).map_err(io_err(&path))?;
        manifest.push_str(&format!("{},{},{},{}\n", dfg.id(), file, params.seed, index));
    }
    let path = dir.join("corpus.csv");
    fs::write(&path, manifest).map_err(io_err(&path))
}
