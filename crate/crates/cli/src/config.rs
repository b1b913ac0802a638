//! Pipeline configuration: one TOML file, paths relative to the file.
//!
//! ```toml
//! [paths]
//! out_dir = "out"
//! # task_library = "tasks.lib"   # built-in reference library when absent
//!
//! [generator]
//! seed = 1
//! corpus_size = 258
//!
//! [cases]
//! ids = ["I", "III"]
//!
//! [evaluation]
//! classifiers = ["NaiveBayes", "RandomForest"]
//! model = "RandomForest"
//!
//! [evaluation.params.KNN]
//! k = 5
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use floorplan_core::dataset::CaseSpec;
use floorplan_core::ml::Hyperparams;
use floorplan_core::{CaseId, ClassifierKind, ClassifierSpec, GenParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "FLOORPLAN_OUT_DIR";
pub const THREADS_ENV: &str = "FLOORPLAN_THREADS";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub generator: GeneratorSection,
    pub cases: CasesSection,
    pub evaluation: EvaluationSection,
    pub baseline: BaselineSection,
    pub report: ReportSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    /// Defaults to `<out_dir>/corpus`.
    pub corpus_dir: Option<PathBuf>,
    /// Held-out graphs for the baseline. Defaults to `<out_dir>/holdout`.
    pub holdout_dir: Option<PathBuf>,
    pub task_library: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub seed: u64,
    pub corpus_size: usize,
    pub node_count: [u32; 2],
    pub edges_per_node: [f64; 2],
    pub task_type_count: [u32; 2],
    pub type_pool: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CasesSection {
    pub ids: Vec<String>,
    /// Overrides every case's default fabric area.
    pub fabric_area: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub k: usize,
    /// Fold assignment seed.
    pub seed: u64,
    /// Seed handed to every classifier.
    pub model_seed: u64,
    pub alpha: f64,
    pub classifiers: Vec<String>,
    /// Classifier whose full-data model the baseline uses.
    pub model: String,
    /// Per-classifier hyperparameter overrides, keyed by classifier name.
    pub params: BTreeMap<String, Hyperparams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    /// Held-out graphs, generated right after the training corpus's index
    /// range under the same seed.
    pub corpus_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub plot_data: bool,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            out_dir: PathBuf::from("out"),
            corpus_dir: None,
            holdout_dir: None,
            task_library: None,
        }
    }
}

impl Default for GeneratorSection {
    fn default() -> Self {
        let g = GenParams::default();
        GeneratorSection {
            seed: g.seed,
            corpus_size: g.corpus_size,
            node_count: [g.node_count_range.0, g.node_count_range.1],
            edges_per_node: [g.edges_per_node_range.0, g.edges_per_node_range.1],
            task_type_count: [g.task_type_count_range.0, g.task_type_count_range.1],
            type_pool: g.type_pool,
        }
    }
}

impl Default for CasesSection {
    fn default() -> Self {
        CasesSection {
            ids: CaseId::ALL.iter().map(|c| c.to_string()).collect(),
            fabric_area: None,
        }
    }
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            k: 10,
            seed: 1,
            model_seed: 1,
            alpha: 0.05,
            classifiers: ClassifierKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            model: ClassifierKind::RandomForest.name().to_string(),
            params: BTreeMap::new(),
        }
    }
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            corpus_size: 100,
            seed: 1,
        }
    }
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { plot_data: true }
    }
}

impl PipelineConfig {
    /// Reads `path`, resolves relative paths against its directory, applies
    /// the output-directory environment override and validates.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Missing(format!("config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.resolve(path.parent().unwrap_or(Path::new(".")));
        cfg.apply_env();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Makes every relative path relative to `base`.
    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.out_dir);
        for p in [
            &mut self.paths.corpus_dir,
            &mut self.paths.holdout_dir,
            &mut self.paths.task_library,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.paths.out_dir = PathBuf::from(dir);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.gen_params().validate().map_err(|e| CliError::Invalid(e.to_string()))?;
        if self.generator.corpus_size == 0 {
            return Err(CliError::Invalid("generator.corpus_size must be at least 1".into()));
        }
        if let Some(lib) = &self.paths.task_library {
            if !lib.is_file() {
                return Err(CliError::Missing(format!("task library {}", lib.display())));
            }
        }
        self.case_ids()?;
        self.classifier_specs()?;
        self.model_kind()?;
        if self.evaluation.k < 2 {
            return Err(CliError::Invalid("evaluation.k must be at least 2".into()));
        }
        if !(self.evaluation.alpha > 0.0 && self.evaluation.alpha < 1.0) {
            return Err(CliError::Invalid("evaluation.alpha must lie in (0, 1)".into()));
        }
        for (name, hp) in &self.evaluation.params {
            let kind = parse_kind(name)?;
            hp.validate(kind).map_err(|e| CliError::Invalid(format!("evaluation.params.{name}: {e}")))?;
        }
        Ok(())
    }

    pub fn gen_params(&self) -> GenParams {
        let g = &self.generator;
        GenParams {
            node_count_range: (g.node_count[0], g.node_count[1]),
            edges_per_node_range: (g.edges_per_node[0], g.edges_per_node[1]),
            task_type_count_range: (g.task_type_count[0], g.task_type_count[1]),
            type_pool: g.type_pool,
            seed: g.seed,
            corpus_size: g.corpus_size,
            first_index: 0,
        }
    }

    /// Held-out corpus: the index range right after the training corpus.
    pub fn holdout_params(&self) -> GenParams {
        GenParams {
            corpus_size: self.baseline.corpus_size,
            first_index: self.generator.corpus_size,
            ..self.gen_params()
        }
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.paths.corpus_dir.clone().unwrap_or_else(|| self.paths.out_dir.join("corpus"))
    }

    pub fn holdout_dir(&self) -> PathBuf {
        self.paths.holdout_dir.clone().unwrap_or_else(|| self.paths.out_dir.join("holdout"))
    }

    pub fn case_dir(&self, case: CaseId) -> PathBuf {
        self.paths.out_dir.join(crate::pipeline::case_dir_name(case))
    }

    pub fn case_ids(&self) -> Result<Vec<CaseId>, CliError> {
        if self.cases.ids.is_empty() {
            return Err(CliError::Invalid("cases.ids is empty".into()));
        }
        let mut ids = Vec::new();
        for s in &self.cases.ids {
            let id: CaseId = s.parse().map_err(CliError::Invalid)?;
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        Ok(ids)
    }

    pub fn case_spec(&self, case: CaseId) -> Result<CaseSpec, CliError> {
        let fabric = self.cases.fabric_area.unwrap_or(case.default_fabric_area());
        CaseSpec::default_with_fabric(case, fabric).map_err(|e| CliError::Invalid(format!("case {case}: {e}")))
    }

    pub fn classifier_specs(&self) -> Result<Vec<ClassifierSpec>, CliError> {
        if self.evaluation.classifiers.is_empty() {
            return Err(CliError::Invalid("evaluation.classifiers is empty".into()));
        }
        let mut specs: Vec<ClassifierSpec> = Vec::new();
        for name in &self.evaluation.classifiers {
            let kind = parse_kind(name)?;
            if specs.iter().any(|s| s.kind == kind) {
                return Err(CliError::Invalid(format!("classifier {} listed twice", kind.name())));
            }
            specs.push(self.spec_for(kind));
        }
        Ok(specs)
    }

    pub fn model_kind(&self) -> Result<ClassifierKind, CliError> {
        parse_kind(&self.evaluation.model)
    }

    pub fn spec_for(&self, kind: ClassifierKind) -> ClassifierSpec {
        let mut spec = ClassifierSpec::new(kind, self.evaluation.model_seed);
        if let Some(hp) = self
            .evaluation
            .params
            .iter()
            .find(|(name, _)| parse_kind(name).ok() == Some(kind))
            .map(|(_, hp)| hp)
        {
            spec.params = hp.clone();
        }
        spec
    }
}

fn parse_kind(name: &str) -> Result<ClassifierKind, CliError> {
    name.parse().map_err(CliError::Invalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
        assert_eq!(PipelineConfig::default().gen_params(), GenParams::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::parse("[generator]\nsed = 3\n").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn hyperparameter_overrides_reach_the_spec() {
        let cfg = PipelineConfig::parse("[evaluation.params.knn]\nk = 7\n").unwrap();
        assert_eq!(cfg.spec_for(ClassifierKind::Knn).params.k, 7);
        assert_eq!(cfg.spec_for(ClassifierKind::NaiveBayes).params, Hyperparams::default());
    }

    #[test]
    fn bad_values_fail_validation() {
        for text in [
            "[cases]\nids = [\"VI\"]\n",
            "[evaluation]\nclassifiers = [\"Perceptron\"]\n",
            "[evaluation]\nk = 1\n",
            "[generator]\nnode_count = [9, 3]\n",
            "[evaluation]\nclassifiers = [\"rf\", \"RandomForest\"]\n",
        ] {
            let cfg = PipelineConfig::parse(text).unwrap();
            assert_eq!(cfg.validate().unwrap_err().exit_code(), 3, "{text}");
        }
    }

    #[test]
    fn holdout_follows_the_training_range() {
        let cfg = PipelineConfig::parse("[generator]\ncorpus_size = 30\n[baseline]\ncorpus_size = 5\n").unwrap();
        let h = cfg.holdout_params();
        assert_eq!((h.first_index, h.corpus_size, h.seed), (30, 5, cfg.generator.seed));
    }

    #[test]
    fn relative_paths_resolve_against_the_config_dir() {
        let mut cfg = PipelineConfig::parse("[paths]\nout_dir = \"o\"\ntask_library = \"lib.txt\"\n").unwrap();
        cfg.resolve(Path::new("/etc/x"));
        assert_eq!(cfg.paths.out_dir, Path::new("/etc/x/o"));
        assert_eq!(cfg.paths.task_library.as_deref(), Some(Path::new("/etc/x/lib.txt")));
        assert_eq!(cfg.corpus_dir(), Path::new("/etc/x/o/corpus"));
    }
}
