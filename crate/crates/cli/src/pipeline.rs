//! The pipeline commands. Each writes its artifacts plus a
//! `<command>.manifest.json` carrying input and output digests; reruns with
//! unchanged inputs rewrite byte-identical files. Wall-clock training
//! times go to a separate `timings.csv` that no manifest covers.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use floorplan_core::dataset::{
    self, build_dataset_from_sweep, imbalance_ratio, read_dataset, write_dataset, DatasetError,
};
use floorplan_core::features::{extract_features, feature_schema};
use floorplan_core::gen::{generate_corpus, write_corpus};
use floorplan_core::ml::{evaluate_all, predict as predict_row, train, EvaluationReport, MlError};
use floorplan_core::{CaseId, Dataset, SweepTable, TrainedModel};
use serde_json::json;

use crate::artifacts::{dfg_digest, load_corpus, load_library, read_input, write_file, Digest, Manifest};
use crate::baseline::{build_table, BaselineTable};
use crate::config::PipelineConfig;
use crate::CliError;

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";
pub const DATASET_CSV: &str = "dataset.csv";
pub const DATASET_META: &str = "dataset.meta.json";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const BASELINE_CSV: &str = "baseline.csv";
pub const BASELINE_JSON: &str = "baseline.json";
pub const MODELS_DIR: &str = "models";

/// Model metadata key listing the structural digests of the training graphs.
pub const TRAIN_DFGS_KEY: &str = "train_dfgs";
pub const DATASET_DIGEST_KEY: &str = "dataset_sha256";

fn dataset_err(e: DatasetError) -> CliError {
    match e {
        DatasetError::Io(e) => CliError::Other(e.into()),
        other => CliError::Invalid(other.to_string()),
    }
}

fn ml_err(e: MlError) -> CliError {
    CliError::Invalid(e.to_string())
}

pub fn case_dir_name(case: CaseId) -> String {
    format!("case-{}", case.as_str().to_ascii_lowercase())
}

fn manifest_path(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("{command}.manifest.json"))
}

pub fn model_path(cfg: &PipelineConfig, case: CaseId, name: &str) -> PathBuf {
    cfg.case_dir(case).join(MODELS_DIR).join(format!("{name}.json"))
}

/// Writes the training corpus and, when the baseline wants one, the
/// held-out corpus.
pub fn generate(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("generate", None);
    let mut sets = vec![("corpus", cfg.gen_params(), cfg.corpus_dir())];
    if cfg.baseline.corpus_size > 0 {
        sets.push(("holdout", cfg.holdout_params(), cfg.holdout_dir()));
    }
    for (name, params, dir) in &sets {
        let corpus = generate_corpus(params).map_err(|e| CliError::Invalid(e.to_string()))?;
        write_corpus(dir, params, &corpus).map_err(|e| CliError::Other(e.into()))?;
        m.outputs.push(load_corpus(dir, name)?.digest);
    }
    m.settings = json!({
        "corpus": cfg.gen_params(),
        "holdout": (cfg.baseline.corpus_size > 0).then(|| cfg.holdout_params()),
    });
    m.write(&manifest_path(&cfg.paths.out_dir, "generate"))?;
    Ok(m)
}

pub fn sweep(cfg: &PipelineConfig, case: CaseId) -> Result<Manifest, CliError> {
    let corpus = load_corpus(&cfg.corpus_dir(), "corpus")?;
    let lib = load_library(cfg.paths.task_library.as_deref())?;
    let spec = cfg.case_spec(case)?;
    let table = dataset::sweep(&corpus.dfgs, &lib.lib, &spec).map_err(dataset_err)?;

    let dir = cfg.case_dir(case);
    let mut m = Manifest::new("sweep", Some(case.to_string()));
    m.inputs = vec![corpus.digest, lib.digest];
    m.emit(&dir, SWEEP_CSV, &table.to_csv())?;
    m.emit(&dir, SWEEP_JSON, &(serde_json::to_string(&table).expect("sweep serializes") + "\n"))?;
    m.settings = json!({
        "objective": spec.objective,
        "candidates": spec.candidates.iter().map(|c| c.name()).collect::<Vec<_>>(),
        "infeasible": table.excluded,
    });
    m.warnings = infeasible_warnings(&table.excluded);
    m.write(&manifest_path(&dir, "sweep"))?;
    Ok(m)
}

fn infeasible_warnings(excluded: &[String]) -> Vec<String> {
    if excluded.is_empty() {
        Vec::new()
    } else {
        vec![format!(
            "{} graph(s) infeasible on every candidate and excluded: {}",
            excluded.len(),
            excluded.join(" ")
        )]
    }
}

fn stale(what: &str, recorded: Option<&Digest>, current: &Digest) -> Result<(), CliError> {
    match recorded {
        Some(d) if d == current => Ok(()),
        _ => Err(CliError::Invalid(format!(
            "{what} changed since it was recorded; rerun the earlier step"
        ))),
    }
}

pub fn dataset(cfg: &PipelineConfig, case: CaseId) -> Result<Manifest, CliError> {
    let dir = cfg.case_dir(case);
    let corpus = load_corpus(&cfg.corpus_dir(), "corpus")?;
    let lib = load_library(cfg.paths.task_library.as_deref())?;
    let sweep_manifest = Manifest::read(&manifest_path(&dir, "sweep"))?;
    stale("corpus", sweep_manifest.input("corpus"), &corpus.digest)?;
    stale("task library", sweep_manifest.input("task_library"), &lib.digest)?;
    let sweep_text = read_input(&dir.join(SWEEP_JSON))?;
    let sweep_digest = Digest::of(SWEEP_JSON, sweep_text.as_bytes());
    stale("sweep table", sweep_manifest.output(SWEEP_JSON), &sweep_digest)?;
    let table: SweepTable =
        serde_json::from_str(&sweep_text).map_err(|e| CliError::Invalid(format!("{SWEEP_JSON}: {e}")))?;

    let spec = cfg.case_spec(case)?;
    if table.candidate_count != spec.candidates.len() {
        return Err(CliError::Invalid("sweep was run with a different candidate set".into()));
    }
    let ds = build_dataset_from_sweep(&corpus.dfgs, &lib.lib, &spec, &table).map_err(dataset_err)?;
    let (csv, meta) = write_dataset(&ds, &spec, cfg.generator.seed);

    let mut m = Manifest::new("dataset", Some(case.to_string()));
    m.inputs = vec![corpus.digest, lib.digest, sweep_digest];
    m.emit(&dir, DATASET_CSV, &csv)?;
    m.emit(&dir, DATASET_META, &meta)?;
    let imbalance = imbalance_ratio(&ds);
    m.settings = json!({
        "records": ds.records.len(),
        "class_names": ds.class_names,
        "class_counts": imbalance.counts,
        "imbalance_ratio": imbalance.ratio,
        "degenerate": imbalance.degenerate,
        "infeasible": ds.excluded,
    });
    m.warnings = infeasible_warnings(&ds.excluded);
    if imbalance.degenerate {
        m.warnings.push("fewer than two classes are represented; the dataset cannot be evaluated".into());
    }
    m.write(&manifest_path(&dir, "dataset"))?;
    Ok(m)
}

/// Reads a case's dataset, returning it with the digest of its table.
pub fn load_dataset(cfg: &PipelineConfig, case: CaseId) -> Result<(Dataset, Digest), CliError> {
    let dir = cfg.case_dir(case);
    let csv = read_input(&dir.join(DATASET_CSV))?;
    let meta = read_input(&dir.join(DATASET_META))?;
    let (ds, _) = read_dataset(&csv, &meta).map_err(dataset_err)?;
    Ok((ds, Digest::of(DATASET_CSV, csv.as_bytes())))
}

/// Cross-validates every configured classifier, then trains each on the
/// full dataset and saves the models.
pub fn evaluate(cfg: &PipelineConfig, case: CaseId) -> Result<Manifest, CliError> {
    let dir = cfg.case_dir(case);
    let (ds, ds_digest) = load_dataset(cfg, case)?;
    let represented = ds.class_counts().iter().filter(|&&c| c > 0).count();
    if represented < 2 {
        return Err(CliError::Invalid(format!(
            "case {case} dataset represents {represented} class(es); nothing to learn"
        )));
    }
    let specs = cfg.classifier_specs()?;
    let ev = &cfg.evaluation;
    let report = evaluate_all(&ds, &specs, ev.k, ev.seed, ev.alpha).map_err(ml_err)?;

    let corpus = load_corpus(&cfg.corpus_dir(), "corpus")?;
    let digests: HashMap<&str, String> = corpus.dfgs.iter().map(|g| (g.id(), dfg_digest(g))).collect();
    let train_dfgs = ds
        .records
        .iter()
        .map(|r| {
            digests
                .get(r.dfg_id.as_str())
                .cloned()
                .ok_or_else(|| CliError::Invalid(format!("dataset names {} but the corpus lacks it", r.dfg_id)))
        })
        .collect::<Result<Vec<_>, _>>()?
        .join(",");

    let mut m = Manifest::new("evaluate", Some(case.to_string()));
    m.inputs = vec![ds_digest.clone(), corpus.digest];
    m.emit(&dir, REPORT_CSV, &report.to_csv())?;
    m.emit(&dir, REPORT_JSON, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;

    let mut timings = String::from("classifier,train_ms\n");
    for spec in &specs {
        let start = Instant::now();
        let mut model = train(&ds, spec).map_err(ml_err)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        timings.push_str(&format!("{},{ms:.3}\n", spec.kind.name()));
        model.meta.insert(DATASET_DIGEST_KEY.into(), ds_digest.sha256.clone());
        model.meta.insert(TRAIN_DFGS_KEY.into(), train_dfgs.clone());
        model.meta.insert("case".into(), case.to_string());
        m.emit(&dir, &format!("{MODELS_DIR}/{}.json", spec.kind.name()), &model.to_json())?;
    }
    write_file(&dir.join(TIMINGS_CSV), &timings)?;
    m.settings = json!({ "k": ev.k, "seed": ev.seed, "alpha": ev.alpha, "specs": specs });
    m.write(&manifest_path(&dir, "evaluate"))?;
    Ok(m)
}

pub fn load_model(path: &Path) -> Result<(TrainedModel, Digest), CliError> {
    let text = read_input(path)?;
    let model = TrainedModel::from_json(&text).map_err(ml_err)?;
    if model.feature_count() != feature_schema().len() {
        return Err(CliError::Invalid(format!(
            "model expects {} features, this build extracts {}",
            model.feature_count(),
            feature_schema().len()
        )));
    }
    Ok((model, Digest::of("model", text.as_bytes())))
}

/// Predicts the class of each graph file. Returns the rendered table,
/// also written to `<out_dir>/predictions.csv`.
pub fn predict(cfg: &PipelineConfig, model_file: &Path, dfg_files: &[PathBuf]) -> Result<String, CliError> {
    let (model, model_digest) = load_model(model_file)?;
    let lib = load_library(cfg.paths.task_library.as_deref())?;
    let mut m = Manifest::new("predict", model.meta.get("case").cloned());
    m.inputs = vec![model_digest, lib.digest];
    let mut out = String::from("dfg_id,predicted");
    for c in &model.class_names {
        out.push_str(&format!(",p_{c}"));
    }
    out.push('\n');
    for file in dfg_files {
        let text = read_input(file)?;
        let name = file.file_name().map_or_else(|| file.display().to_string(), |n| n.to_string_lossy().into_owned());
        m.inputs.push(Digest::of(name.clone(), text.as_bytes()));
        let dfg = floorplan_core::dfg::parse_dfg(&text).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
        let x = extract_features(&dfg, &lib.lib).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
        let (class, dist) = predict_row(&model, x.values()).map_err(ml_err)?;
        out.push_str(&format!("{},{}", dfg.id(), model.class_names[class]));
        for p in dist {
            out.push_str(&format!(",{p:.6}"));
        }
        out.push('\n');
    }
    m.emit(&cfg.paths.out_dir, "predictions.csv", &out)?;
    m.write(&manifest_path(&cfg.paths.out_dir, "predict"))?;
    Ok(out)
}

/// Runs the random-baseline comparison on the held-out corpus. Refuses when
/// the model cannot prove it never saw these graphs.
pub fn baseline(
    cfg: &PipelineConfig,
    case: CaseId,
    model_file: Option<&Path>,
) -> Result<(BaselineTable, Manifest), CliError> {
    let default_model;
    let model_file = match model_file {
        Some(p) => p,
        None => {
            default_model = model_path(cfg, case, cfg.model_kind()?.name());
            &default_model
        }
    };
    let (model, model_digest) = load_model(model_file)?;
    let holdout = load_corpus(&cfg.holdout_dir(), "holdout")?;
    let lib = load_library(cfg.paths.task_library.as_deref())?;
    let spec = cfg.case_spec(case)?;
    if model.class_names != spec.class_names {
        return Err(CliError::Invalid(format!(
            "model classes {:?} do not match case {case} classes {:?}",
            model.class_names, spec.class_names
        )));
    }
    let trained: Vec<&str> = model
        .meta
        .get(TRAIN_DFGS_KEY)
        .ok_or_else(|| CliError::Invalid("model records no training graph digests; cannot prove a held-out split".into()))?
        .split(',')
        .collect();
    let overlap = holdout.dfg_digests().iter().filter(|d| trained.contains(&d.as_str())).count();
    if overlap > 0 {
        return Err(CliError::Invalid(format!(
            "refusing: {overlap} baseline graph(s) were in the model's training set"
        )));
    }

    let table = dataset::sweep(&holdout.dfgs, &lib.lib, &spec).map_err(dataset_err)?;
    let predicted = holdout
        .dfgs
        .iter()
        .map(|g| {
            let x = extract_features(g, &lib.lib).map_err(|e| CliError::Invalid(format!("{}: {e}", g.id())))?;
            predict_row(&model, x.values()).map(|(c, _)| c).map_err(ml_err)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bt = build_table(&table, &spec, &predicted, cfg.baseline.seed);
    bt.check().map_err(|e| CliError::Other(anyhow::anyhow!("baseline invariant violated: {e}")))?;

    let dir = cfg.case_dir(case);
    let mut m = Manifest::new("baseline", Some(case.to_string()));
    m.inputs = vec![holdout.digest, lib.digest, model_digest];
    m.emit(&dir, BASELINE_CSV, &bt.to_csv())?;
    m.emit(&dir, BASELINE_JSON, &(serde_json::to_string_pretty(&bt).expect("table serializes") + "\n"))?;
    let a = bt.averages();
    m.settings = json!({
        "seed": cfg.baseline.seed,
        "model": model.spec.kind.name(),
        "rows": bt.rows.len(),
        "average_random": a.random,
        "average_random_expected": a.random_expected,
        "average_best": a.best,
        "average_ml": a.ml,
        "beats_random_fraction": bt.beats_random_fraction(),
        "infeasible": bt.excluded,
    });
    m.warnings = infeasible_warnings(&bt.excluded);
    m.write(&manifest_path(&dir, "baseline"))?;
    Ok((bt, m))
}

/// Cross-case summary of every configured case's evaluation (and baseline
/// when present), plus plot-ready accuracy series.
pub fn report(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    report_cases(cfg, &cfg.case_ids()?)
}

pub fn report_cases(cfg: &PipelineConfig, cases: &[CaseId]) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("report", None);
    let mut summary = String::from("case,classes,records,imbalance_ratio,classifier,mean_accuracy,mean_auc\n");
    let mut baselines = String::from("case,rows,random,random_expected,best,ml,beats_random_fraction\n");
    let mut plot_rows: Vec<(CaseId, EvaluationReport)> = Vec::new();
    for &case in cases {
        let dir = cfg.case_dir(case);
        let text = read_input(&dir.join(REPORT_JSON))?;
        m.inputs.push(Digest::of(format!("{}/{REPORT_JSON}", case_dir_name(case)), text.as_bytes()));
        let rep: EvaluationReport =
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{REPORT_JSON}: {e}")))?;
        let (ds, _) = load_dataset(cfg, case)?;
        let imb = imbalance_ratio(&ds);
        for (name, s) in rep.names.iter().zip(&rep.scores) {
            summary.push_str(&format!(
                "{case},{},{},{},{name},{:.6},{}\n",
                ds.class_names.len(),
                ds.records.len(),
                imb.ratio.map_or("NA".into(), |r| format!("{r:.4}")),
                s.mean_accuracy,
                s.mean_auc.map_or("NA".into(), |a| format!("{a:.6}")),
            ));
        }
        let bpath = dir.join(BASELINE_JSON);
        if bpath.is_file() {
            let text = read_input(&bpath)?;
            m.inputs.push(Digest::of(format!("{}/{BASELINE_JSON}", case_dir_name(case)), text.as_bytes()));
            let bt: BaselineTable =
                serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{BASELINE_JSON}: {e}")))?;
            let a = bt.averages();
            baselines.push_str(&format!(
                "{case},{},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                bt.rows.len(),
                a.random,
                a.random_expected,
                a.best,
                a.ml,
                bt.beats_random_fraction()
            ));
        }
        plot_rows.push((case, rep));
    }
    let out = &cfg.paths.out_dir;
    m.emit(out, "summary.csv", &summary)?;
    m.emit(out, "baseline_summary.csv", &baselines)?;
    if cfg.report.plot_data {
        m.emit(out, "plot_accuracy.csv", &plot_accuracy(&plot_rows))?;
    }
    m.write(&manifest_path(out, "report"))?;
    Ok(m)
}

/// One x value per case, one y series per classifier plus their mean.
fn plot_accuracy(rows: &[(CaseId, EvaluationReport)]) -> String {
    let mut names: Vec<&str> = Vec::new();
    for (_, r) in rows {
        for n in &r.names {
            if !names.contains(&n.as_str()) {
                names.push(n);
            }
        }
    }
    let mut out = String::from("case");
    for n in &names {
        out.push_str(&format!(",{n}"));
    }
    out.push_str(",mean\n");
    for (case, r) in rows {
        out.push_str(case.as_str());
        for n in &names {
            match r.mean_accuracy(n) {
                Some(a) => out.push_str(&format!(",{a:.6}")),
                None => out.push(','),
            }
        }
        let mean = r.scores.iter().map(|s| s.mean_accuracy).sum::<f64>() / r.scores.len().max(1) as f64;
        out.push_str(&format!(",{mean:.6}\n"));
    }
    out
}

/// Everything, for every configured case: generate, sweep, dataset,
/// evaluate, baseline (when a held-out corpus is configured), report.
/// Cases whose dataset represents a single class stop after the dataset
/// step with a warning and are left out of the report.
pub fn run(cfg: &PipelineConfig) -> Result<Vec<Manifest>, CliError> {
    let mut done = vec![generate(cfg)?];
    let mut evaluated = Vec::new();
    for case in cfg.case_ids()? {
        done.push(sweep(cfg, case)?);
        let mut m = dataset(cfg, case)?;
        if m.settings["degenerate"] == json!(true) {
            m.warnings.push(format!("case {case} skipped after the dataset step"));
            done.push(m);
            continue;
        }
        done.push(m);
        done.push(evaluate(cfg, case)?);
        if cfg.baseline.corpus_size > 0 {
            done.push(baseline(cfg, case, None)?.1);
        }
        evaluated.push(case);
    }
    if !evaluated.is_empty() {
        done.push(report_cases(cfg, &evaluated)?);
    }
    Ok(done)
}
