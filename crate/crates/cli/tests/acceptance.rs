//! Acceptance criteria 1-10. Runs as a plain binary (no libtest harness) so
//! every criterion prints exactly one PASS/FAIL line; exits nonzero when
//! any criterion fails.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use floorplan_cli::{pipeline, PipelineConfig};
use floorplan_core::dataset::build_dataset;
use floorplan_core::gen::generate_corpus;
use floorplan_core::ml::{
    accuracy, auc, corrected_t_test_paired, cross_validate, cross_validate_rows, synthetic, ConfusionMatrix,
    Mlp, Verdict,
};
use floorplan_core::sim::{simulate, validate_schedule, SimError};
use floorplan_core::{
    CaseId, CaseSpec, ClassifierKind, ClassifierSpec, Dfg, GenParams, Layout, PlatformConfig, SchedulerKind,
    TaskLibrary, TaskMode, TaskTypeSpec,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Longest path with per-node weights, from parent lists built here
/// (memoised over nodes in the order the recursion reaches them).
fn longest_path(dfg: &Dfg, w: impl Fn(u32) -> u64) -> u64 {
    let index: HashMap<u32, usize> = dfg.nodes().iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut parents = vec![Vec::new(); dfg.node_count()];
    for &(p, c) in dfg.edges() {
        parents[index[&c]].push(index[&p]);
    }
    let weight: Vec<u64> = dfg.nodes().iter().map(|n| w(n.task_type)).collect();
    let mut finish: Vec<Option<u64>> = vec![None; dfg.node_count()];
    for start in 0..dfg.node_count() {
        let mut stack = vec![start];
        while let Some(&v) = stack.last() {
            if finish[v].is_some() {
                stack.pop();
                continue;
            }
            let pending: Vec<usize> = parents[v].iter().copied().filter(|&p| finish[p].is_none()).collect();
            if pending.is_empty() {
                let before = parents[v].iter().map(|&p| finish[p].unwrap()).max().unwrap_or(0);
                finish[v] = Some(before + weight[v]);
                stack.pop();
            } else {
                stack.extend(pending);
            }
        }
    }
    finish.into_iter().map(Option::unwrap).max().unwrap_or(0)
}

fn fastest(spec: &TaskTypeSpec) -> u64 {
    match spec.mode {
        TaskMode::Hardware => spec.hw_exec,
        TaskMode::Software => spec.sw_exec,
        TaskMode::Hybrid => spec.hw_exec.min(spec.sw_exec),
    }
}

fn corpus_200() -> Vec<Dfg> {
    generate_corpus(&GenParams {
        corpus_size: 200,
        seed: 2024,
        ..GenParams::default()
    })
    .unwrap()
}

fn all_default_candidates() -> Vec<PlatformConfig> {
    let mut seen: Vec<PlatformConfig> = Vec::new();
    for case in CaseId::ALL {
        for c in CaseSpec::default_for(case).unwrap().candidates {
            if !seen.contains(&c) {
                seen.push(c);
            }
        }
    }
    seen
}

fn criterion_1(corpus: &[Dfg], lib: &TaskLibrary) -> Outcome {
    let start = Instant::now();
    let candidates = all_default_candidates();
    let (mut runs, mut infeasible, mut bad) = (0, 0, Vec::new());
    for dfg in corpus {
        for cfg in &candidates {
            match simulate(dfg, lib, cfg) {
                Ok(r) => {
                    runs += 1;
                    let report = validate_schedule(&r, dfg, lib, cfg);
                    if !report.is_valid() {
                        bad.push(format!("{} on {}", dfg.id(), cfg.name()));
                    }
                }
                Err(SimError::Infeasible { .. }) => infeasible += 1,
                Err(e) => bad.push(format!("{} on {}: {e}", dfg.id(), cfg.name())),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 60.0,
        format!(
            "{runs} runs on {} graphs x {} candidates, {} with violations, {infeasible} infeasible skipped, {secs:.1} s (< 60 s){}",
            corpus.len(),
            candidates.len(),
            bad.len(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

fn criterion_2(corpus: &[Dfg], lib: &TaskLibrary) -> Outcome {
    let mut violations = Vec::new();
    let mut checked = 0;
    for dfg in corpus {
        let lower = longest_path(dfg, |t| fastest(lib.get(t).unwrap()));
        for cfg in all_default_candidates() {
            if let Ok(r) = simulate(dfg, lib, &cfg) {
                checked += 1;
                if r.makespan < lower {
                    violations.push(format!("{} on {}: {} < {lower}", dfg.id(), cfg.name(), r.makespan));
                }
            }
        }
    }
    let free = TaskLibrary::new(lib.iter().map(|s| TaskTypeSpec {
        reconfig_time: 0,
        ..*s
    }))
    .unwrap();
    let widest = free.iter().map(|s| s.hw_area).max().unwrap();
    let mut exact = 0;
    for dfg in corpus {
        let n = dfg.node_count();
        let layout = Layout::new(widest * n as u64, vec![widest; n]).unwrap();
        let cfg = PlatformConfig::new(layout, 0, SchedulerKind::NoReuse).unwrap();
        let r = simulate(dfg, &free, &cfg).unwrap();
        let cp = longest_path(dfg, |t| free.get(t).unwrap().hw_exec);
        if r.makespan == cp {
            exact += 1;
        } else {
            violations.push(format!("{}: unlimited makespan {} vs critical path {cp}", dfg.id(), r.makespan));
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} runs above the lower bound, {exact}/{} unlimited-region runs equal the critical path{}",
            corpus.len(),
            violations.first().map(|v| format!("; first violation: {v}")).unwrap_or_default()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut acc_ok = 0;
    for _ in 0..20 {
        let classes = rng.gen_range(2..=5);
        let mut cells = vec![vec![0u64; classes]; classes];
        let mut cm = ConfusionMatrix::new(classes);
        for (a, row) in cells.iter_mut().enumerate() {
            for (p, cell) in row.iter_mut().enumerate() {
                *cell = rng.gen_range(0..40);
                for _ in 0..*cell {
                    cm.add(a, p);
                }
            }
        }
        cells[0][0] += 1;
        cm.add(0, 0);
        let correct: u64 = (0..classes).map(|i| cells[i][i]).sum();
        let total: u64 = cells.iter().flatten().sum();
        if accuracy(&cm).unwrap() == Ratio::new(correct, total) {
            acc_ok += 1;
        }
    }
    let mut auc_ok = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=12);
        let mut scores: Vec<(f64, bool)> = (0..n).map(|_| (rng.gen_range(0..8) as f64 / 8.0, rng.gen())).collect();
        scores[0].1 = true;
        scores[1].1 = false;
        let (mut twice_wins, mut pos, mut neg) = (0u64, 0u64, 0u64);
        for &(s, p) in &scores {
            if p {
                pos += 1;
                for &(t, q) in &scores {
                    if !q {
                        twice_wins += if s > t { 2 } else if s == t { 1 } else { 0 };
                    }
                }
            } else {
                neg += 1;
            }
        }
        if auc(&scores).unwrap() == Ratio::new(twice_wins, 2 * pos * neg) {
            auc_ok += 1;
        }
    }
    outcome(
        acc_ok == 20 && auc_ok == 100,
        format!("accuracy exact on {acc_ok}/20 confusion matrices, AUC exact on {auc_ok}/100 score sets"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n_in, n_hidden, n_out) = (rng.gen_range(1..=5), rng.gen_range(1..=8), rng.gen_range(2..=3));
        let mut net = Mlp::random(n_in, n_hidden, n_out, &mut rng);
        let p: Vec<f64> = (0..net.param_count()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        net.set_params(&p);
        let rows = rng.gen_range(1..=6);
        let x: Vec<Vec<f64>> = (0..rows).map(|_| (0..n_in).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..n_out)).collect();
        let (_, g) = net.loss_and_grad(&x, &y);
        let h = 1e-5;
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k] = p[k] + h;
            net.set_params(&q);
            let up = net.loss_and_grad(&x, &y).0;
            q[k] = p[k] - h;
            net.set_params(&q);
            let down = net.loss_and_grad(&x, &y).0;
            let num = (up - down) / (2.0 * h);
            let scale = num.abs().max(g[k].abs());
            if scale > 1e-7 {
                worst = worst.max((num - g[k]).abs() / scale);
            }
        }
        net.set_params(&p);
    }
    outcome(worst < 1e-4, format!("max relative error {worst:.2e} over 20 networks (< 1e-4)"))
}

fn criterion_5() -> Outcome {
    let (x, y) = synthetic::separable(200, 2.0, 5);
    let names = vec!["a".to_string(), "b".to_string()];
    let mut lowest = (String::new(), f64::INFINITY);
    for spec in ClassifierSpec::all(5) {
        let s = cross_validate_rows(&x, &y, &names, &spec, 10, 5).unwrap();
        if s.mean_accuracy < lowest.1 {
            lowest = (spec.kind.name().to_string(), s.mean_accuracy);
        }
    }
    outcome(
        lowest.1 >= 0.95,
        format!("lowest mean 10-fold accuracy {:.4} ({}) (>= 0.95)", lowest.1, lowest.0),
    )
}

/// `acc[seed][case][kind]`: mean 10-fold accuracy on the 258-graph corpus.
fn trend_accuracies(lib: &TaskLibrary) -> Vec<Vec<Vec<f64>>> {
    (1..=5u64)
        .map(|seed| {
            let corpus = generate_corpus(&GenParams {
                seed,
                ..GenParams::default()
            })
            .unwrap();
            CaseId::ALL
                .iter()
                .map(|&case| {
                    let ds = build_dataset(&corpus, lib, &CaseSpec::default_for(case).unwrap()).unwrap();
                    ClassifierSpec::all(seed)
                        .iter()
                        .map(|spec| cross_validate(&ds, spec, 10, seed).unwrap().mean_accuracy)
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_6(acc: &[Vec<Vec<f64>>]) -> Outcome {
    let case_mean = |c: usize| mean(acc.iter().map(|seed| mean(seed[c].iter().copied())));
    let (one, three) = (case_mean(0), case_mean(2));
    let per_case: Vec<String> = (0..5).map(|c| format!("{}={:.3}", CaseId::ALL[c], case_mean(c))).collect();
    outcome(
        one - three >= 0.05,
        format!(
            "Case I {one:.4} vs Case III {three:.4}: {:+.1} pp (>= 5 pp); all cases {}",
            100.0 * (one - three),
            per_case.join(" ")
        ),
    )
}

fn criterion_7(acc: &[Vec<Vec<f64>>]) -> Outcome {
    let at = |kind: ClassifierKind| ClassifierKind::ALL.iter().position(|&k| k == kind).unwrap();
    let (rf, dt) = (at(ClassifierKind::RandomForest), at(ClassifierKind::DecisionTree));
    let mut within = true;
    let mut greater = 0;
    let mut cells = Vec::new();
    for c in 0..5 {
        let r = mean(acc.iter().map(|s| s[c][rf]));
        let d = mean(acc.iter().map(|s| s[c][dt]));
        within &= r >= d - 0.01;
        greater += usize::from(r > d);
        cells.push(format!("{} RF {r:.3}/DT {d:.3}", CaseId::ALL[c]));
    }
    outcome(
        within && greater >= 3,
        format!("RF >= DT - 1 pp on every case: {within}; RF > DT on {greater}/5 (>= 3); {}", cells.join(", ")),
    )
}

fn config_in(dir: &Path, text: &str) -> PipelineConfig {
    let path = dir.join("floorplan.toml");
    fs::write(&path, text).unwrap();
    PipelineConfig::load(&path).unwrap()
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(
        dir.path(),
        "[generator]\nseed = 1\ncorpus_size = 258\n\
         [cases]\nids = [\"III\"]\n\
         [evaluation]\nclassifiers = [\"RandomForest\"]\nmodel = \"RandomForest\"\n\
         [baseline]\ncorpus_size = 100\nseed = 1\n",
    );
    pipeline::generate(&cfg).unwrap();
    pipeline::sweep(&cfg, CaseId::III).unwrap();
    pipeline::dataset(&cfg, CaseId::III).unwrap();
    pipeline::evaluate(&cfg, CaseId::III).unwrap();
    let (table, _) = pipeline::baseline(&cfg, CaseId::III, None).unwrap();
    let frac = table.beats_random_fraction();
    let gap = table.ml_gap();
    let a = table.averages();
    outcome(
        frac >= 0.70 && gap <= 0.25,
        format!(
            "{} held-out graphs: ML beats the random expectation on {:.0}% (>= 70%); averages random {:.0} / best {:.0} / ML {:.0} cycles, ML {:+.1}% over best (<= 25%)",
            table.rows.len(),
            100.0 * frac,
            a.random_expected,
            a.best,
            a.ml,
            100.0 * gap
        ),
    )
}

fn tree(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(
        dir.path(),
        "[generator]\nseed = 9\ncorpus_size = 100\nnode_count = [5, 300]\n[baseline]\ncorpus_size = 30\n",
    );
    let mut second = cfg.clone();
    second.paths.out_dir = dir.path().join("second");
    pipeline::run(&cfg).unwrap();
    pipeline::run(&second).unwrap();

    let a = tree(&cfg.paths.out_dir);
    let compared: Vec<&PathBuf> = a.iter().filter(|p| !p.ends_with("timings.csv")).collect();
    let differing: Vec<String> = compared
        .iter()
        .filter(|p| fs::read(cfg.paths.out_dir.join(p)).ok() != fs::read(second.paths.out_dir.join(p)).ok())
        .map(|p| p.display().to_string())
        .collect();
    let count = |pred: &dyn Fn(&str) -> bool| compared.iter().filter(|p| pred(&p.to_string_lossy())).count();
    let datasets = count(&|p| p.ends_with("dataset.csv"));
    let models = count(&|p| p.contains("/models/"));
    let reports = count(&|p| p.ends_with("report.csv"));
    outcome(
        differing.is_empty() && tree(&second.paths.out_dir).len() == a.len() && datasets > 0 && models > 0 && reports > 0,
        format!(
            "{} files compared ({datasets} datasets, {models} models, {reports} reports), {} differ{}",
            compared.len(),
            differing.len(),
            differing.first().map(|d| format!(": {d}")).unwrap_or_default()
        ),
    )
}

fn criterion_10() -> Outcome {
    // Two-tailed 5% critical value of Student's t with 9 degrees of freedom.
    const T_CRIT_9: f64 = 2.262_157_162_740_991;
    let ratio = 1.0 / 9.0;
    let hand = |d: &[f64]| {
        let k = d.len() as f64;
        let m = d.iter().sum::<f64>() / k;
        let v = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
        if v == 0.0 {
            if m == 0.0 {
                0.0
            } else {
                m.signum() * f64::INFINITY
            }
        } else {
            m / ((1.0 / k + ratio) * v).sqrt()
        }
    };
    let hand_verdict = |t: f64| {
        if t.abs() <= T_CRIT_9 {
            Verdict::NotSignificant
        } else if t > 0.0 {
            Verdict::Improvement
        } else {
            Verdict::Degradation
        }
    };
    let d3 = [0.02, -0.01, 0.03, 0.00, 0.01, 0.02, -0.02, 0.01, 0.00, 0.02];
    let vectors: [(&str, Vec<f64>, Vec<f64>); 3] = [
        ("identical", vec![0.8; 10], vec![0.8; 10]),
        ("constant 0.1", vec![0.9; 10], vec![0.8; 10]),
        ("mixed", d3.iter().map(|d| 0.5 + d).collect(), vec![0.5; 10]),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, a, b) in &vectors {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let expect_t = hand(&d);
        let r = corrected_t_test_paired(a, b, ratio, 0.05).unwrap();
        let t_ok = if expect_t.is_infinite() {
            r.t == expect_t
        } else {
            (r.t - expect_t).abs() <= 1e-9
        };
        let v_ok = r.verdict == hand_verdict(expect_t);
        pass &= t_ok && v_ok;
        lines.push(format!("{name}: t={:.6} ({}) {}", r.t, r.verdict.as_str(), if t_ok && v_ok { "ok" } else { "MISMATCH" }));
    }
    outcome(pass, lines.join("; "))
}

fn main() -> ExitCode {
    let lib = TaskLibrary::reference();
    let corpus = corpus_200();
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n: u32, name: &'static str, o: Outcome| {
        println!("[{}] criterion {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    record(1, "schedule validity", criterion_1(&corpus, &lib));
    record(2, "makespan bounds", criterion_2(&corpus, &lib));
    record(3, "accuracy and AUC oracles", criterion_3());
    record(4, "MLP gradient check", criterion_4());
    record(5, "classifier sanity", criterion_5());
    let trend_start = Instant::now();
    let acc = trend_accuracies(&lib);
    let trend_secs = trend_start.elapsed().as_secs_f64();
    let mut o6 = criterion_6(&acc);
    o6.detail.push_str(&format!("; trend runs {trend_secs:.0} s (< 600 s)"));
    o6.pass &= trend_secs < 600.0;
    record(6, "class count vs accuracy", o6);
    record(7, "ensembles vs single tree", criterion_7(&acc));
    record(8, "baseline dominance", criterion_8());
    record(9, "reproducibility", criterion_9());
    record(10, "corrected t-test", criterion_10());
    let failed = results.iter().filter(|(_, _, o)| !o.pass).count();
    println!(
        "acceptance: {}/{} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
