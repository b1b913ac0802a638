//! Held-out comparison of the predicted platform against a uniformly random
//! one and the exhaustive best.

use floorplan_core::dataset::{argmin_fitness, fitness, CaseSpec, SweepTable};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One held-out graph. Metric values are the case objective (smaller is
/// better): cycles for time, mW·cycles for power, the normalised sum for
/// the time-power objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub dfg_id: String,
    /// Candidate drawn uniformly among the graph's feasible candidates.
    pub random: f64,
    /// Mean over the feasible candidates: the random draw's expectation.
    pub random_expected: f64,
    pub best: f64,
    /// `None` when the predicted class cannot run the graph.
    pub ml: Option<f64>,
    pub best_class: String,
    pub predicted_class: String,
}

impl BaselineRow {
    /// Rows marked with an asterisk.
    pub fn mispredicted(&self) -> bool {
        self.predicted_class != self.best_class
    }

    /// The predicted platform strictly beats the random expectation.
    pub fn beats_random(&self) -> bool {
        self.ml.is_some_and(|m| m < self.random_expected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTable {
    pub case_id: String,
    pub objective: String,
    pub rows: Vec<BaselineRow>,
    /// Held-out graphs no candidate can run.
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub random: f64,
    pub random_expected: f64,
    pub best: f64,
    /// Over rows whose prediction is feasible.
    pub ml: f64,
}

fn to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Builds the table from a held-out sweep. `predicted[g]` is the predicted
/// class of the table's `g`-th graph; the predicted platform is that
/// class's fittest feasible candidate.
pub fn build_table(table: &SweepTable, case: &CaseSpec, predicted: &[usize], seed: u64) -> BaselineTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (group, &pred) in table.per_dfg().zip(predicted) {
        let fit = fitness(group, case.objective);
        let Some(best) = argmin_fitness(&fit) else {
            excluded.push(group[0].dfg_id.clone());
            continue;
        };
        let feasible: Vec<usize> = (0..fit.len()).filter(|&c| fit[c].is_some()).collect();
        let value = |c: usize| to_f64(fit[c].expect("feasible").0);
        let drawn = feasible[rng.gen_range(0..feasible.len())];
        let in_class: Vec<Option<_>> = fit
            .iter()
            .enumerate()
            .map(|(c, f)| f.filter(|_| case.candidate_class[c] == pred))
            .collect();
        rows.push(BaselineRow {
            dfg_id: group[0].dfg_id.clone(),
            random: value(drawn),
            random_expected: feasible.iter().map(|&c| value(c)).sum::<f64>() / feasible.len() as f64,
            best: value(best),
            ml: argmin_fitness(&in_class).map(value),
            best_class: case.class_names[case.candidate_class[best]].clone(),
            predicted_class: case.class_names[pred].clone(),
        });
    }
    BaselineTable {
        case_id: case.case_id.to_string(),
        objective: case.objective.to_string(),
        rows,
        excluded,
    }
}

impl BaselineTable {
    pub fn averages(&self) -> Averages {
        let mean = |v: Vec<f64>| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        Averages {
            random: mean(self.rows.iter().map(|r| r.random).collect()),
            random_expected: mean(self.rows.iter().map(|r| r.random_expected).collect()),
            best: mean(self.rows.iter().map(|r| r.best).collect()),
            ml: mean(self.rows.iter().filter_map(|r| r.ml).collect()),
        }
    }

    /// Share of rows where the prediction beats the random expectation.
    pub fn beats_random_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.beats_random()).count() as f64 / self.rows.len() as f64
    }

    /// Relative excess of the ML column average over the best column.
    /// Infinite when some prediction is infeasible.
    pub fn ml_gap(&self) -> f64 {
        if self.rows.iter().any(|r| r.ml.is_none()) {
            return f64::INFINITY;
        }
        let a = self.averages();
        (a.ml - a.best) / a.best
    }

    /// Every row has best <= random, best <= expectation and best <= ML.
    pub fn check(&self) -> Result<(), String> {
        for r in &self.rows {
            let ml_ok = r.ml.is_none_or(|m| r.best <= m);
            if !(r.best <= r.random && r.best <= r.random_expected && ml_ok) {
                return Err(format!("{}: best column is not the minimum", r.dfg_id));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dfg_id,random,random_expected,best,ml,best_class,predicted_class,mispredicted\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.dfg_id,
                num(r.random),
                num(r.random_expected),
                num(r.best),
                r.ml.map_or("infeasible".to_string(), num),
                r.best_class,
                r.predicted_class,
                if r.mispredicted() { "*" } else { "" },
            ));
        }
        let a = self.averages();
        out.push_str(&format!(
            "average,{},{},{},{},,,\n",
            num(a.random),
            num(a.random_expected),
            num(a.best),
            num(a.ml)
        ));
        out
    }
}

/// Integers print bare, everything else with four decimals.
fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.4}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use floorplan_core::dataset::{RunMetrics, SweepRow};
    use floorplan_core::CaseId;

    fn group(id: &str, makespans: &[Option<u64>]) -> Vec<SweepRow> {
        makespans
            .iter()
            .enumerate()
            .map(|(c, m)| SweepRow {
                dfg_id: id.to_string(),
                config_index: c,
                metrics: m.map(|makespan| RunMetrics {
                    makespan,
                    total_energy: 1,
                    fabric_area_used: 1,
                }),
            })
            .collect()
    }

    fn table(groups: Vec<Vec<SweepRow>>) -> SweepTable {
        SweepTable {
            candidate_count: groups[0].len(),
            excluded: vec![],
            rows: groups.into_iter().flatten().collect(),
        }
    }

    #[test]
    fn columns_follow_the_definitions() {
        let case = CaseSpec::default_for(CaseId::III).unwrap();
        let t = table(vec![
            group("a", &[Some(40), Some(10), Some(30), Some(20)]),
            group("b", &[None, None, None, None]),
            group("c", &[Some(5), None, Some(9), Some(7)]),
        ]);
        let bt = build_table(&t, &case, &[1, 0, 3], 3);
        assert_eq!(bt.excluded, ["b"]);
        assert_eq!(bt.rows.len(), 2);
        let a = &bt.rows[0];
        assert_eq!((a.best, a.ml, a.random_expected), (10.0, Some(10.0), 25.0));
        assert!(!a.mispredicted() && a.beats_random());
        let c = &bt.rows[1];
        assert_eq!((c.best, c.ml, c.random_expected), (5.0, Some(7.0), 7.0));
        assert!(c.mispredicted() && !c.beats_random());
        assert!([5.0, 9.0, 7.0].contains(&c.random));
        bt.check().unwrap();
        assert_eq!(bt.beats_random_fraction(), 0.5);
        assert!((bt.ml_gap() - (8.5 - 7.5) / 7.5).abs() < 1e-12);
        let csv = bt.to_csv();
        assert!(csv.lines().nth(2).unwrap().ends_with(",*"));
        assert!(csv.lines().last().unwrap().starts_with("average,"));
    }

    #[test]
    fn correct_prediction_matches_best() {
        let case = CaseSpec::default_for(CaseId::III).unwrap();
        let t = table(vec![group("a", &[Some(2226), Some(3000), Some(2500), Some(9000)])]);
        let r = &build_table(&t, &case, &[0], 1).rows[0];
        assert_eq!(r.ml, Some(r.best));
        assert_eq!(r.best, 2226.0);
    }

    #[test]
    fn single_feasible_candidate_makes_all_columns_equal() {
        let case = CaseSpec::default_for(CaseId::III).unwrap();
        let t = table(vec![group("a", &[None, None, Some(17), None])]);
        let r = &build_table(&t, &case, &[2], 9).rows[0];
        assert_eq!((r.random, r.random_expected, r.best, r.ml), (17.0, 17.0, 17.0, Some(17.0)));
    }

    #[test]
    fn infeasible_prediction_is_reported() {
        let case = CaseSpec::default_for(CaseId::III).unwrap();
        let t = table(vec![group("a", &[None, Some(3), Some(4), Some(5)])]);
        let bt = build_table(&t, &case, &[0], 1);
        assert_eq!(bt.rows[0].ml, None);
        assert!(!bt.rows[0].beats_random());
        assert!(bt.ml_gap().is_infinite());
        assert!(bt.to_csv().contains("infeasible"));
    }

    #[test]
    fn draws_are_seeded() {
        let case = CaseSpec::default_for(CaseId::III).unwrap();
        let groups: Vec<_> = (0..30)
            .map(|i| group(&format!("g{i}"), &[Some(1), Some(2), Some(3), Some(4)]))
            .collect();
        let t = table(groups);
        let p = vec![0; 30];
        assert_eq!(build_table(&t, &case, &p, 5), build_table(&t, &case, &p, 5));
        assert_ne!(build_table(&t, &case, &p, 5), build_table(&t, &case, &p, 6));
    }
}
