//! Parameter sweeps over a scenario template.

use std::fmt::Write;

use crate::criteria::classify;
use crate::par::{self, Execution};
use crate::report::predicted_bound;
use crate::scenario::{RawScenario, Scenario};
use crate::solver::{run, Grid1D, SimOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: Vec<(String, String)>,
    pub classification: String,
    pub outcome: String,
    pub t_num: Option<f64>,
    pub t_b: Option<f64>,
    /// First failure in the cell, if any; later fields stay empty.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn cell(params: Vec<(String, String)>, raw: &RawScenario) -> SweepRow {
    let mut row = SweepRow {
        params,
        classification: String::new(),
        outcome: String::new(),
        t_num: None,
        t_b: None,
        error: None,
    };
    let scenario = match Scenario::from_raw(raw) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let class = match classify(&scenario.spec, scenario.tier) {
        Ok(c) => {
            row.classification = c.outcome.to_string();
            Some(c)
        }
        Err(e) => {
            row.error = Some(e.to_string());
            None
        }
    };
    row.t_b = predicted_bound(&scenario.spec, class.as_ref());
    let sim = Grid1D::new(scenario.spec.length, scenario.grid_n).and_then(|g| run(&scenario.spec, g, &scenario.sim));
    match sim {
        Ok(sim) => {
            row.outcome = sim.outcome.name().to_string();
            if let SimOutcome::BlowupDetected { t_num, .. } = sim.outcome {
                row.t_num = Some(t_num);
            }
        }
        Err(e) => {
            row.error.get_or_insert(e.to_string());
        }
    }
    row
}

/// Classifies and simulates every cell; rows follow the parameter order.
pub fn run_sweep(raw: &RawScenario, exec: Execution) -> SweepTable {
    let names = raw.sweep_params().into_iter().map(|(n, _)| n).collect();
    let cells = raw.cells();
    let rows = par::map(exec, &cells, |(params, r)| cell(params.clone(), r));
    SweepTable { names, rows }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Quotes a CSV field when it contains a delimiter.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for n in &self.names {
            let _ = write!(out, "{},", field(n));
        }
        out.push_str("classification,outcome,T_num,T_b,error\n");
        for r in &self.rows {
            for (_, v) in &r.params {
                let _ = write!(out, "{},", field(v));
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.classification,
                r.outcome,
                opt(r.t_num),
                opt(r.t_b),
                field(r.error.as_deref().unwrap_or(""))
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_sweep_bounds_and_errors() {
        let raw = RawScenario::parse(
            "problem.f = s^2\nproblem.alpha = {c}\nproblem.u0 = 1\nsim.t_end = 0.1\ngrid.n = 17\nsweep.c = 0.5, 1, 2, -1",
        )
        .unwrap();
        let t = run_sweep(&raw, Execution::default());
        let tb: Vec<Option<f64>> = t.rows.iter().map(|r| r.t_b).collect();
        assert!((tb[0].unwrap() - 2.0).abs() < 1e-9);
        assert!((tb[1].unwrap() - 1.0).abs() < 1e-9);
        assert!((tb[2].unwrap() - 0.5).abs() < 1e-9);
        assert!(t.rows[3].error.is_some());
        let csv = t.to_csv();
        assert!(csv.starts_with("c,classification,outcome,T_num,T_b,error\n0.5,BlowupReaction,ReachedHorizon,,2.000000,\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
