//! Plain-text summaries and CSV bodies for runs and sweeps.

use std::fmt::Write;

use crate::analysis::MSeries;
use crate::criteria::{blowup_bound_boundary, blowup_bound_reaction, Classification, Outcome, ProblemSpec};
use crate::solver::{SimOutcome, SimResult, Snapshot};

/// Slack allowed when comparing `T_num` with a predicted bound.
pub const BOUND_SLACK: f64 = 0.02;

/// The smallest finite blow-up bound whose preconditions hold.
pub fn predicted_bound(spec: &ProblemSpec, class: Option<&Classification>) -> Option<f64> {
    let reaction = || blowup_bound_reaction(spec).ok().and_then(|b| b.finite());
    let boundary = || blowup_bound_boundary(spec).ok().and_then(|b| b.finite());
    match class.map(|c| c.outcome) {
        Some(Outcome::BlowupReaction) => reaction(),
        Some(Outcome::BlowupBoundary) => boundary(),
        _ => match (reaction(), boundary()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
    }
}

fn fmt_err(e: f64) -> String {
    if e >= 5e-3 {
        format!("{e:.2}")
    } else {
        format!("{e:.1e}")
    }
}

/// One line describing the outcome, with the bound comparison when a bound
/// exists.
pub fn summary_line(sim: &SimResult, bound: Option<f64>) -> String {
    match sim.outcome {
        SimOutcome::BlowupDetected { t_num, t_err } => {
            let mut s = format!("T_num={t_num:.2}±{}", fmt_err(t_err));
            if let Some(tb) = bound {
                let verdict = if t_num <= tb + BOUND_SLACK { "PASS" } else { "FAIL" };
                let _ = write!(s, ", T_b={tb:.2}, T_num ≤ T_b: {verdict}");
            }
            s
        }
        SimOutcome::ReachedHorizon => format!("ReachedHorizon t={}", sim.t_final),
        SimOutcome::StepFloorHit { t } => format!("StepFloorHit t={t}"),
    }
}

pub fn series_csv(sim: &SimResult) -> String {
    let mut out = String::from("t,sup_norm,mass\n");
    for s in &sim.series {
        let _ = writeln!(out, "{},{},{}", s.t, s.sup, s.mass);
    }
    out
}

pub fn snapshot_csv(nodes: &[f64], snap: &Snapshot) -> String {
    let mut out = String::from("x,u\n");
    for (x, u) in nodes.iter().zip(&snap.u) {
        let _ = writeln!(out, "{x},{u}");
    }
    out
}

pub fn m_series_csv(ms: &MSeries) -> String {
    let mut out = String::from("t,m\n");
    for (t, m) in ms.times.iter().zip(&ms.values) {
        let _ = writeln!(out, "{t},{m}");
    }
    out
}

/// Run statistics in `key: value` form.
pub fn run_report(sim: &SimResult, bound: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "outcome: {}", sim.outcome.name());
    let _ = writeln!(out, "summary: {}", summary_line(sim, bound));
    let _ = writeln!(out, "t_final: {}", sim.t_final);
    let _ = writeln!(out, "final_sup: {:.6e}", sim.final_sup());
    let _ = writeln!(out, "steps: {} accepted, {} rejected", sim.accepted, sim.rejected);
    let _ = writeln!(out, "last_dt: {:.3e}", sim.last_dt);
    for c in &sim.crossings {
        let _ = writeln!(out, "crossing: level = {:.1e}, t = {:.12}", c.level, c.t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(outcome: SimOutcome) -> SimResult {
        SimResult {
            series: Vec::new(),
            trace: Vec::new(),
            snapshots: Vec::new(),
            crossings: Vec::new(),
            outcome,
            t_final: 20.0,
            state: vec![1.0],
            nodes: Vec::new(),
            last_dt: 0.0,
            accepted: 0,
            rejected: 0,
            rtol: 1e-6,
            atol: 1e-9,
        }
    }

    #[test]
    fn summary_lines() {
        let r = result(SimOutcome::BlowupDetected { t_num: 1.0001, t_err: 0.02 });
        assert_eq!(summary_line(&r, Some(1.0)), "T_num=1.00±0.02, T_b=1.00, T_num ≤ T_b: PASS");
        let r = result(SimOutcome::BlowupDetected { t_num: 1.5, t_err: 1e-8 });
        assert_eq!(summary_line(&r, Some(1.0)), "T_num=1.50±1.0e-8, T_b=1.00, T_num ≤ T_b: FAIL");
        assert_eq!(summary_line(&result(SimOutcome::ReachedHorizon), None), "ReachedHorizon t=20");
    }

    #[test]
    fn bound_selection() {
        let spec = ProblemSpec::simple(1.0, "s^2", "0", "2", "0", "1").unwrap();
        assert!((predicted_bound(&spec, None).unwrap() - 0.5).abs() < 1e-12);
        let spec = ProblemSpec::simple(1.0, "s", "0", "1", "0", "1").unwrap();
        assert_eq!(predicted_bound(&spec, None), None);
    }
}
