//! Time integration of the problem by the method of lines, and of scalar
//! comparison ODEs, with numerical blow-up detection.

mod pde;
mod rk;

use thiserror::Error;

use crate::criteria::{ProblemSpec, SpecError};
use crate::expr::{EvalError, Expr};

pub use pde::{Grid1D, Pde, CLAMP_TOL, MIN_NODES};
pub use rk::{RhsError, System, Trial};

use rk::{Controller, Workspace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("evaluation failed at t = {t}: {source}")]
    Eval {
        t: f64,
        #[source]
        source: EvalError,
    },
    #[error("step limit reached at t = {t}")]
    StepLimit { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt_init: f64,
    /// Safety factor on the diffusion step cap.
    pub theta: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Increasing sup-norm levels whose crossing times are recorded.
    pub thresholds: Vec<f64>,
    pub dt_floor: f64,
    /// Times at which the full state is stored; the step lands on each.
    pub snapshot_times: Vec<f64>,
    /// Minimum spacing of series samples; `0` records every step. A sample is
    /// also taken whenever the sup-norm has doubled since the last one.
    pub record_interval: f64,
    /// Store the state with every series sample.
    pub record_states: bool,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_end: 1.0,
            dt_init: 1e-4,
            theta: 0.9,
            rtol: 1e-6,
            atol: 1e-9,
            thresholds: (2..=8).map(|k| 10f64.powi(k)).collect(),
            dt_floor: 1e-14,
            snapshot_times: Vec::new(),
            record_interval: 0.0,
            record_states: false,
            max_steps: 50_000_000,
        }
    }
}

impl SimConfig {
    pub fn with_horizon(t_end: f64) -> SimConfig {
        SimConfig {
            t_end,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if !(self.t_end.is_finite()) {
            return bad("t_end must be finite");
        }
        if !(self.dt_floor > 0.0) {
            return bad("dt floor must be positive");
        }
        if !(self.dt_init > 0.0) {
            return bad("dt_init must be positive");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad("theta must lie in (0, 1)");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return bad("thresholds must be strictly increasing");
        }
        if self.thresholds.is_empty() {
            return bad("at least one threshold is required");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub sup: f64,
    pub min: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub level: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimOutcome {
    ReachedHorizon,
    BlowupDetected { t_num: f64, t_err: f64 },
    StepFloorHit { t: f64 },
}

impl SimOutcome {
    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            SimOutcome::BlowupDetected { t_num, .. } => Some(*t_num),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimOutcome::ReachedHorizon => "ReachedHorizon",
            SimOutcome::BlowupDetected { .. } => "BlowupDetected",
            SimOutcome::StepFloorHit { .. } => "StepFloorHit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub series: Vec<Sample>,
    /// States aligned with `series` when `record_states` is set.
    pub trace: Vec<Snapshot>,
    pub snapshots: Vec<Snapshot>,
    pub crossings: Vec<Crossing>,
    pub outcome: SimOutcome,
    pub t_final: f64,
    pub state: Vec<f64>,
    /// Grid nodes; empty for scalar problems.
    pub nodes: Vec<f64>,
    pub last_dt: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl SimResult {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }

    pub fn final_sup(&self) -> f64 {
        sup_norm(&self.state)
    }
}

pub(crate) fn sup_norm(y: &[f64]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn min_value(y: &[f64]) -> f64 {
    y.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest ratio of successive crossing-time gaps accepted as geometric
/// clustering.
const CLUSTER_RATIO: f64 = 0.75;

/// Crossing times whose gaps shrink geometrically.
fn clustered(taus: &[f64]) -> bool {
    if taus.len() < 3 {
        return false;
    }
    let tail = &taus[taus.len().saturating_sub(4)..];
    let gaps: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.iter().all(|&d| d > 0.0) && gaps.windows(2).all(|w| w[1] / w[0] < CLUSTER_RATIO)
}

/// Aitken Δ² limit of the last three crossing times.
fn aitken(taus: &[f64]) -> f64 {
    let n = taus.len();
    let (a, b, c) = (taus[n - 3], taus[n - 2], taus[n - 1]);
    let denom = (c - b) - (b - a);
    if denom == 0.0 {
        c
    } else {
        c - (c - b) * (c - b) / denom
    }
}

fn blowup(crossings: &[Crossing], last_dt: f64) -> SimOutcome {
    let taus: Vec<f64> = crossings.iter().map(|c| c.t).collect();
    let t_num = aitken(&taus);
    let last = *taus.last().expect("clustered crossings are nonempty");
    SimOutcome::BlowupDetected {
        t_num,
        t_err: (last - t_num).abs() + last_dt,
    }
}

/// Integrates `sys` from `(t0, y0)` to `cfg.t_end`, blow-up or step floor.
pub fn integrate_system<S: System + ?Sized>(
    sys: &S,
    y0: Vec<f64>,
    t0: f64,
    cfg: &SimConfig,
    nodes: Vec<f64>,
) -> Result<SimResult, SolverError> {
    cfg.validate()?;
    if y0.len() != sys.dim() {
        return Err(SolverError::Config(format!("state has {} entries, system {}", y0.len(), sys.dim())));
    }
    let mut stops: Vec<f64> = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s >= t0 && s <= cfg.t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut res = SimResult {
        series: Vec::new(),
        trace: Vec::new(),
        snapshots: Vec::new(),
        crossings: Vec::new(),
        outcome: SimOutcome::ReachedHorizon,
        t_final: t0,
        state: y0.clone(),
        nodes,
        last_dt: 0.0,
        accepted: 0,
        rejected: 0,
        rtol: cfg.rtol,
        atol: cfg.atol,
    };
    let mut y = y0;
    let mut t = t0;
    let record = |res: &mut SimResult, t: f64, y: &[f64]| {
        res.series.push(Sample {
            t,
            sup: sup_norm(y),
            min: min_value(y),
            mass: sys.mass(y),
        });
        if cfg.record_states {
            res.trace.push(Snapshot { t, u: y.to_vec() });
        }
    };
    record(&mut res, t, &y);
    let mut next_stop = 0;
    while next_stop < stops.len() && stops[next_stop] <= t {
        res.snapshots.push(Snapshot { t, u: y.clone() });
        next_stop += 1;
    }

    let sup0 = sup_norm(&y);
    let levels: Vec<f64> = cfg.thresholds.iter().copied().filter(|&m| m > sup0).collect();
    let mut next_level = 0;

    let mut k1 = vec![0.0; y.len()];
    let mut have_k1 = false;
    let mut ws = Workspace::new(y.len());
    let mut ctrl = Controller::new();
    let mut h = cfg.dt_init.min(sys.max_dt());
    let mut last_sample = (t, sup0);

    let finish = |res: &mut SimResult, outcome, t: f64, y: Vec<f64>| {
        res.outcome = outcome;
        res.t_final = t;
        res.state = y;
    };

    loop {
        if t >= cfg.t_end {
            finish(&mut res, SimOutcome::ReachedHorizon, t, y);
            return Ok(res);
        }
        if res.accepted + res.rejected >= cfg.max_steps {
            return Err(SolverError::StepLimit { t });
        }
        if h < cfg.dt_floor {
            let outcome = if clustered(&res.crossings.iter().map(|c| c.t).collect::<Vec<_>>()) {
                blowup(&res.crossings, res.last_dt)
            } else {
                SimOutcome::StepFloorHit { t }
            };
            finish(&mut res, outcome, t, y);
            return Ok(res);
        }
        if !have_k1 {
            match sys.rhs(t, &y, &mut k1) {
                Ok(()) => have_k1 = true,
                Err(RhsError::NonFinite) => {
                    // Nothing to shrink: the current state itself overflows.
                    finish(&mut res, SimOutcome::StepFloorHit { t }, t, y);
                    return Ok(res);
                }
                Err(RhsError::Domain(source)) => return Err(SolverError::Eval { t, source }),
            }
        }
        let h_free = h.min(sys.max_dt());
        let target = stops.get(next_stop).copied().unwrap_or(cfg.t_end).min(cfg.t_end);
        let landing = t + h_free >= target * (1.0 - 1e-14) - 1e-300;
        let h_step = if landing { target - t } else { h_free };

        let trial = match rk::trial(sys, t, h_step, &y, &k1, cfg.rtol, cfg.atol, &mut ws) {
            Ok(tr) => tr,
            Err(RhsError::NonFinite) => {
                res.rejected += 1;
                h = h_step * 0.25;
                continue;
            }
            Err(RhsError::Domain(source)) => return Err(SolverError::Eval { t, source }),
        };
        if trial.err > 1.0 {
            res.rejected += 1;
            h = h_step * ctrl.reject(trial.err);
            continue;
        }
        if trial.y.iter().any(|&v| v < -CLAMP_TOL) {
            res.rejected += 1;
            h = h_step * 0.5;
            continue;
        }

        // Accept.
        let t_new = if landing { target } else { t + h_step };
        let sup_old = sup_norm(&y);
        let sup_new = sup_norm(&trial.y);
        while next_level < levels.len() && sup_new >= levels[next_level] {
            let m = levels[next_level];
            let frac = if sup_old > 0.0 && sup_new > sup_old {
                ((m.ln() - sup_old.ln()) / (sup_new.ln() - sup_old.ln())).clamp(0.0, 1.0)
            } else {
                1.0
            };
            res.crossings.push(Crossing {
                level: m,
                t: t + frac * (t_new - t),
            });
            next_level += 1;
        }
        y = trial.y;
        k1 = trial.k_last;
        t = t_new;
        res.accepted += 1;
        res.last_dt = h_step;
        let factor = ctrl.accept(trial.err);
        h = if landing { h_free.max(h_step) * factor } else { h_step * factor };

        let due = t - last_sample.0 >= cfg.record_interval || sup_new >= 2.0 * last_sample.1 || landing;
        if due {
            record(&mut res, t, &y);
            last_sample = (t, sup_new);
        }
        if landing && next_stop < stops.len() && stops[next_stop] == t {
            res.snapshots.push(Snapshot { t, u: y.clone() });
            next_stop += 1;
        }
        if next_level == levels.len() {
            let taus: Vec<f64> = res.crossings.iter().map(|c| c.t).collect();
            if clustered(&taus) {
                if !due {
                    record(&mut res, t, &y);
                }
                let outcome = blowup(&res.crossings, res.last_dt);
                finish(&mut res, outcome, t, y);
                return Ok(res);
            }
        }
    }
}

/// Integrates the problem on `grid`.
pub fn run(spec: &ProblemSpec, grid: Grid1D, cfg: &SimConfig) -> Result<SimResult, SolverError> {
    spec.validate()?;
    if (grid.length() - spec.length).abs() > 1e-12 * spec.length {
        return Err(SolverError::Config("grid length differs from the problem length".into()));
    }
    let nodes = grid.nodes();
    let mut u0 = Vec::with_capacity(nodes.len());
    for &x in &nodes {
        u0.push(spec.u0.eval(x).map_err(|source| SolverError::Eval { t: 0.0, source })?);
    }
    let pde = Pde {
        spec,
        grid,
        theta: cfg.theta,
    };
    integrate_system(&pde, u0, 0.0, cfg, nodes)
}

/// Result of a single uncontrolled step.
pub fn step(spec: &ProblemSpec, grid: Grid1D, t: f64, dt: f64, u: &[f64]) -> Result<Trial, SolverError> {
    if !(dt > 0.0) || u.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Config("step needs a finite state and dt > 0".into()));
    }
    let pde = Pde { spec, grid, theta: 0.9 };
    let mut k1 = vec![0.0; u.len()];
    let map = |e: RhsError, t: f64| match e {
        RhsError::Domain(source) => SolverError::Eval { t, source },
        RhsError::NonFinite => SolverError::Eval {
            t,
            source: EvalError::Overflow { at: t },
        },
    };
    pde.rhs(t, u, &mut k1).map_err(|e| map(e, t))?;
    let mut ws = Workspace::new(u.len());
    rk::trial(&pde, t, dt, u, &k1, 1e-6, 1e-9, &mut ws).map_err(|e| map(e, t))
}

/// Scalar ODE `v' = rate(t, v)`.
struct Scalar<F> {
    rate: F,
}

impl<F: Fn(f64, f64) -> Result<f64, EvalError>> System for Scalar<F> {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsError> {
        dy[0] = (self.rate)(t, pde::clamp(y[0]))?;
        if dy[0].is_finite() {
            Ok(())
        } else {
            Err(RhsError::NonFinite)
        }
    }

    fn mass(&self, y: &[f64]) -> f64 {
        y[0]
    }
}

/// Solves `v' = rate(t, v)`, `v(t0) = v0`.
pub fn ode_solve_with<F>(rate: F, v0: f64, t0: f64, cfg: &SimConfig) -> Result<SimResult, SolverError>
where
    F: Fn(f64, f64) -> Result<f64, EvalError>,
{
    if !(v0 > 0.0) {
        return Err(SolverError::Config(format!("initial value must be positive, got {v0}")));
    }
    integrate_system(&Scalar { rate }, vec![v0], t0, cfg, Vec::new())
}

/// The two comparison ODEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonOde {
    /// `v' = (α − ξ) f(v)`, the lower comparison function for reaction blow-up.
    Lower,
    /// `v' = (α + ξ) f(v)`, the upper comparison function for global existence.
    Upper,
}

pub fn ode_solve(
    kind: ComparisonOde,
    alpha: &Expr,
    xi: &Expr,
    f: &Expr,
    v0: f64,
    t0: f64,
    cfg: &SimConfig,
) -> Result<SimResult, SolverError> {
    let sign = match kind {
        ComparisonOde::Lower => -1.0,
        ComparisonOde::Upper => 1.0,
    };
    ode_solve_with(|t, v| Ok((alpha.eval(t)? + sign * xi.eval(t)?) * f.eval(v)?), v0, t0, cfg)
}
