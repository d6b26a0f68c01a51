//! Numerical counterparts of the proof machinery: the functional
//! `m(t) = ∫_Ω ∫_{v(x,t)}^∞ ds/h(s) dx`, comparison between ordered runs,
//! the lower comparison problem with interior and boundary sinks, and the
//! supersolution `ε z(t) y(x,t)`.

mod family;
mod supersolution;

use thiserror::Error;

use crate::criteria::{tail_from, CriteriaError, InnerIntegral, ProblemSpec};
use crate::expr::{parse, Expr};
use crate::kernel::{green_boundary_sum, KernelError, KernelSpec};
use crate::solver::{SimResult, Snapshot, SolverError};

pub use family::{comparison_family, FamilyCase, FAMILY_SIZE};
pub use supersolution::{build_supersolution, Supersolution, SupersolutionOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("machinery inapplicable: v({x}, {t}) = {value} is not positive")]
    Inapplicable { t: f64, x: f64, value: f64 },
    #[error("runs are on different grids")]
    MismatchedGrids,
    #[error("no admissible epsilon: integral of 1/f is {lhs:.6e}, needs to exceed {rhs:.6e}")]
    NoAdmissibleEpsilon { lhs: f64, rhs: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Values of `m` on the recorded states of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub t0: f64,
    /// Recorded states with some `v ≤ σ`.
    pub below_sigma: usize,
}

fn trapezoid(nodes: &[f64], v: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(v.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Recorded states of a run: the full trace when present, else snapshots.
fn states(sim: &SimResult) -> &[Snapshot] {
    if sim.trace.is_empty() {
        &sim.snapshots
    } else {
        &sim.trace
    }
}

/// `m(t)` on every recorded state at or after `t0`.
pub fn m_series(sim: &SimResult, h: &Expr, sigma: f64, t0: f64) -> Result<MSeries, AnalysisError> {
    if sim.nodes.is_empty() {
        return Err(AnalysisError::Precondition("m needs a spatial run".into()));
    }
    let mut out = MSeries {
        times: Vec::new(),
        values: Vec::new(),
        sigma,
        t0,
        below_sigma: 0,
    };
    let mut inner = vec![0.0; sim.nodes.len()];
    for snap in states(sim).iter().filter(|s| s.t >= t0) {
        if let Some((i, &value)) = snap.u.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(AnalysisError::Inapplicable {
                t: snap.t,
                x: sim.nodes[i],
                value,
            });
        }
        if snap.u.iter().any(|&v| v <= sigma) {
            out.below_sigma += 1;
        }
        for (slot, &v) in inner.iter_mut().zip(&snap.u) {
            *slot = tail_from(h, v, InnerIntegral::Auto)?;
        }
        out.times.push(snap.t);
        out.values.push(trapezoid(&sim.nodes, &inner));
    }
    Ok(out)
}

/// Coefficients of the slope bound
/// `m' ≤ −|∂Ω|β(t) + (|Ω|ξ(t) + |∂Ω|γ(t)) / h(σ)`, in the run's time frame.
pub struct MBound<'a> {
    pub beta: &'a Expr,
    pub xi: Option<&'a Expr>,
    pub gamma: Option<&'a Expr>,
    pub h: &'a Expr,
    pub domain_measure: f64,
    pub boundary_measure: f64,
}

impl MBound<'_> {
    pub fn at(&self, t: f64, sigma: f64) -> Result<f64, AnalysisError> {
        let ev = |e: Option<&Expr>| -> Result<f64, AnalysisError> {
            match e {
                Some(e) => e.eval(t).map_err(|e| AnalysisError::Precondition(e.to_string())),
                None => Ok(0.0),
            }
        };
        let beta = ev(Some(self.beta))?;
        let (xi, gamma) = (ev(self.xi)?, ev(self.gamma)?);
        let mut bound = -self.boundary_measure * beta;
        if xi != 0.0 || gamma != 0.0 {
            let hs = self.h.eval(sigma).map_err(|e| AnalysisError::Precondition(e.to_string()))?;
            bound += (self.domain_measure * xi + self.boundary_measure * gamma) / hs;
        }
        Ok(bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MInequalityReport {
    /// Largest positive excess of the difference slope over the bound.
    pub max_violation: f64,
    pub at: f64,
    pub intervals: usize,
    pub first: f64,
    pub last: f64,
}

/// Shortest interval used for a difference slope; shorter steps near
/// blow-up are merged so rounding in `m` does not dominate.
const MIN_SLOPE_DT: f64 = 1e-9;

/// Compares difference slopes of `m` with the time average of the bound over
/// the same interval.
pub fn check_m_inequality(ms: &MSeries, bound: &MBound<'_>) -> Result<MInequalityReport, AnalysisError> {
    let n = ms.times.len();
    if n < 2 {
        return Err(AnalysisError::Precondition("m series needs two samples".into()));
    }
    let b: Vec<f64> = ms.times.iter().map(|&t| bound.at(t, ms.sigma)).collect::<Result<_, _>>()?;
    let mut report = MInequalityReport {
        max_violation: 0.0,
        at: ms.times[0],
        intervals: 0,
        first: ms.values[0],
        last: ms.values[n - 1],
    };
    let mut j = 0;
    while j + 1 < n {
        let mut k = j + 1;
        while k + 1 < n && ms.times[k] - ms.times[j] < MIN_SLOPE_DT {
            k += 1;
        }
        let dt = ms.times[k] - ms.times[j];
        if dt <= 0.0 {
            break;
        }
        let slope = (ms.values[k] - ms.values[j]) / dt;
        let avg: f64 = (j..k)
            .map(|i| 0.5 * (b[i] + b[i + 1]) * (ms.times[i + 1] - ms.times[i]))
            .sum::<f64>()
            / dt;
        let excess = slope - avg;
        if excess > report.max_violation {
            report.max_violation = excess;
            report.at = 0.5 * (ms.times[j] + ms.times[k]);
        }
        report.intervals += 1;
        j = k;
    }
    Ok(report)
}

/// `(t0, σ)` with `σ` half the minimum of the first recorded state whose
/// minimum exceeds `threshold`.
pub fn choose_sigma(sim: &SimResult, threshold: f64) -> Option<(f64, f64)> {
    sim.series.iter().find(|s| s.min > threshold).map(|s| (s.t, 0.5 * s.min))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `max (u_low − u_high)` over shared snapshot times and nodes.
    pub max_excess: f64,
    pub allowance: f64,
    pub times_compared: usize,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.max_excess <= COMPARISON_TOL + self.allowance
    }
}

pub const COMPARISON_TOL: f64 = 1e-8;

/// Pointwise excess of the lower run over the upper run at the snapshot
/// times both reached. The allowance is the larger step tolerance applied to
/// the largest compared value.
pub fn comparison_check(low: &SimResult, high: &SimResult) -> Result<ComparisonReport, AnalysisError> {
    if low.nodes != high.nodes {
        return Err(AnalysisError::MismatchedGrids);
    }
    let mut report = ComparisonReport {
        max_excess: f64::NEG_INFINITY,
        allowance: 0.0,
        times_compared: 0,
    };
    let mut scale = 0.0f64;
    for a in &low.snapshots {
        let Some(b) = high.snapshot_at(a.t) else {
            continue;
        };
        for (&ul, &uh) in a.u.iter().zip(&b.u) {
            report.max_excess = report.max_excess.max(ul - uh);
            scale = scale.max(ul.abs()).max(uh.abs());
        }
        report.times_compared += 1;
    }
    if report.times_compared == 0 {
        return Err(AnalysisError::Precondition("runs share no snapshot times".into()));
    }
    report.allowance = low.rtol.max(high.rtol) * scale + low.atol.max(high.atol);
    Ok(report)
}

/// The lower comparison problem started at `t0` from `2σ`, in shifted time
/// `τ = t − t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerProblem {
    pub spec: ProblemSpec,
    pub sigma: f64,
    pub t0: f64,
    /// Interior sink `ξ(τ)`, `∫ξ = σ/4`.
    pub xi: Expr,
    /// Boundary sink `γ(τ) = γ(0) e^{−λτ}` with `γ(0) = β(t0) h(2σ)`.
    pub gamma: Expr,
    pub gamma_rate: f64,
    /// Upper estimate of `sup_x ∫ γ(τ)(G(x,0;t−τ) + G(x,L;t−τ)) dτ`.
    pub gamma_integral: f64,
}

/// Constants `(c, d)` with `G(x,0;s) + G(x,L;s) ≤ c/√s + d` for all `s > 0`.
fn boundary_sum_envelope(ks: &KernelSpec) -> Result<(f64, f64), AnalysisError> {
    let l2 = ks.length * ks.length;
    let xs: Vec<f64> = (0..=32).map(|i| ks.length * i as f64 / 32.0).collect();
    let mut c = 0.0f64;
    for k in 0..=60 {
        let s = 1e-8 * l2 * (1e8f64).powf(k as f64 / 60.0);
        for &x in &xs {
            c = c.max(s.sqrt() * green_boundary_sum(ks, x, s)?);
        }
    }
    // For s ≥ L² only the even cosine modes survive in the endpoint sum:
    // 2/L + (4/L) Σ_j cos(2jπx/L) e^{−(2jπ)² s/L²}, bounded by its value at
    // s = L² with every cosine replaced by one.
    let pi2 = std::f64::consts::PI.powi(2);
    let tail: f64 = (1..=10).map(|j| (-4.0 * (j * j) as f64 * pi2).exp()).sum();
    Ok((c, (2.0 + 4.0 * tail) / ks.length))
}

/// Builds the lower comparison problem with `h` and defaults for `ξ`, `γ`.
pub fn lower_problem(spec: &ProblemSpec, h: &Expr, sigma: f64, t0: f64) -> Result<LowerProblem, AnalysisError> {
    if !(sigma > 0.0) {
        return Err(AnalysisError::Precondition(format!("sigma must be positive, got {sigma}")));
    }
    let ev = |e: &Expr, v: f64| e.eval(v).map_err(|e| AnalysisError::Precondition(e.to_string()));
    let gamma0 = ev(&spec.beta, t0)? * ev(h, 2.0 * sigma)?;
    let ks = KernelSpec::new(spec.length);
    let (c, d) = boundary_sum_envelope(&ks)?;
    // ∫_0^∞ e^{−λs}(c/√s + d) ds = c√(π/λ) + d/λ; pick λ so γ(0) times this
    // stays below σ/4.
    let envelope = |lam: f64| gamma0 * (c * (std::f64::consts::PI / lam).sqrt() + d / lam);
    let mut lam = 1.0;
    while envelope(lam) >= 0.25 * sigma {
        lam *= 2.0;
    }
    let xi = parse(&format!("{:?}*exp(-t)", 0.25 * sigma)).expect("generated expression parses");
    let gamma = parse(&format!("{gamma0:?}*exp({:?}*t)", -lam)).expect("generated expression parses");
    let neg = |e: &Expr| e.scale(-1.0);
    let lowered = ProblemSpec {
        length: spec.length,
        f: Expr::constant(0.0),
        g: h.clone(),
        alpha: Expr::constant(0.0),
        beta: spec.beta.shifted(t0),
        u0: Expr::constant(2.0 * sigma),
        interior_offset: Some(neg(&xi)),
        boundary_offset: Some(neg(&gamma)),
    };
    Ok(LowerProblem {
        spec: lowered,
        sigma,
        t0,
        xi,
        gamma,
        gamma_rate: lam,
        gamma_integral: envelope(lam),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run, Grid1D, SimConfig};

    fn snapshot_run(values: Vec<Vec<f64>>, times: Vec<f64>) -> SimResult {
        let n = values[0].len();
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let snapshots: Vec<Snapshot> = times.iter().zip(values).map(|(&t, u)| Snapshot { t, u }).collect();
        SimResult {
            series: Vec::new(),
            trace: Vec::new(),
            state: snapshots.last().unwrap().u.clone(),
            snapshots,
            crossings: Vec::new(),
            outcome: crate::solver::SimOutcome::ReachedHorizon,
            t_final: *times.last().unwrap(),
            nodes,
            last_dt: 0.0,
            accepted: 0,
            rejected: 0,
            rtol: 1e-6,
            atol: 1e-9,
        }
    }

    #[test]
    fn m_examples() {
        let h = parse("s^2").unwrap();
        let sim = snapshot_run(vec![vec![2.0; 17], vec![4.0; 17]], vec![0.0, 1.0]);
        let ms = m_series(&sim, &h, 0.5, 0.0).unwrap();
        assert!((ms.values[0] - 0.5).abs() < 1e-15);
        assert!((ms.values[1] - 0.25).abs() < 1e-15);
        let sim = snapshot_run(vec![vec![2.0; 17], vec![0.0; 17]], vec![0.0, 1.0]);
        assert!(matches!(m_series(&sim, &h, 0.5, 0.0), Err(AnalysisError::Inapplicable { .. })));
    }

    #[test]
    fn constant_state_has_zero_slope() {
        let h = parse("s^2").unwrap();
        let sim = snapshot_run(vec![vec![3.0; 17]; 5], vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let ms = m_series(&sim, &h, 1.0, 0.0).unwrap();
        let zero = Expr::constant(0.0);
        let b = MBound {
            beta: &zero,
            xi: None,
            gamma: None,
            h: &h,
            domain_measure: 1.0,
            boundary_measure: 2.0,
        };
        let r = check_m_inequality(&ms, &b).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert_eq!(r.intervals, 4);
    }

    #[test]
    fn comparison_identical_and_mismatched() {
        let a = snapshot_run(vec![vec![1.0; 17], vec![2.0; 17]], vec![0.0, 1.0]);
        let r = comparison_check(&a, &a).unwrap();
        assert_eq!(r.max_excess, 0.0);
        assert!(r.pass());
        let b = snapshot_run(vec![vec![1.0; 33]], vec![0.0]);
        assert_eq!(comparison_check(&a, &b), Err(AnalysisError::MismatchedGrids));
    }

    #[test]
    fn lower_problem_stays_above_sigma() {
        let spec = ProblemSpec::simple(1.0, "0", "s^2", "0", "1", "1").unwrap();
        let h = spec.g.clone();
        let lp = lower_problem(&spec, &h, 0.5, 0.0).unwrap();
        assert!(lp.gamma_integral < 0.25 * lp.sigma);
        let cfg = SimConfig {
            record_states: true,
            ..SimConfig::with_horizon(1.0)
        };
        let r = run(&lp.spec, Grid1D::new(1.0, 33).unwrap(), &cfg).unwrap();
        assert!(r.series.iter().all(|s| s.min > lp.sigma));
        let ms = m_series(&r, &h, lp.sigma, 0.0).unwrap();
        assert_eq!(ms.below_sigma, 0);
        let bound = MBound {
            beta: &lp.spec.beta,
            xi: Some(&lp.xi),
            gamma: Some(&lp.gamma),
            h: &h,
            domain_measure: 1.0,
            boundary_measure: 2.0,
        };
        let rep = check_m_inequality(&ms, &bound).unwrap();
        assert!(rep.max_violation <= 5e-3, "{rep:?}");
        assert!(rep.last < rep.first);
    }
}
