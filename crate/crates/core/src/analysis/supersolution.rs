use super::AnalysisError;
use crate::criteria::{classify, Hypothesis, Outcome, ProblemSpec, Tier};
use crate::expr::{parse, CanonicalForm, Expr};
use crate::quad::{integrate, tail_integral, Tolerance};
use crate::solver::{ode_solve_with, run, Grid1D, SimConfig, SimResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SupersolutionOptions {
    /// Horizon of the auxiliary run that measures `Y`, and of `z`.
    pub horizon: f64,
    /// Relative margin added to the observed sup of `y`.
    pub margin: f64,
    pub n: usize,
    /// Times at which `ū` is assembled; empty means every `horizon/40`.
    pub snapshot_times: Vec<f64>,
}

impl Default for SupersolutionOptions {
    fn default() -> Self {
        SupersolutionOptions {
            horizon: 20.0,
            margin: 0.05,
            n: 65,
            snapshot_times: Vec::new(),
        }
    }
}

/// `ū(x, t) = ε z(t) y(x, t)` on the snapshot times of the auxiliary run.
#[derive(Debug, Clone, PartialEq)]
pub struct Supersolution {
    pub epsilon: f64,
    pub a: f64,
    pub p: f64,
    /// Upper bound `Y` of `y`: observed sup times `1 + margin`.
    pub y_bound: f64,
    pub y_observed: f64,
    pub horizon: f64,
    pub margin: f64,
    pub xi: Expr,
    pub eta: Expr,
    /// `Y ∫_0^∞ (α + η)`.
    pub rhs: f64,
    /// `∫_{εY}^a ds/f` at the chosen `ε`.
    pub lhs: f64,
    /// Times shared by `y` and `z`.
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    /// The auxiliary run `y_t = y_xx`, `∂y/∂ν = ξ + β`, `y(·, 0) = 1`.
    pub y: SimResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationReport {
    /// `max (u − ū)` over shared times and nodes.
    pub max_excess: f64,
    /// `max sup_x u(·, t) − ε Y z(t)`.
    pub max_sup_excess: f64,
    pub times_compared: usize,
}

impl Supersolution {
    pub fn nodes(&self) -> &[f64] {
        &self.y.nodes
    }

    /// `ū(·, t_j)`.
    pub fn field(&self, j: usize) -> Vec<f64> {
        self.y.snapshots[j].u.iter().map(|&y| self.epsilon * self.z[j] * y).collect()
    }

    /// `ε Y z(t_j)`.
    pub fn envelope(&self, j: usize) -> f64 {
        self.epsilon * self.y_bound * self.z[j]
    }

    /// The construction's invariants: `εYz < a`, `z` nondecreasing and
    /// `1 ≤ y ≤ Y` up to the solver's absolute tolerance.
    pub fn check_invariants(&self) -> Result<(), String> {
        let tol = 10.0 * self.y.atol;
        for j in 0..self.times.len() {
            if !(self.envelope(j) < self.a) {
                return Err(format!("eps Y z = {} reaches a at t = {}", self.envelope(j), self.times[j]));
            }
            if j > 0 && self.z[j] < self.z[j - 1] {
                return Err(format!("z decreases at t = {}", self.times[j]));
            }
            let snap = &self.y.snapshots[j];
            if snap.u.iter().any(|&y| y < 1.0 - tol || y > self.y_bound) {
                return Err(format!("y leaves [1, Y] at t = {}", snap.t));
            }
        }
        Ok(())
    }

    /// Compares a run of the original problem with `ū` at the shared times.
    pub fn domination(&self, sim: &SimResult) -> Result<DominationReport, AnalysisError> {
        if sim.nodes != self.y.nodes {
            return Err(AnalysisError::MismatchedGrids);
        }
        let mut report = DominationReport {
            max_excess: f64::NEG_INFINITY,
            max_sup_excess: f64::NEG_INFINITY,
            times_compared: 0,
        };
        for (j, &t) in self.times.iter().enumerate() {
            let Some(snap) = sim.snapshot_at(t) else {
                continue;
            };
            let bar = self.field(j);
            let mut sup = f64::NEG_INFINITY;
            for (&u, &b) in snap.u.iter().zip(&bar) {
                report.max_excess = report.max_excess.max(u - b);
                sup = sup.max(u);
            }
            report.max_sup_excess = report.max_sup_excess.max(sup - self.envelope(j));
            report.times_compared += 1;
        }
        if report.times_compared == 0 {
            return Err(AnalysisError::Precondition("run shares no snapshot times with the supersolution".into()));
        }
        Ok(report)
    }
}

fn eval(e: &Expr, v: f64) -> Result<f64, AnalysisError> {
    e.eval(v).map_err(|e| AnalysisError::Precondition(e.to_string()))
}

fn quad_err(e: impl std::fmt::Display) -> AnalysisError {
    AnalysisError::Precondition(e.to_string())
}

/// `∫_0^∞ e(t) dt`, closed form for decaying exponentials.
fn time_integral(e: &Expr) -> Result<f64, AnalysisError> {
    match e.canonicalize() {
        CanonicalForm::ExpLaw { c, lambda } if lambda < 0.0 => return Ok(c / -lambda),
        _ if e.is_zero() => return Ok(0.0),
        _ => {}
    }
    let f = |t: f64| e.eval(t).unwrap_or(f64::NAN);
    let head = integrate(f, 0.0, 1.0, Tolerance::default()).map_err(quad_err)?.value;
    let tail = tail_integral(f, 1.0).map_err(quad_err)?;
    match tail.value {
        Some(v) => Ok(head + v),
        None => Err(AnalysisError::Precondition(format!("{} is not integrable on (0, inf)", e.root()))),
    }
}

/// `∫_lo^hi ds/f`, closed form for power laws.
fn inverse_integral(f: &Expr, lo: f64, hi: f64) -> Result<f64, AnalysisError> {
    if let CanonicalForm::PowerLaw { c, q } = f.canonicalize() {
        if c > 0.0 {
            return Ok(if q == 1.0 {
                (hi / lo).ln() / c
            } else {
                (hi.powf(1.0 - q) - lo.powf(1.0 - q)) / (c * (1.0 - q))
            });
        }
    }
    // s = e^w spreads the singular end over a long interval.
    let g = |w: f64| {
        let s = w.exp();
        s / f.eval(s).unwrap_or(f64::NAN)
    };
    let tol = Tolerance { abs: 1e-14, rel: 1e-10 };
    Ok(integrate(g, lo.ln(), hi.ln(), tol).map_err(quad_err)?.value)
}

/// Smallest `ε / (a/Y)` probed by the bisection.
const EPS_FLOOR: f64 = 1e-12;
/// Halvings of `ε` allowed while enforcing the boundary inequality.
const MAX_HALVINGS: usize = 60;

/// `g(s)/s ≤ 1/Y` on `(0, s_max]`, sampled on a log grid.
fn boundary_ratio_ok(g: &Expr, s_max: f64, y_bound: f64) -> Result<bool, AnalysisError> {
    for k in 0..=64 {
        let s = s_max * 10f64.powf(-8.0 * k as f64 / 64.0);
        if eval(g, s)? * y_bound > s {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Builds `ū = ε z y` for a spec classified GlobalSmallData, with `0 < a < p`.
pub fn build_supersolution(
    spec: &ProblemSpec,
    a: f64,
    opts: &SupersolutionOptions,
) -> Result<Supersolution, AnalysisError> {
    let class = classify(spec, Tier::Auto)?;
    if class.outcome != Outcome::GlobalSmallData {
        return Err(AnalysisError::Precondition(format!(
            "classification is {}, not GlobalSmallData",
            class.outcome
        )));
    }
    let p = class.verdict(Hypothesis::SmallPositive).payload.unwrap_or(f64::INFINITY);
    if !(a > 0.0 && a < p) {
        return Err(AnalysisError::Precondition(format!("a = {a} must lie in (0, {p})")));
    }
    if !(opts.horizon > 0.0 && opts.margin >= 0.0) {
        return Err(AnalysisError::Precondition("horizon must be positive and margin nonnegative".into()));
    }
    let times: Vec<f64> = if opts.snapshot_times.is_empty() {
        (0..=40).map(|j| opts.horizon * j as f64 / 40.0).collect()
    } else {
        opts.snapshot_times.clone()
    };

    let xi = parse("exp(-t)").expect("literal parses");
    let eta = xi.clone();
    let flux = xi.add(&spec.beta).map_err(quad_err)?;
    let aux = ProblemSpec {
        length: spec.length,
        f: Expr::constant(0.0),
        g: Expr::constant(0.0),
        alpha: Expr::constant(0.0),
        beta: Expr::constant(0.0),
        u0: Expr::constant(1.0),
        interior_offset: None,
        boundary_offset: Some(flux),
    };
    let cfg = SimConfig {
        snapshot_times: times.clone(),
        ..SimConfig::with_horizon(opts.horizon)
    };
    let y = run(&aux, Grid1D::new(spec.length, opts.n)?, &cfg)?;
    let y_observed = y.series.iter().map(|s| s.sup).fold(f64::NEG_INFINITY, f64::max);
    let y_bound = y_observed * (1.0 + opts.margin);

    let sum = spec.alpha.add(&eta).map_err(quad_err)?;
    let rhs = y_bound * time_integral(&sum)?;
    let eps_max = a / y_bound;
    let lhs_at = |eps: f64| inverse_integral(&spec.f, eps * y_bound, a);
    let lo_eps = EPS_FLOOR * eps_max;
    let lhs_lo = lhs_at(lo_eps)?;
    if !(lhs_lo > rhs) {
        return Err(AnalysisError::NoAdmissibleEpsilon { lhs: lhs_lo, rhs });
    }
    // `∫_{εY}^a ds/f` decreases in ε; bisect in log ε for equality.
    let (mut lo, mut hi) = (lo_eps.ln(), eps_max.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if lhs_at(mid.exp())? > rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut epsilon = 0.5 * lo.exp();

    let z_cfg = SimConfig {
        snapshot_times: times.clone(),
        ..SimConfig::with_horizon(opts.horizon)
    };
    for _ in 0..MAX_HALVINGS {
        let rate = |t: f64, z: f64| -> Result<f64, crate::expr::EvalError> {
            Ok((spec.alpha.eval(t)? + eta.eval(t)?) * spec.f.eval(epsilon * y_bound * z)? / epsilon)
        };
        let zr = ode_solve_with(rate, 1.0, 0.0, &z_cfg)?;
        let z: Vec<f64> = times
            .iter()
            .map(|&t| zr.snapshot_at(t).map(|s| s.u[0]))
            .collect::<Option<_>>()
            .ok_or_else(|| AnalysisError::Precondition("z did not reach the horizon".into()))?;
        let s_max = epsilon * y_bound * z.last().copied().unwrap_or(1.0);
        if boundary_ratio_ok(&spec.g, s_max, y_bound)? {
            return Ok(Supersolution {
                epsilon,
                a,
                p,
                y_bound,
                y_observed,
                horizon: opts.horizon,
                margin: opts.margin,
                xi,
                eta,
                rhs,
                lhs: lhs_at(epsilon)?,
                times,
                z,
                y,
            });
        }
        epsilon *= 0.5;
    }
    Err(AnalysisError::Precondition("g(s)/s does not fall below 1/Y near zero".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> ProblemSpec {
        ProblemSpec::simple(1.0, "s^2", "s^2", "exp(-t)", "exp(-t)", "0").unwrap()
    }

    #[test]
    fn integrals() {
        let e = parse("exp(-t)").unwrap();
        assert!((time_integral(&e).unwrap() - 1.0).abs() < 1e-15);
        let r = parse("1/(1 + t)^2").unwrap();
        assert!((time_integral(&r).unwrap() - 1.0).abs() < 1e-6);
        let f = parse("s^2").unwrap();
        assert!((inverse_integral(&f, 0.1, 0.5).unwrap() - 8.0).abs() < 1e-12);
        let f = parse("s^2 + 0*exp(s)").unwrap();
        assert!((inverse_integral(&f, 0.1, 0.5).unwrap() - 8.0).abs() < 1e-8);
    }

    #[test]
    fn canonical_construction() {
        let opts = SupersolutionOptions {
            horizon: 5.0,
            n: 33,
            ..SupersolutionOptions::default()
        };
        let s = build_supersolution(&canonical(), 0.5, &opts).unwrap();
        // Y ∫(e^{-t} + e^{-t}) = 2Y; the bisection oracle is 1/(ε*Y) − 2 = 2Y.
        assert!((s.rhs - 2.0 * s.y_bound).abs() < 1e-12);
        let eps_star = 1.0 / (s.y_bound * (2.0 * s.y_bound + 2.0));
        assert!(s.epsilon <= 0.5 * eps_star * (1.0 + 1e-9));
        assert!(s.lhs > s.rhs);
        assert!(s.epsilon < s.a / s.y_bound);
        let bar0 = s.field(0);
        assert!(bar0.iter().all(|&v| (v - s.epsilon).abs() < 1e-15));
        s.check_invariants().unwrap();
        assert!(s.y_observed > 1.0);
    }

    #[test]
    fn rejects_wrong_class_and_range() {
        let blowup = ProblemSpec::simple(1.0, "s^2", "0", "1", "0", "1").unwrap();
        let opts = SupersolutionOptions::default();
        assert!(matches!(build_supersolution(&blowup, 0.5, &opts), Err(AnalysisError::Precondition(_))));
        assert!(matches!(build_supersolution(&canonical(), -1.0, &opts), Err(AnalysisError::Precondition(_))));
    }
}
