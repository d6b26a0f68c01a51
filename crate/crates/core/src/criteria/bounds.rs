use super::{closed_form_tail, integral_tail_converges, CriteriaError, ProblemSpec, Tier};
use crate::expr::{check_shape_sampled, Expr, Interval, ShapeProperty};
use crate::quad::{integrate, tail_integral, Tolerance};

/// Upper bound on the blow-up time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupBound {
    /// The time `T` at which the right side reaches `lhs`.
    Finite { t_b: f64, lhs: f64 },
    /// The right side stays below `lhs` for all time; `rhs_limit` is its
    /// limit.
    NoFiniteBound { lhs: f64, rhs_limit: f64 },
}

impl BlowupBound {
    pub fn finite(&self) -> Option<f64> {
        match self {
            BlowupBound::Finite { t_b, .. } => Some(*t_b),
            BlowupBound::NoFiniteBound { .. } => None,
        }
    }
}

/// How the inner tail `∫_a^∞ ds/h` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerIntegral {
    /// Closed form for recognized families, quadrature otherwise.
    #[default]
    Auto,
    /// Always quadrature with extrapolation.
    Quadrature,
}

const OUTER_TOL: Tolerance = Tolerance { abs: 1e-8, rel: 1e-8 };
const MAX_DOUBLINGS: usize = 80;

/// `∫_a^∞ ds / den(s)` for `a > 0`.
pub fn tail_from(den: &Expr, a: f64, mode: InnerIntegral) -> Result<f64, CriteriaError> {
    if mode == InnerIntegral::Auto {
        if let Some(v) = closed_form_tail(den.canonicalize(), a) {
            return Ok(v);
        }
    }
    let tail = tail_integral(|s| 1.0 / den.eval(s).unwrap_or(f64::NAN), a)?;
    tail.value
        .ok_or_else(|| CriteriaError::precondition("inner tail integral does not converge", Some(a)))
}

/// Smallest `T` with `∫_0^T coef = target`, or the limit of the integral if
/// it never gets there.
fn solve_time(coef: &Expr, target: f64) -> Result<Result<f64, f64>, CriteriaError> {
    let tol = Tolerance { abs: 1e-14, rel: 1e-13 };
    let cumulative = |a: f64, b: f64| -> Result<f64, CriteriaError> {
        Ok(integrate(|t| coef.eval(t).unwrap_or(f64::NAN), a, b, tol)?.value)
    };
    if target <= 0.0 {
        return Ok(Ok(0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut acc_lo = 0.0;
    let mut acc_hi = cumulative(0.0, 1.0)?;
    let mut doublings = 0;
    while acc_hi < target {
        if doublings == MAX_DOUBLINGS {
            return Ok(Err(acc_hi));
        }
        let prev = acc_hi;
        lo = hi;
        acc_lo = acc_hi;
        hi *= 2.0;
        acc_hi += cumulative(lo, hi)?;
        doublings += 1;
        // The running integral has settled below the target.
        if doublings > 20 && acc_hi - prev <= 1e-15 * acc_hi.max(1.0) {
            let limit = match tail_integral(|t| coef.eval(t).unwrap_or(f64::NAN), 0.0)?.value {
                Some(v) => v.max(acc_hi),
                None => acc_hi,
            };
            return Ok(Err(limit));
        }
    }
    // Bisection on the monotone cumulative integral, accumulated from `lo`.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-15 * hi {
            break;
        }
        let acc_mid = acc_lo + cumulative(lo, mid)?;
        if acc_mid < target {
            lo = mid;
            acc_lo = acc_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Ok(0.5 * (lo + hi)))
}

fn finish(lhs: f64, coef: &Expr, scale: f64) -> Result<BlowupBound, CriteriaError> {
    Ok(match solve_time(coef, lhs / scale)? {
        Ok(t_b) => BlowupBound::Finite { t_b, lhs },
        Err(limit) => BlowupBound::NoFiniteBound {
            lhs,
            rhs_limit: scale * limit,
        },
    })
}

/// Bound from `∫_Ω ∫_{u0(x)}^∞ ds/g(s) dx = |∂Ω| ∫_0^T β`.
pub fn blowup_bound_boundary(spec: &ProblemSpec) -> Result<BlowupBound, CriteriaError> {
    blowup_bound_boundary_with(spec, &spec.g, InnerIntegral::Auto)
}

/// As [`blowup_bound_boundary`] with an explicit minorant `h ≤ g`.
pub fn blowup_bound_boundary_with(spec: &ProblemSpec, h: &Expr, mode: InnerIntegral) -> Result<BlowupBound, CriteriaError> {
    spec.validate()?;
    let axis = Interval::positive_axis();
    for prop in [ShapeProperty::Positive, ShapeProperty::Nondecreasing] {
        let c = check_shape_sampled(h, prop, axis);
        if !c.holds {
            return Err(CriteriaError::precondition(format!("h not {prop}"), c.witness));
        }
    }
    for s in axis.samples(1000) {
        let (Ok(hv), Ok(gv)) = (h.eval(s), spec.g.eval(s)) else {
            break;
        };
        if hv > gv * (1.0 + 1e-12) {
            return Err(CriteriaError::precondition("h exceeds g", Some(s)));
        }
    }
    let tier = if mode == InnerIntegral::Auto { Tier::Auto } else { Tier::Heuristic };
    if !integral_tail_converges(h, 1.0, tier)?.holds() {
        return Err(CriteriaError::precondition("tail of 1/h diverges", None));
    }
    let min_u0 = spec.min_initial()?;
    if !(min_u0 > 0.0) {
        return Err(CriteriaError::precondition("u0 must be positive", Some(min_u0)));
    }
    let mut failure = None;
    let outer = integrate(
        |x| {
            let a = spec.u0.eval(x).unwrap_or(f64::NAN);
            match tail_from(h, a, mode) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        spec.length,
        OUTER_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    finish(outer?.value, &spec.beta, spec.boundary_measure())
}

/// Bound from `∫_{min u0}^∞ ds/f(s) = ∫_0^T α`.
pub fn blowup_bound_reaction(spec: &ProblemSpec) -> Result<BlowupBound, CriteriaError> {
    blowup_bound_reaction_with(spec, InnerIntegral::Auto)
}

pub fn blowup_bound_reaction_with(spec: &ProblemSpec, mode: InnerIntegral) -> Result<BlowupBound, CriteriaError> {
    spec.validate()?;
    let pos = check_shape_sampled(&spec.f, ShapeProperty::Positive, Interval::positive_axis());
    if !pos.holds {
        return Err(CriteriaError::precondition("f not positive", pos.witness));
    }
    let min_u0 = spec.min_initial()?;
    if !(min_u0 > 0.0) {
        return Err(CriteriaError::precondition("min u0 must be positive", Some(min_u0)));
    }
    let lhs = tail_from(&spec.f, min_u0, mode)?;
    finish(lhs, &spec.alpha, 1.0)
}
