//! Hypothesis predicates, the classifier and blow-up time
//! bounds.
//!
//! Every predicate has two tiers. The exact tier reads the leading term of the
//! relevant expression (at infinity or at zero) and decides the integral
//! condition from its parameters; the heuristic tier works from quadrature or
//! sampling alone. [`Tier::Heuristic`] forces the second tier everywhere, which
//! is how the exact decisions are cross-checked.

mod bounds;
mod problem;

use std::fmt;

use thiserror::Error;

use crate::expr::{check_shape, check_shape_sampled, CanonicalForm, EvalError, Expr, Interval, ShapeCheck, ShapeProperty, Term};
use crate::quad::{integrate, tail_integral, QuadError, Tolerance};

pub use bounds::{blowup_bound_boundary, blowup_bound_boundary_with, blowup_bound_reaction, blowup_bound_reaction_with, tail_from, BlowupBound, InnerIntegral};
pub use problem::{ProblemSpec, SpecError, SpecWarning};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("precondition violated: {what}{}", witness.map(|w| format!(" (witness {w})")).unwrap_or_default())]
    Precondition { what: String, witness: Option<f64> },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CriteriaError {
    fn precondition(what: impl Into<String>, witness: Option<f64>) -> CriteriaError {
        CriteriaError::Precondition {
            what: what.into(),
            witness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tier {
    /// Exact decisions where the form is recognized, heuristic otherwise.
    #[default]
    Auto,
    /// Quadrature and sampling only.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    Holds,
    Fails,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub value: Truth,
    pub confidence: Confidence,
    pub evidence: String,
    pub payload: Option<f64>,
}

impl Verdict {
    fn new(holds: bool, confidence: Confidence, evidence: impl Into<String>, payload: Option<f64>) -> Verdict {
        Verdict {
            value: if holds { Truth::Holds } else { Truth::Fails },
            confidence,
            evidence: evidence.into(),
            payload,
        }
    }

    fn exact(holds: bool, evidence: impl Into<String>, payload: Option<f64>) -> Verdict {
        Verdict::new(holds, Confidence::Exact, evidence, payload)
    }

    fn heuristic(holds: bool, evidence: impl Into<String>, payload: Option<f64>) -> Verdict {
        Verdict::new(holds, Confidence::Heuristic, evidence, payload)
    }

    fn unknown(evidence: impl Into<String>) -> Verdict {
        Verdict {
            value: Truth::Unknown,
            confidence: Confidence::Exact,
            evidence: evidence.into(),
            payload: None,
        }
    }

    fn from_shape(check: ShapeCheck, what: &str) -> Verdict {
        let confidence = if check.numerical_only {
            Confidence::Heuristic
        } else {
            Confidence::Exact
        };
        let evidence = match check.witness {
            Some(w) => format!("{what} fails at {w}"),
            None if check.numerical_only => format!("{what} on sampled grid"),
            None => format!("{what} from canonical form"),
        };
        Verdict::new(check.holds, confidence, evidence, None)
    }

    pub fn holds(&self) -> bool {
        self.value == Truth::Holds
    }

    /// Flips holds/fails, keeping confidence and payload.
    fn negated(mut self, evidence: impl Into<String>) -> Verdict {
        self.value = match self.value {
            Truth::Holds => Truth::Fails,
            Truth::Fails => Truth::Holds,
            Truth::Unknown => Truth::Unknown,
        };
        self.evidence = format!("{}; {}", evidence.into(), self.evidence);
        self
    }

    /// Conjunction; exact only if both parts are.
    fn and(self, other: Verdict) -> Verdict {
        let value = match (self.value, other.value) {
            (Truth::Fails, _) | (_, Truth::Fails) => Truth::Fails,
            (Truth::Holds, Truth::Holds) => Truth::Holds,
            _ => Truth::Unknown,
        };
        let confidence = if self.confidence == Confidence::Exact && other.confidence == Confidence::Exact {
            Confidence::Exact
        } else {
            Confidence::Heuristic
        };
        Verdict {
            value,
            confidence,
            evidence: format!("{}; {}", self.evidence, other.evidence),
            payload: self.payload.or(other.payload),
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::Holds => "holds",
            Truth::Fails => "fails",
            Truth::Unknown => "unknown",
        })
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Exact => "exact",
            Confidence::Heuristic => "heuristic",
        })
    }
}

fn shape(e: &Expr, property: ShapeProperty, iv: Interval, tier: Tier) -> ShapeCheck {
    match tier {
        Tier::Auto => check_shape(e, property, iv),
        Tier::Heuristic => check_shape_sampled(e, property, iv),
    }
}

fn describe(t: &Term) -> String {
    format!("c={} q={} lambda={} r={}", t.c, t.q, t.lambda, t.r)
}

/// Closed-form `∫_a^∞ ds / den(s)` for a recognized family, when finite.
pub(crate) fn closed_form_tail(form: CanonicalForm, a: f64) -> Option<f64> {
    match form {
        CanonicalForm::PowerLaw { c, q } if c > 0.0 && q > 1.0 && a > 0.0 => Some(a.powf(1.0 - q) / (c * (q - 1.0))),
        CanonicalForm::ExpLaw { c, lambda } if c > 0.0 && lambda > 0.0 => Some((-lambda * a).exp() / (c * lambda)),
        CanonicalForm::PowerLogLaw { c, q, r } if c > 0.0 && q == 1.0 && r > 1.0 && a > 1.0 => {
            Some(a.ln().powf(1.0 - r) / (c * (r - 1.0)))
        }
        _ => None,
    }
}

/// Convergence of `∫^∞ ds / den` decided from the leading term of `den`.
fn tail_converges_exact(lead: &Term) -> bool {
    if lead.lambda != 0.0 {
        lead.lambda > 0.0
    } else if lead.q != 1.0 {
        lead.q > 1.0
    } else {
        lead.r > 1.0
    }
}

/// Decides `∫_a^∞ ds / den(s) < ∞` ("holds" means convergent).
pub fn integral_tail_converges(den: &Expr, a: f64, tier: Tier) -> Result<Verdict, CriteriaError> {
    if !(a > 0.0) {
        return Err(CriteriaError::precondition("lower limit must be positive", Some(a)));
    }
    match den.eval(a) {
        Ok(v) if v > 0.0 => {}
        _ => return Err(CriteriaError::precondition("denominator not positive", Some(a))),
    }
    let pos = shape(den, ShapeProperty::Positive, Interval::new(a, f64::INFINITY), tier);
    if !pos.holds {
        return Err(CriteriaError::precondition("denominator not positive", pos.witness));
    }
    if tier == Tier::Auto {
        if let Some(lead) = den.leading_at_infinity().filter(|t| t.c > 0.0) {
            let converges = tail_converges_exact(&lead);
            let value = if converges {
                match closed_form_tail(den.canonicalize(), a) {
                    Some(v) => Some(v),
                    None => tail_integral(|s| 1.0 / den.eval(s).unwrap_or(f64::NAN), a)
                        .ok()
                        .and_then(|t| t.value),
                }
            } else {
                None
            };
            let evidence = format!(
                "leading term at infinity {}: tail {}",
                describe(&lead),
                if converges { "converges" } else { "diverges" }
            );
            return Ok(Verdict::exact(converges, evidence, value));
        }
    }
    let tail = tail_integral(|s| 1.0 / den.eval(s).unwrap_or(f64::NAN), a)?;
    let evidence = format!(
        "accelerated partial integrals to {:.0e}: last = {:.6e}",
        tail.uppers.last().copied().unwrap_or(f64::NAN),
        tail.partials.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Verdict::heuristic(tail.converged, evidence, tail.value))
}

/// Decides `∫_0^∞ coef(t) dt = ∞` ("holds" means divergent).
pub fn integral_time_diverges(coef: &Expr, tier: Tier) -> Result<Verdict, CriteriaError> {
    match coef.eval(0.0) {
        Ok(v) if v >= 0.0 => {}
        _ => return Err(CriteriaError::precondition("coefficient negative or undefined", Some(0.0))),
    }
    let nonneg = shape(coef, ShapeProperty::Nonnegative, Interval::positive_axis(), tier);
    if !nonneg.holds {
        return Err(CriteriaError::precondition("coefficient negative", nonneg.witness));
    }
    if tier == Tier::Auto {
        if coef.is_zero() {
            return Ok(Verdict::exact(false, "coefficient is identically zero", Some(0.0)));
        }
        if let Some(lead) = coef.leading_at_infinity().filter(|t| t.c > 0.0) {
            let diverges = if lead.lambda != 0.0 {
                lead.lambda > 0.0
            } else if lead.q != -1.0 {
                lead.q > -1.0
            } else {
                lead.r >= -1.0
            };
            let value = if diverges {
                None
            } else {
                match coef.canonicalize() {
                    CanonicalForm::ExpLaw { c, lambda } => Some(-c / lambda),
                    _ => tail_integral(|t| coef.eval(t).unwrap_or(f64::NAN), 0.0).ok().and_then(|t| t.value),
                }
            };
            let evidence = format!(
                "leading term at infinity {}: integral {}",
                describe(&lead),
                if diverges { "diverges" } else { "converges" }
            );
            return Ok(Verdict::exact(diverges, evidence, value));
        }
    }
    let tail = tail_integral(|t| coef.eval(t).unwrap_or(f64::NAN), 0.0)?;
    let evidence = format!(
        "accelerated partial integrals to {:.0e}: last = {:.6e}",
        tail.uppers.last().copied().unwrap_or(f64::NAN),
        tail.partials.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Verdict::heuristic(!tail.converged, evidence, tail.value))
}

/// The small-data hypotheses on `f` and `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallDataHypotheses {
    /// (1.12): `f` nonnegative and locally Hölder on `s ≥ 0`.
    pub holder: Verdict,
    /// (1.12b): `f` positive nondecreasing on some `(0, p)`; payload `p`.
    pub positive_nondecreasing: Verdict,
    /// (1.12a): `∫_0 ds/f = ∞` and `g(s)/s → 0`.
    pub near_zero: Verdict,
}

/// Candidate right ends for the (1.12b) interval, largest first.
const P_CANDIDATES: [f64; 5] = [1.0, 0.5, 0.1, 0.01, 1e-3];

pub fn small_s_conditions(f: &Expr, g: &Expr, tier: Tier) -> Result<SmallDataHypotheses, CriteriaError> {
    let form = if tier == Tier::Auto { f.canonicalize() } else { CanonicalForm::General };

    let holder = match form {
        CanonicalForm::Constant { c } => Verdict::exact(c >= 0.0, "constant", None),
        CanonicalForm::PowerLaw { c, q } => Verdict::exact(
            c >= 0.0 && q >= 0.0,
            format!("power law, exponent {q} {} 0", if q >= 0.0 { ">=" } else { "<" }),
            None,
        ),
        CanonicalForm::ExpLaw { c, .. } => Verdict::exact(c >= 0.0, "exponential, smooth", None),
        _ => {
            let at_zero = matches!(f.eval(0.0), Ok(v) if v >= 0.0);
            let nonneg = check_shape_sampled(f, ShapeProperty::Nonnegative, Interval::positive_axis());
            Verdict::heuristic(
                at_zero && nonneg.holds,
                "nonnegativity sampled; Hölder continuity assumed",
                None,
            )
        }
    };

    let positive_nondecreasing = match form {
        CanonicalForm::Constant { c } => Verdict::exact(c > 0.0, "constant", (c > 0.0).then_some(f64::INFINITY)),
        CanonicalForm::PowerLaw { c, q } => {
            let ok = c > 0.0 && q >= 0.0;
            Verdict::exact(ok, format!("power law c={c} q={q}"), ok.then_some(f64::INFINITY))
        }
        CanonicalForm::ExpLaw { c, lambda } => {
            let ok = c > 0.0 && lambda >= 0.0;
            Verdict::exact(ok, format!("exponential c={c} lambda={lambda}"), ok.then_some(f64::INFINITY))
        }
        _ => {
            let found = P_CANDIDATES.iter().copied().find(|&p| {
                let iv = Interval::new(0.0, p);
                check_shape_sampled(f, ShapeProperty::Positive, iv).holds
                    && check_shape_sampled(f, ShapeProperty::Nondecreasing, iv).holds
            });
            match found {
                Some(p) => Verdict::heuristic(true, format!("sampled on (0, {p})"), Some(p)),
                None => Verdict::heuristic(false, "no sampled interval (0, p) with p >= 1e-3", None),
            }
        }
    };

    let integral = near_zero_integral_diverges(f, tier)?;
    let ratio = flux_ratio_vanishes(g, tier);
    Ok(SmallDataHypotheses {
        holder,
        positive_nondecreasing,
        near_zero: integral.and(ratio),
    })
}

/// `∫_0 ds / f(s) = ∞`.
fn near_zero_integral_diverges(f: &Expr, tier: Tier) -> Result<Verdict, CriteriaError> {
    if tier == Tier::Auto {
        if f.is_zero() {
            return Ok(Verdict::exact(true, "f = 0: 1/f not integrable at 0", None));
        }
        if let Some(lead) = f.leading_at_zero().filter(|t| t.c > 0.0) {
            let diverges = lead.q >= 1.0;
            return Ok(Verdict::exact(
                diverges,
                format!("leading term at 0 has exponent {}: integral of 1/f {}", lead.q, if diverges { "diverges" } else { "converges" }),
                None,
            ));
        }
    }
    for k in 1..=9 {
        let s = 10f64.powi(-k);
        match f.eval(s) {
            Ok(v) if v > 0.0 => {}
            Ok(_) => return Ok(Verdict::heuristic(true, format!("f vanishes at s = {s:e}"), None)),
            Err(e) => return Err(e.into()),
        }
    }
    // ∫_{1/w}^{0.1} ds/f(s) = ∫_{10}^{w} dw / (w² f(1/w)).
    let tail = tail_integral(|w| 1.0 / (w * w * f.eval(1.0 / w).unwrap_or(f64::NAN)), 10.0)?;
    Ok(Verdict::heuristic(
        !tail.converged,
        format!(
            "accelerated partial integrals of 1/f down to s = {:.0e}",
            1.0 / tail.uppers.last().copied().unwrap_or(f64::NAN)
        ),
        None,
    ))
}

/// `lim_{s→0} g(s)/s = 0`.
fn flux_ratio_vanishes(g: &Expr, tier: Tier) -> Verdict {
    if tier == Tier::Auto {
        if g.is_zero() {
            return Verdict::exact(true, "g = 0", None);
        }
        if let Some(lead) = g.leading_at_zero() {
            let vanishes = lead.c == 0.0 || lead.q > 1.0;
            return Verdict::exact(
                vanishes,
                format!("g(s)/s ~ {} s^{}", lead.c, lead.q - 1.0),
                (!vanishes && lead.q == 1.0).then_some(lead.c),
            );
        }
    }
    let ratios: Vec<f64> = (1..=8)
        .map(|k| {
            let s = 10f64.powi(-k);
            g.eval(s).map(|v| (v / s).abs()).unwrap_or(f64::NAN)
        })
        .collect();
    let last = ratios[7];
    let vanishes = last == 0.0
        || ratios[4..]
            .windows(2)
            .all(|w| w[1] > 0.0 && (w[0] / w[1]).log10() > 1e-3);
    Verdict::heuristic(vanishes, format!("|g(s)/s| at s = 1e-8 is {last:.3e}"), None)
}

/// Geometric time grid points per decade for (1.14).
const K114_PER_DECADE: usize = 30;
const K114_T_MAX: f64 = 1e4;
const K114_STABLE_REL: f64 = 1e-3;

/// Weighted window integral `∫_{t−t0}^t β(τ)/√(t−τ) dτ` via `τ = t − r²`.
pub fn window_integral(beta: &Expr, t: f64, t0: f64) -> Result<f64, QuadError> {
    let q = integrate(
        |r| 2.0 * beta.eval(t - r * r).unwrap_or(f64::NAN),
        0.0,
        t0.sqrt(),
        Tolerance { abs: 1e-13, rel: 1e-11 },
    )?;
    Ok(q.value)
}

/// Checks `sup_{t ≥ γ} ∫_{t−t0}^t β(τ)/√(t−τ) dτ < ∞`; payload is the
/// observed sup.
pub fn kernel_bound_114(beta: &Expr, t0: f64, gamma_start: f64, tier: Tier) -> Result<Verdict, CriteriaError> {
    if !(t0 > 0.0 && gamma_start > t0) {
        return Err(CriteriaError::precondition("need 0 < t0 < gamma", Some(t0)));
    }
    let t_max = K114_T_MAX.max(10.0 * gamma_start);
    let decades = (t_max / gamma_start).log10();
    let n = ((decades * K114_PER_DECADE as f64).ceil() as usize).max(2);
    let mut running = Vec::with_capacity(n + 1);
    let mut sup = 0.0f64;
    let mut blew = None;
    for j in 0..=n {
        let t = gamma_start * (t_max / gamma_start).powf(j as f64 / n as f64);
        match window_integral(beta, t, t0) {
            Ok(w) => {
                sup = sup.max(w);
                running.push((t, sup));
            }
            Err(_) => {
                blew = Some(t);
                break;
            }
        }
    }
    let observed = blew.is_none().then_some(sup);

    if tier == Tier::Auto {
        let form = beta.canonicalize();
        let nonincreasing = match form {
            CanonicalForm::Constant { c } => c >= 0.0,
            CanonicalForm::PowerLaw { c, q } => c >= 0.0 && q <= 0.0,
            CanonicalForm::ExpLaw { c, lambda } => c >= 0.0 && lambda <= 0.0,
            _ => false,
        };
        if nonincreasing {
            let bound = beta.eval(gamma_start - t0)? * 2.0 * t0.sqrt();
            return Ok(Verdict::exact(
                true,
                format!("beta nonincreasing: sup <= beta(gamma - t0)*2*sqrt(t0) = {bound:.6e}"),
                observed,
            ));
        }
        if let Some(lead) = beta.leading_at_infinity().filter(|t| t.c > 0.0) {
            let unbounded = lead.lambda > 0.0 || (lead.lambda == 0.0 && (lead.q > 0.0 || (lead.q == 0.0 && lead.r > 0.0)));
            if unbounded {
                return Ok(Verdict::exact(
                    false,
                    format!("beta unbounded ({}): window integral unbounded", describe(&lead)),
                    observed,
                ));
            }
        }
    }

    if let Some(t) = blew {
        return Ok(Verdict::heuristic(false, format!("window integral not finite at t = {t:.3e}"), None));
    }
    let last_decade_start = t_max / 10.0;
    let at_start = running
        .iter()
        .rev()
        .find(|(t, _)| *t <= last_decade_start)
        .map(|p| p.1)
        .unwrap_or(running[0].1);
    let stable = sup <= at_start * (1.0 + K114_STABLE_REL) || sup == 0.0;
    Ok(Verdict::heuristic(
        stable,
        format!("running sup {at_start:.6e} -> {sup:.6e} over the last decade"),
        Some(sup),
    ))
}

/// Hypotheses evaluated by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hypothesis {
    GPositiveNondecreasing,
    BoundaryTail,
    BetaDiverges,
    FPositive,
    ReactionTail,
    AlphaDiverges,
    BetaZero,
    Holder,
    SmallPositive,
    NearZero,
    CoefficientsIntegrable,
    KernelWindow,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 12] = [
        Hypothesis::GPositiveNondecreasing,
        Hypothesis::BoundaryTail,
        Hypothesis::BetaDiverges,
        Hypothesis::FPositive,
        Hypothesis::ReactionTail,
        Hypothesis::AlphaDiverges,
        Hypothesis::BetaZero,
        Hypothesis::Holder,
        Hypothesis::SmallPositive,
        Hypothesis::NearZero,
        Hypothesis::CoefficientsIntegrable,
        Hypothesis::KernelWindow,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::GPositiveNondecreasing => "g positive nondecreasing",
            Hypothesis::BoundaryTail => "(01)",
            Hypothesis::BetaDiverges => "(1)",
            Hypothesis::FPositive => "f positive",
            Hypothesis::ReactionTail => "(21)",
            Hypothesis::AlphaDiverges => "(211)",
            Hypothesis::BetaZero => "beta = 0",
            Hypothesis::Holder => "(1.12)",
            Hypothesis::SmallPositive => "(1.12b)",
            Hypothesis::NearZero => "(1.12a)",
            Hypothesis::CoefficientsIntegrable => "(1.13)",
            Hypothesis::KernelWindow => "(1.14)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    BlowupBoundary,
    BlowupReaction,
    GlobalSmallData,
    GlobalAllData,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::BlowupBoundary => "BlowupBoundary",
            Outcome::BlowupReaction => "BlowupReaction",
            Outcome::GlobalSmallData => "GlobalSmallData",
            Outcome::GlobalAllData => "GlobalAllData",
            Outcome::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub outcome: Outcome,
    pub verdicts: Vec<(Hypothesis, Verdict)>,
    pub warnings: Vec<SpecWarning>,
}

impl Classification {
    pub fn verdict(&self, h: Hypothesis) -> &Verdict {
        &self
            .verdicts
            .iter()
            .find(|(k, _)| *k == h)
            .expect("classify records every hypothesis")
            .1
    }
}

/// The decision table. Pure in the verdict values.
pub fn decide(holds: impl Fn(Hypothesis) -> bool) -> Outcome {
    use Hypothesis::*;
    let fails = |h| !holds(h);
    if holds(GPositiveNondecreasing) && holds(BoundaryTail) && holds(BetaDiverges) {
        Outcome::BlowupBoundary
    } else if holds(FPositive) && holds(ReactionTail) && holds(AlphaDiverges) {
        Outcome::BlowupReaction
    } else if holds(BetaZero) && holds(FPositive) && fails(ReactionTail) {
        Outcome::GlobalAllData
    } else if [Holder, SmallPositive, NearZero, CoefficientsIntegrable, KernelWindow]
        .into_iter()
        .all(holds)
    {
        Outcome::GlobalSmallData
    } else {
        Outcome::Inconclusive
    }
}

/// Candidate window lengths searched for (1.14).
pub const K114_T0_GRID: [f64; 3] = [0.1, 1.0, 10.0];

/// Lower limit used for the `∫^∞` conditions (01) and (21).
const TAIL_FROM: f64 = 1.0;

pub fn classify(spec: &ProblemSpec, tier: Tier) -> Result<Classification, CriteriaError> {
    let warnings = spec.validate()?;
    let axis = Interval::positive_axis();
    let mut verdicts = Vec::new();

    let g_shape = Verdict::from_shape(shape(&spec.g, ShapeProperty::Positive, axis, tier), "g positive").and(
        Verdict::from_shape(shape(&spec.g, ShapeProperty::Nondecreasing, axis, tier), "g nondecreasing"),
    );
    let boundary_tail = if g_shape.holds() {
        integral_tail_converges(&spec.g, TAIL_FROM, tier)?
    } else {
        Verdict::unknown("g not positive nondecreasing: not evaluated")
    };
    verdicts.push((Hypothesis::GPositiveNondecreasing, g_shape));
    verdicts.push((Hypothesis::BoundaryTail, boundary_tail));
    verdicts.push((Hypothesis::BetaDiverges, integral_time_diverges(&spec.beta, tier)?));

    let f_pos = Verdict::from_shape(shape(&spec.f, ShapeProperty::Positive, axis, tier), "f positive");
    let reaction_tail = if f_pos.holds() {
        integral_tail_converges(&spec.f, TAIL_FROM, tier)?
    } else {
        Verdict::unknown("f not positive: not evaluated")
    };
    verdicts.push((Hypothesis::FPositive, f_pos));
    verdicts.push((Hypothesis::ReactionTail, reaction_tail));
    verdicts.push((Hypothesis::AlphaDiverges, integral_time_diverges(&spec.alpha, tier)?));

    let beta_zero = match tier {
        Tier::Auto if spec.beta.canonicalize() != CanonicalForm::General => {
            Verdict::exact(spec.beta.is_zero(), format!("beta is {}", spec.beta.canonicalize()), None)
        }
        _ => {
            let zero = Interval::new(0.0, K114_T_MAX)
                .samples(1000)
                .iter()
                .all(|&t| spec.beta.eval(t) == Ok(0.0));
            Verdict::heuristic(zero, "beta sampled on (0, 1e4)", None)
        }
    };
    verdicts.push((Hypothesis::BetaZero, beta_zero));

    let small = small_s_conditions(&spec.f, &spec.g, tier)?;
    verdicts.push((Hypothesis::Holder, small.holder));
    verdicts.push((Hypothesis::SmallPositive, small.positive_nondecreasing));
    verdicts.push((Hypothesis::NearZero, small.near_zero));

    let sum = spec.alpha.add(&spec.beta).map_err(|e| CriteriaError::precondition(e.to_string(), None))?;
    let integrable = integral_time_diverges(&sum, tier)?.negated("integral of alpha + beta");
    verdicts.push((Hypothesis::CoefficientsIntegrable, integrable));

    let mut best: Option<Verdict> = None;
    let mut fallback = None;
    for t0 in K114_T0_GRID {
        let mut v = kernel_bound_114(&spec.beta, t0, t0 + 1.0, tier)?;
        v.evidence = format!("t0 = {t0}, gamma = {}: {}", t0 + 1.0, v.evidence);
        if v.holds() {
            let better = match &best {
                None => true,
                Some(b) => v.payload.unwrap_or(f64::INFINITY) < b.payload.unwrap_or(f64::INFINITY),
            };
            if better {
                best = Some(v);
            }
        } else if t0 == 1.0 {
            fallback = Some(v);
        }
    }
    let window = best.or(fallback).expect("t0 = 1 is on the grid");
    verdicts.push((Hypothesis::KernelWindow, window));

    let outcome = decide(|h| verdicts.iter().any(|(k, v)| *k == h && v.holds()));
    Ok(Classification {
        outcome,
        verdicts,
        warnings,
    })
}

/// Structured text report, one hypothesis per line.
pub fn render_report(c: &Classification) -> String {
    let mut out = format!("classification: {}\n", c.outcome);
    for (h, v) in &c.verdicts {
        out.push_str(&format!("{}: {}, {}, {}", h.label(), v.value, v.confidence, v.evidence));
        if let Some(p) = v.payload {
            out.push_str(&format!(", value = {p:.10e}"));
        }
        out.push('\n');
    }
    for w in &c.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}
