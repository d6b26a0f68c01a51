//! Sign and monotonicity checks on an interval.

use std::fmt;

use super::{CanonicalForm, Expr};

const SAMPLES: usize = 1000;
/// Upper end of the sampling grid when the interval is unbounded.
const SAMPLE_CEILING: f64 = 1e6;
/// Lower end of the sampling grid when the interval starts at zero.
const SAMPLE_FLOOR: f64 = 1e-8;

/// Open interval `(lo, hi)`; `hi` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn positive_axis() -> Interval {
        Interval::new(0.0, f64::INFINITY)
    }

    /// A representative interior point.
    fn witness(&self) -> f64 {
        if self.hi.is_finite() {
            0.5 * (self.lo + self.hi)
        } else {
            self.lo.max(0.0) + 1.0
        }
    }

    /// Sample points strictly inside the interval. Geometric spacing when the
    /// interval spans many decades.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let hi = self.hi.min(SAMPLE_CEILING.max(self.lo * 1e3));
        let lo = if self.lo <= 0.0 { SAMPLE_FLOOR.min(hi * 1e-3) } else { self.lo };
        let geometric = lo > 0.0 && hi / lo > 1e3;
        (0..n)
            .map(|i| {
                let frac = (i as f64 + 0.5) / n as f64;
                if geometric {
                    lo * (hi / lo).powf(frac)
                } else {
                    lo + (hi - lo) * frac
                }
            })
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeProperty {
    Nonnegative,
    Positive,
    Nondecreasing,
}

impl fmt::Display for ShapeProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeProperty::Nonnegative => "nonnegative",
            ShapeProperty::Positive => "positive",
            ShapeProperty::Nondecreasing => "nondecreasing",
        })
    }
}

/// Outcome of [`check_shape`]. `numerical_only` marks sampled verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCheck {
    pub holds: bool,
    pub witness: Option<f64>,
    pub numerical_only: bool,
}

impl ShapeCheck {
    fn exact(holds: bool, witness: f64) -> ShapeCheck {
        ShapeCheck {
            holds,
            witness: (!holds).then_some(witness),
            numerical_only: false,
        }
    }
}

/// Checks `property` of `e` on `interval`. Exact for recognized families,
/// sampled on a dense grid otherwise.
pub fn check_shape(e: &Expr, property: ShapeProperty, interval: Interval) -> ShapeCheck {
    match exact_shape(e.canonicalize(), property, interval) {
        Some(check) => check,
        None => check_shape_sampled(e, property, interval),
    }
}

fn exact_shape(form: CanonicalForm, property: ShapeProperty, iv: Interval) -> Option<ShapeCheck> {
    let w = iv.witness();
    // The families below are only analyzed on the positive axis.
    if iv.lo < 0.0 {
        return None;
    }
    let check = match (form, property) {
        (CanonicalForm::Constant { c }, ShapeProperty::Nonnegative) => ShapeCheck::exact(c >= 0.0, w),
        (CanonicalForm::Constant { c }, ShapeProperty::Positive) => ShapeCheck::exact(c > 0.0, w),
        (CanonicalForm::Constant { .. }, ShapeProperty::Nondecreasing) => ShapeCheck::exact(true, w),
        (CanonicalForm::PowerLaw { c, .. } | CanonicalForm::ExpLaw { c, .. }, ShapeProperty::Nonnegative) => {
            ShapeCheck::exact(c >= 0.0, w)
        }
        (CanonicalForm::PowerLaw { c, .. } | CanonicalForm::ExpLaw { c, .. }, ShapeProperty::Positive) => {
            ShapeCheck::exact(c > 0.0, w)
        }
        (CanonicalForm::PowerLaw { c, q }, ShapeProperty::Nondecreasing) => ShapeCheck::exact(c * q >= 0.0, w),
        (CanonicalForm::ExpLaw { c, lambda }, ShapeProperty::Nondecreasing) => {
            ShapeCheck::exact(c * lambda >= 0.0, w)
        }
        (CanonicalForm::PowerLogLaw { c, q, r }, prop) => {
            // Only decided where log v > 0.
            if iv.lo < 1.0 {
                return None;
            }
            match prop {
                ShapeProperty::Nonnegative => ShapeCheck::exact(c >= 0.0, w),
                ShapeProperty::Positive => ShapeCheck::exact(c > 0.0, w),
                ShapeProperty::Nondecreasing => {
                    // d/dv = c·v^{q-1}·(log v)^{r-1}·(q·log v + r); the last
                    // factor is affine in log v, so its endpoint signs decide.
                    let at_lo = q * iv.lo.ln() + r;
                    let at_hi = if iv.hi.is_finite() {
                        q * iv.hi.ln() + r
                    } else if q != 0.0 {
                        q * f64::INFINITY
                    } else {
                        r
                    };
                    let ok = if c >= 0.0 {
                        at_lo >= 0.0 && at_hi >= 0.0
                    } else {
                        at_lo <= 0.0 && at_hi <= 0.0
                    };
                    ShapeCheck::exact(ok, w)
                }
            }
        }
        (CanonicalForm::General, _) => return None,
    };
    Some(check)
}

/// The sampled check used for general expressions, also reachable directly to
/// cross-check the exact tier.
pub fn check_shape_sampled(e: &Expr, property: ShapeProperty, interval: Interval) -> ShapeCheck {
    let mut prev: Option<f64> = None;
    for v in interval.samples(SAMPLES) {
        let value = match e.eval(v) {
            Ok(y) => y,
            // Past the representable range the sampled grid ends.
            Err(crate::expr::EvalError::Overflow { .. }) => break,
            Err(_) => {
                return ShapeCheck {
                    holds: false,
                    witness: Some(v),
                    numerical_only: true,
                }
            }
        };
        // Likewise once a decaying value runs into underflow.
        if value.abs() < 1e-290 && prev.is_some_and(|p| p.abs() < 1e-200) {
            break;
        }
        let ok = match property {
            ShapeProperty::Nonnegative => value >= 0.0,
            ShapeProperty::Positive => value > 0.0,
            ShapeProperty::Nondecreasing => match prev {
                Some(p) => value >= p - 1e-12 * p.abs().max(value.abs()),
                None => true,
            },
        };
        if !ok {
            return ShapeCheck {
                holds: false,
                witness: Some(v),
                numerical_only: true,
            };
        }
        prev = Some(value);
    }
    ShapeCheck {
        holds: true,
        witness: None,
        numerical_only: true,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn shape(s: &str, p: ShapeProperty) -> ShapeCheck {
        check_shape(&parse(s).unwrap(), p, Interval::positive_axis())
    }

    #[test]
    fn exact_examples() {
        let c = shape("s^2", ShapeProperty::Nondecreasing);
        assert!(c.holds && !c.numerical_only);
        let c = shape("exp(-s)", ShapeProperty::Nondecreasing);
        assert!(!c.holds && !c.numerical_only && c.witness.is_some());
        assert!(!shape("0", ShapeProperty::Positive).holds);
        assert!(shape("0", ShapeProperty::Nonnegative).holds);
        assert!(!shape("1/s", ShapeProperty::Nondecreasing).holds);
    }

    #[test]
    fn general_forms_are_sampled() {
        let c = shape("s*exp(s)", ShapeProperty::Positive);
        assert!(c.holds && c.numerical_only);
        let c = shape("s - s^2", ShapeProperty::Nonnegative);
        assert!(!c.holds && c.numerical_only);
        assert!(c.witness.unwrap() > 1.0);
        let c = check_shape(
            &parse("s - s^2").unwrap(),
            ShapeProperty::Nondecreasing,
            Interval::new(0.0, 0.5),
        );
        assert!(c.holds);
    }

    #[test]
    fn power_log_monotonicity() {
        let e = parse("s*log(s)^2").unwrap();
        let c = check_shape(&e, ShapeProperty::Nondecreasing, Interval::new(1.0, f64::INFINITY));
        assert!(c.holds && !c.numerical_only);
        let e = parse("log(s)^-1").unwrap();
        let c = check_shape(&e, ShapeProperty::Nondecreasing, Interval::new(2.0, f64::INFINITY));
        assert!(!c.holds && !c.numerical_only);
        // Below one the sampled tier takes over.
        let c = check_shape(&e, ShapeProperty::Positive, Interval::new(0.0, 2.0));
        assert!(c.numerical_only);
    }

    #[test]
    fn exact_and_sampled_agree_on_families() {
        for text in ["s^2", "3*s^0.5", "exp(-s)", "2*exp(s)", "1/s^3", "-s", "4"] {
            let e = parse(text).unwrap();
            for prop in [ShapeProperty::Nonnegative, ShapeProperty::Positive, ShapeProperty::Nondecreasing] {
                let exact = check_shape(&e, prop, Interval::positive_axis());
                let sampled = check_shape_sampled(&e, prop, Interval::positive_axis());
                assert!(!exact.numerical_only);
                assert_eq!(exact.holds, sampled.holds, "{text} {prop}");
            }
        }
    }
}
