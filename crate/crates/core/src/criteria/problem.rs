use std::fmt;

use thiserror::Error;

use crate::expr::{check_shape_sampled, parse, EvalError, Expr, Interval, ParseError, ShapeProperty, Symbol};

/// Problem instance on the interval `(0, L)`.
///
/// `interior_offset` is added to the right-hand side of the equation and
/// `boundary_offset` to the outward flux at both endpoints, which is how the
/// auxiliary comparison problems are expressed with the same solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub length: f64,
    pub f: Expr,
    pub g: Expr,
    pub alpha: Expr,
    pub beta: Expr,
    pub u0: Expr,
    pub interior_offset: Option<Expr>,
    pub boundary_offset: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("field `{field}`: {source}")]
    Parse {
        field: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("field `{field}` must be a function of `{expected}`, found `{found}`")]
    WrongVariable {
        field: &'static str,
        expected: Symbol,
        found: Symbol,
    },
    #[error("u0({x}) = {value} is negative")]
    NegativeInitialData { x: f64, value: f64 },
    #[error("u0 undefined at x = {x}: {source}")]
    InitialDataUndefined {
        x: f64,
        #[source]
        source: EvalError,
    },
    #[error("coefficient `{field}` is negative or undefined at t = {t}")]
    NegativeCoefficient { field: &'static str, t: f64 },
}

/// Non-fatal observations from [`ProblemSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpecWarning {
    /// `f` or `g` negative (or undefined) somewhere on `s > 0`.
    NegativeNonlinearity { field: &'static str, witness: f64 },
    /// `u0` does not satisfy the flux condition at `t = 0`.
    IncompatibleInitialData { endpoint: f64, mismatch: f64 },
}

impl fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecWarning::NegativeNonlinearity { field, witness } => {
                write!(f, "{field} is negative or undefined at s = {witness}")
            }
            SpecWarning::IncompatibleInitialData { endpoint, mismatch } => write!(
                f,
                "u0 violates the boundary condition at x = {endpoint} by {mismatch:.3e}"
            ),
        }
    }
}

/// Samples used for the sign checks on `[0, L]`.
const U0_SAMPLES: usize = 2001;
const COMPATIBILITY_TOL: f64 = 1e-6;

impl ProblemSpec {
    /// Parses every field. `None` offsets mean zero.
    #[allow(clippy::too_many_arguments)]
    pub fn parse(
        length: f64,
        f: &str,
        g: &str,
        alpha: &str,
        beta: &str,
        u0: &str,
        interior_offset: Option<&str>,
        boundary_offset: Option<&str>,
    ) -> Result<ProblemSpec, SpecError> {
        let field = |name: &'static str, text: &str, sym: Symbol| -> Result<Expr, SpecError> {
            let e = parse(text).map_err(|source| SpecError::Parse { field: name, source })?;
            match e.symbol() {
                Some(found) if found != sym => Err(SpecError::WrongVariable {
                    field: name,
                    expected: sym,
                    found,
                }),
                _ => Ok(e),
            }
        };
        let spec = ProblemSpec {
            length,
            f: field("f", f, Symbol::S)?,
            g: field("g", g, Symbol::S)?,
            alpha: field("alpha", alpha, Symbol::T)?,
            beta: field("beta", beta, Symbol::T)?,
            u0: field("u0", u0, Symbol::X)?,
            interior_offset: interior_offset
                .map(|t| field("interior_offset", t, Symbol::T))
                .transpose()?,
            boundary_offset: boundary_offset
                .map(|t| field("boundary_offset", t, Symbol::T))
                .transpose()?,
        };
        if !(length > 0.0) {
            return Err(SpecError::NonPositiveLength(length));
        }
        Ok(spec)
    }

    /// Shorthand for the common case without offsets.
    pub fn simple(length: f64, f: &str, g: &str, alpha: &str, beta: &str, u0: &str) -> Result<ProblemSpec, SpecError> {
        ProblemSpec::parse(length, f, g, alpha, beta, u0, None, None)
    }

    /// `|Ω|` for the interval.
    pub fn domain_measure(&self) -> f64 {
        self.length
    }

    /// `|∂Ω|`: counting measure on the two endpoints.
    pub fn boundary_measure(&self) -> f64 {
        2.0
    }

    pub fn has_offsets(&self) -> bool {
        let nonzero = |e: &Option<Expr>| e.as_ref().is_some_and(|e| !e.is_zero());
        nonzero(&self.interior_offset) || nonzero(&self.boundary_offset)
    }

    /// Hard invariants become errors; properties the solver can live with
    /// come back as warnings.
    pub fn validate(&self) -> Result<Vec<SpecWarning>, SpecError> {
        if !(self.length > 0.0) {
            return Err(SpecError::NonPositiveLength(self.length));
        }
        for i in 0..U0_SAMPLES {
            let x = self.length * i as f64 / (U0_SAMPLES - 1) as f64;
            let value = self
                .u0
                .eval(x)
                .map_err(|source| SpecError::InitialDataUndefined { x, source })?;
            if value < 0.0 {
                return Err(SpecError::NegativeInitialData { x, value });
            }
        }
        for (name, coef) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            match coef.eval(0.0) {
                Ok(v) if v >= 0.0 => {}
                _ => return Err(SpecError::NegativeCoefficient { field: name, t: 0.0 }),
            }
            let c = check_shape_sampled(coef, ShapeProperty::Nonnegative, Interval::positive_axis());
            if !c.holds {
                return Err(SpecError::NegativeCoefficient {
                    field: name,
                    t: c.witness.unwrap_or(0.0),
                });
            }
        }
        let mut warnings = Vec::new();
        for (name, e) in [("f", &self.f), ("g", &self.g)] {
            if !matches!(e.eval(0.0), Ok(v) if v >= 0.0) {
                warnings.push(SpecWarning::NegativeNonlinearity { field: name, witness: 0.0 });
                continue;
            }
            let c = check_shape_sampled(e, ShapeProperty::Nonnegative, Interval::positive_axis());
            if !c.holds {
                warnings.push(SpecWarning::NegativeNonlinearity {
                    field: name,
                    witness: c.witness.unwrap_or(f64::NAN),
                });
            }
        }
        warnings.extend(self.compatibility());
        Ok(warnings)
    }

    /// Outward flux `β(t)·g(u) + offset(t)` demanded at an endpoint.
    pub fn boundary_flux(&self, t: f64, u: f64) -> Result<f64, EvalError> {
        let mut flux = self.beta.eval(t)? * self.g.eval(u.max(0.0))?;
        if let Some(off) = &self.boundary_offset {
            flux += off.eval(t)?;
        }
        Ok(flux)
    }

    fn compatibility(&self) -> Vec<SpecWarning> {
        let l = self.length;
        let h = 1e-3 * l;
        // Third-order one-sided differences.
        let d = |x0: f64, dir: f64| -> Option<f64> {
            let u = |k: f64| self.u0.eval(x0 + dir * k * h).ok();
            let (u0, u1, u2, u3) = (u(0.0)?, u(1.0)?, u(2.0)?, u(3.0)?);
            Some(dir * (-11.0 * u0 + 18.0 * u1 - 9.0 * u2 + 2.0 * u3) / (6.0 * h))
        };
        let mut out = Vec::new();
        // Outward normal derivative: -u_x at 0, +u_x at L.
        for (x0, dir, sign) in [(0.0, 1.0, -1.0), (l, -1.0, 1.0)] {
            let (Some(ux), Ok(u)) = (d(x0, dir), self.u0.eval(x0)) else {
                continue;
            };
            let Ok(flux) = self.boundary_flux(0.0, u) else {
                continue;
            };
            let mismatch = (sign * ux - flux).abs();
            if mismatch > COMPATIBILITY_TOL {
                out.push(SpecWarning::IncompatibleInitialData { endpoint: x0, mismatch });
            }
        }
        out
    }

    /// Minimum of `u0` on `[0, L]` by dense sampling plus golden-section
    /// refinement around the best sample.
    pub fn min_initial(&self) -> Result<f64, SpecError> {
        let n = U0_SAMPLES;
        let l = self.length;
        let u = |x: f64| {
            self.u0
                .eval(x)
                .map_err(|source| SpecError::InitialDataUndefined { x, source })
        };
        let mut best = (0.0, u(0.0)?);
        for i in 1..n {
            let x = l * i as f64 / (n - 1) as f64;
            let v = u(x)?;
            if v < best.1 {
                best = (x, v);
            }
        }
        let step = l / (n - 1) as f64;
        let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(l));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if u(c)? < u(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        Ok(best.1.min(u(0.5 * (a + b))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let spec = ProblemSpec::simple(1.0, "s^2", "0", "1", "0", "1").unwrap();
        assert!(spec.validate().unwrap().is_empty());
        assert_eq!(spec.boundary_measure(), 2.0);
        assert_eq!(spec.domain_measure(), 1.0);
    }

    #[test]
    fn invariant_violations() {
        assert!(matches!(
            ProblemSpec::simple(0.0, "s", "0", "1", "0", "1"),
            Err(SpecError::NonPositiveLength(_))
        ));
        assert!(matches!(
            ProblemSpec::simple(1.0, "t^2", "0", "1", "0", "1"),
            Err(SpecError::WrongVariable { field: "f", .. })
        ));
        let spec = ProblemSpec::simple(1.0, "s", "0", "1", "0", "x - 0.5").unwrap();
        assert!(matches!(spec.validate(), Err(SpecError::NegativeInitialData { .. })));
        let spec = ProblemSpec::simple(1.0, "s", "0", "1", "-exp(-t)", "1").unwrap();
        assert!(matches!(spec.validate(), Err(SpecError::NegativeCoefficient { field: "beta", .. })));
        assert!(matches!(
            ProblemSpec::simple(1.0, "s +", "0", "1", "0", "1"),
            Err(SpecError::Parse { field: "f", .. })
        ));
    }

    #[test]
    fn warnings() {
        // Flux g(1) = 1 but u0 is flat.
        let spec = ProblemSpec::simple(1.0, "0", "s^2", "0", "1", "1").unwrap();
        let w = spec.validate().unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|w| matches!(w, SpecWarning::IncompatibleInitialData { .. })));
        let spec = ProblemSpec::simple(1.0, "s - s^2", "0", "1", "0", "1").unwrap();
        let w = spec.validate().unwrap();
        assert!(matches!(w[0], SpecWarning::NegativeNonlinearity { field: "f", .. }));
        // Zero slope at both ends.
        let spec = ProblemSpec::simple(1.0, "0", "0", "0", "0", "1 + 0.5*(1 - x^2)^2").unwrap();
        assert!(spec.validate().unwrap().is_empty());
    }

    #[test]
    fn min_initial_refines() {
        let spec = ProblemSpec::simple(1.0, "s", "0", "1", "0", "1 + (x - 0.3337)^2").unwrap();
        assert!((spec.min_initial().unwrap() - 1.0).abs() < 1e-12);
    }
}
