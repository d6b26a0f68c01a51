//! Method-of-lines semi-discretization on a uniform grid.

use super::rk::{RhsError, System};
use super::SolverError;
use crate::criteria::ProblemSpec;

pub const MIN_NODES: usize = 16;

/// Uniform grid `x_i = i·Δx`, `i = 0..n`, `Δx = L/(n − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Grid1D, SolverError> {
        if n < MIN_NODES {
            return Err(SolverError::Config(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SolverError::Config(format!("grid length must be positive, got {length}")));
        }
        Ok(Grid1D { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoid rule on the grid.
    pub fn trapezoid(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let inner: f64 = v[1..n - 1].iter().sum();
        self.dx() * (0.5 * (v[0] + v[n - 1]) + inner)
    }
}

/// Values in `(-tol, 0)` are read as zero by `f` and `g`.
pub const CLAMP_TOL: f64 = 1e-10;

pub(crate) fn clamp(u: f64) -> f64 {
    if u < 0.0 && u > -CLAMP_TOL {
        0.0
    } else {
        u
    }
}

/// The semi-discrete system for a [`ProblemSpec`].
pub struct Pde<'a> {
    pub spec: &'a ProblemSpec,
    pub grid: Grid1D,
    /// Safety factor of the diffusion step cap `θ·Δx²/2`.
    pub theta: f64,
}

impl Pde<'_> {
    /// Outward fluxes at `x = 0` and `x = L`.
    pub fn fluxes(&self, t: f64, u: &[f64]) -> Result<(f64, f64), RhsError> {
        let n = u.len();
        let f0 = self.spec.boundary_flux(t, clamp(u[0]))?;
        let fl = self.spec.boundary_flux(t, clamp(u[n - 1]))?;
        Ok((f0, fl))
    }

    /// Source term `α(t) f(u) + offset(t)` at every node.
    fn sources(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<(), RhsError> {
        let alpha = self.spec.alpha.eval(t)?;
        let offset = match &self.spec.interior_offset {
            Some(e) => e.eval(t)?,
            None => 0.0,
        };
        let reactive = alpha != 0.0;
        for (o, &ui) in out.iter_mut().zip(u) {
            *o = offset + if reactive { alpha * self.spec.f.eval(clamp(ui))? } else { 0.0 };
        }
        Ok(())
    }

    /// `d/dt` of the trapezoid mass implied by the semi-discrete equations:
    /// the endpoint fluxes plus the trapezoid integral of the sources.
    pub fn mass_rate(&self, t: f64, u: &[f64]) -> Result<f64, RhsError> {
        let mut src = vec![0.0; u.len()];
        self.sources(t, u, &mut src)?;
        let (f0, fl) = self.fluxes(t, u)?;
        Ok(f0 + fl + self.grid.trapezoid(&src))
    }
}

impl System for Pde<'_> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), RhsError> {
        let n = u.len();
        let dx = self.grid.dx();
        let inv = 1.0 / (dx * dx);
        self.sources(t, u, du)?;
        let (f0, fl) = self.fluxes(t, u)?;
        // Ghost values u_{-1} = u_1 + 2Δx·flux0, u_n = u_{n-2} + 2Δx·fluxL.
        du[0] += (2.0 * (u[1] - u[0]) + 2.0 * dx * f0) * inv;
        for i in 1..n - 1 {
            du[i] += (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv;
        }
        du[n - 1] += (2.0 * (u[n - 2] - u[n - 1]) + 2.0 * dx * fl) * inv;
        if du.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(RhsError::NonFinite)
        }
    }

    fn mass(&self, u: &[f64]) -> f64 {
        self.grid.trapezoid(u)
    }

    fn max_dt(&self) -> f64 {
        let dx = self.grid.dx();
        self.theta * dx * dx / 2.0
    }
}
