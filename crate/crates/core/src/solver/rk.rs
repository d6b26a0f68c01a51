//! Bogacki–Shampine 3(2) embedded pair.

use crate::expr::EvalError;

/// Right-hand side failures. Overflow is recoverable by a smaller step;
/// domain errors are not.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsError {
    NonFinite,
    Domain(EvalError),
}

impl From<EvalError> for RhsError {
    fn from(e: EvalError) -> RhsError {
        match e {
            EvalError::Overflow { .. } => RhsError::NonFinite,
            other => RhsError::Domain(other),
        }
    }
}

/// First-order system `y' = F(t, y)`.
pub trait System {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsError>;
    /// Integral of the state used for the mass column.
    fn mass(&self, y: &[f64]) -> f64;
    /// Stability cap on the step.
    fn max_dt(&self) -> f64 {
        f64::INFINITY
    }
}

/// One trial step: the third-order solution and the scaled error norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub y: Vec<f64>,
    pub err: f64,
    /// `F(t + h, y_new)`, reused as the next first stage.
    pub k_last: Vec<f64>,
}

pub(crate) struct Workspace {
    k2: Vec<f64>,
    k3: Vec<f64>,
    tmp: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(n: usize) -> Workspace {
        Workspace {
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
pub(crate) fn trial<S: System + ?Sized>(
    sys: &S,
    t: f64,
    h: f64,
    y: &[f64],
    k1: &[f64],
    rtol: f64,
    atol: f64,
    ws: &mut Workspace,
) -> Result<Trial, RhsError> {
    let n = y.len();
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &ws.tmp, &mut ws.k2)?;
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.75 * h * ws.k2[i];
    }
    sys.rhs(t + 0.75 * h, &ws.tmp, &mut ws.k3)?;
    let mut y_new = vec![0.0; n];
    for i in 0..n {
        y_new[i] = y[i] + h * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * ws.k2[i] + 4.0 / 9.0 * ws.k3[i]);
        if !y_new[i].is_finite() {
            return Err(RhsError::NonFinite);
        }
    }
    let mut k4 = vec![0.0; n];
    sys.rhs(t + h, &y_new, &mut k4)?;
    let mut err = 0.0f64;
    for i in 0..n {
        // Difference between the third- and second-order solutions.
        let e = h * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * ws.k2[i] + 1.0 / 9.0 * ws.k3[i] - 1.0 / 8.0 * k4[i]);
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        err = err.max((e / scale).abs());
    }
    if !err.is_finite() {
        return Err(RhsError::NonFinite);
    }
    Ok(Trial { y: y_new, err, k_last: k4 })
}

/// PI step-size controller.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Controller {
    prev_err: f64,
}

const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.2;

impl Controller {
    pub(crate) fn new() -> Controller {
        Controller { prev_err: 1.0 }
    }

    /// Factor for the next step after an accepted step with error `err`.
    pub(crate) fn accept(&mut self, err: f64) -> f64 {
        let err = err.max(1e-10);
        let factor = SAFETY * err.powf(-0.7 / 3.0) * self.prev_err.powf(0.4 / 3.0);
        self.prev_err = err;
        factor.clamp(SHRINK_MIN, GROW_MAX)
    }

    pub(crate) fn reject(&self, err: f64) -> f64 {
        (SAFETY * err.powf(-1.0 / 3.0)).clamp(SHRINK_MIN, 0.9)
    }
}
