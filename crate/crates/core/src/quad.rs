//! Adaptive Gauss–Kronrod quadrature and an accelerated tail estimator for
//! improper integrals.

use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand not finite at {at}")]
    NonFinite { at: f64 },
}

/// Requested accuracy: stop once the error estimate is below
/// `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-13, rel: 1e-11 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { at: x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection of the
/// segment with the largest error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Quad, QuadError> {
    if a == b {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            converged: true,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let first = gk15(&mut f, lo, hi)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while error > tol.abs.max(tol.rel * value.abs()) && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment below floating-point resolution.
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the incremental updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Quad {
        value: sign * value,
        error,
        converged: error <= tol.abs.max(tol.rel * value.abs()),
    })
}

/// Successive partial integrals over `[a, b_k]`, `b_k = max(a, 1)·10^k`, and
/// their Aitken-accelerated limits.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub uppers: Vec<f64>,
    pub partials: Vec<f64>,
    pub accelerated: Vec<Option<f64>>,
    pub converged: bool,
    /// Extrapolated value of the improper integral when converged.
    pub value: Option<f64>,
}

/// Cauchy threshold on the accelerated partial sums over the last three
/// decades.
pub const TAIL_CAUCHY_TOL: f64 = 1e-6;
/// Decades `k` probed by [`tail_integral`].
pub const TAIL_DECADES: std::ops::RangeInclusive<i32> = 2..=8;

/// Heuristic decision of `∫_a^∞ f < ∞` for a nonnegative integrand.
///
/// Accelerated partials `A_k = I_k − d_k²/(d_k − d_{k−1})` are formed only
/// when the increments `d_k` shrink (`0 ≤ d_k/d_{k−1} < 1`); the integral is
/// declared convergent when the last three increments of `A_k` are below
/// [`TAIL_CAUCHY_TOL`] (relative once `|A| > 1`).
pub fn tail_integral<F: FnMut(f64) -> f64>(mut f: F, a: f64) -> Result<TailEstimate, QuadError> {
    let scale = a.max(1.0);
    let uppers: Vec<f64> = TAIL_DECADES.map(|k| scale * 10f64.powi(k)).collect();
    let mut partials = Vec::with_capacity(uppers.len());
    let mut acc = 0.0;
    let mut from = a;
    for &b in &uppers {
        // Each decade is integrated on its own so the adaptive bisection does
        // not have to discover the geometric scale.
        acc += integrate(&mut f, from, b, Tolerance { abs: 1e-15, rel: 1e-12 })?.value;
        partials.push(acc);
        from = b;
    }
    let mut accelerated = vec![None; partials.len()];
    for k in 2..partials.len() {
        let d_prev = partials[k - 1] - partials[k - 2];
        let d = partials[k] - partials[k - 1];
        let negligible = d.abs() <= 1e-15 * partials[k].abs().max(1e-300);
        accelerated[k] = if negligible {
            Some(partials[k])
        } else if d_prev != 0.0 && (0.0..1.0).contains(&(d / d_prev)) {
            Some(partials[k] - d * d / (d - d_prev))
        } else {
            None
        };
    }
    let n = accelerated.len();
    let last: Vec<Option<f64>> = accelerated[n - 4..].to_vec();
    let converged = last.iter().all(Option::is_some)
        && last.windows(2).all(|w| {
            let (x, y) = (w[0].unwrap(), w[1].unwrap());
            (y - x).abs() < TAIL_CAUCHY_TOL * y.abs().max(1.0)
        });
    let value = if converged { accelerated[n - 1] } else { None };
    Ok(TailEstimate {
        uppers,
        partials,
        accelerated,
        converged,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((q.value - 8.0).abs() < 1e-13);
        let q = integrate(|x| x, 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((q.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn peaked_and_singular_integrands() {
        let q = integrate(|x| (-(x - 0.3f64).powi(2) / 1e-4).exp(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((q.value - (std::f64::consts::PI * 1e-4).sqrt()).abs() < 1e-12);
        // Integrable endpoint singularity.
        let q = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance { abs: 1e-9, rel: 1e-9 }).unwrap();
        assert!((q.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn nonfinite_is_reported() {
        assert!(matches!(
            integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, Tolerance::default()),
            Err(QuadError::NonFinite { .. })
        ));
    }

    #[test]
    fn tail_power_laws() {
        let t = tail_integral(|s| 1.0 / (s * s), 1.0).unwrap();
        assert!(t.converged);
        assert!((t.value.unwrap() - 1.0).abs() < 1e-8);
        let t = tail_integral(|s| s.powf(-1.5), 1.0).unwrap();
        assert!(t.converged);
        assert!((t.value.unwrap() - 2.0).abs() < 1e-6);
        assert!(!tail_integral(|s| 1.0 / s, 1.0).unwrap().converged);
        assert!(!tail_integral(|s| s.powf(-0.5), 1.0).unwrap().converged);
        assert!(!tail_integral(|_| 1.0, 0.0).unwrap().converged);
        let t = tail_integral(|t| (-t).exp(), 0.0).unwrap();
        assert!(t.converged);
        assert!((t.value.unwrap() - 1.0).abs() < 1e-10);
    }
}
