//! Neumann heat kernel on `(0, L)` and numerical checks of its properties.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::par::{self, Execution};
use crate::quad::{integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },
}

/// Share of `tol` given to the dropped eigenseries tail; the rest is left
/// for rounding in the partial sum.
const TRUNCATION_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub length: f64,
    /// Absolute truncation tolerance of both series.
    pub tol: f64,
}

impl KernelSpec {
    pub fn new(length: f64) -> KernelSpec {
        KernelSpec { length, tol: 1e-12 }
    }

    /// Below this time the image series is used.
    pub fn crossover(&self) -> f64 {
        1e-6 * self.length * self.length
    }

    /// Smallest `N` whose dropped eigenseries tail is certified below a fraction of `tol`
    /// by the majorant `(2/L) e^{-a(N+1)²} / (1 − e^{-a(2N+3)})`,
    /// `a = (π/L)² t`.
    pub fn terms(&self, t: f64) -> usize {
        let a = (PI / self.length).powi(2) * t;
        let scale = 2.0 / self.length;
        // Start near the solution of scale·e^{-a N²} = tol, then walk.
        let guess = ((scale / self.tol).ln().max(0.0) / a).sqrt().floor() as usize;
        let mut n = guess.saturating_sub(2);
        loop {
            let m = (n + 1) as f64;
            let bound = scale * (-a * m * m).exp() / (1.0 - (-a * (2.0 * m + 1.0)).exp());
            if bound < TRUNCATION_MARGIN * self.tol {
                return n;
            }
            n += 1;
        }
    }

    fn check(&self, x: f64, y: f64, t: f64) -> Result<(), KernelError> {
        if !(t > 0.0) {
            return Err(KernelError::Domain { what: "t", value: t });
        }
        for (what, v) in [("x", x), ("y", y)] {
            if !(0.0..=self.length).contains(&v) {
                return Err(KernelError::Domain { what, value: v });
            }
        }
        Ok(())
    }
}

/// `G(x, y; t)` by the representation suited to `t`.
pub fn green_eval(ks: &KernelSpec, x: f64, y: f64, t: f64) -> Result<f64, KernelError> {
    if t < ks.crossover() {
        green_images(ks, x, y, t)
    } else {
        green_eigen(ks, x, y, t)
    }
}

/// Cosine eigenfunction expansion.
pub fn green_eigen(ks: &KernelSpec, x: f64, y: f64, t: f64) -> Result<f64, KernelError> {
    ks.check(x, y, t)?;
    let l = ks.length;
    let w = PI / l;
    let n = ks.terms(t);
    let (d, s) = ((x - y) / l, (x + y) / l);
    // cos·cos = ½[cos(kπd) + cos(kπs)], summed from the smallest terms up.
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        let kf = k as f64;
        sum += (cos_pi_multiple(kf, d) + cos_pi_multiple(kf, s)) * (-(kf * w).powi(2) * t).exp();
    }
    Ok(1.0 / l + sum / l)
}

/// `cos(π k u)` with the product `k u` reduced modulo 2 without rounding, so
/// the phase error does not grow with `k`.
fn cos_pi_multiple(k: f64, u: f64) -> f64 {
    let p = k * u;
    let err = k.mul_add(u, -p);
    let r = p - 2.0 * (0.5 * p).round();
    (PI * (r + err)).cos()
}

/// Method of images: Gaussians at `x ∓ y + 2nL`.
pub fn green_images(ks: &KernelSpec, x: f64, y: f64, t: f64) -> Result<f64, KernelError> {
    ks.check(x, y, t)?;
    let l = ks.length;
    let norm = 1.0 / (4.0 * PI * t).sqrt();
    let phi = |z: f64| norm * (-z * z / (4.0 * t)).exp();
    let pair = |n: f64| phi(x - y + 2.0 * n * l) + phi(x + y + 2.0 * n * l);
    let mut sum = pair(0.0);
    let mut n = 1.0;
    loop {
        let inc = pair(n) + pair(-n);
        sum += inc;
        // Images beyond |n| = 1 are farther than the kernel's width.
        if inc < ks.tol && n >= 2.0 {
            return Ok(sum);
        }
        n += 1.0;
    }
}

/// `G(x, 0; t) + G(x, L; t)`: the boundary integral over the two endpoints.
pub fn green_boundary_sum(ks: &KernelSpec, x: f64, t: f64) -> Result<f64, KernelError> {
    Ok(green_eval(ks, x, 0.0, t)? + green_eval(ks, x, ks.length, t)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub pass: bool,
    pub constants: Vec<(&'static str, f64)>,
}

impl PropertyResult {
    fn new(pass: bool, constants: Vec<(&'static str, f64)>) -> PropertyResult {
        PropertyResult { pass, constants }
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| *k == name).map(|p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub length: f64,
    pub eps: f64,
    pub g1: PropertyResult,
    pub g2: PropertyResult,
    pub g3: PropertyResult,
    pub g4: PropertyResult,
    pub g5: PropertyResult,
}

impl KernelReport {
    pub fn properties(&self) -> [(&'static str, &PropertyResult); 5] {
        [
            ("G1", &self.g1),
            ("G2", &self.g2),
            ("G3", &self.g3),
            ("G4", &self.g4),
            ("G5", &self.g5),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.properties().iter().all(|(_, p)| p.pass)
    }
}

impl fmt::Display for KernelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kernel L = {}, eps = {}", self.length, self.eps)?;
        for (name, p) in self.properties() {
            write!(f, "{name}: {}", if p.pass { "PASS" } else { "FAIL" })?;
            for (k, v) in &p.constants {
                write!(f, ", {k} = {v:.6e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

const G1_GRID: usize = 64;
const G2_TIMES: usize = 25;
const G2_T_RANGE: (f64, f64) = (1e-3, 10.0);
const G4_TIMES: usize = 200;
const FIT_FLOOR: f64 = 1e4;

/// Measures (G1)–(G5) on grids; constants are empirical.
pub fn verify_properties(ks: &KernelSpec, eps: f64, exec: Execution) -> Result<KernelReport, KernelError> {
    let l = ks.length;
    let l2 = l * l;
    let xs = linspace(0.0, l, G1_GRID);

    let sup_over_grid = |t: f64, pts: &[f64], op: &dyn Fn(f64) -> f64| -> Result<(f64, f64), KernelError> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in pts {
            for &y in pts {
                let v = op(green_eval(ks, x, y, t)?);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Ok((lo, hi))
    };

    // G1: nonnegativity over (x, y, t).
    let ts = geomspace(1e-6 * l2, 10.0 * l2, G1_GRID);
    let mins: Result<Vec<f64>, KernelError> = par::map(exec, &ts, |&t| Ok(sup_over_grid(t, &xs, &|g| g)?.0))
        .into_iter()
        .collect();
    let g1_min = mins?.into_iter().fold(f64::INFINITY, f64::min);
    let g1 = PropertyResult::new(g1_min >= -ks.tol, vec![("min", g1_min)]);

    // G2: unit mass.
    let g2_ts = geomspace(G2_T_RANGE.0 * l2, G2_T_RANGE.1 * l2, G2_TIMES);
    let g2_xs = linspace(0.0, l, 9);
    let devs: Result<Vec<f64>, KernelError> = par::map(exec, &g2_ts, |&t| {
        let mut worst = 0.0f64;
        for &x in &g2_xs {
            let mut err = None;
            let q = integrate(
                |y| match green_eval(ks, x, y, t) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                0.0,
                l,
                Tolerance { abs: 1e-13, rel: 1e-13 },
            )
            .expect("kernel values are finite");
            if let Some(e) = err {
                return Err(e);
            }
            worst = worst.max((q.value - 1.0).abs());
        }
        Ok(worst)
    })
    .into_iter()
    .collect();
    let g2_dev = devs?.into_iter().fold(0.0, f64::max);
    let g2 = PropertyResult::new(g2_dev <= 1e-8, vec![("max_mass_deviation", g2_dev)]);

    // G3 and G4 on t ≥ eps.
    let coarse = linspace(0.0, l, 33);
    let g4_ts = linspace(eps, 10.0 * l2, G4_TIMES);
    let rows: Result<Vec<(f64, f64)>, KernelError> = par::map(exec, &g4_ts, |&t| {
        let (min, _) = sup_over_grid(t, &xs, &|g| g)?;
        let (_, dev) = sup_over_grid(t, &coarse, &|g| (g - 1.0 / l).abs())?;
        Ok((min, dev))
    })
    .into_iter()
    .collect();
    let rows = rows?;
    let c1 = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let g3 = PropertyResult::new(c1 > 0.0, vec![("c1", c1)]);

    let fit: Vec<(f64, f64)> = g4_ts
        .iter()
        .zip(&rows)
        .filter(|(_, r)| r.1 > FIT_FLOOR * ks.tol)
        .map(|(&t, r)| (t, r.1.ln()))
        .collect();
    let upper = &fit[fit.len() / 2..];
    let c3 = if upper.len() >= 2 {
        let n = upper.len() as f64;
        let mt = upper.iter().map(|p| p.0).sum::<f64>() / n;
        let my = upper.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = upper.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        let sxx: f64 = upper.iter().map(|p| (p.0 - mt).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };
    let c2 = g4_ts
        .iter()
        .zip(&rows)
        .map(|(&t, r)| r.1 * (c3 * t).exp())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let g4 = PropertyResult::new(c3 > 0.0 && c2.is_finite() && c2 > 0.0, vec![("c2", c2), ("c3", c3)]);

    // G5: boundary sum times √t for t ≤ eps.
    let g5_ts = geomspace(1e-8 * l2, eps, 60);
    let sups: Result<Vec<f64>, KernelError> = par::map(exec, &g5_ts, |&t| {
        let mut worst = 0.0f64;
        for &x in &xs {
            worst = worst.max(t.sqrt() * green_boundary_sum(ks, x, t)?);
        }
        Ok(worst)
    })
    .into_iter()
    .collect();
    let c4 = sups?.into_iter().fold(0.0, f64::max);
    let g5 = PropertyResult::new(c4.is_finite() && c4 > 0.0, vec![("c4", c4)]);

    Ok(KernelReport {
        length: l,
        eps,
        g1,
        g2,
        g3,
        g4,
        g5,
    })
}
