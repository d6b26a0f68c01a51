use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{comparison_check, AnalysisError, ComparisonReport};
use crate::criteria::ProblemSpec;
use crate::par::{self, Execution};
use crate::solver::{run, Grid1D, SimConfig};

pub const FAMILY_SIZE: usize = 10;

const HORIZON: f64 = 0.5;
const GRID: usize = 33;

/// One ordered pair of initial data over a shared nondecreasing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCase {
    pub low: ProblemSpec,
    pub high: ProblemSpec,
    pub report: ComparisonReport,
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn draw_pair(rng: &mut ChaCha8Rng) -> (ProblemSpec, ProblemSpec) {
    let f = format!("{}*s^{}", fmt(rng.gen_range(0.0..1.0)), fmt(rng.gen_range(1.0..2.5)));
    let g = format!("{}*s^{}", fmt(rng.gen_range(0.0..1.0)), fmt(rng.gen_range(1.0..2.0)));
    let alpha = format!("{}*exp({}*t)", fmt(rng.gen_range(0.0..2.0)), fmt(-rng.gen_range(0.0..1.0)));
    let beta = format!("{}/(1 + t)", fmt(rng.gen_range(0.0..1.0)));
    let base = rng.gen_range(0.2..1.5);
    let amp = rng.gen_range(0.0..0.9);
    let k = rng.gen_range(1..4);
    let delta = rng.gen_range(0.01..0.2);
    let low = format!("{}*(1 + {}*cos({k}*pi*x))", fmt(base), fmt(amp));
    let high = format!("{low} + {}*(1 + x*(1 - x))", fmt(delta));
    let spec = |u0: &str| ProblemSpec::simple(1.0, &f, &g, &alpha, &beta, u0).expect("generated spec parses");
    (spec(&low), spec(&high))
}

/// Runs `count` ordered pairs drawn from `seed`; the draws are sequential so
/// the family does not depend on the execution mode.
pub fn comparison_family(seed: u64, count: usize, exec: Execution) -> Result<Vec<FamilyCase>, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(ProblemSpec, ProblemSpec)> = (0..count).map(|_| draw_pair(&mut rng)).collect();
    let cfg = SimConfig {
        snapshot_times: (0..=20).map(|j| HORIZON * j as f64 / 20.0).collect(),
        ..SimConfig::with_horizon(HORIZON)
    };
    let grid = Grid1D::new(1.0, GRID)?;
    par::map(exec, &pairs, |(low, high)| {
        let a = run(low, grid, &cfg)?;
        let b = run(high, grid, &cfg)?;
        Ok(FamilyCase {
            low: low.clone(),
            high: high.clone(),
            report: comparison_check(&a, &b)?,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_ordered_and_reproducible() {
        let a = comparison_family(7, 3, Execution::Sequential).unwrap();
        let b = comparison_family(7, 3, Execution::default()).unwrap();
        assert_eq!(a, b);
        for case in &a {
            assert!(case.report.pass(), "{:?}", case.report);
            assert!(case.report.max_excess < 0.0);
        }
    }
}
