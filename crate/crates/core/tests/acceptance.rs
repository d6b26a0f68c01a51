//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use semiheat::analysis::{
    build_supersolution, check_m_inequality, choose_sigma, comparison_family, m_series, MBound,
    SupersolutionOptions, FAMILY_SIZE,
};
use semiheat::criteria::{
    blowup_bound_boundary_with, blowup_bound_reaction, classify, Confidence, Hypothesis, InnerIntegral, Outcome,
    ProblemSpec, Tier, Truth,
};
use semiheat::expr::Expr;
use semiheat::kernel::{green_eigen, green_eval, green_images, verify_properties, KernelSpec};
use semiheat::par::Execution;
use semiheat::solver::{run, Grid1D, SimConfig, SimOutcome};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn spec(f: &str, g: &str, alpha: &str, beta: &str, u0: &str) -> ProblemSpec {
    ProblemSpec::simple(1.0, f, g, alpha, beta, u0).expect("acceptance spec parses")
}

fn grid(n: usize) -> Grid1D {
    Grid1D::new(1.0, n).expect("valid grid")
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn blowup_time(outcome: SimOutcome) -> Result<(f64, f64), String> {
    match outcome {
        SimOutcome::BlowupDetected { t_num, t_err } => Ok((t_num, t_err)),
        other => Err(format!("expected blow-up, got {}", other.name())),
    }
}

fn reaction_blowup() -> Check {
    let start = Instant::now();
    let s = spec("s^2", "0", "1", "0", "1");
    let r = run(&s, grid(65), &SimConfig::with_horizon(2.0)).map_err(err)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (t_num, t_err) = blowup_time(r.outcome)?;
    // Spatially uniform data reduces to v' = v², v(0) = 1.
    let oracle = 1.0;
    let bound = blowup_bound_reaction(&s).map_err(err)?.finite().ok_or("no finite bound")?;
    ensure(
        (t_num - oracle).abs() <= 0.02 && t_num <= bound + 0.02 && elapsed < 10.0,
        format!("T_num = {t_num:.8} ± {t_err:.1e}, oracle 1, T_b = {bound:.8}, {elapsed:.2} s"),
    )
}

fn boundary_blowup() -> Check {
    let s = spec("0", "s^2", "0", "1", "1");
    // ∫_Ω ∫_1^∞ s⁻² ds dx = 1 = |∂Ω| T with |∂Ω| = 2.
    let oracle = 0.5;
    let closed = blowup_bound_boundary_with(&s, &s.g, InnerIntegral::Auto).map_err(err)?.finite().ok_or("closed form: no bound")?;
    let quad = blowup_bound_boundary_with(&s, &s.g, InnerIntegral::Quadrature)
        .map_err(err)?
        .finite()
        .ok_or("quadrature: no bound")?;
    let r = run(&s, grid(65), &SimConfig::with_horizon(1.0)).map_err(err)?;
    let (t_num, _) = blowup_time(r.outcome)?;
    ensure(
        (closed - oracle).abs() < 1e-8 && (quad - oracle).abs() < 1e-8 && t_num <= oracle + 0.02,
        format!("T_num = {t_num:.6}, bound closed form {closed:.10}, quadrature {quad:.10}"),
    )
}

fn global_cases() -> Check {
    let s = spec("s", "0", "1", "0", "1");
    let r = run(&s, grid(65), &SimConfig::with_horizon(5.0)).map_err(err)?;
    let growth = r.final_sup() / 5f64.exp();
    let a_ok = r.outcome == SimOutcome::ReachedHorizon && (growth - 1.0).abs() <= 0.01;

    let canonical = spec("s^2", "s^2", "exp(-t)", "exp(-t)", "0");
    let sup = build_supersolution(&canonical, 0.5, &SupersolutionOptions::default()).map_err(err)?;
    sup.check_invariants()?;
    let data = ProblemSpec {
        u0: Expr::constant(0.5 * sup.epsilon),
        ..canonical
    };
    let cfg = SimConfig {
        snapshot_times: sup.times.clone(),
        ..SimConfig::with_horizon(sup.horizon)
    };
    let u = run(&data, grid(sup.nodes().len()), &cfg).map_err(err)?;
    let d = sup.domination(&u).map_err(err)?;
    let last = sup.times.len() - 1;
    let envelope = sup.envelope(last);
    let b_ok = u.outcome == SimOutcome::ReachedHorizon
        && (u.t_final - 20.0).abs() < 1e-12
        && u.final_sup() <= envelope
        && d.max_excess <= 1e-8
        && d.times_compared == sup.times.len();
    ensure(
        a_ok && b_ok,
        format!(
            "(a) sup(5)/e^5 = {growth:.6}; (b) eps = {:.4e}, Y = {:.4}, sup u(20) = {:.4e} <= eps Y z(20) = {envelope:.4e}, max(u - ubar) = {:.2e}",
            sup.epsilon,
            sup.y_bound,
            u.final_sup(),
            d.max_excess
        ),
    )
}

fn stationary() -> Check {
    let s = spec("s - s^2", "0", "1", "0", "1");
    let r = run(&s, grid(65), &SimConfig::with_horizon(10.0)).map_err(err)?;
    let dev = r
        .series
        .iter()
        .map(|p| (p.sup - 1.0).abs().max((p.min - 1.0).abs()))
        .fold(0.0, f64::max);
    ensure(
        r.outcome == SimOutcome::ReachedHorizon && dev <= 1e-8,
        format!("max |u - 1| = {dev:.2e} on [0, 10]"),
    )
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn kernel_suite() -> Check {
    let ks = KernelSpec::new(1.0);
    let g = |x: f64, y: f64, t: f64| green_eval(&ks, x, y, t).unwrap_or(f64::NAN);
    let xs: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();

    let mut mass = 0.0f64;
    for k in 0..=12 {
        let t = 1e-3 * 1e4f64.powf(k as f64 / 12.0);
        for &x in &xs {
            mass = mass.max((simpson(|y| g(x, y, t), 0.0, 1.0, 4000) - 1.0).abs());
        }
    }

    let mut overlap = 0.0f64;
    for k in 0..=12 {
        let t = 1e-5 * 1e3f64.powf(k as f64 / 12.0);
        for &x in &xs {
            for &y in &xs {
                let a = green_eigen(&ks, x, y, t).map_err(err)?;
                let b = green_images(&ks, x, y, t).map_err(err)?;
                overlap = overlap.max((a - b).abs());
            }
        }
    }

    let mut semigroup = 0.0f64;
    for (t, s) in [(0.01, 0.01), (0.02, 0.05), (0.1, 0.3), (0.5, 1.0)] {
        for &x in &xs {
            for &y in &xs {
                let lhs = simpson(|z| g(x, z, t) * g(z, y, s), 0.0, 1.0, 4000);
                semigroup = semigroup.max((lhs - g(x, y, t + s)).abs());
            }
        }
    }

    let report = verify_properties(&ks, 1e-2, Execution::default()).map_err(err)?;
    let c3 = report.g4.constant("c3").ok_or("c3 not reported")?;
    let rel = (c3 / (PI * PI) - 1.0).abs();
    ensure(
        mass <= 1e-8 && overlap <= 1e-8 && semigroup <= 1e-8 && rel <= 0.02 && report.all_pass(),
        format!(
            "mass {mass:.2e}, overlap {overlap:.2e}, semigroup {semigroup:.2e}, c3 = {c3:.6} ({:.3}% from pi^2)",
            100.0 * rel
        ),
    )
}

fn classifier() -> Check {
    let cases = [
        (spec("s^2", "0", "1", "0", "1"), Outcome::BlowupReaction),
        (spec("0", "s^2", "0", "1", "1"), Outcome::BlowupBoundary),
        (spec("s^2", "s^2", "exp(-t)", "exp(-t)", "1"), Outcome::GlobalSmallData),
        (spec("s", "0", "1", "0", "1"), Outcome::GlobalAllData),
        (spec("s^2", "s", "1/(1+t)^2", "1", "1"), Outcome::Inconclusive),
        (spec("0", "s^0.5", "0", "1", "1"), Outcome::Inconclusive),
        (spec("0", "s^1", "0", "1", "1"), Outcome::Inconclusive),
        (spec("0", "s^2", "0", "1", "1"), Outcome::BlowupBoundary),
    ];
    let mut problems = Vec::new();
    let mut compared = 0;
    for (i, (s, want)) in cases.iter().enumerate() {
        let exact = classify(s, Tier::Auto).map_err(err)?;
        if exact.outcome != *want {
            problems.push(format!("case {i}: {} instead of {want}", exact.outcome));
        }
        let heuristic = classify(s, Tier::Heuristic).map_err(err)?;
        for h in Hypothesis::ALL {
            let e = exact.verdict(h);
            if e.confidence != Confidence::Exact || e.value == Truth::Unknown {
                continue;
            }
            compared += 1;
            let q = heuristic.verdict(h);
            if q.value != e.value {
                problems.push(format!("case {i} {}: exact {:?}, heuristic {:?}", h.label(), e.value, q.value));
            }
        }
    }
    ensure(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} outcomes match, {compared} exact verdicts reproduced by quadrature", cases.len())
        } else {
            problems.join("; ")
        },
    )
}

fn family() -> Check {
    let cases = comparison_family(20240601, FAMILY_SIZE, Execution::default()).map_err(err)?;
    let bad = cases.iter().filter(|c| !c.report.pass()).count();
    let worst = cases.iter().map(|c| c.report.max_excess).fold(f64::NEG_INFINITY, f64::max);
    ensure(
        bad == 0 && cases.len() == 10,
        format!("{} pairs, {bad} violations, largest excess {worst:.3e}", cases.len()),
    )
}

fn m_inequality() -> Check {
    let s = spec("0", "s^2", "0", "1", "1");
    let cfg = SimConfig {
        record_states: true,
        ..SimConfig::with_horizon(1.0)
    };
    let r = run(&s, grid(65), &cfg).map_err(err)?;
    let (t0, sigma) = choose_sigma(&r, 1e-3).ok_or("solution never positive")?;
    let ms = m_series(&r, &s.g, sigma, t0).map_err(err)?;
    let bound = MBound {
        beta: &s.beta,
        xi: None,
        gamma: None,
        h: &s.g,
        domain_measure: s.domain_measure(),
        boundary_measure: s.boundary_measure(),
    };
    let rep = check_m_inequality(&ms, &bound).map_err(err)?;
    ensure(
        rep.max_violation <= 5e-3 && rep.last < rep.first,
        format!(
            "max violation {:.2e} over {} intervals, m(t0) = {:.4}, m(last) = {:.4}",
            rep.max_violation, rep.intervals, rep.first, rep.last
        ),
    )
}

fn solver_order() -> Check {
    let s = spec("0", "0", "0", "0", "1 + cos(pi*x)");
    let decay = (-PI * PI * 0.1).exp();
    let mut errors = Vec::new();
    for n in [33, 65, 129] {
        let cfg = SimConfig {
            rtol: 1e-10,
            atol: 1e-13,
            ..SimConfig::with_horizon(0.1)
        };
        let r = run(&s, grid(n), &cfg).map_err(err)?;
        let e = r
            .nodes
            .iter()
            .zip(&r.state)
            .map(|(&x, &u)| (u - 1.0 - decay * (PI * x).cos()).abs())
            .fold(0.0, f64::max);
        errors.push(e);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(
        orders.iter().all(|p| (1.8..=2.2).contains(p)),
        format!(
            "errors {}, orders {}",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" "),
            orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut rows = 0;
    for name in ["sweep_alpha.scn", "sweep_flux.scn"] {
        let mut bodies = Vec::new();
        for w in ["1", "8"] {
            let out = dir.path().join(format!("{name}-{w}"));
            let status = Command::new(env!("CARGO_BIN_EXE_semiheat"))
                .args(["--out", out.to_str().unwrap(), "--workers", w, "sweep", "--scenario"])
                .arg(root.join(name))
                .output()
                .map_err(err)?;
            if !status.status.success() {
                return Err(format!("{name} with {w} workers: {}", String::from_utf8_lossy(&status.stderr)));
            }
            bodies.push(std::fs::read(out.join("sweep.csv")).map_err(err)?);
        }
        if bodies[0] != bodies[1] {
            return Err(format!("{name}: CSVs differ between 1 and 8 workers"));
        }
        rows += bodies[0].iter().filter(|&&b| b == b'\n').count() - 1;
    }
    Ok(format!("2 sweeps, {rows} rows, byte-identical for 1 and 8 workers"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("reaction blow-up oracle", reaction_blowup),
        ("boundary blow-up bound", boundary_blowup),
        ("global cases", global_cases),
        ("stationary solution", stationary),
        ("kernel suite", kernel_suite),
        ("classifier truth table", classifier),
        ("comparison monotonicity", family),
        ("m-functional inequality", m_inequality),
        ("solver order", solver_order),
        ("sweep determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
