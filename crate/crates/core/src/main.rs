use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use semiheat::analysis::{
    build_supersolution, check_m_inequality, choose_sigma, comparison_check, comparison_family, lower_problem,
    m_series, AnalysisError, MBound, SupersolutionOptions, FAMILY_SIZE,
};
use semiheat::criteria::{classify, render_report, CriteriaError};
use semiheat::expr::parse;
use semiheat::kernel::{verify_properties, KernelSpec};
use semiheat::par::{with_workers, Execution};
use semiheat::report::{m_series_csv, predicted_bound, run_report, series_csv, snapshot_csv, summary_line};
use semiheat::scenario::{RawScenario, Scenario, ScenarioError};
use semiheat::solver::{run, Grid1D, SimConfig, SimOutcome, SolverError};
use semiheat::sweep::run_sweep;

#[derive(Parser)]
#[command(name = "semiheat", version, about = "Blow-up and global existence for semilinear heat equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for CSV and report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel work.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the hypotheses of the blow-up and global-existence criteria.
    Classify {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Integrate the problem and report the outcome.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Check the kernel properties G1-G5.
    VerifyKernel {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Numerical checks of the comparison machinery.
    Analyze {
        what: Analysis,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Seed of the randomized comparison family.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify and simulate every cell of a parameter grid.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Analysis {
    MSeries,
    Comparison,
    Supersolution,
    Family,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CriteriaError> for Failure {
    fn from(e: CriteriaError) -> Self {
        match e {
            CriteriaError::Precondition { .. } | CriteriaError::Spec(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(_) | SolverError::Spec(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Solver(s) => s.into(),
            AnalysisError::Criteria(c) => c.into(),
            AnalysisError::Kernel(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn write(&self, name: &str, body: &str) -> Result<(), Failure> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(name);
        fs::create_dir_all(dir)
            .and_then(|_| fs::write(&path, body))
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Ok(Scenario::parse(&read(path)?)?)
}

fn simulate(sc: &Scenario) -> Result<semiheat::solver::SimResult, Failure> {
    let grid = Grid1D::new(sc.spec.length, sc.grid_n)?;
    Ok(run(&sc.spec, grid, &sc.sim)?)
}

/// Returns `true` when the run ended on the step floor.
fn cmd_simulate(sc: &Scenario, out: &Output) -> Result<bool, Failure> {
    let class = classify(&sc.spec, sc.tier).ok();
    let bound = predicted_bound(&sc.spec, class.as_ref());
    let sim = simulate(sc)?;
    println!("{}", summary_line(&sim, bound));
    out.write(&sc.outputs.series, &series_csv(&sim))?;
    for (j, snap) in sim.snapshots.iter().enumerate() {
        out.write(&format!("{}_{j:03}.csv", sc.outputs.snapshots), &snapshot_csv(&sim.nodes, snap))?;
    }
    let mut report = run_report(&sim, bound);
    for (j, snap) in sim.snapshots.iter().enumerate() {
        report.push_str(&format!("snapshot {j:03}: t = {}\n", snap.t));
    }
    out.write(&sc.outputs.report, &report)?;
    Ok(matches!(sim.outcome, SimOutcome::StepFloorHit { .. }))
}

fn cmd_analyze(what: Analysis, sc: Option<&Scenario>, seed: u64, out: &Output) -> Result<(), Failure> {
    if let Analysis::Family = what {
        let cases = comparison_family(seed, FAMILY_SIZE, Execution::default())?;
        let mut text = String::new();
        for (i, c) in cases.iter().enumerate() {
            text.push_str(&format!(
                "pair {i}: {}, max excess = {:.3e}, allowance = {:.3e}\n",
                if c.report.pass() { "PASS" } else { "FAIL" },
                c.report.max_excess,
                c.report.allowance
            ));
        }
        let failed = cases.iter().filter(|c| !c.report.pass()).count();
        text.push_str(&format!("family seed {seed}: {failed} violations in {} pairs\n", cases.len()));
        print!("{text}");
        return out.write("family.txt", &text);
    }
    let sc = sc.ok_or_else(|| Failure::Input("this analysis needs --scenario".into()))?;
    let grid = Grid1D::new(sc.spec.length, sc.grid_n)?;
    let mut text = String::new();
    match what {
        Analysis::MSeries => {
            let h = sc.analysis.h.clone().unwrap_or_else(|| sc.spec.g.clone());
            let cfg = SimConfig {
                record_states: true,
                ..sc.sim.clone()
            };
            let sim = run(&sc.spec, grid, &cfg)?;
            let (t0, sigma) = choose_sigma(&sim, sc.analysis.sigma_threshold)
                .ok_or_else(|| Failure::Input("solution never exceeds the positivity threshold".into()))?;
            let ms = m_series(&sim, &h, sigma, t0)?;
            let bound = MBound {
                beta: &sc.spec.beta,
                xi: None,
                gamma: None,
                h: &h,
                domain_measure: sc.spec.domain_measure(),
                boundary_measure: sc.spec.boundary_measure(),
            };
            let r = check_m_inequality(&ms, &bound)?;
            text.push_str(&format!(
                "m-series: t0 = {t0}, sigma = {sigma:.6e}, samples = {}\nmax violation: {:.3e} at t = {:.6}\nm(t0) = {:.6e}, m(last) = {:.6e}, decreasing: {}\n",
                ms.times.len(),
                r.max_violation,
                r.at,
                r.first,
                r.last,
                r.last < r.first
            ));
            out.write("m_series.csv", &m_series_csv(&ms))?;
            if sc.analysis.lower_problem {
                let lp = lower_problem(&sc.spec, &h, sigma, t0)?;
                let lcfg = SimConfig {
                    t_end: (sc.sim.t_end - t0).max(0.0),
                    record_states: true,
                    ..sc.sim.clone()
                };
                let low = run(&lp.spec, grid, &lcfg)?;
                let lms = m_series(&low, &h, sigma, 0.0)?;
                let lb = MBound {
                    beta: &lp.spec.beta,
                    xi: Some(&lp.xi),
                    gamma: Some(&lp.gamma),
                    ..bound
                };
                let lr = check_m_inequality(&lms, &lb)?;
                text.push_str(&format!(
                    "lower problem: gamma rate = {:.3e}, boundary sink integral = {:.3e}, below sigma = {}, max violation = {:.3e}, outcome = {}\n",
                    lp.gamma_rate,
                    lp.gamma_integral,
                    lms.below_sigma,
                    lr.max_violation,
                    low.outcome.name()
                ));
            }
        }
        Analysis::Comparison => {
            let u0 = sc
                .analysis
                .comparison_u0
                .as_deref()
                .ok_or_else(|| Failure::Input("analysis.comparison_u0 is required".into()))?;
            let high_spec = semiheat::criteria::ProblemSpec {
                u0: parse(u0).map_err(|e| Failure::Input(e.to_string()))?,
                ..sc.spec.clone()
            };
            let cfg = if sc.sim.snapshot_times.is_empty() {
                SimConfig {
                    snapshot_times: (0..=20).map(|j| sc.sim.t_end * j as f64 / 20.0).collect(),
                    ..sc.sim.clone()
                }
            } else {
                sc.sim.clone()
            };
            let low = run(&sc.spec, grid, &cfg)?;
            let high = run(&high_spec, grid, &cfg)?;
            let r = comparison_check(&low, &high)?;
            text.push_str(&format!(
                "comparison: {}, max excess = {:.3e}, allowance = {:.3e}, times = {}\n",
                if r.pass() { "PASS" } else { "FAIL" },
                r.max_excess,
                r.allowance,
                r.times_compared
            ));
        }
        Analysis::Supersolution => {
            let a = sc
                .analysis
                .supersolution_a
                .ok_or_else(|| Failure::Input("analysis.supersolution_a is required".into()))?;
            let opts = SupersolutionOptions {
                horizon: sc.analysis.supersolution_horizon,
                margin: sc.analysis.supersolution_margin,
                n: sc.grid_n,
                snapshot_times: sc.sim.snapshot_times.clone(),
            };
            let s = build_supersolution(&sc.spec, a, &opts)?;
            let spec = semiheat::criteria::ProblemSpec {
                u0: semiheat::expr::Expr::constant(0.5 * s.epsilon),
                ..sc.spec.clone()
            };
            let cfg = SimConfig {
                t_end: s.horizon,
                snapshot_times: s.times.clone(),
                ..sc.sim.clone()
            };
            let u = run(&spec, grid, &cfg)?;
            let d = s.domination(&u)?;
            let last = s.times.len() - 1;
            text.push_str(&format!(
                "supersolution: a = {a}, p = {}, Y = {:.6} (observed {:.6}, margin {}, horizon {})\nepsilon = {:.6e}, integral of 1/f = {:.6e} > {:.6e}\neps Y z(T) = {:.6e}, invariants: {}\nu0 = epsilon/2: max(u - ubar) = {:.3e}, max(sup u - eps Y z) = {:.3e}, outcome = {}\n",
                s.p,
                s.y_bound,
                s.y_observed,
                s.margin,
                s.horizon,
                s.epsilon,
                s.lhs,
                s.rhs,
                s.envelope(last),
                match s.check_invariants() {
                    Ok(()) => "hold".to_string(),
                    Err(e) => e,
                },
                d.max_excess,
                d.max_sup_excess,
                u.outcome.name()
            ));
        }
        Analysis::Family => unreachable!(),
    }
    print!("{text}");
    out.write(&sc.outputs.report, &text)
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    let out = Output { dir: cli.out };
    match cli.command {
        Command::Classify { scenario } => {
            let sc = load(&scenario)?;
            let c = classify(&sc.spec, sc.tier)?;
            let text = render_report(&c);
            print!("{text}");
            out.write(&sc.outputs.report, &text)?;
        }
        Command::Simulate { scenario } => {
            if cmd_simulate(&load(&scenario)?, &out)? {
                return Ok(ExitCode::from(3));
            }
        }
        Command::VerifyKernel { scenario, length, eps } => {
            let sc = scenario.map(|p| load(&p)).transpose()?;
            let l = length.or(sc.as_ref().map(|s| s.kernel_length)).unwrap_or(1.0);
            let eps = eps.or(sc.as_ref().map(|s| s.kernel_eps)).unwrap_or(1e-2);
            if !(l > 0.0 && eps > 0.0) {
                return Err(Failure::Input("length and eps must be positive".into()));
            }
            let r = verify_properties(&KernelSpec::new(l), eps, Execution::default())
                .map_err(|e| Failure::Input(e.to_string()))?;
            let text = r.to_string();
            print!("{text}");
            out.write("kernel.txt", &text)?;
            if !r.all_pass() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Analyze { what, scenario, seed } => {
            let sc = scenario.map(|p| load(&p)).transpose()?;
            cmd_analyze(what, sc.as_ref(), seed, &out)?;
        }
        Command::Sweep { scenario } => {
            let raw = RawScenario::parse(&read(&scenario)?)?;
            if raw.sweep_params().is_empty() {
                return Err(Failure::Input("sweep needs at least one sweep.<name> key".into()));
            }
            let name = raw.get("output.sweep").unwrap_or("sweep.csv").to_string();
            let table = run_sweep(&raw, Execution::default());
            let csv = table.to_csv();
            print!("{csv}");
            out.write(&name, &csv)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    match with_workers(workers, || execute(cli)) {
        Ok(code) => code,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
