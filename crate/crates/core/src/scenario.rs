//! Flat `section.key = value` scenario files.
//!
//! ```text
//! # reaction blow-up
//! problem.f = "s^2"
//! problem.alpha = 1
//! problem.u0 = 1
//! sim.t_end = 2
//! sweep.c = 0.5, 1, 2
//! ```
//!
//! Values may be quoted. `{name}` in any value is replaced by the sweep
//! parameter `name` when cells are expanded.

use thiserror::Error;

use crate::criteria::{ProblemSpec, SpecError, Tier};
use crate::expr::{parse, Expr, ParseError};
use crate::solver::SimConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {source}")]
    Expr {
        key: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

const KEYS: &[&str] = &[
    "problem.length",
    "problem.f",
    "problem.g",
    "problem.alpha",
    "problem.beta",
    "problem.u0",
    "problem.interior_offset",
    "problem.boundary_offset",
    "grid.n",
    "sim.t_end",
    "sim.dt_init",
    "sim.theta",
    "sim.rtol",
    "sim.atol",
    "sim.dt_floor",
    "sim.thresholds",
    "sim.record_interval",
    "sim.max_steps",
    "criteria.tier",
    "kernel.length",
    "kernel.eps",
    "analysis.h",
    "analysis.sigma_threshold",
    "analysis.lower_problem",
    "analysis.comparison_u0",
    "analysis.supersolution_a",
    "analysis.supersolution_horizon",
    "analysis.supersolution_margin",
    "output.snapshot_times",
    "output.series",
    "output.snapshots",
    "output.report",
    "output.sweep",
];

/// Key/value pairs in file order, before interpretation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawScenario {
    pub entries: Vec<(String, String)>,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl RawScenario {
    pub fn parse(text: &str) -> Result<RawScenario, ScenarioError> {
        let mut raw = RawScenario::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ScenarioError::Syntax {
                    line: line_no,
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = unquote(value.trim()).map_err(|message| ScenarioError::Syntax { line: line_no, message })?;
            let known = KEYS.contains(&key) || key.strip_prefix("sweep.").is_some_and(valid_name);
            if !known {
                return Err(ScenarioError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            if raw.get(key).is_some() {
                return Err(ScenarioError::Duplicate {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            raw.entries.push((key.to_string(), value));
        }
        Ok(raw)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Sweep parameters and their values, in file order.
    pub fn sweep_params(&self) -> Vec<(String, Vec<String>)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix("sweep.")
                    .map(|name| (name.to_string(), v.split(',').map(|s| s.trim().to_string()).collect()))
            })
            .collect()
    }

    /// Cartesian product of the sweep values, first parameter slowest, each
    /// cell with its placeholders substituted and the sweep keys removed.
    pub fn cells(&self) -> Vec<(Vec<(String, String)>, RawScenario)> {
        let params = self.sweep_params();
        let total: usize = params.iter().map(|(_, v)| v.len()).product();
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut choice = vec![(String::new(), String::new()); params.len()];
            for (slot, (name, values)) in choice.iter_mut().zip(&params).rev() {
                *slot = (name.clone(), values[rem % values.len()].clone());
                rem /= values.len();
            }
            let entries = self
                .entries
                .iter()
                .filter(|(k, _)| !k.starts_with("sweep."))
                .map(|(k, v)| {
                    let mut v = v.clone();
                    for (name, value) in &choice {
                        v = v.replace(&format!("{{{name}}}"), value);
                    }
                    (k.clone(), v)
                })
                .collect();
            out.push((choice, RawScenario { entries }));
        }
        out
    }
}

fn unquote(v: &str) -> Result<String, String> {
    match v.strip_prefix('"') {
        Some(rest) => rest
            .strip_suffix('"')
            .map(str::to_string)
            .ok_or_else(|| "unterminated string".to_string()),
        None => Ok(v.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    /// `h` in the m functional; defaults to `g`.
    pub h: Option<Expr>,
    pub sigma_threshold: f64,
    pub lower_problem: bool,
    /// Upper initial data of the comparison pair.
    pub comparison_u0: Option<String>,
    pub supersolution_a: Option<f64>,
    pub supersolution_horizon: f64,
    pub supersolution_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub series: String,
    /// File name prefix of the per-snapshot CSVs.
    pub snapshots: String,
    pub report: String,
    pub sweep: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ProblemSpec,
    pub grid_n: usize,
    pub sim: SimConfig,
    pub tier: Tier,
    pub kernel_length: f64,
    pub kernel_eps: f64,
    pub analysis: AnalysisSettings,
    pub outputs: Outputs,
}

fn number<T: std::str::FromStr>(raw: &RawScenario, key: &str) -> Result<Option<T>, ScenarioError> {
    raw.get(key)
        .map(|v| {
            v.parse::<T>().map_err(|_| ScenarioError::Value {
                key: key.to_string(),
                message: format!("`{v}` is not a number"),
            })
        })
        .transpose()
}

/// Numeric value that may also be a constant expression such as `pi/2`.
fn real(raw: &RawScenario, key: &str) -> Result<Option<f64>, ScenarioError> {
    let Some(v) = raw.get(key) else {
        return Ok(None);
    };
    if let Ok(x) = v.parse::<f64>() {
        return Ok(Some(x));
    }
    let e = parse(v).map_err(|source| ScenarioError::Expr {
        key: key.to_string(),
        source,
    })?;
    if e.symbol().is_some() {
        return Err(ScenarioError::Value {
            key: key.to_string(),
            message: format!("`{v}` is not constant"),
        });
    }
    e.eval(0.0).map(Some).map_err(|err| ScenarioError::Value {
        key: key.to_string(),
        message: err.to_string(),
    })
}

fn list(raw: &RawScenario, key: &str) -> Result<Option<Vec<f64>>, ScenarioError> {
    raw.get(key)
        .map(|v| {
            v.split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|_| ScenarioError::Value {
                        key: key.to_string(),
                        message: format!("`{s}` is not a number"),
                    })
                })
                .collect()
        })
        .transpose()
}

fn flag(raw: &RawScenario, key: &str) -> Result<bool, ScenarioError> {
    match raw.get(key) {
        None | Some("false") => Ok(false),
        Some("true") => Ok(true),
        Some(v) => Err(ScenarioError::Value {
            key: key.to_string(),
            message: format!("`{v}` is not true or false"),
        }),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        Scenario::from_raw(&RawScenario::parse(text)?)
    }

    pub fn from_raw(raw: &RawScenario) -> Result<Scenario, ScenarioError> {
        if let Some((k, v)) = raw.entries.iter().find(|(_, v)| v.contains('{')) {
            return Err(ScenarioError::Value {
                key: k.clone(),
                message: format!("unresolved placeholder in `{v}`"),
            });
        }
        let text = |key: &str, default: &'static str| raw.get(key).unwrap_or(default);
        let length = real(raw, "problem.length")?.unwrap_or(1.0);
        let u0 = raw.get("problem.u0").ok_or(ScenarioError::Missing("problem.u0"))?;
        let spec = ProblemSpec::parse(
            length,
            text("problem.f", "0"),
            text("problem.g", "0"),
            text("problem.alpha", "0"),
            text("problem.beta", "0"),
            u0,
            raw.get("problem.interior_offset"),
            raw.get("problem.boundary_offset"),
        )?;
        spec.validate()?;

        let d = SimConfig::default();
        let sim = SimConfig {
            t_end: real(raw, "sim.t_end")?.unwrap_or(d.t_end),
            dt_init: real(raw, "sim.dt_init")?.unwrap_or(d.dt_init),
            theta: real(raw, "sim.theta")?.unwrap_or(d.theta),
            rtol: real(raw, "sim.rtol")?.unwrap_or(d.rtol),
            atol: real(raw, "sim.atol")?.unwrap_or(d.atol),
            thresholds: list(raw, "sim.thresholds")?.unwrap_or(d.thresholds),
            dt_floor: real(raw, "sim.dt_floor")?.unwrap_or(d.dt_floor),
            snapshot_times: list(raw, "output.snapshot_times")?.unwrap_or_default(),
            record_interval: real(raw, "sim.record_interval")?.unwrap_or(d.record_interval),
            record_states: false,
            max_steps: number(raw, "sim.max_steps")?.unwrap_or(d.max_steps),
        };
        sim.validate().map_err(|e| ScenarioError::Value {
            key: "sim".into(),
            message: e.to_string(),
        })?;

        let tier = match raw.get("criteria.tier") {
            None | Some("auto") => Tier::Auto,
            Some("heuristic") => Tier::Heuristic,
            Some(v) => {
                return Err(ScenarioError::Value {
                    key: "criteria.tier".into(),
                    message: format!("`{v}` is not auto or heuristic"),
                })
            }
        };
        let h = raw
            .get("analysis.h")
            .map(|v| {
                parse(v).map_err(|source| ScenarioError::Expr {
                    key: "analysis.h".into(),
                    source,
                })
            })
            .transpose()?;
        if let Some(u) = raw.get("analysis.comparison_u0") {
            ProblemSpec { u0: parse(u).map_err(|source| ScenarioError::Expr {
                key: "analysis.comparison_u0".into(),
                source,
            })?, ..spec.clone() }
            .validate()?;
        }
        let analysis = AnalysisSettings {
            h,
            sigma_threshold: real(raw, "analysis.sigma_threshold")?.unwrap_or(1e-3),
            lower_problem: flag(raw, "analysis.lower_problem")?,
            comparison_u0: raw.get("analysis.comparison_u0").map(str::to_string),
            supersolution_a: real(raw, "analysis.supersolution_a")?,
            supersolution_horizon: real(raw, "analysis.supersolution_horizon")?.unwrap_or(20.0),
            supersolution_margin: real(raw, "analysis.supersolution_margin")?.unwrap_or(0.05),
        };
        let outputs = Outputs {
            series: text("output.series", "series.csv").to_string(),
            snapshots: text("output.snapshots", "snapshot").to_string(),
            report: text("output.report", "report.txt").to_string(),
            sweep: text("output.sweep", "sweep.csv").to_string(),
        };
        Ok(Scenario {
            grid_n: number(raw, "grid.n")?.unwrap_or(65),
            kernel_length: real(raw, "kernel.length")?.unwrap_or(length),
            kernel_eps: real(raw, "kernel.eps")?.unwrap_or(1e-2),
            spec,
            sim,
            tier,
            analysis,
            outputs,
        })
    }
}
