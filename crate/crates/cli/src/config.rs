use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use superosc::constraints::{ConstraintError, ConstraintFamily, ConstraintSet, PhysicalConfig};
use superosc::experiments::{centred_nodes, ExperimentOptions, ValuesMode};
use superosc::solver::SolverOptions;
use superosc::wavefield::{ideal_template, PositionWave};

use crate::Experiment;

/// Rejected input, carrying the offending field path.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    pub hbar: f64,
    pub p_max: f64,
    /// Full slit width `L`.
    pub slit_width: f64,
    #[serde(default)]
    pub slit_center: f64,
}

impl Physical {
    fn with_width(l: f64) -> Self {
        Physical {
            hbar: 1.0,
            p_max: 1.0,
            slit_width: l,
            slit_center: 0.0,
        }
    }

    pub fn to_core(&self) -> PhysicalConfig {
        PhysicalConfig {
            hbar: self.hbar,
            p_max: self.p_max,
            slit_half_width: 0.5 * self.slit_width,
            slit_center: self.slit_center,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Slit edge to slit edge, inclusive.
    SlitEdges,
    /// Fixed spacing, centred on the slit centre.
    Centred,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Targets {
    Template { pbar: f64 },
    Alternating,
    Ones,
    Explicit { values: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub family: ConstraintFamily,
    /// Explicit nodes; overrides `count`/`placement`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub placement: Placement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<f64>,
    pub targets: Targets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub n_min: usize,
    pub n_max: usize,
    pub n_list: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: String,
    pub position_grid: String,
    pub momentum_grid: String,
    pub grid_points: usize,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            report: "report.json".into(),
            position_grid: "position.csv".into(),
            momentum_grid: "momentum.csv".into(),
            grid_points: 2001,
        }
    }
}

/// Input document as read from disk; every section may be omitted.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub physical: Option<Physical>,
    pub problem: Option<RawProblem>,
    pub sweep: Option<RawSweep>,
    pub solver: Option<RawSolver>,
    pub outputs: Option<Outputs>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProblem {
    pub family: Option<ConstraintFamily>,
    pub nodes: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub placement: Option<Placement>,
    pub spacing: Option<f64>,
    pub anchor: Option<f64>,
    pub targets: Option<Targets>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub n_list: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub tol: Option<f64>,
    pub start_digits: Option<u32>,
    pub max_digits: Option<u32>,
}

/// Fully resolved configuration; this is what reports echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: Physical,
    pub problem: Problem,
    pub sweep: Sweep,
    pub solver: SolverOptions,
    pub outputs: Outputs,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub digits: Option<u32>,
    pub tol: Option<f64>,
    pub max_digits_cap: Option<u32>,
}

/// Parse a config file. A previously written report is accepted too, in
/// which case its embedded `config` is used.
pub fn load(path: &Path) -> Result<RawConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RawConfig, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| invalid("", format!("malformed JSON: {e}")))?;
    let (value, prefix) = match value {
        serde_json::Value::Object(mut m) if m.contains_key("config") && m.contains_key("experiment") => {
            (m.remove("config").unwrap_or_default(), "config.")
        }
        v => (v, ""),
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            prefix.trim_end_matches('.').to_string()
        } else {
            format!("{prefix}{path}")
        };
        invalid(field, e.into_inner().to_string())
    })
}

impl RawConfig {
    /// Fill experiment-specific defaults, apply overrides and validate.
    pub fn resolve(self, exp: Experiment, ov: Overrides) -> Result<RunConfig, ConfigError> {
        let default_width = match exp {
            Experiment::CostSweep => 6.0 * PI,
            _ => 2.0 * PI,
        };
        let physical = self.physical.unwrap_or_else(|| Physical::with_width(default_width));
        let p = self.problem.unwrap_or_default();
        let s = self.sweep.unwrap_or_default();
        let lambda_min = 2.0 * PI * physical.hbar / physical.p_max;

        let family = p.family.unwrap_or(match exp {
            Experiment::DerivMatch => ConstraintFamily::DerivativeAtPoint,
            _ => ConstraintFamily::PointAmplitude,
        });
        let placement = p.placement.unwrap_or(match exp {
            Experiment::CostSweep | Experiment::Extreme => Placement::Centred,
            _ => Placement::SlitEdges,
        });
        let count = match (&p.nodes, p.count) {
            (Some(_), c) => c,
            (None, Some(c)) => Some(c),
            (None, None) => Some(match exp {
                Experiment::DerivMatch => 23,
                Experiment::Extreme => 8,
                _ => 9,
            }),
        };
        let spacing = match (placement, p.spacing) {
            (_, Some(s)) => Some(s),
            (Placement::Centred, None) => Some(match exp {
                Experiment::Extreme => lambda_min / 12.0,
                _ => lambda_min / 4.0,
            }),
            (Placement::SlitEdges, None) => None,
        };
        let anchor = match family {
            ConstraintFamily::DerivativeAtPoint => Some(p.anchor.unwrap_or(physical.slit_center)),
            _ => p.anchor,
        };
        let targets = p.targets.unwrap_or(match exp {
            Experiment::CostSweep => Targets::Alternating,
            Experiment::Extreme => Targets::Ones,
            _ => Targets::Template { pbar: 2.0 },
        });

        let n_min = s.n_min.unwrap_or(3);
        let n_max = s.n_max.unwrap_or(12);
        let n_list = s.n_list.unwrap_or_else(|| vec![5, 9, 15]);

        let raw_solver = self.solver.unwrap_or_default();
        let defaults = SolverOptions::default();
        let mut solver = SolverOptions {
            tol: raw_solver.tol.unwrap_or(defaults.tol),
            start_digits: raw_solver.start_digits.unwrap_or(defaults.start_digits),
            max_digits: raw_solver.max_digits.unwrap_or(defaults.max_digits),
        };
        if let Some(d) = ov.digits {
            solver.start_digits = d;
        }
        if let Some(t) = ov.tol {
            solver.tol = t;
        }
        if let Some(cap) = ov.max_digits_cap {
            solver.max_digits = solver.max_digits.min(cap);
            solver.start_digits = solver.start_digits.min(cap);
        }

        let cfg = RunConfig {
            physical,
            problem: Problem {
                family,
                nodes: p.nodes,
                count,
                placement,
                spacing,
                anchor,
                targets,
            },
            sweep: Sweep { n_min, n_max, n_list },
            solver,
            outputs: self.outputs.unwrap_or_default(),
        };
        cfg.validate(exp)?;
        Ok(cfg)
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn physical(&self) -> PhysicalConfig {
        self.physical.to_core()
    }

    pub fn options(&self, tables: bool) -> ExperimentOptions {
        ExperimentOptions {
            solver: self.solver,
            grid_points: self.outputs.grid_points,
            tables,
            ..ExperimentOptions::default()
        }
    }

    pub fn pbar(&self) -> Option<f64> {
        match self.problem.targets {
            Targets::Template { pbar } => Some(pbar),
            _ => None,
        }
    }

    fn validate(&self, exp: Experiment) -> Result<(), ConfigError> {
        let ph = &self.physical;
        positive("physical.hbar", ph.hbar)?;
        positive("physical.p_max", ph.p_max)?;
        positive("physical.slit_width", ph.slit_width)?;
        if !ph.slit_center.is_finite() {
            return Err(invalid("physical.slit_center", "must be finite"));
        }
        let s = &self.solver;
        positive("solver.tol", s.tol)?;
        if s.start_digits == 0 {
            return Err(invalid("solver.start_digits", "must be at least 1"));
        }
        if s.max_digits < s.start_digits {
            return Err(invalid(
                "solver.max_digits",
                format!("{} is below start_digits {}", s.max_digits, s.start_digits),
            ));
        }
        if self.outputs.grid_points < 2 {
            return Err(invalid("outputs.grid_points", "must be at least 2"));
        }
        if let Some(sp) = self.problem.spacing {
            positive("problem.spacing", sp)?;
        }
        if let Some(a) = self.problem.anchor {
            if !a.is_finite() {
                return Err(invalid("problem.anchor", "must be finite"));
            }
        }
        match &self.problem.targets {
            Targets::Template { pbar } => {
                if !pbar.is_finite() {
                    return Err(invalid("problem.targets.pbar", "must be finite"));
                }
            }
            Targets::Explicit { values } => {
                if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(invalid(format!("problem.targets.values[{i}]"), "must be finite"));
                }
            }
            _ => {}
        }
        match exp {
            Experiment::AmpMatch | Experiment::DerivMatch | Experiment::Convergence => {
                if self.pbar().is_none() {
                    return Err(invalid("problem.targets", "this experiment needs template targets"));
                }
            }
            Experiment::CostSweep => {
                let sw = &self.sweep;
                if sw.n_min < 1 || sw.n_max < sw.n_min {
                    return Err(invalid(
                        "sweep.n_max",
                        format!("need 1 <= n_min <= n_max, got {}..{}", sw.n_min, sw.n_max),
                    ));
                }
                if matches!(self.problem.targets, Targets::Explicit { .. } | Targets::Ones) {
                    return Err(invalid(
                        "problem.targets",
                        "cost sweep takes alternating or template targets",
                    ));
                }
            }
            _ => {}
        }
        match exp {
            Experiment::Convergence => {
                let l = &self.sweep.n_list;
                if l.is_empty() || l.iter().any(|&n| n < 3) || l.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("sweep.n_list", "must be increasing with every N >= 3"));
                }
            }
            Experiment::Construct | Experiment::Extreme => {
                let cs = self.constraints()?;
                if exp == Experiment::Extreme && cs.nodes.len() < 2 {
                    return Err(invalid("problem.count", "extreme construction needs at least 2 nodes"));
                }
                if exp == Experiment::Extreme && cs.family != ConstraintFamily::PointAmplitude {
                    return Err(invalid("problem.family", "extreme construction uses point nodes"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn nodes(&self) -> Result<Vec<f64>, ConfigError> {
        let cfg = self.physical();
        let p = &self.problem;
        if let Some(n) = &p.nodes {
            return Ok(n.clone());
        }
        let count = p
            .count
            .ok_or_else(|| invalid("problem.count", "either nodes or count is required"))?;
        let points = match p.family {
            ConstraintFamily::IntervalArea => count + 1,
            _ => count,
        };
        if points == 0 {
            return Err(invalid("problem.count", "must be at least 1"));
        }
        Ok(match p.placement {
            Placement::SlitEdges => cfg.equidistant_nodes(points),
            Placement::Centred => centred_nodes(&cfg, points, p.spacing.unwrap_or(cfg.lambda_min() / 4.0)),
        })
    }

    /// The constraint set described by `problem`.
    pub fn constraints(&self) -> Result<ConstraintSet, ConfigError> {
        let cfg = self.physical();
        let p = &self.problem;
        let cs = match p.family {
            ConstraintFamily::DerivativeAtPoint => {
                let anchor = p.anchor.unwrap_or(cfg.slit_center);
                let n = match (&p.targets, p.count) {
                    (Targets::Explicit { values }, _) => values.len(),
                    (_, Some(c)) => c,
                    _ => return Err(invalid("problem.count", "required for derivative constraints")),
                };
                let values = match &p.targets {
                    Targets::Template { pbar } => {
                        let t = ideal_template(&cfg, *pbar);
                        (0..n as u32).map(|k| t.derivative_at(anchor, k)).collect()
                    }
                    other => simple_targets(other, n),
                };
                ConstraintSet::derivative_at_point(anchor, values)
            }
            ConstraintFamily::PointAmplitude | ConstraintFamily::IntervalArea => {
                let nodes = self.nodes()?;
                let n = if p.family == ConstraintFamily::IntervalArea {
                    nodes.len().saturating_sub(1)
                } else {
                    nodes.len()
                };
                let values = match &p.targets {
                    Targets::Template { pbar } => {
                        let t = ideal_template(&cfg, *pbar);
                        if p.family == ConstraintFamily::IntervalArea {
                            return Err(invalid(
                                "problem.targets",
                                "template targets need point or derivative constraints",
                            ));
                        }
                        nodes.iter().map(|&x| t.value(x)).collect()
                    }
                    other => simple_targets(other, n),
                };
                ConstraintSet {
                    family: p.family,
                    nodes,
                    values,
                }
            }
        };
        cs.validate(&cfg).map_err(constraint_field)?;
        Ok(cs)
    }

    pub fn values_mode(&self) -> ValuesMode {
        match self.problem.targets {
            Targets::Template { pbar } => ValuesMode::Template { pbar },
            _ => ValuesMode::Alternating,
        }
    }
}

fn simple_targets(t: &Targets, n: usize) -> Vec<Complex64> {
    match t {
        Targets::Alternating => (0..n)
            .map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        Targets::Ones => vec![Complex64::new(1.0, 0.0); n],
        Targets::Explicit { values } => values.clone(),
        Targets::Template { .. } => unreachable!("handled by caller"),
    }
}

/// Attach a config field path to a constraint validation failure.
pub fn constraint_field(e: ConstraintError) -> ConfigError {
    let field = match &e {
        ConstraintError::InvalidConfig { field, .. } => format!("physical.{field}"),
        ConstraintError::Empty => "problem".into(),
        ConstraintError::NodeCount { .. } => "problem.targets".into(),
        ConstraintError::NotIncreasing { index, .. } | ConstraintError::OutsideSlit { index, .. } => {
            format!("problem.nodes[{index}]")
        }
        ConstraintError::NonFinite { field, index } => format!("problem.{field}[{index}]"),
        ConstraintError::IndexOutOfRange { .. } => "problem".into(),
    };
    invalid(field, e.to_string())
}
