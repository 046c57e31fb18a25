//! End-to-end drivers producing serializable reports.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{ConstraintError, ConstraintSet, Kernel, PhysicalConfig};
use crate::mp::{vec_dot, vec_norm, MpComplex};
use crate::quadrature::{Adaptive, Tolerance};
use crate::solver::{
    extend_gram, extreme_coefficients_converged, solve_constraints, solve_exact, successive_value_mp, GramMatrix,
    Solution, SolveError, SolverOptions,
};
use crate::wavefield::{
    ideal_template, momentum_stats, project_slit, sample, uniform_grid, zero_crossings, EmergingWave, IdealTemplate,
    MomentumStats, Normalization, Part, PositionWave, StatsOptions, WaveError, WaveField,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid experiment input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}

impl ExperimentError {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Invalid(_) => "InvalidInput",
            ExperimentError::Constraint(_) => "InvalidConstraints",
            ExperimentError::Solve(e) => e.kind(),
            ExperimentError::Wave(WaveError::ZeroInSlit) => "ZeroInSlit",
            ExperimentError::Wave(WaveError::BoundaryJump { .. }) => "BoundaryJump",
            ExperimentError::Wave(WaveError::SpectralTail { .. }) => "SpectralTail",
            ExperimentError::Wave(WaveError::Constraint(_)) => "InvalidConstraints",
        }
    }

    /// Input problems as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        match self {
            ExperimentError::Invalid(_) | ExperimentError::Constraint(_) => true,
            ExperimentError::Solve(e) => e.is_validation(),
            ExperimentError::Wave(WaveError::Constraint(_)) => true,
            ExperimentError::Wave(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub solver: SolverOptions,
    pub stats: StatsOptions,
    /// Grid points per sampled axis range.
    pub grid_points: usize,
    /// Attach position/momentum sample tables to the report.
    pub tables: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            solver: SolverOptions::default(),
            stats: StatsOptions::default(),
            grid_points: 2001,
            tables: false,
        }
    }
}

/// Column-named numeric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn complex(axis: &str, data: &[(f64, Complex64)]) -> Self {
        Table {
            columns: [axis, "re", "im", "abs2"].map(String::from).to_vec(),
            rows: data.iter().map(|(t, z)| vec![*t, z.re, z.im, z.norm_sqr()]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentInputs {
    pub physical: PhysicalConfig,
    pub pbar: Option<f64>,
    pub constraints: Option<ConstraintSet>,
    pub options: ExperimentOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub inputs: ExperimentInputs,
    /// Named scalar results; deterministic for fixed inputs.
    pub outputs: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub lambdas: Vec<Complex64>,
    pub tables: BTreeMap<String, Table>,
    /// Wall-clock time; informational, not part of the scalar outputs.
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    fn new(experiment: &str, inputs: ExperimentInputs) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            inputs,
            outputs: BTreeMap::new(),
            labels: BTreeMap::new(),
            lambdas: Vec::new(),
            tables: BTreeMap::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn output(&self, key: &str) -> Option<f64> {
        self.outputs.get(key).copied()
    }

    fn set(&mut self, key: &str, v: f64) {
        self.outputs.insert(key.to_string(), v);
    }

    fn record_solution(&mut self, sol: &Solution) {
        self.set("norm_sq", sol.norm_sq);
        self.set("condition_estimate", sol.condition_estimate);
        self.set("precision_digits_used", sol.precision_digits_used as f64);
        self.set("residual", sol.residual);
        self.lambdas = sol.lambdas.clone();
    }

    fn record_stats(&mut self, s: &MomentumStats) {
        self.set("p_mean", s.p_mean);
        self.set("p_std", s.p_std);
        self.set("p_mean_in_slit", s.p_mean_in_slit);
        self.set("p_std_in_slit", s.p_std_in_slit);
        self.set("boundary_jump", s.boundary_jump);
        if let Some(c) = s.cutoff {
            self.set("spectral_cutoff", c);
        }
        if let Some(t) = s.tail_mass {
            self.set("spectral_tail_mass", t);
        }
        self.labels.insert("stats_method".into(), format!("{:?}", s.method));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub outputs: BTreeMap<String, f64>,
    /// Error kind and message when this point failed.
    pub error: Option<(String, String)>,
}

/// Least-squares fit `norm_sq(c + t) ≈ q0 + q1 t + q2 t²` over real offsets `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub n: usize,
    pub new_node: f64,
    pub c: Complex64,
    pub offsets: Vec<f64>,
    pub norm_sq: Vec<f64>,
    pub coefficients: [f64; 3],
    /// Vertex offset from `c`, in units of the offset scale.
    pub vertex_offset: f64,
    pub offset_scale: f64,
    /// Max |fit − data| / max data.
    pub fit_residual: f64,
    /// `|λ_{N+1}| / ‖λ‖` when `a_{N+1} = c`.
    pub lambda_new_at_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub variable: String,
    pub inputs: ExperimentInputs,
    pub points: Vec<SweepPoint>,
    pub trend: BTreeMap<String, f64>,
    pub quadratic_fit: Option<QuadraticFit>,
    pub runtime_seconds: f64,
}

type SolvedPoint = (SweepPoint, Option<(ConstraintSet, GramMatrix, Solution)>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ValuesMode {
    Alternating,
    Template { pbar: f64 },
}

fn inputs(
    cfg: &PhysicalConfig,
    pbar: Option<f64>,
    cs: Option<&ConstraintSet>,
    opts: &ExperimentOptions,
) -> ExperimentInputs {
    ExperimentInputs {
        physical: *cfg,
        pbar,
        constraints: cs.cloned(),
        options: *opts,
    }
}

/// Interior strict local maxima of a sampled curve, ignoring roundoff-level
/// wiggles.
pub fn count_peaks(values: &[f64]) -> usize {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * max;
    values
        .windows(3)
        .filter(|w| w[1] > floor && w[1] > w[0] && w[1] >= w[2])
        .count()
}

/// Report for a point- or derivative-matching problem against the template.
fn template_match(
    name: &str,
    cfg: &PhysicalConfig,
    pbar: f64,
    cs: ConstraintSet,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    let mut report = ExperimentReport::new(name, inputs(cfg, Some(pbar), Some(&cs), opts));
    report.set("n", cs.len() as f64);
    cs.validate(cfg)?;
    if cs.values.iter().all(|v| v.norm() == 0.0) {
        // zero targets: the minimum-norm solution is identically zero
        report.set("trivial", 1.0);
        report.set("norm_sq", 0.0);
        report.lambdas = vec![Complex64::new(0.0, 0.0); cs.len()];
        report.runtime_seconds = start.elapsed().as_secs_f64();
        return Ok(report);
    }
    report.set("trivial", 0.0);
    let (_, sol) = solve_constraints(cfg, &cs, &opts.solver)?;
    report.record_solution(&sol);
    let wave = WaveField::new(cfg, &cs, &sol, Normalization::Raw)?;
    report.set("eval_precision_bits", wave.eval_prec() as f64);

    let achieved = wave.constraint_values();
    let scale = cs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cerr = achieved
        .iter()
        .zip(&cs.values)
        .map(|(g, a)| (g - a).norm())
        .fold(0.0, f64::max)
        / scale;
    report.set("constraint_error", cerr);

    let template = ideal_template(cfg, pbar);
    let emerging = project_slit(&wave, cfg)?;
    report.set("renorm_factor", emerging.renorm_factor);
    let stats = momentum_stats(&emerging, cfg, &opts.stats)?;
    report.record_stats(&stats);
    record_template_errors(&mut report, &emerging, &template, cfg, opts.grid_points);

    let (a, b) = cfg.slit_bounds();
    report.set(
        "crossings_real",
        zero_crossings(|x| wave.eval_position(x), Part::Real, a, b) as f64,
    );
    report.set(
        "crossings_imag",
        zero_crossings(|x| wave.eval_position(x), Part::Imag, a, b) as f64,
    );
    report.set(
        "bandwidth_crossing_bound",
        (cfg.slit_width() * cfg.p_max / (std::f64::consts::PI * cfg.hbar)).floor(),
    );

    if opts.tables {
        attach_tables(&mut report, &wave, &emerging, &template, cfg, opts.grid_points);
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn record_template_errors(
    report: &mut ExperimentReport,
    emerging: &EmergingWave,
    template: &IdealTemplate,
    cfg: &PhysicalConfig,
    points: usize,
) {
    let (a, b) = cfg.slit_bounds();
    let grid = uniform_grid(a, b, points.max(3));
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let e = (emerging.value(x) - template.value(x)).norm_sqr();
            (e, emerging.derivative(x, 1).norm())
        })
        .collect();
    let err2: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sup2 = err2.iter().cloned().fold(0.0, f64::max);
    report.set("sup_error", sup2.sqrt());
    report.set("sup_error_sq", sup2);
    report.set("error_peaks", count_peaks(&err2) as f64);
    report.set("max_abs_derivative", rows.iter().map(|r| r.1).fold(0.0, f64::max));
    let l2 = Adaptive::default()
        .integrate(
            |x| (emerging.value(x) - template.value(x)).norm_sqr(),
            emerging.breaks(),
            Tolerance::new(1e-300, 1e-10),
        )
        .value;
    report.set("l2_error", l2.sqrt());
}

fn attach_tables(
    report: &mut ExperimentReport,
    wave: &WaveField,
    emerging: &EmergingWave,
    template: &IdealTemplate,
    cfg: &PhysicalConfig,
    points: usize,
) {
    let l = cfg.slit_width();
    let c = cfg.slit_center;
    let pos = sample(|x| wave.eval_position(x), c - 4.0 * l, c + 4.0 * l, points);
    report.tables.insert("position".into(), Table::complex("x", &pos));
    let mom = sample(|p| wave.eval_momentum(p), -cfg.p_max, cfg.p_max, points);
    report.tables.insert("momentum".into(), Table::complex("p", &mom));
    let (a, b) = cfg.slit_bounds();
    let slit: Vec<Vec<f64>> = uniform_grid(a, b, points)
        .par_iter()
        .map(|&x| {
            let e = emerging.value(x);
            let t = template.value(x);
            vec![x, e.re, e.im, t.re, t.im, (e - t).norm_sqr()]
        })
        .collect();
    report.tables.insert(
        "slit".into(),
        Table {
            columns: ["x", "psi_re", "psi_im", "phi_re", "phi_im", "err2"]
                .map(String::from)
                .to_vec(),
            rows: slit,
        },
    );
}

/// Match the template at `n` equidistant nodes from slit edge to slit edge.
pub fn run_amplitude_matching(
    cfg: &PhysicalConfig,
    pbar: f64,
    n: usize,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    if n < 2 {
        return Err(ExperimentError::Invalid(format!(
            "amplitude matching needs N >= 2, got {n}"
        )));
    }
    let template = ideal_template(cfg, pbar);
    let nodes = cfg.equidistant_nodes(n);
    let values = nodes.iter().map(|&x| template.value(x)).collect();
    template_match(
        "amp-match",
        cfg,
        pbar,
        ConstraintSet::point_amplitude(nodes, values),
        opts,
    )
}

/// Match the template's value and first `n − 1` derivatives at the slit centre.
pub fn run_derivative_matching(
    cfg: &PhysicalConfig,
    pbar: f64,
    n: usize,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    if n < 1 {
        return Err(ExperimentError::Invalid("derivative matching needs N >= 1".into()));
    }
    let template = ideal_template(cfg, pbar);
    let x0 = cfg.slit_center;
    let values = (0..n as u32).map(|k| template.derivative_at(x0, k)).collect();
    template_match(
        "deriv-match",
        cfg,
        pbar,
        ConstraintSet::derivative_at_point(x0, values),
        opts,
    )
}

/// Solve an explicit constraint set and report against the template if a
/// `pbar` is given.
pub fn run_constraints(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    pbar: Option<f64>,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    if let Some(pbar) = pbar {
        let mut r = template_match("construct", cfg, pbar, cs.clone(), opts)?;
        r.experiment = "construct".into();
        return Ok(r);
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new("construct", inputs(cfg, None, Some(cs), opts));
    report.set("n", cs.len() as f64);
    let (_, sol) = solve_constraints(cfg, cs, &opts.solver)?;
    report.record_solution(&sol);
    let wave = WaveField::new(cfg, cs, &sol, Normalization::Raw)?;
    let achieved = wave.constraint_values();
    let scale = cs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cerr = achieved
        .iter()
        .zip(&cs.values)
        .map(|(g, a)| (g - a).norm())
        .fold(0.0, f64::max)
        / scale;
    report.set("constraint_error", cerr);
    match project_slit(&wave, cfg) {
        Ok(e) => {
            report.set("renorm_factor", e.renorm_factor);
            let stats = momentum_stats(&e, cfg, &opts.stats)?;
            report.record_stats(&stats);
            if opts.tables {
                let l = cfg.slit_width();
                let c = cfg.slit_center;
                let pos = sample(|x| wave.eval_position(x), c - 4.0 * l, c + 4.0 * l, opts.grid_points);
                report.tables.insert("position".into(), Table::complex("x", &pos));
                let mom = sample(|p| wave.eval_momentum(p), -cfg.p_max, cfg.p_max, opts.grid_points);
                report.tables.insert("momentum".into(), Table::complex("p", &mom));
            }
        }
        Err(WaveError::ZeroInSlit) => {
            report.labels.insert("slit".into(), "ZeroInSlit".into());
        }
        Err(e) => return Err(e.into()),
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Equally spaced nodes centred on the slit centre.
pub fn centred_nodes(cfg: &PhysicalConfig, n: usize, spacing: f64) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|k| cfg.slit_center + (k as f64 - mid) * spacing).collect()
}

fn sweep_values(mode: ValuesMode, cfg: &PhysicalConfig, nodes: &[f64]) -> Vec<Complex64> {
    match mode {
        ValuesMode::Alternating => (0..nodes.len())
            .map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        ValuesMode::Template { pbar } => {
            let t = ideal_template(cfg, pbar);
            nodes.iter().map(|&x| t.value(x)).collect()
        }
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Norm and conditioning as functions of `N` at fixed node spacing.
pub fn run_cost_sweep(
    cfg: &PhysicalConfig,
    spacing: f64,
    n_range: std::ops::RangeInclusive<usize>,
    mode: ValuesMode,
    opts: &ExperimentOptions,
) -> Result<SweepResult, ExperimentError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(ExperimentError::Invalid(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    if n_range.is_empty() || *n_range.start() < 1 {
        return Err(ExperimentError::Invalid(
            "N range must be nonempty and start at 1 or more".into(),
        ));
    }
    cfg.validate()?;
    let start = Instant::now();
    let ns: Vec<usize> = n_range.collect();
    let solved: Vec<SolvedPoint> = ns
        .par_iter()
        .map(|&n| {
            let nodes = centred_nodes(cfg, n, spacing);
            let cs = ConstraintSet::point_amplitude(nodes.clone(), sweep_values(mode, cfg, &nodes));
            let mut point = SweepPoint {
                value: n as f64,
                outputs: BTreeMap::new(),
                error: None,
            };
            match solve_constraints(cfg, &cs, &opts.solver) {
                Ok((g, sol)) => {
                    point.outputs.insert("norm_sq".into(), sol.norm_sq);
                    point.outputs.insert("log_norm_sq".into(), sol.norm_sq.ln());
                    point
                        .outputs
                        .insert("condition_estimate".into(), sol.condition_estimate);
                    point
                        .outputs
                        .insert("precision_digits_used".into(), sol.precision_digits_used as f64);
                    point.outputs.insert("residual".into(), sol.residual);
                    (point, Some((cs, g, sol)))
                }
                Err(e) => {
                    point.error = Some((e.kind().to_string(), e.to_string()));
                    (point, None)
                }
            }
        })
        .collect();

    let mut trend = BTreeMap::new();
    let ok: Vec<&SweepPoint> = solved.iter().map(|s| &s.0).filter(|p| p.error.is_none()).collect();
    if ok.len() >= 2 {
        let xs: Vec<f64> = ok.iter().map(|p| p.value).collect();
        let ys: Vec<f64> = ok.iter().map(|p| p.outputs["log_norm_sq"]).collect();
        let cs: Vec<f64> = ok.iter().map(|p| p.outputs["condition_estimate"].ln()).collect();
        trend.insert("log_norm_sq_slope".into(), slope(&xs, &ys));
        trend.insert("log_condition_slope".into(), slope(&xs, &cs));
        let inc = |v: &[f64]| if v.windows(2).all(|w| w[1] > w[0]) { 1.0 } else { 0.0 };
        trend.insert("norm_sq_strictly_increasing".into(), inc(&ys));
        trend.insert("condition_strictly_increasing".into(), inc(&cs));
    }
    trend.insert(
        "failed_points".into(),
        solved.iter().filter(|s| s.0.error.is_some()).count() as f64,
    );

    let quadratic_fit = match solved.iter().rev().find_map(|s| s.1.as_ref()) {
        Some((cs, g, sol)) => Some(successive_fit(cfg, cs, g, sol, opts)?),
        None => None,
    };
    Ok(SweepResult {
        experiment: "cost-sweep".into(),
        variable: "N".into(),
        inputs: inputs(cfg, None, None, opts),
        points: solved.into_iter().map(|s| s.0).collect(),
        trend,
        quadratic_fit,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Midpoint of the central gap between consecutive nodes.
pub fn central_gap_midpoint(nodes: &[f64]) -> f64 {
    if nodes.len() == 1 {
        return nodes[0] + 0.5;
    }
    let i = (nodes.len() - 1) / 2;
    0.5 * (nodes[i] + nodes[i + 1])
}

/// Vary the target of one added point constraint around the value `c` the
/// current solution already takes there, and fit the resulting norms.
pub fn successive_fit(
    cfg: &PhysicalConfig,
    cs: &ConstraintSet,
    gram: &GramMatrix,
    sol: &Solution,
    opts: &ExperimentOptions,
) -> Result<QuadraticFit, ExperimentError> {
    let x_new = central_gap_midpoint(&cs.nodes);
    let new = Kernel::Point { x: x_new };
    let prec = sol.prec_bits();
    let c = successive_value_mp(cfg, gram.kernels(), sol, &new);
    let ext = extend_gram(&gram.at_precision(prec), &new);
    let base: Vec<MpComplex> = cs.values.iter().map(|&v| MpComplex::from_c64(prec, v)).collect();
    let solve_at = |t: f64| -> Result<(f64, Solution), ExperimentError> {
        let mut a = base.clone();
        let mut last = c.clone();
        last.re += t;
        a.push(last);
        let s = solve_exact(&ext, &a, &opts.solver)?;
        let a_w: Vec<MpComplex> = a.iter().map(|v| v.with_prec(s.prec_bits())).collect();
        let ns = vec_dot(&a_w, s.lambdas_mp(), s.prec_bits()).re.to_f64();
        Ok((ns, s))
    };
    let (n0, s0) = solve_at(0.0)?;
    let lam_norm = vec_norm(s0.lambdas_mp(), s0.prec_bits()).to_f64();
    let lambda_new_at_c = s0.lambdas[cs.len()].norm() / lam_norm;
    // offset at which the quadratic term equals the base norm
    let (n1, _) = solve_at(1.0)?;
    let curvature = (n1 - n0).abs().max(f64::MIN_POSITIVE);
    let offset_scale = (n0.abs() / curvature).sqrt().max(f64::MIN_POSITIVE);
    let offsets: Vec<f64> = (0..11).map(|j| offset_scale * (j as f64 - 5.0) / 5.0).collect();
    let norms: Vec<f64> = offsets
        .iter()
        .map(|&t| solve_at(t).map(|r| r.0))
        .collect::<Result<_, _>>()?;
    // fit in the scaled variable u = t / offset_scale
    let a = DMatrix::from_fn(11, 3, |i, j| (offsets[i] / offset_scale).powi(j as i32));
    let b = DVector::from_vec(norms.clone());
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| ExperimentError::Invalid(e.to_string()))?;
    let fitted = &a * &coef;
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let fit_residual = (fitted - &b).amax() / max;
    let q = [coef[0], coef[1] / offset_scale, coef[2] / (offset_scale * offset_scale)];
    Ok(QuadraticFit {
        n: cs.len(),
        new_node: x_new,
        c: c.to_c64(),
        offsets,
        norm_sq: norms,
        coefficients: q,
        vertex_offset: -coef[1] / (2.0 * coef[2]),
        offset_scale,
        fit_residual,
        lambda_new_at_c,
    })
}

/// Plane-wave combination from the smallest Gram eigenvector of `nodes`.
pub fn run_extreme(
    cfg: &PhysicalConfig,
    nodes: &[f64],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, ExperimentError> {
    if nodes.len() < 2 {
        return Err(ExperimentError::Invalid(
            "extreme construction needs at least 2 nodes".into(),
        ));
    }
    let start = Instant::now();
    let values = vec![Complex64::new(1.0, 0.0); nodes.len()];
    let cs = ConstraintSet::point_amplitude(nodes.to_vec(), values);
    cs.validate(cfg)?;
    let mut report = ExperimentReport::new("extreme", inputs(cfg, None, Some(&cs), opts));
    let gram = GramMatrix::assemble(cfg, &cs, opts.solver.start_digits)?;
    let pair = extreme_coefficients_converged(&gram, &opts.solver, 1e-14)?;
    report.set("n", nodes.len() as f64);
    report.set("nu_min", pair.eigenvalue);
    if let Some(s) = pair.second_eigenvalue {
        report.set("nu_second", s);
    }
    report.set("degenerate", if pair.degenerate { 1.0 } else { 0.0 });
    report.set("eigen_residual", pair.residual);
    report.set("precision_digits_used", pair.precision_digits as f64);
    report.lambdas = pair.eigenvector.clone();

    let wave = WaveField::from_parts(
        cfg,
        cs.kernels()?,
        pair.eigenvector_mp().to_vec(),
        pair.eigenvalue,
        Normalization::Raw,
    );
    let pm = cfg.p_max;
    let q = Adaptive::default().integrate(
        |p| {
            let d = wave.eval_momentum(p).norm_sqr();
            vec![d, if p.abs() > 0.8 * pm { d } else { 0.0 }]
        },
        &[-pm, -0.8 * pm, 0.0, 0.8 * pm, pm],
        Tolerance::new(1e-300, 1e-12),
    );
    let norm_q = q.value[0];
    report.set("norm_sq_quadrature", norm_q);
    report.set(
        "eigen_identity_error",
        (norm_q - pair.eigenvalue).abs() / pair.eigenvalue,
    );
    report.set("edge_band_fraction", q.value[1] / norm_q);

    let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
    let hull = b - a;
    report.set("hull_length", hull);
    report.set(
        "bandwidth_crossing_bound",
        (hull * pm / (std::f64::consts::PI * cfg.hbar)).floor(),
    );
    report.set(
        "crossings_real",
        zero_crossings(|x| wave.eval_position(x), Part::Real, a, b) as f64,
    );
    report.set(
        "crossings_imag",
        zero_crossings(|x| wave.eval_position(x), Part::Imag, a, b) as f64,
    );
    if opts.tables {
        let l = cfg.slit_width();
        let c = cfg.slit_center;
        let pos = sample(|x| wave.eval_position(x), c - 4.0 * l, c + 4.0 * l, opts.grid_points);
        report.tables.insert("position".into(), Table::complex("x", &pos));
        let mom = sample(|p| wave.eval_momentum(p), -pm, pm, opts.grid_points);
        report.tables.insert("momentum".into(), Table::complex("p", &mom));
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Amplitude matching for each `N` in `n_list`, with error trends.
pub fn run_convergence(
    cfg: &PhysicalConfig,
    pbar: f64,
    n_list: &[usize],
    opts: &ExperimentOptions,
) -> Result<SweepResult, ExperimentError> {
    if n_list.is_empty() || n_list.iter().any(|&n| n < 3) || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::Invalid(
            "N list must be increasing with every N >= 3".into(),
        ));
    }
    cfg.validate()?;
    let start = Instant::now();
    let keys = [
        "sup_error",
        "l2_error",
        "max_abs_derivative",
        "error_peaks",
        "p_mean",
        "p_std",
        "norm_sq",
        "precision_digits_used",
    ];
    let points: Vec<SweepPoint> = n_list
        .par_iter()
        .map(|&n| {
            let mut point = SweepPoint {
                value: n as f64,
                outputs: BTreeMap::new(),
                error: None,
            };
            match run_amplitude_matching(cfg, pbar, n, opts) {
                Ok(r) => {
                    for k in keys {
                        if let Some(v) = r.output(k) {
                            point.outputs.insert(k.into(), v);
                        }
                    }
                }
                Err(e) => point.error = Some((e.kind().to_string(), e.to_string())),
            }
            point
        })
        .collect();
    let mut trend = BTreeMap::new();
    let sups: Vec<f64> = points
        .iter()
        .filter_map(|p| p.outputs.get("sup_error").copied())
        .collect();
    let l2s: Vec<f64> = points
        .iter()
        .filter_map(|p| p.outputs.get("l2_error").copied())
        .collect();
    let dec = |v: &[f64]| if v.windows(2).all(|w| w[1] < w[0]) { 1.0 } else { 0.0 };
    trend.insert("sup_error_strictly_decreasing".into(), dec(&sups));
    trend.insert("l2_error_strictly_decreasing".into(), dec(&l2s));
    let dmax = points
        .iter()
        .filter_map(|p| p.outputs.get("max_abs_derivative").copied())
        .fold(0.0, f64::max);
    trend.insert("max_abs_derivative_over_n".into(), dmax);
    trend.insert(
        "failed_points".into(),
        points.iter().filter(|p| p.error.is_some()).count() as f64,
    );
    Ok(SweepResult {
        experiment: "convergence".into(),
        variable: "N".into(),
        inputs: inputs(cfg, Some(pbar), None, opts),
        points,
        trend,
        quadratic_fit: None,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
