use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use superosc::constraints::{kernel_inner_mp, ConstraintSet, Kernel, PhysicalConfig};
use superosc::experiments::successive_fit;
use superosc::experiments::ExperimentOptions;
use superosc::mp::{vec_dot, MpComplex};
use superosc::quadrature::{breaks_with, Adaptive, Tolerance};
use superosc::solver::{extend_gram, solve_constraints, solve_exact, successive_value_mp, GramMatrix, SolverOptions};
use superosc::wavefield::{ideal_template, project_slit, Normalization, PositionWave, WaveField};

fn cfg() -> PhysicalConfig {
    PhysicalConfig::new(1.0, 1.0, 2.0 * PI).unwrap()
}

/// Strictly increasing nodes inside the `2π` slit with gaps of at least 0.4.
fn nodes(max: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.4f64..1.2, 0..max), 0.0f64..1.0).prop_map(|(gaps, shift)| {
        let mut xs = vec![0.0];
        for g in gaps {
            xs.push(xs.last().unwrap() + g);
        }
        let span = xs.last().unwrap();
        let room = 2.0 * PI - 0.01 - span;
        let start = -PI + 0.005 + shift * room;
        xs.iter().map(|x| start + x).collect()
    })
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn targets(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n).prop_filter("nonzero", |v| v.iter().any(|z| z.norm() > 0.1))
}

fn point_problem(max: usize) -> impl Strategy<Value = ConstraintSet> {
    nodes(max).prop_flat_map(|xs| {
        let n = xs.len();
        targets(n).prop_map(move |a| ConstraintSet::point_amplitude(xs.clone(), a))
    })
}

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        (-PI..PI).prop_map(|x| Kernel::Point { x }),
        (-PI..PI, 0u32..5).prop_map(|(anchor, order)| Kernel::Derivative { anchor, order }),
        (-PI..PI, 0.05f64..2.0).prop_map(|(start, w)| Kernel::Interval { start, end: start + w }),
    ]
}

/// `(1/2πħ) ∫ conj(χ_a) χ_b dp` by adaptive quadrature in double precision.
fn inner_by_quadrature(cfg: &PhysicalConfig, a: &Kernel, b: &Kernel) -> Complex64 {
    let pm = cfg.p_max;
    let out = Adaptive::default().integrate(
        |p| a.momentum(cfg, p).conj() * b.momentum(cfg, p),
        &breaks_with(-pm, pm, [0.0]),
        Tolerance::new(1e-15, 1e-13),
    );
    out.value / (2.0 * PI * cfg.hbar)
}

fn diag(cfg: &PhysicalConfig, k: &Kernel) -> f64 {
    kernel_inner_mp(cfg, k, k, 113).to_c64().re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_hermitian(a in kernel(), b in kernel()) {
        let c = cfg();
        let ab = kernel_inner_mp(&c, &a, &b, 200);
        let ba = kernel_inner_mp(&c, &b, &a, 200).conj();
        let d = (&ab - &ba).abs().to_f64();
        let scale = (diag(&c, &a) * diag(&c, &b)).sqrt();
        prop_assert!(d <= 1e-50 * scale, "{a:?} {b:?}: {d:e}");
    }

    #[test]
    fn gram_matches_quadrature(a in kernel(), b in kernel()) {
        let c = cfg();
        let closed = kernel_inner_mp(&c, &a, &b, 113).to_c64();
        let quad = inner_by_quadrature(&c, &a, &b);
        let scale = (diag(&c, &a) * diag(&c, &b)).sqrt();
        prop_assert!((closed - quad).norm() <= 1e-10 * scale, "{a:?} {b:?}: {closed} vs {quad}");
    }

    #[test]
    fn kernel_position_matches_fourier_quadrature(k in kernel(), xs in prop::collection::vec(-2.0 * PI..2.0 * PI, 20)) {
        let c = cfg();
        let pm = c.p_max;
        let root = (2.0 * PI * c.hbar).sqrt();
        // Cauchy–Schwarz bound on |χ(x)|
        let scale = (diag(&c, &k) * 2.0 * pm).sqrt();
        for x in xs {
            let closed = k.position(&c, x);
            let quad = Adaptive::default()
                .integrate(
                    |p| k.momentum(&c, p) * Complex64::from_polar(1.0, p * x / c.hbar),
                    &breaks_with(-pm, pm, [0.0]),
                    Tolerance::new(1e-15, 1e-13),
                )
                .value
                / root;
            prop_assert!((closed - quad).norm() <= 1e-10 * scale, "{k:?} x={x}: {closed} vs {quad}");
        }
    }

    #[test]
    fn gram_is_positive_definite(xs in nodes(7), u in prop::collection::vec(complex(), 8)) {
        let c = cfg();
        let kernels: Vec<Kernel> = xs.iter().map(|&x| Kernel::Point { x }).collect();
        let g = GramMatrix::from_kernels(&c, &kernels, 256);
        let v: Vec<MpComplex> = u[..xs.len()].iter().map(|&z| MpComplex::from_c64(256, z)).collect();
        prop_assume!(v.iter().any(|z| !z.is_zero()));
        let q = vec_dot(&v, &g.mul_vec(&v), 256);
        prop_assert!(q.re > 0);
    }

    #[test]
    fn derivative_orders_are_positive_definite(anchor in -1.0f64..1.0, n in 1u32..10) {
        let c = cfg();
        let kernels: Vec<Kernel> = (0..n).map(|order| Kernel::Derivative { anchor, order }).collect();
        let g = GramMatrix::from_kernels(&c, &kernels, 256);
        prop_assert!(superosc::solver::Ldl::factor(&g).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residual_contract_and_constraint_satisfaction(cs in point_problem(8)) {
        let c = cfg();
        let opts = SolverOptions::default();
        let (_, sol) = solve_constraints(&c, &cs, &opts).unwrap();
        prop_assert!(sol.residual <= opts.tol);
        let w = WaveField::new(&c, &cs, &sol, Normalization::Raw).unwrap();
        let scale: f64 = cs.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (x, a) in cs.nodes.iter().zip(&cs.values) {
            let got = w.eval_position(*x);
            prop_assert!((got - a).norm() <= (10.0 * sol.residual).max(1e-12) * scale);
        }
    }

    #[test]
    fn norm_identity_by_momentum_quadrature(cs in point_problem(6)) {
        let c = cfg();
        let (_, sol) = solve_constraints(&c, &cs, &SolverOptions::default()).unwrap();
        let w = WaveField::new(&c, &cs, &sol, Normalization::Raw).unwrap();
        let q = Adaptive::default()
            .integrate(|p| w.eval_momentum(p).norm_sqr(), &[-1.0, 0.0, 1.0], Tolerance::new(0.0, 1e-10))
            .value;
        prop_assert!((q - sol.norm_sq).abs() <= 1e-6 * sol.norm_sq, "{q} vs {}", sol.norm_sq);
    }

    #[test]
    fn position_matches_inverse_transform_of_momentum(cs in point_problem(5), xs in prop::collection::vec(-2.0 * PI..2.0 * PI, 20)) {
        let c = cfg();
        let (_, sol) = solve_constraints(&c, &cs, &SolverOptions::default()).unwrap();
        let w = WaveField::new(&c, &cs, &sol, Normalization::Raw).unwrap();
        let root = (2.0 * PI * c.hbar).sqrt();
        let bound = (sol.norm_sq / PI).sqrt();
        for x in xs {
            let direct = w.eval_position(x);
            let inv = Adaptive::default()
                .integrate(
                    |p| w.eval_momentum(p) * Complex64::from_polar(1.0, p * x),
                    &[-1.0, 0.0, 1.0],
                    Tolerance::new(0.0, 1e-12),
                )
                .value
                / root;
            prop_assert!((direct - inv).norm() <= 1e-8 * direct.norm().max(bound), "x={x}: {direct} vs {inv}");
        }
    }

    #[test]
    fn derivative_bound_holds(cs in point_problem(6), xs in prop::collection::vec(-3.0 * PI..3.0 * PI, 50)) {
        let c = cfg();
        let (_, sol) = solve_constraints(&c, &cs, &SolverOptions::default()).unwrap();
        let w = WaveField::new(&c, &cs, &sol, Normalization::Raw).unwrap();
        let base = (c.p_max / (PI * c.hbar)).sqrt() * sol.norm_sq.sqrt();
        for x in xs {
            for n in 0..4u32 {
                let bound = (c.p_max / c.hbar).powi(n as i32) * base;
                prop_assert!(w.derivative(x, n).norm() <= bound * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn scaling_targets_scales_multipliers(cs in point_problem(6), s in complex()) {
        prop_assume!(s.norm() > 0.1);
        let c = cfg();
        let opts = SolverOptions::default();
        let (_, a) = solve_constraints(&c, &cs, &opts).unwrap();
        let scaled = ConstraintSet::point_amplitude(cs.nodes.clone(), cs.values.iter().map(|v| v * s).collect());
        let (_, b) = solve_constraints(&c, &scaled, &opts).unwrap();
        let lam_norm: f64 = a.lambdas.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (x, y) in a.lambdas.iter().zip(&b.lambdas) {
            prop_assert!((x * s - y).norm() <= 1e-9 * lam_norm * s.norm());
        }
        prop_assert!((b.norm_sq - a.norm_sq * s.norm_sqr()).abs() <= 1e-9 * b.norm_sq);
    }

    #[test]
    fn successive_constraint_at_c_changes_nothing(cs in point_problem(6), t in 0.1f64..0.9) {
        let c = cfg();
        let opts = SolverOptions::default();
        let (g, sol) = solve_constraints(&c, &cs, &opts).unwrap();
        // new node inside the first gap, or beside a lone node
        let x_new = if cs.nodes.len() > 1 {
            cs.nodes[0] + t * (cs.nodes[1] - cs.nodes[0])
        } else {
            cs.nodes[0] + if cs.nodes[0] < 0.0 { t } else { -t }
        };
        let new = Kernel::Point { x: x_new };
        let prec = sol.prec_bits();
        let cval = successive_value_mp(&c, g.kernels(), &sol, &new);
        let ext = extend_gram(&g.at_precision(prec), &new);
        let mut a: Vec<MpComplex> = cs.values.iter().map(|&v| MpComplex::from_c64(prec, v)).collect();
        a.push(cval);
        let s2 = solve_exact(&ext, &a, &opts).unwrap();
        let lam_norm: f64 = s2.lambdas.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(s2.lambdas[cs.len()].norm() <= 1e-8 * lam_norm);
        prop_assert!((s2.norm_sq - sol.norm_sq).abs() <= 1e-8 * sol.norm_sq);
    }

    #[test]
    fn norm_is_quadratic_in_added_target(cs in point_problem(6)) {
        prop_assume!(cs.len() >= 2);
        let c = cfg();
        let opts = ExperimentOptions::default();
        let (g, sol) = solve_constraints(&c, &cs, &opts.solver).unwrap();
        let fit = successive_fit(&c, &cs, &g, &sol, &opts).unwrap();
        prop_assert!(fit.fit_residual < 1e-9, "{}", fit.fit_residual);
        prop_assert!(fit.coefficients[2] > 0.0);
        prop_assert!(fit.vertex_offset.abs() < 1e-6);
    }
}

/// `ψ(x)` for point constraints from the sinc closed form, in double precision.
fn psi_points(nodes: &[f64], lambdas: &[Complex64], x: f64) -> Complex64 {
    nodes
        .iter()
        .zip(lambdas)
        .map(|(&xk, l)| {
            let u = x - xk;
            let s = if u.abs() < 1e-12 { 1.0 / PI } else { u.sin() / (PI * u) };
            l * s
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn parseval_in_position_space(cs in point_problem(4)) {
        let c = cfg();
        let (_, sol) = solve_constraints(&c, &cs, &SolverOptions::default()).unwrap();
        let lam = &sol.lambdas;
        let f = |x: f64| psi_points(&cs.nodes, lam, x).norm_sqr();
        // tail beyond ±X from the asymptotic form |ψ|² ≈ |Σλ sin(x − x_k)|² / (πx)²
        let (mut aa, mut bb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (&xk, l) in cs.nodes.iter().zip(lam) {
            aa += l * Complex64::from_polar(1.0, -xk);
            bb += l * Complex64::from_polar(1.0, xk);
        }
        let tail_coef = (aa.norm_sqr() + bb.norm_sqr()) / (2.0 * PI * PI);
        let mut x_max = 64.0 * PI;
        let mut prev = f64::NAN;
        loop {
            let breaks: Vec<f64> = (0..=(2.0 * x_max / PI) as usize).map(|i| -x_max + PI * i as f64).collect();
            let mut quad = Adaptive::default();
            quad.max_panels = 100_000;
            let core = quad
                .integrate(f, &breaks, Tolerance::new(0.0, 1e-12))
                .value;
            let total = core + tail_coef / x_max;
            if (total - prev).abs() < 1e-8 * total || x_max > 4096.0 {
                prop_assert!((total - sol.norm_sq).abs() <= 1e-6 * sol.norm_sq, "{total} vs {}", sol.norm_sq);
                break;
            }
            prev = total;
            x_max *= 2.0;
        }
    }

    #[test]
    fn template_spread_is_locally_minimal(coeffs in prop::collection::vec(complex(), 4)) {
        let c = cfg();
        let t = ideal_template(&c, 2.0);
        let l = c.slit_width();
        let eta = |x: f64, d: u32| -> Complex64 {
            let u = x + 0.5 * l;
            coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let k = (j + 2) as f64 * PI / l;
                    let (s, co) = (k * u).sin_cos();
                    let base = if d == 0 { Complex64::new(s, 0.0) } else { Complex64::new(k * co, 0.0) };
                    let phase = Complex64::from_polar(1.0, 2.0 * x);
                    // product rule for η = sin(ku) e^{2ix}
                    if d == 0 { a * base * phase } else { a * (base + Complex64::new(0.0, 2.0) * s) * phase }
                })
                .sum()
        };
        let spread = |e: f64| -> f64 {
            let moments = Adaptive::default()
                .integrate(
                    |x| {
                        let f = t.value(x) + eta(x, 0) * e;
                        let df = t.derivative(x, 1) + eta(x, 1) * e;
                        vec![f.norm_sqr(), (f.conj() * df).im, df.norm_sqr()]
                    },
                    &[-0.5 * l, 0.0, 0.5 * l],
                    Tolerance::new(0.0, 1e-13),
                )
                .value;
            let m = moments[1] / moments[0];
            (moments[2] / moments[0] - m * m).sqrt()
        };
        let s0 = spread(0.0);
        prop_assert!((s0 - 0.5).abs() < 1e-10);
        for e in [1e-3, -1e-3] {
            prop_assert!(spread(e) >= s0);
        }
    }

    #[test]
    fn emerging_wave_of_template_is_template(pbar in -3.0f64..3.0) {
        let c = cfg();
        let t = ideal_template(&c, pbar);
        let e = project_slit(&t, &c).unwrap();
        prop_assert!((e.renorm_factor - 1.0).abs() < 1e-10);
        for x in [-3.0, -1.0, 0.0, 2.5] {
            prop_assert!((e.value(x) - t.value(x)).norm() < 1e-10);
        }
    }
}
