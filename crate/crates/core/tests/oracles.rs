//! Closed-form checks for small problems.

use std::f64::consts::PI;

use num_complex::Complex64;
use superosc::constraints::{gram_entry, ConstraintSet, PhysicalConfig};
use superosc::experiments::{run_derivative_matching, run_extreme, ExperimentOptions};
use superosc::solver::{extreme_coefficients, solve_constraints, GramMatrix, SolverOptions};
use superosc::wavefield::{ideal_template, Normalization, PositionWave, WaveField};

#[test]
fn single_point_solution() {
    for (hbar, pm, a) in [
        (1.0, 1.0, Complex64::new(1.0, 0.0)),
        (0.7, 1.3, Complex64::new(-0.4, 2.0)),
    ] {
        let cfg = PhysicalConfig::new(hbar, pm, 3.0).unwrap();
        let cs = ConstraintSet::point_amplitude(vec![0.25], vec![a]);
        let (_, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
        // T = p_max/(πħ), λ = a/T, ‖ψ‖² = |a|²/T
        let t = pm / (PI * hbar);
        assert!((sol.lambdas[0] - a / t).norm() < 1e-13 * (a / t).norm());
        assert!((sol.norm_sq - a.norm_sqr() / t).abs() < 1e-13 * sol.norm_sq);
        let w = WaveField::new(&cfg, &cs, &sol, Normalization::Raw).unwrap();
        let x = 1.1;
        let u = pm * (x - 0.25) / hbar;
        let expect = a * (u.sin() / u);
        assert!((w.eval_position(x) - expect).norm() < 1e-13);
    }
}

#[test]
fn point_gram_entries_are_sincs() {
    let cfg = PhysicalConfig::new(0.8, 1.7, 6.0).unwrap();
    let xs = [-2.0, -0.3, 0.9, 2.4];
    let cs = ConstraintSet::point_amplitude(xs.to_vec(), vec![Complex64::new(1.0, 0.0); 4]);
    for i in 0..4 {
        for j in 0..4 {
            let d = xs[i] - xs[j];
            let expect = if i == j {
                cfg.p_max / (PI * cfg.hbar)
            } else {
                (cfg.p_max * d / cfg.hbar).sin() / (PI * d)
            };
            let got = gram_entry(&cfg, &cs, i, j).unwrap();
            assert!((got.re - expect).abs() < 1e-15 && got.im.abs() < 1e-15, "{i} {j}");
        }
    }
}

#[test]
fn derivative_gram_diagonal_and_parity() {
    let cfg = PhysicalConfig::new(0.9, 1.4, 4.0).unwrap();
    let n = 8;
    let cs = ConstraintSet::derivative_at_point(0.0, vec![Complex64::new(1.0, 0.0); n]);
    let g = GramMatrix::assemble(&cfg, &cs, 34).unwrap();
    for j in 0..n {
        for k in 0..n {
            let v = g.get(j, k).to_c64();
            if (j + k) % 2 == 1 {
                assert!(v.norm() < 1e-30, "{j} {k}: {v}");
            } else {
                assert!(v.norm() > 1e-6, "{j} {k}: {v}");
            }
        }
        // (1/2πħ) ∫ (p/ħ)^{2j} dp
        let m = 2 * j as i32;
        let expect = 2.0 * cfg.p_max.powi(m + 1) / ((m + 1) as f64 * cfg.hbar.powi(m)) / (2.0 * PI * cfg.hbar);
        let got = g.get(j, j).to_c64().re;
        assert!((got - expect).abs() < 1e-14 * expect);
    }
}

#[test]
fn one_derivative_constraint_gives_scaled_sinc() {
    let cfg = PhysicalConfig::new(1.0, 1.0, 2.0 * PI).unwrap();
    let r = run_derivative_matching(&cfg, 2.0, 1, &ExperimentOptions::default()).unwrap();
    let phi0 = (2.0 / cfg.slit_width()).sqrt();
    let t = ideal_template(&cfg, 2.0);
    assert!((t.value(0.0).re - phi0).abs() < 1e-15);
    let cs = ConstraintSet::derivative_at_point(0.0, vec![t.value(0.0)]);
    let (_, sol) = solve_constraints(&cfg, &cs, &SolverOptions::default()).unwrap();
    let w = WaveField::new(&cfg, &cs, &sol, Normalization::Raw).unwrap();
    for x in [-2.0f64, 0.0, 0.7, 3.0] {
        let s = if x == 0.0 { 1.0 } else { x.sin() / x };
        assert!((w.eval_position(x) - phi0 * s).norm() < 1e-14);
    }
    assert!((r.output("norm_sq").unwrap() - PI * phi0 * phi0).abs() < 1e-13);
}

#[test]
fn symmetric_pair_extreme_vector() {
    let cfg = PhysicalConfig::new(1.0, 1.0, 4.0).unwrap();
    let h = 0.3;
    let cs = ConstraintSet::point_amplitude(vec![-h, h], vec![Complex64::new(1.0, 0.0); 2]);
    let g = GramMatrix::assemble(&cfg, &cs, 34).unwrap();
    let e = extreme_coefficients(&g).unwrap();
    // [[a, b], [b, a]] with b > 0 here: ν = a − b along (1, −1)/√2
    let a = 1.0 / PI;
    let b = (2.0 * h).sin() / (PI * 2.0 * h);
    assert!((e.eigenvalue - (a - b)).abs() < 1e-14);
    let q = &e.eigenvector;
    assert!((q[0] + q[1]).norm() < 1e-12);
    assert!((q[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);

    let r = run_extreme(&cfg, &[-h, h], &ExperimentOptions::default()).unwrap();
    assert!(r.output("eigen_identity_error").unwrap() < 1e-10);
}

#[test]
fn template_moments_in_closed_form() {
    let cfg = PhysicalConfig::new(1.0, 1.0, 2.0 * PI).unwrap();
    let t = ideal_template(&cfg, 2.0);
    assert!((t.delta_p() - 0.5).abs() < 1e-15);
    let expect = 2.0 * PI * ((PI * PI - 6.0) / (12.0 * PI * PI)).sqrt();
    assert!((t.delta_x() - expect).abs() < 1e-14);
    // vanishes at the slit edges
    assert!(t.value(PI).norm() == 0.0 && t.value(-PI).norm() == 0.0);
}
