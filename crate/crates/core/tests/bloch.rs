use std::f64::consts::PI;
use std::sync::Arc;

use apxhomog::bloch::{
    assemble_shifted, bloch_eigs, default_step, spectral_gap_scan, BlochError, BlochSolver,
};
use apxhomog::cell::{solve_cell, tensor_flux};
use apxhomog::coeff::{parse_expr, Builtin, CoefficientField, PeriodizedField};
use apxhomog::fem::{BoundaryKind, MeshSpec};
use apxhomog::linalg::Scalar;

fn identity() -> Arc<CoefficientField> {
    Arc::new(CoefficientField::constant(2, 1.0).unwrap())
}

#[test]
fn zero_shift_is_the_real_stiffness() {
    let f = PeriodizedField::new(Arc::new(CoefficientField::builtin(Builtin::A1)), 1.0);
    let mesh = MeshSpec::NodesPerUnit(6.0);
    let solver = BlochSolver::new(&f, &mesh).unwrap();
    let (k, m) = assemble_shifted(&f, &mesh, &[0.0, 0.0]).unwrap();
    for ((i, j, v), (_, _, s)) in k.iter().zip(solver.forms.stiffness.iter()) {
        assert_eq!(v.im, 0.0, "({i},{j})");
        assert_eq!(v.re, s);
    }
    assert_eq!(m.max_asymmetry(), 0.0);
    let (k, _) = assemble_shifted(&f, &mesh, &[0.7, -1.3]).unwrap();
    assert_eq!(k.max_asymmetry(), 0.0);
    assert!(k.iter().any(|(_, _, v)| v.im != 0.0));
}

#[test]
fn constant_coefficient_bloch_eigenvalue_is_exact() {
    let c = 2.5;
    let r = 1.0;
    let f = PeriodizedField::from_radius(Arc::new(CoefficientField::constant(2, c).unwrap()), r);
    let eta = [1.0 / (4.0 * r), 0.0];
    let p = bloch_eigs(&f, &MeshSpec::NodesPerUnit(3.0), &eta, 1).unwrap();
    let expect = c * eta[0] * eta[0];
    assert!((p[0].lambda - expect).abs() < 1e-10 * expect.max(1.0), "{}", p[0].lambda);

    let id = PeriodizedField::from_radius(identity(), 1.0);
    let p = bloch_eigs(&id, &MeshSpec::NodesPerUnit(3.0), &[0.1, 0.0], 1).unwrap();
    assert!((p[0].lambda - 0.01).abs() < 1e-10);
}

#[test]
fn first_mode_at_zero_is_the_normalized_constant() {
    let r = 0.5;
    let f = PeriodizedField::from_radius(Arc::new(CoefficientField::builtin(Builtin::A1)), r);
    let p = bloch_eigs(&f, &MeshSpec::NodesPerUnit(4.0), &[0.0, 0.0], 1).unwrap();
    let e = &p[0];
    assert!(e.lambda.abs() <= 1e-8, "{}", e.lambda);
    assert!((e.m_norm_sq - r * r).abs() < 1e-10 * r * r);
    let mods: Vec<f64> = e.eigvec.iter().map(|z| z.abs()).collect();
    let mean = mods.iter().sum::<f64>() / mods.len() as f64;
    let sd = (mods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / mods.len() as f64).sqrt();
    assert!(sd <= 1e-6 * mean);
    assert!((mean - 1.0 / (2.0 * PI)).abs() < 1e-8);
    assert!(e.eigvec.iter().all(|z| z.im.abs() < 1e-12 && z.re > 0.0));
}

#[test]
fn second_mode_of_the_laplacian_refines_to_one() {
    let f = PeriodizedField::from_radius(identity(), 1.0);
    let mut last = f64::INFINITY;
    for npu in [2.0, 4.0, 8.0] {
        let p = bloch_eigs(&f, &MeshSpec::NodesPerUnit(npu), &[0.0, 0.0], 2).unwrap();
        let err = (p[1].lambda - 1.0).abs();
        assert!(err < last, "no refinement at {npu}");
        assert!(p[1].lambda > 0.0);
        last = err;
    }
    assert!(last < 5e-3);
}

#[test]
fn evenness_and_vanishing_gradient() {
    let f = PeriodizedField::new(Arc::new(CoefficientField::builtin(Builtin::A1)), 1.0);
    let s = BlochSolver::new(&f, &MeshSpec::NodesPerUnit(12.0)).unwrap();
    for eta in [[0.05, 0.0], [0.02, -0.03], [0.0, 0.1]] {
        let p = s.lambda1(&eta).unwrap();
        let m = s.lambda1(&[-eta[0], -eta[1]]).unwrap();
        assert!((p - m).abs() <= 1e-8 * p.abs(), "{eta:?}: {p} vs {m}");
    }
    for g in s.gradient(1e-3).unwrap() {
        assert!(g.abs() <= 1e-6, "{g}");
    }
}

#[test]
fn hessian_of_constant_and_laminate() {
    let c = 1.5;
    let f = PeriodizedField::new(Arc::new(CoefficientField::constant(2, c).unwrap()), 1.0);
    let h = BlochSolver::new(&f, &MeshSpec::NodesPerUnit(4.0)).unwrap().hessian(0.01).unwrap();
    for k in 0..2 {
        for l in 0..2 {
            let expect = if k == l { 2.0 * c } else { 0.0 };
            assert!((h.matrix[k][l] - expect).abs() < 1e-5, "{:?}", h.matrix);
        }
    }
    assert_eq!(h.matrix[0][1], h.matrix[1][0]);

    let lam = Arc::new(
        CoefficientField::scalar(2, parse_expr("2 + sin(2*pi*x)").unwrap(), None, Some(vec![1.0, 1.0]), "lam").unwrap(),
    );
    let f = PeriodizedField::new(lam, 1.0);
    let mesh = MeshSpec::NodesPerUnit(20.0);
    let s = BlochSolver::new(&f, &mesh).unwrap();
    let h = s.hessian(default_step(f.radius())).unwrap();
    let t = tensor_flux(&solve_cell(&f, &mesh, BoundaryKind::Periodic, 0.0).unwrap()).unwrap();
    let half = h.half();
    for k in 0..2 {
        for l in 0..2 {
            let scale = t.max_abs();
            assert!((half[k][l] - t.get(k, l)).abs() <= 0.02 * scale, "{half:?} vs {:?}", t.entries);
        }
    }
    // Halving the step barely moves an O(h²) stencil.
    for row in &h.step_change {
        for v in row {
            assert!(v.abs() < 1e-3);
        }
    }
}

#[test]
fn eigenvector_derivative_tracks_the_corrector() {
    let f = PeriodizedField::new(Arc::new(CoefficientField::builtin(Builtin::A1)), 1.0);
    let mesh = MeshSpec::NodesPerUnit(12.0);
    let s = BlochSolver::new(&f, &mesh).unwrap();
    let sol = solve_cell(&f, &mesh, BoundaryKind::Periodic, 0.0).unwrap();
    for axis in 0..2 {
        let rho = s.eigenvector_corrector_correlation(axis, 1e-3, &sol.correctors[axis].w).unwrap();
        assert!(rho > 0.99, "axis {axis}: {rho}");
    }
}

#[test]
fn stencil_outside_the_dual_cell_is_rejected() {
    let r = 2.0;
    let f = PeriodizedField::from_radius(identity(), r);
    let s = BlochSolver::new(&f, &MeshSpec::NodesPerUnit(1.0)).unwrap();
    assert!((s.half_width() - 0.25).abs() < 1e-15);
    assert!(matches!(s.gradient(0.3), Err(BlochError::OutsideDualCell { .. })));
    assert!(matches!(s.hessian(0.2), Err(BlochError::OutsideDualCell { .. })));
    assert!(s.eigenpairs(&[0.0], 1).is_err());
    assert!(s.eigenpairs(&[0.0, 0.0], 3).is_err());
    let outside = s.eigenpairs(&[0.3, 0.0], 1).unwrap();
    assert!(!outside[0].inside_dual_cell);
}

#[test]
fn laplacian_gap_scales_like_inverse_square() {
    let scan = spectral_gap_scan(&identity(), &MeshSpec::NodesPerUnit(4.0), &[1.0, 2.0, 4.0]).unwrap();
    let scaled: Vec<f64> = scan.records.iter().map(|g| g.scaled.unwrap()).collect();
    for v in &scaled {
        assert!((v - scaled[0]).abs() < 0.02 * scaled[0], "{scaled:?}");
        assert!(*v > 0.0);
    }
    assert!((scan.exponent.unwrap() + 2.0).abs() < 0.05);
}

#[test]
fn a1_gap_decreases_with_r() {
    let a1 = Arc::new(CoefficientField::builtin(Builtin::A1));
    let scan = spectral_gap_scan(&a1, &MeshSpec::NodesPerUnit(4.0), &[1.0, 2.0]).unwrap();
    let l: Vec<f64> = scan.records.iter().map(|g| g.lambda2.unwrap()).collect();
    assert!(l[1] < l[0] && l[1] > 0.0, "{l:?}");
    assert!(scan.exponent.is_none());
}
