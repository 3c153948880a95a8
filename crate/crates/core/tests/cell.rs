use std::sync::Arc;

use apxhomog::cell::{
    corrector_difference, reference_tensor, solve_cell, solve_corrector, tensor_energy, tensor_flux,
    tensor_window, HomTensor, ReferencePreset, Scheme,
};
use apxhomog::coeff::{parse_expr, Builtin, CoefficientField, PeriodizedField};
use apxhomog::fem::{
    cell_average, coefficient_average, energy_average, harmonic_mean, l2_h1_averages, BoundaryKind, MeshSpec,
};

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn scalar(d: usize, text: &str) -> Arc<CoefficientField> {
    Arc::new(CoefficientField::scalar(d, parse_expr(text).unwrap(), None, None, text).unwrap())
}

fn unit_cell(base: &Arc<CoefficientField>) -> PeriodizedField {
    PeriodizedField::new(base.clone(), 1.0)
}

fn assert_close(t: &HomTensor, expect: &[&[f64]], rel: f64) {
    for (k, row) in expect.iter().enumerate() {
        for (l, &v) in row.iter().enumerate() {
            let got = t.get(k, l);
            let scale = v.abs().max(1.0);
            assert!((got - v).abs() <= rel * scale, "entry ({k},{l}) = {got}, expected {v}");
        }
    }
}

#[test]
fn constant_field_every_scheme() {
    let c = 3.0;
    let base = Arc::new(CoefficientField::constant(2, c).unwrap());
    let mesh = MeshSpec::NodesPerUnit(12.0);
    let field = PeriodizedField::new(base.clone(), 1.5);
    for (bc, tinv) in [
        (BoundaryKind::Periodic, 0.0),
        (BoundaryKind::Periodic, 0.5),
        (BoundaryKind::Dirichlet, 0.0),
        (BoundaryKind::Dirichlet, 0.5),
    ] {
        let sol = solve_cell(&field, &mesh, bc, tinv).unwrap();
        for t in [tensor_flux(&sol).unwrap(), tensor_energy(&sol).unwrap()] {
            assert_close(&t, &[&[c, 0.0], &[0.0, c]], 1e-10);
        }
        if bc == BoundaryKind::Periodic {
            assert!(sol.correctors.iter().all(|w| w.w.iter().all(|v| *v == 0.0)));
        }
    }
    let w = tensor_window(&base, 2.0, 1.0, 0.25, &MeshSpec::NodesPerUnit(3.0)).unwrap();
    assert_close(&w, &[&[c, 0.0], &[0.0, c]], 1e-10);
    assert_eq!(w.scheme, Scheme::Window);
    let field = PeriodizedField::from_radius(base.clone(), 1.0);
    assert!(corrector_difference(&field, &MeshSpec::NodesPerUnit(4.0)).unwrap() < 1e-12);
    let preset = ReferencePreset {
        r: 1.0,
        t: 20.0,
        mesh: MeshSpec::NodesPerUnit(4.0),
    };
    let r = reference_tensor(&base, &preset).unwrap();
    assert_close(&r, &[&[c, 0.0], &[0.0, c]], 1e-10);
    assert_eq!(r.tinv, 1.0 / 20.0);
    assert_eq!(r.scheme, Scheme::DT);
}

#[test]
fn one_dimensional_corrector_matches_closed_form() {
    // w' = √3/a − 1 for a = 2 + sin 2πy.
    let base = scalar(1, "2 + sin(2*pi*x)");
    let field = PeriodizedField::new(base.clone(), 1.0).with_origin([0.0, 0.0]);
    let mut errs = Vec::new();
    for npu in [40.0, 80.0] {
        let c = solve_corrector(&field, &MeshSpec::NodesPerUnit(npu), 0, BoundaryKind::Periodic, 0.0).unwrap();
        let n = c.w.len();
        // Closed form by fine trapezoid quadrature, then mean removed.
        let fine = 200;
        let mut exact = vec![0.0; n];
        let mut acc = 0.0;
        for (i, e) in exact.iter_mut().enumerate().skip(1) {
            let (a, b) = ((i - 1) as f64 / n as f64, i as f64 / n as f64);
            let h = (b - a) / fine as f64;
            for j in 0..fine {
                let (y0, y1) = (a + j as f64 * h, a + (j + 1) as f64 * h);
                let f = |y: f64| SQRT3 / (2.0 + (2.0 * std::f64::consts::PI * y).sin()) - 1.0;
                acc += 0.5 * h * (f(y0) + f(y1));
            }
            *e = acc;
        }
        let mean = exact.iter().sum::<f64>() / n as f64;
        let wmean = c.w.iter().sum::<f64>() / n as f64;
        let err = exact
            .iter()
            .zip(&c.w)
            .map(|(e, w)| ((e - mean) - (w - wmean)).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[1] < errs[0] / 3.0, "not second order: {errs:?}");
}

#[test]
fn one_dimensional_flux_correction() {
    let base = scalar(1, "2 + sin(2*pi*x)");
    let sol = solve_cell(&unit_cell(&base), &MeshSpec::NodesPerUnit(200.0), BoundaryKind::Periodic, 0.0).unwrap();
    let t = tensor_flux(&sol).unwrap();
    let correction = t.get(0, 0) - coefficient_average(&sol.grid, &sol.field).unwrap()[0][0];
    assert!((correction - (SQRT3 - 2.0)).abs() < 1e-4, "{correction}");
}

#[test]
fn laminate_tensor() {
    let base = scalar(2, "2 + sin(2*pi*x)");
    let sol = solve_cell(&unit_cell(&base), &MeshSpec::NodesPerUnit(50.0), BoundaryKind::Periodic, 0.0).unwrap();
    let t = tensor_energy(&sol).unwrap();
    assert_close(&t, &[&[SQRT3, 0.0], &[0.0, 2.0]], 5e-3);
}

#[test]
fn flux_energy_identities() {
    let base = Arc::new(CoefficientField::builtin(Builtin::A1));
    let field = unit_cell(&base);
    let mesh = MeshSpec::NodesPerUnit(24.0);
    let p = solve_cell(&field, &mesh, BoundaryKind::Periodic, 0.0).unwrap();
    let (f, e) = (tensor_flux(&p).unwrap(), tensor_energy(&p).unwrap());
    assert!(f.relative_error_to(&e) < 1e-6);
    assert_eq!(e.asymmetry(), 0.0);
    assert!(f.asymmetry() < 1e-8);

    // With a zero-order term the two forms differ by Tinv·M(w^k w^l).
    for bc in [BoundaryKind::Periodic, BoundaryKind::Dirichlet] {
        let tinv = 0.7;
        let s = solve_cell(&field, &mesh, bc, tinv).unwrap();
        let (f, e) = (tensor_flux(&s).unwrap(), tensor_energy(&s).unwrap());
        for k in 0..2 {
            let (l2, _) = l2_h1_averages(&s.grid, &s.dofmap, &s.correctors[k].w).unwrap();
            let expect = f.get(k, k) - tinv * l2;
            assert!((e.get(k, k) - expect).abs() < 1e-8 * e.get(k, k), "{bc:?} {k}");
        }
    }
}

#[test]
fn periodic_corrector_invariants_for_a3() {
    let base = Arc::new(CoefficientField::builtin(Builtin::A3));
    let field = PeriodizedField::from_radius(base.clone(), 5.0);
    let sol = solve_cell(&field, &MeshSpec::NodesPerUnit(4.0), BoundaryKind::Periodic, 0.0).unwrap();
    let (alpha, sup) = (base.alpha(), base.sup_bound());
    for c in &sol.correctors {
        let avg = cell_average(&sol.grid, &sol.dofmap, &c.w).unwrap();
        let norm = c.w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(avg.abs() <= 1e-10 * norm.max(1.0), "mean {avg}");
        let energy = energy_average(&sol.grid, &sol.dofmap, &sol.field, [0.0; 2], &c.w, |_| true).unwrap();
        assert!(energy <= sup * sup / alpha, "energy bound {energy}");
    }
}

#[test]
fn tensor_bounds_for_builtins() {
    let mesh = MeshSpec::NodesPerUnit(24.0);
    for b in [Builtin::A1, Builtin::A2] {
        let base = Arc::new(CoefficientField::builtin(b));
        let sol = solve_cell(&unit_cell(&base), &mesh, BoundaryKind::Periodic, 0.0).unwrap();
        let t = tensor_energy(&sol).unwrap();
        let (lo, hi) = t.eigen_range();
        assert!(lo >= base.alpha() - 1e-6 && hi <= base.sup_bound() + 1e-6, "{b:?}");
        let harm = harmonic_mean(&sol.grid, &sol.field, 0).unwrap();
        let arith = coefficient_average(&sol.grid, &sol.field).unwrap()[0][0];
        for k in 0..2 {
            assert!(t.get(k, k) >= harm - 1e-9 && t.get(k, k) <= arith + 1e-9, "{b:?} {k}");
        }
    }
    // A3 is quasiperiodic; bounds on a periodized cell.
    let base = Arc::new(CoefficientField::builtin(Builtin::A3));
    let sol = solve_cell(
        &PeriodizedField::from_radius(base.clone(), 1.0),
        &MeshSpec::NodesPerUnit(8.0),
        BoundaryKind::Periodic,
        0.0,
    )
    .unwrap();
    let (lo, hi) = tensor_energy(&sol).unwrap().eigen_range();
    assert!(lo >= base.alpha() - 1e-6 && hi <= base.sup_bound() + 1e-6);
}

#[test]
fn regularized_bound_is_uniform() {
    let base = Arc::new(CoefficientField::builtin(Builtin::A1));
    let field = PeriodizedField::from_radius(base, 1.0);
    let mesh = MeshSpec::NodesPerUnit(6.0);
    let mut values = Vec::new();
    for tinv in [1.0, 0.25, 1.0 / 16.0, 1.0 / 64.0] {
        let c = solve_corrector(&field, &mesh, 0, BoundaryKind::Periodic, tinv).unwrap();
        let (l2, h1) = l2_h1_averages(&c.grid, &c.dofmap, &c.w).unwrap();
        values.push(tinv * l2 + h1);
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max <= 2.0 * min, "{values:?}");
}

#[test]
fn degenerate_window_equals_pt_energy() {
    let base = Arc::new(CoefficientField::builtin(Builtin::A1));
    let mesh = MeshSpec::NodesPerUnit(5.0);
    let w = tensor_window(&base, 1.0, 1.0, 0.5, &mesh).unwrap();
    let field = PeriodizedField::from_radius(base.clone(), 1.0);
    let pt = tensor_energy(&solve_cell(&field, &mesh, BoundaryKind::Periodic, 0.5).unwrap()).unwrap();
    assert!(w.relative_error_to(&pt) < 1e-12);
    let win = w.window.unwrap();
    assert!((win.ell_inner - field.cell_side()).abs() < 1e-12);
    assert!(tensor_window(&base, 1.0, 2.0, 0.5, &mesh).is_err());
    assert!(tensor_window(&base, 2.0, 1.0, 0.0, &mesh).is_err());
}

#[test]
fn corrector_difference_decays_for_a1() {
    let base = Arc::new(CoefficientField::builtin(Builtin::A1));
    let mesh = MeshSpec::HundredPlusRSquared;
    let e4 = corrector_difference(&PeriodizedField::from_radius(base.clone(), 4.0), &mesh).unwrap();
    let e16 = corrector_difference(&PeriodizedField::from_radius(base, 16.0), &mesh).unwrap();
    assert!(e16 >= 0.0 && e4 > e16, "E(4) = {e4}, E(16) = {e16}");
}

#[test]
fn tensor_json_schema() {
    let base = Arc::new(CoefficientField::constant(1, 2.0).unwrap());
    let sol = solve_cell(&unit_cell(&base), &MeshSpec::NodesPerUnit(8.0), BoundaryKind::Periodic, 0.0).unwrap();
    let t = tensor_flux(&sol).unwrap();
    let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
    for key in ["scheme", "form", "ell", "R", "Tinv", "nodes_per_unit", "entries"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["scheme"], "P");
    assert_eq!(v["form"], "flux");
    let back: HomTensor = serde_json::from_str(&t.to_json()).unwrap();
    assert_eq!(back, t);
}

#[test]
fn invalid_inputs() {
    let base = Arc::new(CoefficientField::constant(2, 1.0).unwrap());
    let field = unit_cell(&base);
    let mesh = MeshSpec::NodesPerUnit(4.0);
    assert!(solve_corrector(&field, &mesh, 2, BoundaryKind::Periodic, 0.0).is_err());
    assert!(solve_cell(&field, &mesh, BoundaryKind::Periodic, -1.0).is_err());
    assert!(solve_cell(&field, &mesh, BoundaryKind::Free, 0.0).is_err());
}
