use std::sync::Arc;

use apxhomog::bloch::BlochSolver;
use apxhomog::cell::{solve_cell, tensor_flux, HomTensor, Scheme, TensorForm};
use apxhomog::coeff::{
    parse_expr, periodize, BinOp, Builtin, CoefficientField, Func, NamedConst, PeriodizedField, ScalarExpr,
};
use apxhomog::fem::{assemble, harmonic_mean, BoundaryKind, DofMap, Grid, Layout, MeshSpec};
use apxhomog::linalg::{cg_solve, CgOptions};
use apxhomog::study::fit_rate;
use proptest::prelude::*;

fn expr() -> impl Strategy<Value = ScalarExpr> {
    let leaf = prop_oneof![
        (0.0f64..100.0).prop_map(ScalarExpr::Num),
        (-50.0f64..0.0).prop_map(ScalarExpr::Num),
        Just(ScalarExpr::Const(NamedConst::Pi)),
        Just(ScalarExpr::Const(NamedConst::Sqrt2)),
        (0usize..2).prop_map(ScalarExpr::Var),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos)];
        prop_oneof![
            inner.clone().prop_map(|e| ScalarExpr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| ScalarExpr::binary(o, a, b)),
            (func, inner).prop_map(|(f, e)| ScalarExpr::call(f, e)),
        ]
    })
}

fn same_bits(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits()
}

fn tensor(entries: Vec<Vec<f64>>) -> HomTensor {
    HomTensor {
        scheme: Scheme::P,
        form: TensorForm::Flux,
        ell: 1.0,
        r: 1.0 / (2.0 * std::f64::consts::PI),
        tinv: 0.0,
        nodes_per_unit: 1.0,
        entries,
        window: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_evaluates_identically(e in expr()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        for i in 0..100 {
            let p = [-3.0 + 0.061 * i as f64, 2.0 - 0.037 * i as f64];
            prop_assert!(same_bits(e.eval(&p), back.eval(&p)), "{text} at {p:?}");
        }
    }

    #[test]
    fn fitted_rate_recovers_power_laws(p in -3.0f64..3.0, c in 0.01f64..100.0, n in 3usize..12) {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| {
            let r = 1.0 + 1.7 * i as f64;
            (r, c * r.powf(p))
        }).collect();
        let fit = fit_rate(&pts).unwrap();
        prop_assert!((fit.slope.unwrap() - p).abs() < 1e-10);
        prop_assert!((fit.intercept.unwrap() - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn error_norms_are_ordered(a in prop::collection::vec(-10.0f64..10.0, 4), b in prop::collection::vec(-10.0f64..10.0, 4)) {
        let ta = tensor(vec![a[..2].to_vec(), a[2..].to_vec()]);
        let tb = tensor(vec![b[..2].to_vec(), b[2..].to_vec()]);
        let (m, f) = ta.error_to(&tb);
        prop_assert!(m <= f * (1.0 + 1e-15));
        prop_assert!(f <= 2.0 * m * (1.0 + 1e-15));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projected_cg_returns_mean_zero(seed in 0u64..1000, n in 4usize..12) {
        let f = periodize(CoefficientField::builtin(Builtin::A1), 1.0);
        let g = Grid::new(2, 1.0, f.origin(), n, Layout::Periodic).unwrap();
        let dm = DofMap::periodic(&g);
        let k = assemble(&g, &dm, &f, 0.0).unwrap().stiffness;
        let len = dm.dof_count();
        let b: Vec<f64> = (0..len).map(|i| ((seed as f64 + 1.0) * (i as f64 + 0.5)).sin()).collect();
        let (x, _) = cg_solve(&k, &b, &CgOptions::for_problem(len, 2, true), None).unwrap();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        prop_assert!((x.iter().sum::<f64>() / len as f64).abs() <= 1e-12 * scale);
    }

    #[test]
    fn laminate_tensor_between_harmonic_and_arithmetic(amp in 0.0f64..1.8) {
        let s = ScalarExpr::binary(
            BinOp::Add,
            ScalarExpr::num(2.0),
            ScalarExpr::binary(BinOp::Mul, ScalarExpr::num(amp), parse_expr("sin(2*pi*x)").unwrap()),
        );
        let f = periodize(CoefficientField::scalar(2, s, None, None, "lam").unwrap(), 1.0);
        let sol = solve_cell(&f, &MeshSpec::NodesPerUnit(16.0), BoundaryKind::Periodic, 0.0).unwrap();
        let a = tensor_flux(&sol).unwrap();
        let g = &sol.grid;
        let h = harmonic_mean(g, &f, 0).unwrap();
        prop_assert!(a.asymmetry() <= 1e-12);
        let (lo, hi) = a.eigen_range();
        prop_assert!(lo >= h * (1.0 - 1e-9), "{lo} < {h}");
        prop_assert!(hi <= 2.0 * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn bloch_eigenvalue_is_even(ex in -0.4f64..0.4, ey in -0.4f64..0.4) {
        let f = PeriodizedField::new(Arc::new(CoefficientField::builtin(Builtin::A3)), 1.0);
        let s = BlochSolver::new(&f, &MeshSpec::NodesPerUnit(6.0)).unwrap();
        let a = s.lambda1(&[ex, ey]).unwrap();
        let b = s.lambda1(&[-ex, -ey]).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-12), "{a} vs {b}");
    }
}
