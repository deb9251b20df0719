use alglab_core::expr::{parse, Expr};
use proptest::prelude::*;

fn names() -> Vec<String> {
    vec!["x".to_string(), "y".to_string()]
}

/// Expressions that are smooth on all of R^2, up to depth 6.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (-3.0f64..3.0).prop_map(|v| Expr::num((v * 100.0).round() / 100.0)),
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (b.powi(2) + Expr::one())),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).log()),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).sqrt()),
            inner.clone().prop_map(|a| (a.sin() * 0.5).tan()),
            inner.clone().prop_map(|a| a.cos().powi(3)),
            (inner.clone(), inner).prop_map(|(a, b)| (a.powi(2) + Expr::num(0.5)).pow(&b.sin())),
        ]
    })
}

/// Expressions with arbitrary literals and raw negations, for printing.
fn any_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Expr::num),
        (-1e6f64..1e6).prop_map(Expr::num),
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.pow(&b)),
            inner.clone().prop_map(|a| -a),
            inner.clone().prop_map(|a| a.exp()),
            inner.prop_map(|a| a.log()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivative_matches_central_difference(e in smooth_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let n = names();
        let d = e.diff("x");
        let v = e.eval(&n, &[x, y]);
        let dv = d.eval(&n, &[x, y]);
        let d2 = d.diff("x").eval(&n, &[x, y]);
        prop_assume!(v.is_ok() && dv.is_ok() && d2.is_ok());
        let (v, dv, d2) = (v.unwrap(), dv.unwrap(), d2.unwrap());
        // keep to the regime where a central difference is itself accurate
        prop_assume!(v.abs() < 1e4 && d2.abs() < 1e5);
        let h = 1e-5;
        let fp = e.eval(&n, &[x + h, y]);
        let fm = e.eval(&n, &[x - h, y]);
        prop_assume!(fp.is_ok() && fm.is_ok());
        let fd = (fp.unwrap() - fm.unwrap()) / (2.0 * h);
        prop_assert!((dv - fd).abs() <= 1e-4 * (1.0 + dv.abs()), "{} : {} vs {}", e, dv, fd);
    }

    #[test]
    fn print_then_parse_is_identity(e in any_expr(), x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let printed = e.to_string();
        let back = parse(&printed).map_err(|err| TestCaseError::fail(format!("{}: {}", printed, err)))?;
        prop_assert_eq!(&back, &e);
        let n = names();
        let a = e.eval(&n, &[x, y]);
        let b = back.eval(&n, &[x, y]);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn compiled_form_agrees(e in smooth_expr(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let n = names();
        let c = e.compile(&n).unwrap();
        prop_assert_eq!(c.eval(&[x, y]).ok().map(f64::to_bits), e.eval(&n, &[x, y]).ok().map(f64::to_bits));
    }
}
