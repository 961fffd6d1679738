use dov::basis::{hcp_eval, BasisSpec, CoeffVector, Interval};
use dov::expr::Expr;
use dov::opalg::{hat_vector, integration_matrix, power_vector, product_matrix, OpMatrix};
use dov::oracle::{integration_deviation, quad_adaptive};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("x".to_string()),
        (0u32..50).prop_map(|n| format!("{}", n as f64 / 4.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            (inner.clone(), prop::sample::select(vec!["sin", "cos", "exp", "abs"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.prop_map(|a| format!("({a})^2")),
        ]
    })
}

fn spec_strategy() -> impl Strategy<Value = BasisSpec> {
    (-2.0..1.0f64, 0.25..3.0f64, 1usize..=4, 1usize..=8)
        .prop_map(|(t0, len, n, m)| BasisSpec::new(Interval::new(t0, t0 + len).unwrap(), n, m).unwrap())
}

fn coeffs(spec: BasisSpec, values: &[f64], keep: usize) -> CoeffVector {
    let mut cv = CoeffVector::zeros(spec);
    for b in 0..spec.blocks() {
        for k in 0..keep.min(spec.degree()) {
            cv.coeffs_mut()[spec.index(b, k)] = values[(b * 7 + k) % values.len()];
        }
    }
    cv
}

fn interior_points(spec: &BasisSpec) -> Vec<f64> {
    let i = spec.interval();
    (0..41).map(|k| i.t0() + i.len() * (k as f64 + 0.5) / 41.0).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expression_display_round_trips(src in expr_source(), x in -1.0..1.0f64, t in -1.0..1.0f64) {
        let e = Expr::parse(&src).unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        let a = e.eval_xt(x, t).unwrap();
        let b = again.eval_xt(x, t).unwrap();
        prop_assert!(close(a, b, 1e-12), "{src} -> {e}: {a} vs {b}");
    }

    #[test]
    fn basis_is_orthogonal(spec in spec_strategy(), i in 0usize..32, j in 0usize..32) {
        let (i, j) = (i % spec.dim(), j % spec.dim());
        let (bi, _) = spec.split(i);
        // x = cos(theta) absorbs the Chebyshev weight
        let ip = quad_adaptive(
            |th: f64| {
                let t = spec.from_local(bi, th.cos());
                hcp_eval(&spec, i, t).unwrap() * hcp_eval(&spec, j, t).unwrap() / spec.local_scale()
            },
            1e-9,
            std::f64::consts::PI - 1e-9,
            1e-12,
        )
        .unwrap();
        let expected = if i == j { spec.norm_sq(spec.split(i).1) } else { 0.0 };
        prop_assert!((ip - expected).abs() < 1e-8, "{i},{j}: {ip} vs {expected}");
    }

    #[test]
    fn projection_reproduces_polynomials(spec in spec_strategy(), c in prop::collection::vec(-2.0..2.0f64, 8)) {
        let deg = spec.degree() - 1;
        let p = |t: f64| c.iter().take(deg + 1).rev().fold(0.0, |acc, a| acc * t + a);
        let cv = CoeffVector::project(spec, p);
        for t in interior_points(&spec) {
            prop_assert!(close(cv.eval(t), p(t), 1e-10));
        }
    }

    #[test]
    fn integration_matrix_contract(spec in spec_strategy()) {
        let report = integration_deviation(&integration_matrix(&spec));
        prop_assert!(report.max_deviation < 1e-9, "{}", report.max_deviation);
    }

    #[test]
    fn hat_of_low_degree_matrix_is_exact(spec in spec_strategy(), v in prop::collection::vec(-1.0..1.0f64, 16)) {
        let m = spec.degree();
        let mut b = DMatrix::zeros(spec.dim(), spec.dim());
        for blk in 0..spec.blocks() {
            for i in 0..m {
                for j in 0..m - i {
                    b[(spec.index(blk, i), spec.index(blk, j))] = v[(i * 5 + j * 3 + blk) % v.len()];
                }
            }
        }
        let hat = hat_vector(&OpMatrix::new(spec, b.clone())).into_coeffs();
        for t in interior_points(&spec) {
            let h: Vec<f64> = (0..spec.dim()).map(|r| hcp_eval(&spec, r, t).unwrap()).collect();
            let quad: f64 = (0..spec.dim()).map(|i| (0..spec.dim()).map(|j| h[i] * b[(i, j)] * h[j]).sum::<f64>()).sum();
            prop_assert!(close(hat.eval(t), quad, 1e-11));
        }
    }

    #[test]
    fn hat_is_linear(spec in spec_strategy(), a in -2.0..2.0f64, seed in 0u64..1000) {
        let d = spec.dim();
        let f = |k: u64| DMatrix::from_fn(d, d, |i, j| (((i * 31 + j * 17) as u64 + k) % 13) as f64 / 13.0 - 0.5);
        let (b1, b2) = (f(seed), f(seed + 5));
        let lhs = hat_vector(&OpMatrix::new(spec, &b1 * a + &b2));
        let h1 = hat_vector(&OpMatrix::new(spec, b1));
        let h2 = hat_vector(&OpMatrix::new(spec, b2));
        for k in 0..d {
            prop_assert!(close(lhs.values()[k], a * h1.values()[k] + h2.values()[k], 1e-12));
        }
    }

    #[test]
    fn power_matches_pointwise_power(spec in spec_strategy(), c in prop::collection::vec(-1.0..1.0f64, 8), r in 1usize..=3) {
        prop_assume!(spec.degree() >= r);
        // u of degree d with r*d < M, so u^r stays representable
        let keep = (spec.degree() - 1) / r + 1;
        let u = coeffs(spec, &c, keep);
        let ur = power_vector(&u, r);
        for t in interior_points(&spec) {
            prop_assert!(close(ur.eval(t), u.eval(t).powi(r as i32), 1e-10));
        }
    }

    #[test]
    fn product_matrix_is_symmetric_in_its_factors(spec in spec_strategy(), c in prop::collection::vec(-1.0..1.0f64, 8), split in 0usize..8) {
        let da = split % spec.degree() + 1;
        let a = coeffs(spec, &c, da);
        let b = coeffs(spec, &c[3..], spec.degree() + 1 - da);
        let ab = product_matrix(&a).apply(&b);
        let ba = product_matrix(&b).apply(&a);
        for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn projection_error_obeys_bound(n in 1usize..=4, m in 2usize..=8) {
        let unit = Interval::new(0.0, 1.0).unwrap();
        let spec = BasisSpec::new(unit, n, m).unwrap();
        let err = dov::oracle::weighted_l2_error(f64::exp, &CoeffVector::project(spec, f64::exp));
        let fact: f64 = (2..=m).map(|k| k as f64).product();
        let bound = std::f64::consts::E / ((n as f64).powi(m as i32 - 1) * fact)
            * (std::f64::consts::PI / spec.local_scale()).sqrt();
        prop_assert!(err <= bound * (1.0 + 1e-9) + 1e-13, "{err} > {bound}");
    }
}
