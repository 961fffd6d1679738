use dov::basis::{BasisSpec, Interval};
use dov::expr::Expr;
use dov::oracle::{max_error, Grid, DEFAULT_GRID};
use dov::registry::{examples, find};
use dov::solver::{solve, Nonlinearity, Problem, SolveOptions, Strategy};

fn e_inf(id: &str, n: usize, m: usize) -> f64 {
    let ex = find(id).unwrap();
    let s = solve(&ex.problem(n, m).unwrap(), &ex.options()).unwrap();
    assert!(s.diagnostics.converged, "{id} N={n} M={m}");
    max_error(&s, &ex.exact(), &Grid::uniform(&ex.interval(), DEFAULT_GRID)).unwrap()
}

#[test]
fn recommended_bases_converge() {
    for ex in examples().iter().filter(|e| e.id != "ex9") {
        let (n, m) = ex.recommended;
        let err = e_inf(ex.id, n, m);
        assert!(err < 1e-2, "{}: {err:e}", ex.id);
    }
}

#[test]
fn errors_shrink_with_degree() {
    for id in ["ex2", "ex3", "ex4"] {
        let errs: Vec<f64> = [4, 6, 8].iter().map(|&m| e_inf(id, 1, m)).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{id}: {errs:?}");
    }
}

#[test]
fn polynomial_exact_solution_is_recovered() {
    assert!(e_inf("ex7", 1, 3) < 1e-9);
    assert!(e_inf("ex1", 1, 8) < 1e-8);
}

#[test]
fn hybrid_blocks_resolve_a_kink() {
    assert!(e_inf("ex5", 2, 4) < 1e-10);
    assert!(e_inf("ex5", 1, 8) > 1e-3);
}

#[test]
fn taylor_strategy_handles_a_smooth_nonlinearity() {
    let spec = BasisSpec::new(Interval::new(0.0, 1.0).unwrap(), 1, 8).unwrap();
    let p = Problem::new(
        Expr::parse("exp(t-x)").unwrap(),
        Expr::parse("exp(2*t)-exp(t)").unwrap(),
        Nonlinearity::General {
            g: Expr::parse("u^2").unwrap(),
            strategy: Strategy::Taylor { degree: 4, center: 1.5, radius: 1.0 },
        },
        spec,
    )
    .unwrap();
    let s = solve(&p, &SolveOptions { scan_range: (0.0, 2.0), ..SolveOptions::default() }).unwrap();
    let err = max_error(&s, &Expr::parse("exp(t)").unwrap(), &Grid::uniform(spec.interval(), 200)).unwrap();
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn invalid_problems_are_rejected() {
    let spec = BasisSpec::new(Interval::new(0.0, 1.0).unwrap(), 1, 4).unwrap();
    let bad = Problem::new(
        Expr::parse("1").unwrap(),
        Expr::parse("t").unwrap(),
        Nonlinearity::Derivative { order: 0 },
        spec,
    );
    assert!(bad.is_err());
}
