//! The ten built-in test problems with their published error figures.

use crate::basis::{BasisSpec, Interval};
use crate::expr::Expr;
use crate::solver::{Nonlinearity, Problem, SolveError, SolveOptions, Strategy};

/// How an example's nonlinearity is configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    Derivative(usize),
    Invertible { g: &'static str, ginv: &'static str },
    Polynomial(&'static [f64]),
    Collocation { g: &'static str, bracket: (f64, f64) },
}

/// A published maximum error for one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub n: usize,
    pub m: usize,
    pub e_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: &'static str,
    pub summary: &'static str,
    pub kernel: &'static str,
    pub f: &'static str,
    pub interval: (f64, f64),
    pub exact: &'static str,
    pub route: Route,
    /// Recommended `(N, M)`.
    pub recommended: (usize, usize),
    /// Default sweep of `(N, M)`.
    pub sweep: &'static [(usize, usize)],
    pub references: &'static [Reference],
    /// Constant-guess scan range for the Newton ladder.
    pub scan_range: (f64, f64),
}

const fn r(n: usize, m: usize, e_inf: f64) -> Reference {
    Reference { n, m, e_inf }
}

const TABLE_SWEEP: &[(usize, usize)] = &[(1, 2), (1, 4), (1, 6), (1, 8), (1, 10)];
const DEFAULT_SCAN: (f64, f64) = (-2.0, 2.0);

static EXAMPLES: [Example; 10] = [
    Example {
        id: "ex1",
        summary: "G = u'' (derivative route), kernel cos(t-x), exact t^3",
        kernel: "cos(t-x)",
        f: "6*(1-cos(t))",
        interval: (0.0, 1.0),
        exact: "t^3",
        route: Route::Derivative(2),
        recommended: (1, 10),
        sweep: TABLE_SWEEP,
        references: &[r(1, 2, 1.63e-2), r(1, 4, 3.29e-4), r(1, 6, 9.71e-7), r(1, 8, 2.20e-10), r(1, 10, 1.24e-11)],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex2",
        summary: "G = ln u (invertible), kernel exp(t-x), exact exp(t)",
        kernel: "exp(t-x)",
        f: "exp(t)-t-1",
        interval: (0.0, 1.0),
        exact: "exp(t)",
        route: Route::Invertible { g: "ln(u)", ginv: "exp(u)" },
        recommended: (1, 10),
        sweep: TABLE_SWEEP,
        references: &[r(1, 2, 2.63e-1), r(1, 4, 2.29e-2), r(1, 6, 1.35e-4), r(1, 8, 2.20e-7), r(1, 10, 6.24e-8)],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex3",
        summary: "G = u^2 (polynomial), kernel exp(t-x), exact exp(t)",
        kernel: "exp(t-x)",
        f: "exp(2*t)-exp(t)",
        interval: (0.0, 1.0),
        exact: "exp(t)",
        route: Route::Polynomial(&[0.0, 0.0, 1.0]),
        recommended: (1, 10),
        sweep: TABLE_SWEEP,
        references: &[r(1, 2, 2.4e-1), r(1, 4, 8.32e-3), r(1, 6, 4.01e-5), r(1, 8, 2.22e-7), r(1, 10, 1.02e-7)],
        scan_range: (0.0, 2.0),
    },
    Example {
        id: "ex4",
        summary: "G = cos u (collocation), kernel sin(t-x)+1, exact t",
        kernel: "sin(t-x)+1",
        f: "t*sin(t)/2+sin(t)",
        interval: (0.0, 1.0),
        exact: "t",
        route: Route::Collocation { g: "cos(u)", bracket: (0.0, 3.0) },
        recommended: (1, 10),
        sweep: TABLE_SWEEP,
        references: &[r(1, 2, 5.50e-1), r(1, 4, 4.35e-2), r(1, 6, 3.37e-4), r(1, 8, 6.54e-6), r(1, 10, 3.04e-8)],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex5",
        summary: "G = u^3 (polynomial), kernel 1, non-smooth exact |t-1/2|",
        kernel: "1",
        f: "1/64+(t-0.5)^3*abs(t-0.5)/4",
        interval: (0.0, 1.0),
        exact: "abs(t-0.5)",
        route: Route::Polynomial(&[0.0, 0.0, 0.0, 1.0]),
        recommended: (2, 4),
        sweep: &[(1, 8), (2, 4)],
        references: &[r(2, 4, 2.51e-14), r(1, 8, 7e-2)],
        scan_range: (0.0, 2.0),
    },
    Example {
        id: "ex6",
        summary: "G = u (linear), kernel exp(t+x), exact exp(-t)",
        kernel: "exp(t+x)",
        f: "t*exp(t)",
        interval: (0.0, 1.0),
        exact: "exp(-t)",
        route: Route::Invertible { g: "u", ginv: "u" },
        recommended: (1, 8),
        sweep: &[(1, 4), (1, 8)],
        references: &[r(1, 8, 1.29e-8)],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex7",
        summary: "G = u^2 - u (polynomial, not invertible), kernel 1, exact t",
        kernel: "1",
        f: "t^3/3-t^2/2",
        interval: (0.0, 2.0),
        exact: "t",
        route: Route::Polynomial(&[0.0, -1.0, 1.0]),
        recommended: (1, 3),
        sweep: &[(1, 2), (1, 3), (1, 4)],
        references: &[],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex8",
        summary: "G = exp u (collocation), kernel 1, interval [1,2], exact ln sin t",
        kernel: "1",
        f: "cos(1)-cos(t)",
        interval: (1.0, 2.0),
        exact: "ln(sin(t))",
        route: Route::Collocation { g: "exp(u)", bracket: (-5.0, 5.0) },
        recommended: (2, 8),
        sweep: &[(1, 2), (1, 4), (1, 6), (1, 8), (2, 2), (2, 4), (2, 6), (2, 8)],
        references: &[
            r(1, 2, 8.28e-4),
            r(1, 4, 4.58e-6),
            r(1, 6, 1.03e-8),
            r(1, 8, 2.02e-9),
            r(2, 2, 5.98e-4),
            r(2, 4, 1.10e-6),
            r(2, 6, 1.03e-10),
            r(2, 8, 1.85e-11),
        ],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex9",
        summary: "G = u^2 (collocation), kernel t*x, interval [-1,1], piecewise exact",
        kernel: "t*x",
        f: "t*cond(t, t^4/4-2*t^5/5+t^6/6-1/3, -(t^3+1)/3)",
        interval: (-1.0, 1.0),
        exact: "cond(t, t*(1-t), sqrt(abs(t)))",
        route: Route::Collocation { g: "u^2", bracket: (0.0, 2.0) },
        recommended: (2, 8),
        sweep: &[(2, 4), (2, 6), (2, 8)],
        references: &[],
        scan_range: DEFAULT_SCAN,
    },
    Example {
        id: "ex10",
        summary: "G = sqrt u (invertible), kernel t*x, discontinuous piecewise exact",
        kernel: "t*x",
        f: "t*cond(t, cond(t-0.5, -1+0.5*exp(0.5)+1/24+(2/3)*(t^1.5-0.5^1.5), -1+0.5*exp(0.5)+t^3/3), -(t+1)*exp(-t)+0.5*exp(0.5))",
        interval: (-0.5, 1.0),
        exact: "cond(t, cond(t-0.5, 1/t, t^2), exp(-2*t))",
        route: Route::Invertible { g: "sqrt(u)", ginv: "u^2" },
        recommended: (3, 12),
        sweep: &[(3, 4), (3, 6), (3, 8), (3, 10), (3, 12)],
        references: &[r(3, 4, 9.37e-2), r(3, 6, 2.74e-4), r(3, 8, 2.75e-7), r(3, 10, 2.25e-9), r(3, 12, 9.74e-11)],
        scan_range: DEFAULT_SCAN,
    },
];

pub fn examples() -> &'static [Example] {
    &EXAMPLES
}

pub fn find(id: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.id.eq_ignore_ascii_case(id))
}

fn parse(src: &str) -> Expr {
    Expr::parse(src).unwrap_or_else(|e| panic!("built-in expression {src:?}: {e}"))
}

impl Example {
    pub fn nonlinearity(&self) -> Nonlinearity {
        match self.route {
            Route::Derivative(order) => Nonlinearity::Derivative { order },
            Route::Invertible { g, ginv } => Nonlinearity::Invertible { g: parse(g), ginv: Some(parse(ginv)), bracket: None },
            Route::Polynomial(alpha) => Nonlinearity::Polynomial { alpha: alpha.to_vec() },
            Route::Collocation { g, bracket } => {
                Nonlinearity::General { g: parse(g), strategy: Strategy::Collocation { bracket } }
            }
        }
    }

    /// Text form of `G`.
    pub fn g_text(&self) -> String {
        match self.route {
            Route::Derivative(order) => format!("u^({order})"),
            Route::Invertible { g, .. } | Route::Collocation { g, .. } => g.to_string(),
            Route::Polynomial(alpha) => alpha
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(r, a)| format!("{a}*u^{r}"))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.interval.0, self.interval.1).expect("built-in interval")
    }

    pub fn exact(&self) -> Expr {
        parse(self.exact)
    }

    pub fn problem(&self, n: usize, m: usize) -> Result<Problem, SolveError> {
        let spec = BasisSpec::new(self.interval(), n, m)?;
        Problem::new(parse(self.kernel), parse(self.f), self.nonlinearity(), spec)
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions { scan_range: self.scan_range, ..SolveOptions::default() }
    }

    pub fn reference(&self, n: usize, m: usize) -> Option<f64> {
        self.references.iter().find(|r| r.n == n && r.m == m).map(|r| r.e_inf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_examples_build_and_are_consistent() {
        for ex in examples() {
            let (n, m) = ex.recommended;
            let p = ex.problem(n, m).unwrap();
            assert!(p.consistency_warnings().is_empty(), "{}", ex.id);
            ex.exact().eval_t(ex.interval.0).unwrap();
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(find("EX5").unwrap().recommended, (2, 4));
        assert!(find("ex11").is_none());
        assert_eq!(find("ex10").unwrap().reference(3, 12), Some(9.74e-11));
    }
}
