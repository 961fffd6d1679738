//! Slow, independent reference computations.
//!
//! Nothing here uses the operational matrix formulas: integrals come from
//! adaptive Gauss-Kronrod quadrature and projections from plain
//! Gauss-Chebyshev sums, so these routines can referee the matrix algebra.

use thiserror::Error;

use crate::basis::{gauss_chebyshev_nodes, hcp_eval, BasisSpec, CoeffVector, Interval};
use crate::expr::{EvalError, Expr};
use crate::opalg::OpMatrix;
use crate::solver::{Nonlinearity, Problem, Solution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("adaptive quadrature on [{a}, {b}] exceeded subdivision depth {depth}")]
    Depth { a: f64, b: f64, depth: usize },
    #[error("integrand is not finite at x={0}")]
    NonFinite(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("grid must be nonempty, strictly increasing and inside the interval")]
    Grid,
}

const MAX_DEPTH: usize = 50;
const MAX_PANELS: usize = 4000;

// 15-point Kronrod abscissae (positive half, descending) and weights; the
// embedded 7-point Gauss rule uses the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15 panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15<F, E>(g: &mut F, a: f64, b: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<OracleError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, E> {
        let v = g(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OracleError::NonFinite(x).into())
        }
    };
    let fc = eval(c)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = eval(c - dx)? + eval(c + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Adaptive Gauss-Kronrod quadrature of a fallible integrand. The endpoints
/// are never evaluated.
pub fn try_quad_adaptive<F, E>(mut g: F, a: f64, b: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<OracleError>,
{
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = gk15(&mut g, a, b)?;
    if err <= tol * (1.0 + whole.abs()) {
        return Ok(whole);
    }
    // global error control: repeatedly bisect the panel with the largest error
    let mut panels = vec![(a, b, whole, err, 0usize)];
    let mut total_err = err;
    loop {
        let sum: f64 = panels.iter().map(|p| p.2).sum();
        if total_err <= tol * (1.0 + sum.abs()) {
            return Ok(sum);
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| (p.1 - p.0).abs() > 4.0 * f64::EPSILON * p.0.abs().max(p.1.abs()))
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, p)| (i, p.3))
            .ok_or(OracleError::Depth { a, b, depth: MAX_DEPTH })?;
        let (lo, hi, _, e, depth) = panels.swap_remove(worst);
        if depth + 1 >= MAX_DEPTH || panels.len() >= MAX_PANELS {
            return Err(OracleError::Depth { a, b, depth: MAX_DEPTH }.into());
        }
        let mid = 0.5 * (lo + hi);
        let (left, el) = gk15(&mut g, lo, mid)?;
        let (right, er) = gk15(&mut g, mid, hi)?;
        total_err += el + er - e;
        panels.push((lo, mid, left, el, depth + 1));
        panels.push((mid, hi, right, er, depth + 1));
    }
}

pub fn quad_adaptive<F>(mut g: F, a: f64, b: f64, tol: f64) -> Result<f64, OracleError>
where
    F: FnMut(f64) -> f64,
{
    try_quad_adaptive(|x| Ok::<_, OracleError>(g(x)), a, b, tol)
}

/// Evaluation points inside the problem interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>, interval: &Interval) -> Result<Self, OracleError> {
        let ok = !points.is_empty()
            && points.windows(2).all(|w| w[1] > w[0])
            && points.iter().all(|t| interval.contains(*t));
        if ok {
            Ok(Self { points })
        } else {
            Err(OracleError::Grid)
        }
    }

    /// `n` equispaced points including both endpoints (`n >= 2`).
    pub fn uniform(interval: &Interval, n: usize) -> Self {
        let n = n.max(2);
        let (a, b) = (interval.t0(), interval.tf());
        let points = (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect();
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Default E_inf grid size.
pub const DEFAULT_GRID: usize = 1000;
/// Default residual grid size.
pub const RESIDUAL_GRID: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

/// `G(u_NM)` as a function of `x`, for any nonlinearity kind.
fn nonlinear_term<'a>(p: &'a Problem, s: &'a Solution) -> impl Fn(f64) -> Result<f64, EvalError> + 'a {
    let deriv = match p.nonlinearity {
        Nonlinearity::Derivative { order } => {
            let mut d = s.u.clone();
            for _ in 0..order {
                d = d.derivative();
            }
            Some(d)
        }
        _ => None,
    };
    move |x| {
        let u = s.u.eval(x);
        match &p.nonlinearity {
            Nonlinearity::Derivative { .. } => Ok(deriv.as_ref().map_or(0.0, |d| d.eval(x))),
            Nonlinearity::Polynomial { alpha } => Ok(alpha.iter().rev().fold(0.0, |acc, a| acc * u + a)),
            Nonlinearity::Invertible { g, .. } | Nonlinearity::General { g, .. } => g.eval_u(u),
        }
    }
}

/// `max |f(t) - int_{t0}^t k(x,t) G(u_NM(x)) dx|` over the grid. The inner
/// integral is split at block boundaries, where `u_NM` may jump.
pub fn residual_linf(p: &Problem, s: &Solution, grid: &Grid) -> Result<f64, OracleError> {
    let spec = p.spec;
    let t0 = spec.interval().t0();
    let breaks = spec.breakpoints();
    let g = nonlinear_term(p, s);
    let mut worst: f64 = 0.0;
    for &t in grid.points() {
        let mut integral = 0.0;
        let mut lo = t0;
        for &bp in breaks.iter().filter(|bp| **bp < t).chain(std::iter::once(&t)) {
            integral += try_quad_adaptive(
                |x| -> Result<f64, OracleError> { Ok(p.kernel.eval_xt(x, t)? * g(x)?) },
                lo,
                bp,
                RESIDUAL_TOL,
            )?;
            lo = bp;
        }
        let r = (p.f.eval_t(t)? - integral).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `E_inf = max |u(t_i) - u_NM(t_i)|`.
pub fn max_error(s: &Solution, exact: &Expr, grid: &Grid) -> Result<f64, OracleError> {
    series_max_error(&s.u, exact, grid)
}

pub fn series_max_error(u: &CoeffVector, exact: &Expr, grid: &Grid) -> Result<f64, OracleError> {
    let mut worst: f64 = 0.0;
    for &t in grid.points() {
        worst = worst.max((exact.eval_t(t)? - u.eval(t)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationReport {
    /// Largest coefficient difference between the matrix and the quadrature route.
    pub max_deviation: f64,
    /// Largest sup-norm of the part of an exact antiderivative outside the basis.
    pub truncated_mass: f64,
}

/// Compares each row of an integration matrix with the projection of
/// `t -> int_{t0}^t H_r` computed by adaptive quadrature.
pub fn integration_deviation(q: &OpMatrix) -> IntegrationReport {
    let spec = *q.spec();
    let t0 = spec.interval().t0();
    let breaks = spec.breakpoints();
    let probe = Grid::uniform(spec.interval(), 41);
    let mut max_deviation: f64 = 0.0;
    let mut truncated_mass: f64 = 0.0;
    for r in 0..spec.dim() {
        let antideriv = |t: f64| -> f64 {
            let mut acc = 0.0;
            let mut lo = t0;
            for &bp in breaks.iter().filter(|bp| **bp < t).chain(std::iter::once(&t)) {
                acc += quad_adaptive(|x| hcp_eval(&spec, r, x).unwrap_or(0.0), lo, bp, 1e-14)
                    .unwrap_or(f64::NAN);
                lo = bp;
            }
            acc
        };
        let reference = CoeffVector::project(spec, antideriv);
        for (j, c) in reference.coeffs().iter().enumerate() {
            max_deviation = max_deviation.max((c - q.matrix()[(r, j)]).abs());
        }
        for &t in probe.points() {
            truncated_mass = truncated_mass.max((antideriv(t) - reference.eval(t)).abs());
        }
    }
    IntegrationReport { max_deviation, truncated_mass }
}

pub fn validate_integration_matrix(spec: &BasisSpec) -> IntegrationReport {
    integration_deviation(&crate::opalg::integration_matrix(spec))
}

const L2_NODES: usize = 256;

/// Weighted `L^2` norm of `f - cv` with the hybrid Chebyshev weight.
pub fn weighted_l2_error<F>(f: F, cv: &CoeffVector) -> f64
where
    F: Fn(f64) -> f64,
{
    let spec = cv.spec();
    let nodes = gauss_chebyshev_nodes(L2_NODES);
    let scale = std::f64::consts::PI / (L2_NODES as f64 * spec.local_scale());
    let mut sum = 0.0;
    for blk in 0..spec.blocks() {
        for &x in &nodes {
            let t = spec.from_local(blk, x);
            let e = f(t) - cv.eval_in_block(blk, t);
            sum += e * e;
        }
    }
    (sum * scale).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn quad_examples() {
        assert!((quad_adaptive(|_| 1.0, 0.0, 1.0, 1e-14).unwrap() - 1.0).abs() < 1e-14);
        let v = quad_adaptive(|x| 2.0 * x * x - 1.0, -1.0, 1.0, 1e-14).unwrap();
        assert!((v + 2.0 / 3.0).abs() < 1e-12);
        assert!((quad_adaptive(|t| t * t * t, 0.0, 1.0, 1e-14).unwrap() - 0.25).abs() < 1e-14);
        assert_eq!(quad_adaptive(|t| t, 0.3, 0.3, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn quad_handles_endpoint_singularity_and_kinks() {
        // int_0^1 1/sqrt(x) = 2
        let v = quad_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-7, "{v}");
        let v = quad_adaptive(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn quad_reports_depth_failure() {
        let r = quad_adaptive(|x| if x > 0.5 { 1e300 * (x - 0.5).recip().sin() } else { 0.0 }, 0.0, 1.0, 1e-15);
        assert!(matches!(r, Err(OracleError::Depth { .. })), "{r:?}");
    }

    #[test]
    fn grid_validation() {
        let i = Interval::new(0.0, 1.0).unwrap();
        assert!(Grid::new(vec![], &i).is_err());
        assert!(Grid::new(vec![0.5, 0.5], &i).is_err());
        assert!(Grid::new(vec![0.5, 1.5], &i).is_err());
        let g = Grid::uniform(&i, 1000);
        assert_eq!(g.points().len(), 1000);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[999], 1.0);
    }

    #[test]
    fn weighted_l2_examples() {
        let s = BasisSpec::new(Interval::new(-1.0, 1.0).unwrap(), 1, 3).unwrap();
        let cv = CoeffVector::zeros(s);
        assert!((weighted_l2_error(|_| 1.0, &cv) - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        let cv = CoeffVector::project(s, |t| t.sin());
        assert!(weighted_l2_error(|t| cv.eval(t), &cv) < 1e-13);
    }
}
