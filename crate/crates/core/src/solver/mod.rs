//! Direct operational vector pipelines for
//! `f(t) = int_{t0}^t k(x,t) G(u(x)) dx`.
//!
//! Every pipeline rests on the same linear map: for the coefficients `Z` of
//! `G(u)`, the coefficients of the integral term are
//! `hat(K^T Zbar^T Q)`, where `K` is the kernel matrix
//! (`k(x,t) ~ H(x)^T K H(t)`), `Zbar` the product matrix of `Z` and `Q`
//! the integration matrix. Its matrix `L` is assembled once per basis.
//!
//! - [`solve_invertible`]: solve `L Z = F`, then invert `G` pointwise.
//! - [`solve_derivative`]: `G(u) = u^(n)` with zero initial data; integrate `Z` n times.
//! - [`solve_polynomial`]: `G(u) = sum alpha_r u^r`, Newton on `L sum alpha_r Uhat_r = F`.
//! - [`solve_taylor`]: replace `G` by its Taylor polynomial, then as above.
//! - [`solve_collocation_hybrid`]: solve for `Z`, then `G(w_i) = Z(t_i)` at collocation nodes.

mod newton;
mod scalar;
mod taylor;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::basis::{chebyshev_all, gauss_chebyshev_nodes, BasisError, BasisSpec, CoeffVector};
use crate::expr::{EvalError, Expr};
use crate::opalg::{hat_vector, integration_matrix, kernel_matrix, product_matrix, OpMatrix};
use crate::oracle::{self, Grid, OracleError};

pub use newton::{fd_jacobian, lstsq, newton_solve, newton_solve_with, NewtonOptions, NewtonResult};
pub use scalar::scalar_invert;
use scalar::all_roots;
pub use taylor::{taylor_coefficients, TAYLOR_MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("problem uses the {found} nonlinearity, this pipeline needs {expected}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("linear system is rank deficient (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },
    #[error("no root of G(w) = {target} in [{lo}, {hi}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },
    #[error("pointwise inversion failed at t={t}: G(w) = {target} has no root in [{lo}, {hi}]")]
    Inversion { t: f64, target: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Expand `G` about `center` to `degree` and treat it as a polynomial.
    Taylor { degree: usize, center: f64, radius: f64 },
    /// Solve for `G(u)` first, then invert at collocation points.
    Collocation { bracket: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    Invertible { g: Expr, ginv: Option<Expr>, bracket: Option<(f64, f64)> },
    /// `G(u) = u^(order)` with `u` and its lower derivatives zero at `t0`.
    Derivative { order: usize },
    /// `G(u) = sum alpha[r] u^r`.
    Polynomial { alpha: Vec<f64> },
    General { g: Expr, strategy: Strategy },
}

impl Nonlinearity {
    pub fn kind(&self) -> &'static str {
        match self {
            Nonlinearity::Invertible { .. } => "invertible",
            Nonlinearity::Derivative { .. } => "derivative",
            Nonlinearity::Polynomial { .. } => "polynomial",
            Nonlinearity::General { .. } => "general",
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        match self {
            Nonlinearity::Derivative { order: 0 } => Err(SolveError::Invalid("derivative order must be at least 1".into())),
            Nonlinearity::Polynomial { alpha } if !alpha.iter().skip(1).any(|a| *a != 0.0) => Err(SolveError::Invalid(
                "polynomial nonlinearity needs a nonzero coefficient of degree >= 1".into(),
            )),
            Nonlinearity::General { strategy: Strategy::Taylor { degree, radius, .. }, .. } => {
                if *degree == 0 || *degree > TAYLOR_MAX_DEGREE {
                    Err(SolveError::Invalid(format!("taylor degree must be in 1..={TAYLOR_MAX_DEGREE}")))
                } else if !(*radius > 0.0) {
                    Err(SolveError::Invalid("taylor radius must be positive".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// A first-kind Volterra problem on a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// `k(x, t)`.
    pub kernel: Expr,
    /// `f(t)`.
    pub f: Expr,
    pub nonlinearity: Nonlinearity,
    pub spec: BasisSpec,
}

/// `|f(t0)|` above this is reported as inconsistent data.
pub const CONSISTENCY_TOL: f64 = 1e-10;

impl Problem {
    pub fn new(kernel: Expr, f: Expr, nonlinearity: Nonlinearity, spec: BasisSpec) -> Result<Self, SolveError> {
        nonlinearity.validate()?;
        Ok(Self { kernel, f, nonlinearity, spec })
    }

    pub fn with_spec(&self, spec: BasisSpec) -> Problem {
        Problem { spec, ..self.clone() }
    }

    /// Warnings about the data itself.
    pub fn consistency_warnings(&self) -> Vec<String> {
        let t0 = self.spec.interval().t0();
        match self.f.eval_t(t0) {
            Ok(v) if v.abs() > CONSISTENCY_TOL => {
                vec![format!("inconsistent first-kind data: f(t0) = {v:e} is not zero")]
            }
            Ok(_) => vec![],
            Err(e) => vec![format!("inconsistent first-kind data: f(t0) cannot be evaluated ({e})")],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub newton: NewtonOptions,
    /// Constant-guess scan range for the continuation ladder.
    pub scan_range: (f64, f64),
    /// Grid size for the oracle residual; 0 skips it.
    pub residual_grid: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { newton: NewtonOptions::default(), scan_range: (-2.0, 2.0), residual_grid: oracle::RESIDUAL_GRID }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Oracle residual of the integral equation on a uniform grid.
    pub residual_linf: f64,
    /// `||R||_inf` of the algebraic system at the returned coefficients.
    pub algebraic_residual: f64,
    pub newton_iters: usize,
    /// Newton iterations per continuation rung.
    pub rung_iters: Vec<usize>,
    pub converged: bool,
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Coefficients of `u_NM`.
    pub u: CoeffVector,
    /// Coefficients of `G(u)` when a pipeline solves for them.
    pub z: Option<CoeffVector>,
    pub diagnostics: Diagnostics,
}

/// Matrix of `Z -> hat(K^T Zbar^T Q)`, assembled column by column.
pub fn assemble_linear_map(k: &OpMatrix, spec: &BasisSpec) -> DMatrix<f64> {
    let q = integration_matrix(spec);
    assemble_with(k, &q)
}

fn assemble_with(k: &OpMatrix, q: &OpMatrix) -> DMatrix<f64> {
    let spec = *q.spec();
    let dim = spec.dim();
    let kt = k.matrix().transpose();
    let mut l = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let zbar = product_matrix(&CoeffVector::unit(spec, j));
        let b = OpMatrix::new(spec, &kt * zbar.matrix().transpose() * q.matrix());
        let col = hat_vector(&b);
        l.set_column(j, &DVector::from_column_slice(col.values()));
    }
    l
}

/// Everything a pipeline needs about one basis.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub spec: BasisSpec,
    pub q: OpMatrix,
    pub k: OpMatrix,
    pub l: DMatrix<f64>,
    pub f: CoeffVector,
}

impl Discretization {
    pub fn new(p: &Problem) -> Result<Self, SolveError> {
        let spec = p.spec;
        let q = integration_matrix(&spec);
        let k = kernel_matrix(&p.kernel, &spec)?;
        let l = assemble_with(&k, &q);
        let f = CoeffVector::try_project(spec, |t| p.f.eval_t(t))?;
        Ok(Self { spec, q, k, l, f })
    }

    /// `L Z = F` in the least-squares sense, with the condition estimate.
    pub fn solve_z(&self) -> Result<(CoeffVector, f64), SolveError> {
        let rhs = DVector::from_column_slice(self.f.coeffs());
        let (z, cond) = lstsq(&self.l, &rhs);
        if !cond.is_finite() || cond * f64::EPSILON * self.spec.dim() as f64 >= 1.0 {
            return Err(SolveError::RankDeficient { condition: cond });
        }
        Ok((CoeffVector::new(self.spec, z.as_slice().to_vec())?, cond))
    }

    /// Coefficients of `int_{t0}^t g`.
    pub fn integrate(&self, g: &CoeffVector) -> CoeffVector {
        self.q.apply_transpose(g)
    }

    fn apply_l(&self, z: &CoeffVector) -> DVector<f64> {
        &self.l * DVector::from_column_slice(z.coeffs())
    }
}

fn expect_kind(p: &Problem, expected: &'static str) -> SolveError {
    SolveError::WrongKind { expected, found: p.nonlinearity.kind() }
}

/// Dispatches to the pipeline selected by the nonlinearity.
pub fn solve(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    match &p.nonlinearity {
        Nonlinearity::Invertible { .. } => solve_invertible(p, opts),
        Nonlinearity::Derivative { .. } => solve_derivative(p, opts),
        Nonlinearity::Polynomial { .. } => solve_polynomial(p, opts),
        Nonlinearity::General { strategy: Strategy::Taylor { .. }, .. } => solve_taylor(p, opts),
        Nonlinearity::General { strategy: Strategy::Collocation { .. }, .. } => solve_collocation_hybrid(p, opts),
    }
}

fn finish(p: &Problem, mut s: Solution, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let mut warnings = p.consistency_warnings();
    for w in &warnings {
        log::warn!("{w}");
    }
    warnings.append(&mut s.diagnostics.warnings);
    s.diagnostics.warnings = warnings;
    s.diagnostics.residual_linf = if opts.residual_grid > 0 {
        let grid = Grid::uniform(p.spec.interval(), opts.residual_grid);
        match oracle::residual_linf(p, &s, &grid) {
            Ok(r) => r,
            Err(e) => {
                s.diagnostics.warnings.push(format!("oracle residual unavailable: {e}"));
                f64::NAN
            }
        }
    } else {
        f64::NAN
    };
    Ok(s)
}

fn linear_diagnostics(d: &Discretization, z: &CoeffVector, cond: f64) -> Diagnostics {
    let r = d.apply_l(z) - DVector::from_column_slice(d.f.coeffs());
    Diagnostics { algebraic_residual: r.amax(), converged: true, condition_estimate: cond, ..Diagnostics::default() }
}

/// `G` invertible: solve for `Z`, then `u = G^{-1}(Z)` pointwise.
pub fn solve_invertible(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let Nonlinearity::Invertible { g, ginv, bracket } = &p.nonlinearity else {
        return Err(expect_kind(p, "invertible"));
    };
    let d = Discretization::new(p)?;
    let (z, cond) = d.solve_z()?;
    let u = match ginv {
        Some(inv) => CoeffVector::try_project(p.spec, |t| inv.eval_u(z.eval(t)))?,
        None => {
            let br = bracket.ok_or_else(|| SolveError::Invalid("invertible G without an inverse needs a bracket".into()))?;
            CoeffVector::try_project(p.spec, |t| invert_at(g, &z, t, br))?
        }
    };
    let diagnostics = linear_diagnostics(&d, &z, cond);
    finish(p, Solution { u, z: Some(z), diagnostics }, opts)
}

fn invert_at(g: &Expr, z: &CoeffVector, t: f64, (lo, hi): (f64, f64)) -> Result<f64, SolveError> {
    let target = z.eval(t);
    scalar_invert(g, target, (lo, hi)).map_err(|_| SolveError::Inversion { t, target, lo, hi })
}

/// `G(u) = u^(n)`: solve for `Z = u^(n)` and integrate `n` times.
pub fn solve_derivative(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let Nonlinearity::Derivative { order } = p.nonlinearity else {
        return Err(expect_kind(p, "derivative"));
    };
    let d = Discretization::new(p)?;
    let (z, cond) = d.solve_z()?;
    let mut u = z.clone();
    for _ in 0..order {
        u = d.integrate(&u);
    }
    let diagnostics = linear_diagnostics(&d, &z, cond);
    finish(p, Solution { u, z: Some(z), diagnostics }, opts)
}

/// Residual and exact Jacobian of `L sum alpha_r Uhat_r(U) - F`.
struct PolynomialSystem<'a> {
    d: &'a Discretization,
    alpha: &'a [f64],
}

impl PolynomialSystem<'_> {
    fn g_coeffs(&self, u: &CoeffVector) -> CoeffVector {
        let spec = *u.spec();
        let mut z = CoeffVector::zeros(spec);
        if self.alpha[0] != 0.0 {
            z.axpy(self.alpha[0], &CoeffVector::constant(spec, 1.0));
        }
        if self.alpha.len() > 1 {
            let ubar = product_matrix(u);
            let mut pow = u.clone();
            for (r, a) in self.alpha.iter().enumerate().skip(1) {
                if r > 1 {
                    pow = ubar.apply(&pow);
                }
                if *a != 0.0 {
                    z.axpy(*a, &pow);
                }
            }
        }
        z
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let u = CoeffVector::new(self.d.spec, x.as_slice().to_vec()).expect("dimension");
        self.d.apply_l(&self.g_coeffs(&u)) - DVector::from_column_slice(self.d.f.coeffs())
    }

    /// `dUhat_r = Ubar dUhat_{r-1} + Pbar_{r-1}`, using commutativity of the truncated product.
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let spec = self.d.spec;
        let dim = spec.dim();
        let u = CoeffVector::new(spec, x.as_slice().to_vec()).expect("dimension");
        let ubar = product_matrix(&u);
        let mut dg = DMatrix::zeros(dim, dim);
        let mut pow = u.clone();
        let mut dpow = DMatrix::identity(dim, dim);
        for (r, a) in self.alpha.iter().enumerate().skip(1) {
            if r > 1 {
                dpow = ubar.matrix() * &dpow + product_matrix(&pow).matrix();
                pow = ubar.apply(&pow);
            }
            if *a != 0.0 {
                dg += &dpow * *a;
            }
        }
        &self.d.l * dg
    }

    fn newton(&self, u0: &CoeffVector, opts: &NewtonOptions) -> NewtonResult {
        newton_solve_with(
            |x| self.residual(x),
            |x| self.jacobian(x),
            DVector::from_column_slice(u0.coeffs()),
            opts,
        )
    }

    /// Best constant guess over an even scan of `range`.
    fn scan_initializer(&self, (lo, hi): (f64, f64)) -> CoeffVector {
        const SAMPLES: usize = 32;
        let mut best = (f64::INFINITY, CoeffVector::constant(self.d.spec, lo));
        for i in 0..SAMPLES {
            let c = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
            let u = CoeffVector::constant(self.d.spec, c);
            let r = self.residual(&DVector::from_column_slice(u.coeffs())).amax();
            if r < best.0 {
                best = (r, u);
            }
        }
        best.1
    }
}

fn coeffs_of(spec: BasisSpec, x: &DVector<f64>) -> CoeffVector {
    CoeffVector::new(spec, x.as_slice().to_vec()).expect("dimension")
}

/// Polynomial `G`: Newton on the operational-vector system, globalised by
/// [`continuation_solve`].
pub fn solve_polynomial(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let Nonlinearity::Polynomial { alpha } = &p.nonlinearity else {
        return Err(expect_kind(p, "polynomial"));
    };
    let s = ladder(p, alpha, opts)?;
    finish(p, s, opts)
}

/// Newton from a given starting point on the final basis only.
pub fn polynomial_newton(p: &Problem, u0: &CoeffVector, opts: &SolveOptions) -> Result<NewtonResult, SolveError> {
    let Nonlinearity::Polynomial { alpha } = &p.nonlinearity else {
        return Err(expect_kind(p, "polynomial"));
    };
    let d = Discretization::new(p)?;
    Ok(PolynomialSystem { d: &d, alpha }.newton(u0, &opts.newton))
}

/// Continuation ladder over per-block degree counts `2, 3, ..., M`, each rung
/// warm-started from the previous one zero-padded.
pub fn continuation_solve(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    match &p.nonlinearity {
        Nonlinearity::Polynomial { .. } => solve_polynomial(p, opts),
        Nonlinearity::General { strategy: Strategy::Taylor { .. }, .. } => solve_taylor(p, opts),
        _ => Err(expect_kind(p, "polynomial or general/taylor")),
    }
}

fn ladder(p: &Problem, alpha: &[f64], opts: &SolveOptions) -> Result<Solution, SolveError> {
    let m_final = p.spec.degree();
    let first = m_final.min(2);
    let mut guess: Option<CoeffVector> = None;
    let mut rung_iters = Vec::new();
    let mut warnings = Vec::new();
    for m in first..=m_final {
        let spec = p.spec.with_degree(m)?;
        let d = Discretization::new(&p.with_spec(spec))?;
        let sys = PolynomialSystem { d: &d, alpha };
        let start = match &guess {
            Some(g) => g.resized(m)?,
            None => sys.scan_initializer(opts.scan_range),
        };
        let mut res = sys.newton(&start, &opts.newton);
        let mut iters = res.iterations;
        if m == m_final {
            if !res.converged {
                let retry = sys.newton(&sys.scan_initializer(opts.scan_range), &opts.newton);
                iters += retry.iterations;
                if retry.converged || retry.residual < res.residual {
                    res = retry;
                }
            }
            if let Some(start) = branch_guess(&sys, opts.scan_range) {
                let alt = sys.newton(&start, &opts.newton);
                iters += alt.iterations;
                res = pick_root(p, spec, res, alt);
            }
            rung_iters.push(iters);
            if !res.converged {
                warnings.push(format!("newton did not converge: best residual {:e}", res.residual));
            }
            let u = coeffs_of(spec, &res.x);
            let z = sys.g_coeffs(&u);
            return Ok(Solution {
                u,
                z: Some(z),
                diagnostics: Diagnostics {
                    algebraic_residual: res.residual,
                    newton_iters: rung_iters.iter().sum(),
                    rung_iters,
                    converged: res.converged,
                    condition_estimate: res.condition,
                    warnings,
                    ..Diagnostics::default()
                },
            });
        }
        rung_iters.push(iters);
        guess = res.converged.then(|| coeffs_of(spec, &res.x));
    }
    unreachable!("ladder always ends on the final rung")
}

/// Points per block used to trace a root branch.
const TRACE_POINTS: usize = 32;

fn trace_points(spec: &BasisSpec) -> Vec<f64> {
    let nodes = gauss_chebyshev_nodes(TRACE_POINTS.max(2 * spec.degree()));
    (0..spec.blocks())
        .flat_map(|b| nodes.iter().rev().map(move |&x| spec.from_local(b, x)))
        .collect()
}

/// Starting guess that follows one root branch of `G(w) = Z(t)` across a
/// dense set of points, with `Z` from the linear stage. The branch starts at
/// the smallest root in `range` and is continued by linear extrapolation, so
/// it passes straight through points where two branches cross.
fn branch_guess(sys: &PolynomialSystem, range: (f64, f64)) -> Option<CoeffVector> {
    let (z, _) = sys.d.solve_z().ok()?;
    let g = |w: f64| Some(sys.alpha.iter().rev().fold(0.0, |acc, a| acc * w + a));
    let ts = trace_points(&sys.d.spec);
    let mut ws: Vec<f64> = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let roots = all_roots(g, z.eval(t), range, 256);
        let predicted = match i {
            0 => None,
            1 => Some(ws[0]),
            _ => Some(ws[i - 1] + (ws[i - 1] - ws[i - 2]) * (t - ts[i - 1]) / (ts[i - 1] - ts[i - 2])),
        };
        let w = match predicted {
            None => *roots.first()?,
            Some(pw) => roots.into_iter().min_by(|a, b| (a - pw).abs().total_cmp(&(b - pw).abs())).unwrap_or(pw),
        };
        ws.push(w);
    }
    fit_points(sys.d.spec, &ts, &ws).ok()
}

/// Coarse oracle residual used to choose between Newton roots.
const SELECTION_GRID: usize = 32;

/// Of two Newton results, the converged one with the smaller oracle
/// residual; the first wins ties.
fn pick_root(p: &Problem, spec: BasisSpec, a: NewtonResult, b: NewtonResult) -> NewtonResult {
    match (a.converged, b.converged) {
        (true, false) => return a,
        (false, true) => return b,
        (false, false) => return if b.residual < a.residual { b } else { a },
        (true, true) => {}
    }
    let p = p.with_spec(spec);
    let grid = Grid::uniform(spec.interval(), SELECTION_GRID);
    let score = |r: &NewtonResult| {
        let s = Solution { u: coeffs_of(spec, &r.x), z: None, diagnostics: Diagnostics::default() };
        oracle::residual_linf(&p, &s, &grid).unwrap_or(f64::INFINITY)
    };
    let (sa, sb) = (score(&a), score(&b));
    if sb < sa && sa - sb > 1e-12 * (1.0 + sa) {
        b
    } else {
        a
    }
}

/// General `G` through its Taylor polynomial about a center.
pub fn solve_taylor(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let Nonlinearity::General { g, strategy: Strategy::Taylor { degree, center, radius } } = &p.nonlinearity else {
        return Err(expect_kind(p, "general/taylor"));
    };
    let alpha = taylor_coefficients(|u| g.eval_u(u), *degree, *center, *radius)?;
    let mut s = ladder(p, &alpha, opts)?;
    let grid = Grid::uniform(p.spec.interval(), oracle::DEFAULT_GRID);
    let excursion = grid.points().iter().map(|t| (s.u.eval(*t) - center).abs()).fold(0.0, f64::max);
    if excursion > *radius {
        s.diagnostics.warnings.push(format!(
            "solution leaves the taylor trust region: |u - {center}| reaches {excursion:.3} > {radius}"
        ));
    }
    finish(p, s, opts)
}

/// Per-block Chebyshev-Gauss points, `M` per block.
pub fn collocation_points(spec: &BasisSpec) -> Vec<f64> {
    let nodes = gauss_chebyshev_nodes(spec.degree());
    (0..spec.blocks())
        .flat_map(|b| nodes.iter().rev().map(move |&x| spec.from_local(b, x)))
        .collect()
}

/// Least-squares fit of values at the collocation points.
fn fit_points(spec: BasisSpec, ts: &[f64], ws: &[f64]) -> Result<CoeffVector, SolveError> {
    let dim = spec.dim();
    let mut a = DMatrix::zeros(ts.len(), dim);
    let mut row = Vec::with_capacity(spec.degree());
    for (i, &t) in ts.iter().enumerate() {
        let blk = spec.block_of(t);
        chebyshev_all(spec.degree(), spec.local_coord(blk, t), &mut row);
        for (m, v) in row.iter().enumerate() {
            a[(i, spec.index(blk, m))] = *v;
        }
    }
    let (c, _) = lstsq(&a, &DVector::from_column_slice(ws));
    Ok(coeffs_of(spec, &c))
}

/// Hybrid route: solve `L Z = F`, then `G(w_i) = Z(t_i)` at the collocation
/// points and fit `u` through the `w_i`.
pub fn solve_collocation_hybrid(p: &Problem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let (g, bracket) = match &p.nonlinearity {
        Nonlinearity::General { g, strategy: Strategy::Collocation { bracket } } => (g, *bracket),
        Nonlinearity::Invertible { g, bracket: Some(b), .. } => (g, *b),
        _ => return Err(expect_kind(p, "general/collocation")),
    };
    let d = Discretization::new(p)?;
    let (z, cond) = d.solve_z()?;
    let ts = collocation_points(&p.spec);
    let ws = ts.iter().map(|&t| invert_at(g, &z, t, bracket)).collect::<Result<Vec<_>, _>>()?;
    let u = fit_points(p.spec, &ts, &ws)?;
    let diagnostics = linear_diagnostics(&d, &z, cond);
    finish(p, Solution { u, z: Some(z), diagnostics }, opts)
}
