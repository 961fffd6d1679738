//! Damped Newton iteration for small dense nonlinear systems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Converged when `||R||_inf <= tol`.
    pub tol: f64,
    /// Also converged when the accepted step is this small.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Maximum number of step halvings in the line search.
    pub max_halvings: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, step_tol: 1e-14, max_iter: 100, max_halvings: 30, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    /// Best iterate found (the last one when converged).
    pub x: DVector<f64>,
    /// `||R(x)||_inf`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Singular-value ratio of the last Jacobian.
    pub condition: f64,
}

/// Central-difference Jacobian with step `1e-6 (1 + |x_k|)` per column.
pub fn fd_jacobian<F>(residual: &F, x: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = x.clone();
    for k in 0..n {
        let h = 1e-6 * (1.0 + x[k].abs());
        probe[k] = x[k] + h;
        let fp = residual(&probe);
        probe[k] = x[k] - h;
        let fm = residual(&probe);
        probe[k] = x[k];
        jac.set_column(k, &((fp - fm) / (2.0 * h)));
    }
    jac
}

/// Least-squares solve; returns the solution and the singular-value ratio.
/// Square systems that are safely nonsingular go through full-pivot LU,
/// which is more accurate than the iterative SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if a.is_square() && cond < 1e12 {
        if let Some(x) = a.clone().full_piv_lu().solve(b) {
            return (x, cond);
        }
    }
    let svd = a.clone().svd(true, true);
    let cutoff = smax * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    let x = svd.solve(b, cutoff).unwrap_or_else(|_| DVector::zeros(a.ncols()));
    (x, cond)
}

/// Damped Newton with a finite-difference Jacobian.
pub fn newton_solve<F>(residual: F, x0: DVector<f64>, opts: &NewtonOptions) -> NewtonResult
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    newton_solve_with(&residual, |x: &DVector<f64>| fd_jacobian(&residual, x), x0, opts)
}

/// Damped Newton with a caller-supplied Jacobian.
pub fn newton_solve_with<F, J>(residual: F, jacobian: J, x0: DVector<f64>, opts: &NewtonOptions) -> NewtonResult
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = x0;
    let mut r = residual(&x);
    let mut norm = r.amax();
    let mut condition = f64::NAN;
    let mut iterations = 0;
    if !norm.is_finite() {
        return NewtonResult { x, residual: norm, iterations, converged: false, condition };
    }
    if norm <= opts.tol {
        let (_, cond) = lstsq(&jacobian(&x), &r);
        return NewtonResult { x, residual: norm, iterations, converged: true, condition: cond };
    }
    while norm > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let jac = jacobian(&x);
        let (step, cond) = lstsq(&jac, &(-&r));
        condition = cond;
        let merit = r.norm_squared();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = &x + &step * lambda;
            let rt = residual(&trial);
            let mt = rt.norm_squared();
            if mt.is_finite() && mt <= (1.0 - 2.0 * opts.armijo * lambda) * merit {
                accepted = Some((trial, rt));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, rt)) = accepted else {
            return NewtonResult { x, residual: norm, iterations, converged: false, condition };
        };
        let step_norm = (step * lambda).amax();
        x = trial;
        r = rt;
        norm = r.amax();
        if step_norm <= opts.step_tol {
            return NewtonResult { x, residual: norm, iterations, converged: true, condition };
        }
    }
    NewtonResult { converged: norm <= opts.tol, x, residual: norm, iterations, condition }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_converges_immediately() {
        let c = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let res = newton_solve(|u| u - &c, DVector::zeros(3), &NewtonOptions::default());
        assert!(res.converged);
        assert!(res.iterations <= 2, "{res:?}");
        assert!((res.x - c).amax() < 1e-12);
    }

    #[test]
    fn scalar_quadratic() {
        let res = newton_solve(|u| DVector::from_vec(vec![u[0] * u[0] - 4.0]), DVector::from_vec(vec![3.0]), &NewtonOptions::default());
        assert!(res.converged);
        assert!((res.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn circle_and_diagonal() {
        let res = newton_solve(
            |u| DVector::from_vec(vec![u[0] * u[0] + u[1] * u[1] - 1.0, u[0] - u[1]]),
            DVector::from_vec(vec![1.0, 0.0]),
            &NewtonOptions::default(),
        );
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(res.converged);
        assert!((res.x[0] - h).abs() < 1e-10 && (res.x[1] - h).abs() < 1e-10);
    }

    #[test]
    fn damping_rescues_a_bad_start() {
        // atan has a famously small basin for undamped Newton
        let res = newton_solve(|u| u.map(f64::atan), DVector::from_vec(vec![3.0]), &NewtonOptions::default());
        assert!(res.converged);
        assert!(res.x[0].abs() < 1e-12);
    }

    #[test]
    fn reports_failure_with_best_iterate() {
        // no real root
        let opts = NewtonOptions { max_iter: 20, ..NewtonOptions::default() };
        let res = newton_solve(|u| u.map(|v| v * v + 1.0), DVector::from_vec(vec![0.7]), &opts);
        assert!(!res.converged);
        assert!(res.residual >= 1.0);
        assert!(res.x[0].is_finite());
    }

    #[test]
    fn already_converged_takes_no_steps() {
        let res = newton_solve(|u| u.clone(), DVector::zeros(2), &NewtonOptions::default());
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
    }
}
