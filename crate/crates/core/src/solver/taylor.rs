//! Taylor coefficients of a scalar function without symbolic differentiation.
//!
//! `G` is interpolated at Chebyshev points on `[c - rho, c + rho]`; the
//! interpolant's monomial coefficients in `(u - c)` are the derivatives of a
//! high-order differentiation stencil evaluated at the center. The result is
//! re-expanded in powers of `u`.

use crate::basis::{chebyshev_all, gauss_chebyshev_nodes};
use crate::expr::EvalError;

/// Highest supported expansion degree.
pub const TAYLOR_MAX_DEGREE: usize = 12;
const NODES: usize = 16;

/// Coefficients `alpha_0..alpha_degree` of `sum alpha_r u^r`, the degree-`degree`
/// Taylor polynomial of `g` about `center`.
pub fn taylor_coefficients<F>(g: F, degree: usize, center: f64, radius: f64) -> Result<Vec<f64>, EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    assert!(degree <= TAYLOR_MAX_DEGREE && radius > 0.0);
    // Chebyshev interpolation coefficients on the scaled variable s = (u - c)/rho
    let nodes = gauss_chebyshev_nodes(NODES);
    let mut cheb = vec![0.0; NODES];
    let mut tk = Vec::with_capacity(NODES);
    for &s in &nodes {
        let v = g(center + radius * s)?;
        chebyshev_all(NODES, s, &mut tk);
        for (c, t) in cheb.iter_mut().zip(&tk) {
            *c += v * t;
        }
    }
    for (k, c) in cheb.iter_mut().enumerate() {
        *c *= if k == 0 { 1.0 } else { 2.0 } / NODES as f64;
    }

    // monomial form in s: T_{k+1} = 2 s T_k - T_{k-1}
    let mut mono_s = vec![0.0; NODES];
    let mut prev = vec![0.0; NODES];
    let mut cur = vec![0.0; NODES];
    prev[0] = 1.0;
    if NODES > 1 {
        cur[1] = 1.0;
    }
    for (k, ck) in cheb.iter().enumerate() {
        let tkm = if k == 0 { &prev } else { &cur };
        for (m, v) in mono_s.iter_mut().zip(tkm) {
            *m += ck * v;
        }
        if k >= 1 {
            let mut next = vec![0.0; NODES];
            for j in 0..NODES - 1 {
                next[j + 1] += 2.0 * cur[j];
            }
            for j in 0..NODES {
                next[j] -= prev[j];
            }
            prev = std::mem::replace(&mut cur, next);
        }
    }

    // Taylor coefficients in (u - c), then binomial re-expansion in u
    let a: Vec<f64> = (0..=degree).map(|k| mono_s[k] / radius.powi(k as i32)).collect();
    let mut alpha = vec![0.0; degree + 1];
    for (k, ak) in a.iter().enumerate() {
        let mut binom = 1.0;
        for r in (0..=k).rev() {
            // term C(k, r) (-c)^(k - r)
            alpha[r] += ak * binom * (-center).powi((k - r) as i32);
            binom = binom * r as f64 / (k - r + 1) as f64;
        }
    }
    Ok(alpha)
}
