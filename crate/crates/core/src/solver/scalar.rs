//! Scalar root finding for `G(w) = target` on a bracket.

use crate::expr::Expr;

use super::SolveError;

/// Subdivisions tried when the bracket endpoints do not straddle a root.
const SCAN: usize = 64;

/// Solves `G(w) = target` for `w` in `[lo, hi]` by safeguarded Newton
/// (numerical derivative) inside a shrinking sign-change bracket.
pub fn scalar_invert(g: &Expr, target: f64, bracket: (f64, f64)) -> Result<f64, SolveError> {
    invert_fn(|w| g.eval_u(w).ok(), target, bracket)
}

pub(crate) fn invert_fn<F>(g: F, target: f64, (lo, hi): (f64, f64)) -> Result<f64, SolveError>
where
    F: Fn(f64) -> Option<f64>,
{
    let no_root = || SolveError::NoRoot { target, lo, hi };
    let h = |w: f64| g(w).map(|v| v - target).filter(|v| v.is_finite());
    let tol = 1e-13 * (1.0 + target.abs());
    let (lo, hi) = (lo.min(hi), lo.max(hi));

    // locate a sign change: the endpoints first, then an even scan
    let width = (hi - lo) / SCAN as f64;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..=SCAN {
        let w = if i == SCAN { hi } else { lo + width * i as f64 };
        let Some(hw) = h(w) else {
            prev = None;
            continue;
        };
        if hw == 0.0 {
            return Ok(w);
        }
        if let Some((pw, ph)) = prev {
            if ph.signum() != hw.signum() {
                bracket = Some((pw, w, ph));
                break;
            }
        }
        prev = Some((w, hw));
        if i == 0 {
            if let Some(hh) = h(hi) {
                if hh.signum() != hw.signum() {
                    bracket = Some((lo, hi, hw));
                    break;
                }
            }
        }
    }
    let (mut a, mut b, mut fa) = bracket.ok_or_else(no_root)?;

    let mut w = 0.5 * (a + b);
    let mut last_width = b - a;
    for iter in 0..300 {
        let Some(hw) = h(w) else {
            return Err(no_root());
        };
        if hw == 0.0 {
            return Ok(w);
        }
        if hw.signum() == fa.signum() {
            a = w;
            fa = hw;
        } else {
            b = w;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        let d = 1e-7 * (1.0 + w.abs());
        let slope = match (h(w + d), h(w - d)) {
            (Some(p), Some(m)) => (p - m) / (2.0 * d),
            _ => 0.0,
        };
        let newton = w - hw / slope;
        // every other iteration must halve the bracket, otherwise bisect
        let stalled = iter % 2 == 1 && (b - a) > 0.5 * last_width;
        if iter % 2 == 1 {
            last_width = b - a;
        }
        w = if !stalled && newton.is_finite() && newton > a && newton < b { newton } else { 0.5 * (a + b) };
    }
    let best = [w, a, b]
        .into_iter()
        .filter_map(|c| h(c).map(|v| (c, v.abs())))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or_else(no_root)?;
    if best.1 <= tol {
        Ok(best.0)
    } else {
        Err(no_root())
    }
}

/// All sign-change roots of `G(w) = target` on `[lo, hi]`, ascending. Roots of
/// even multiplicity can be missed.
pub(crate) fn all_roots<F>(g: F, target: f64, (lo, hi): (f64, f64), subdivisions: usize) -> Vec<f64>
where
    F: Fn(f64) -> Option<f64>,
{
    let h = |w: f64| g(w).map(|v| v - target).filter(|v| v.is_finite());
    let width = (hi - lo) / subdivisions as f64;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=subdivisions {
        let w = if i == subdivisions { hi } else { lo + width * i as f64 };
        let Some(hw) = h(w) else {
            prev = None;
            continue;
        };
        if hw == 0.0 {
            roots.push(w);
            prev = None;
            continue;
        }
        if let Some((pw, ph)) = prev {
            if ph.signum() != hw.signum() {
                if let Ok(r) = invert_fn(&g, target, (pw, w)) {
                    roots.push(r);
                }
            }
        }
        prev = Some((w, hw));
    }
    roots
}
