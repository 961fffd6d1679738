//! Shifted Chebyshev and hybrid block-pulse/Chebyshev bases.
//!
//! A [`BasisSpec`] splits `[t0, tf]` into `N` equal blocks and carries
//! Chebyshev polynomials of degree `0..M` on each one, for `L = N*M` basis
//! functions. With `N = 1` this is the plain shifted Chebyshev basis.
//!
//! Indices are 0-based and block-major: basis function `r` lives on block
//! `r / M` with local degree `r % M`. Blocks are half-open `[a, b)` except the
//! last, which is closed, so every point of the interval has exactly one
//! owning block.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("invalid interval [{t0}, {tf}]: need tf > t0")]
    Interval { t0: f64, tf: f64 },
    #[error("block count and degree count must be positive (got N={n}, M={m})")]
    Size { n: usize, m: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("weight function is singular at t={0} (block endpoint)")]
    Singular(f64),
    #[error("point t={0} lies outside the interval")]
    Outside(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    t0: f64,
    tf: f64,
    a: f64,
}

impl Interval {
    pub fn new(t0: f64, tf: f64) -> Result<Self, BasisError> {
        if !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(BasisError::Interval { t0, tf });
        }
        Ok(Self { t0, tf, a: 2.0 / (tf - t0) })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    /// Scaling factor `2 / (tf - t0)` mapping the interval onto `[-1, 1]`.
    pub fn scale(&self) -> f64 {
        self.a
    }

    pub fn len(&self) -> f64 {
        self.tf - self.t0
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.tf
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    interval: Interval,
    blocks: usize,
    degree: usize,
}

impl BasisSpec {
    pub fn new(interval: Interval, blocks: usize, degree: usize) -> Result<Self, BasisError> {
        if blocks == 0 || degree == 0 {
            return Err(BasisError::Size { n: blocks, m: degree });
        }
        Ok(Self { interval, blocks, degree })
    }

    /// Plain shifted Chebyshev basis (one block).
    pub fn chebyshev(interval: Interval, degree: usize) -> Result<Self, BasisError> {
        Self::new(interval, 1, degree)
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    /// Number of blocks `N`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Number of Chebyshev polynomials per block `M`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension `L = N*M`.
    pub fn dim(&self) -> usize {
        self.blocks * self.degree
    }

    /// Same blocks, different per-block degree count.
    pub fn with_degree(&self, degree: usize) -> Result<Self, BasisError> {
        Self::new(self.interval, self.blocks, degree)
    }

    /// `A*N`, the derivative of the block-local coordinate.
    pub fn local_scale(&self) -> f64 {
        self.interval.a * self.blocks as f64
    }

    pub fn index(&self, block: usize, m: usize) -> usize {
        block * self.degree + m
    }

    /// `(block, degree)` for basis index `r`.
    pub fn split(&self, r: usize) -> (usize, usize) {
        (r / self.degree, r % self.degree)
    }

    pub fn block_bounds(&self, block: usize) -> (f64, f64) {
        let h = self.interval.len() / self.blocks as f64;
        let a = self.interval.t0 + h * block as f64;
        let b = if block + 1 == self.blocks { self.interval.tf } else { self.interval.t0 + h * (block + 1) as f64 };
        (a, b)
    }

    /// Interior block boundaries, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        (1..self.blocks).map(|n| self.block_bounds(n).0).collect()
    }

    /// Owning block of `t`, clamped onto the interval.
    pub fn block_of(&self, t: f64) -> usize {
        let s = (t - self.interval.t0) * self.local_scale() / 2.0;
        if s <= 0.0 {
            return 0;
        }
        (s.floor() as usize).min(self.blocks - 1)
    }

    /// Block-local coordinate in `[-1, 1]` of `t` with respect to `block`.
    pub fn local_coord(&self, block: usize, t: f64) -> f64 {
        self.local_scale() * (t - self.interval.t0) - 2.0 * block as f64 - 1.0
    }

    /// Maps a block-local coordinate back to `t`.
    pub fn from_local(&self, block: usize, x: f64) -> f64 {
        self.interval.t0 + (x + 2.0 * block as f64 + 1.0) / self.local_scale()
    }

    /// `<H_r, H_r>` under the hybrid weight: `pi/(AN)` for degree 0, `pi/(2AN)` otherwise.
    pub fn norm_sq(&self, m: usize) -> f64 {
        let base = PI / self.local_scale();
        if m == 0 {
            base
        } else {
            base / 2.0
        }
    }
}

/// Chebyshev polynomial of the first kind by three-term recurrence.
pub fn chebyshev_eval(m: usize, x: f64) -> f64 {
    let x = clamp_unit(x);
    match m {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..m {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Values `T_0(x) .. T_{count-1}(x)`.
pub fn chebyshev_all(count: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    let x = clamp_unit(x);
    if count > 0 {
        out.push(1.0);
    }
    if count > 1 {
        out.push(x);
    }
    for k in 2..count {
        let v = 2.0 * x * out[k - 1] - out[k - 2];
        out.push(v);
    }
}

fn clamp_unit(x: f64) -> f64 {
    debug_assert!(x.abs() <= 1.0 + 1e-12 || !x.is_finite(), "chebyshev argument {x} outside [-1,1]");
    x.clamp(-1.0, 1.0)
}

/// Clenshaw summation of `sum c_k T_k(x)`.
pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Value of basis function `r` at `t`; zero outside its block.
pub fn hcp_eval(spec: &BasisSpec, r: usize, t: f64) -> Result<f64, BasisError> {
    if r >= spec.dim() {
        return Err(BasisError::Index { index: r, dim: spec.dim() });
    }
    let (block, m) = spec.split(r);
    if spec.block_of(t) != block {
        return Ok(0.0);
    }
    Ok(chebyshev_eval(m, spec.local_coord(block, t)))
}

/// Hybrid weight `1/sqrt(1 - x^2)` in the local coordinate of the owning block.
pub fn weight(spec: &BasisSpec, t: f64) -> Result<f64, BasisError> {
    if !spec.interval.contains(t) {
        return Err(BasisError::Outside(t));
    }
    let x = spec.local_coord(spec.block_of(t), t);
    let gap = 1.0 - x * x;
    if gap <= 1e-14 {
        return Err(BasisError::Singular(t));
    }
    Ok(1.0 / gap.sqrt())
}

/// Gauss-Chebyshev (first kind) nodes on `[-1, 1]`; every weight equals `pi/q`.
pub fn gauss_chebyshev_nodes(q: usize) -> Vec<f64> {
    (0..q).map(|k| ((2 * k + 1) as f64 * PI / (2 * q) as f64).cos()).collect()
}

/// Node count used by projections: `max(64, 4M)`.
pub fn projection_nodes(m: usize) -> usize {
    (4 * m).max(64)
}

/// Coefficients of a function in a hybrid basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    spec: BasisSpec,
    c: Vec<f64>,
}

impl CoeffVector {
    pub fn new(spec: BasisSpec, c: Vec<f64>) -> Result<Self, BasisError> {
        if c.len() != spec.dim() {
            return Err(BasisError::Index { index: c.len(), dim: spec.dim() });
        }
        Ok(Self { spec, c })
    }

    pub fn zeros(spec: BasisSpec) -> Self {
        Self { spec, c: vec![0.0; spec.dim()] }
    }

    /// The constant function `value`.
    pub fn constant(spec: BasisSpec, value: f64) -> Self {
        let mut cv = Self::zeros(spec);
        for n in 0..spec.blocks {
            cv.c[spec.index(n, 0)] = value;
        }
        cv
    }

    /// Basis function `r` itself.
    pub fn unit(spec: BasisSpec, r: usize) -> Self {
        let mut cv = Self::zeros(spec);
        cv.c[r] = 1.0;
        cv
    }

    /// Weighted orthogonal projection of `f`, by Gauss-Chebyshev quadrature per block.
    pub fn project<F>(spec: BasisSpec, mut f: F) -> Self
    where
        F: FnMut(f64) -> f64,
    {
        Self::try_project(spec, |t| Ok::<_, std::convert::Infallible>(f(t))).unwrap_or_else(|e| match e {})
    }

    pub fn try_project<F, E>(spec: BasisSpec, mut f: F) -> Result<Self, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        let q = projection_nodes(spec.degree);
        let nodes = gauss_chebyshev_nodes(q);
        let m = spec.degree;
        let mut c = vec![0.0; spec.dim()];
        let mut tk = Vec::with_capacity(m);
        for block in 0..spec.blocks {
            let out = &mut c[block * m..(block + 1) * m];
            for &x in &nodes {
                let v = f(spec.from_local(block, x))?;
                chebyshev_all(m, x, &mut tk);
                for (o, t) in out.iter_mut().zip(&tk) {
                    *o += v * t;
                }
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o *= if k == 0 { 1.0 } else { 2.0 } / q as f64;
            }
        }
        Ok(Self { spec, c })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.c
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.c
    }

    pub fn block(&self, n: usize) -> &[f64] {
        let m = self.spec.degree;
        &self.c[n * m..(n + 1) * m]
    }

    /// Series value at `t` (Clenshaw on the owning block).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.spec.block_of(t);
        clenshaw(self.block(n), self.spec.local_coord(n, t))
    }

    /// Series value using `block`'s coefficients regardless of ownership.
    /// Used to evaluate one-sided limits at block boundaries.
    pub fn eval_in_block(&self, block: usize, t: f64) -> f64 {
        clenshaw(self.block(block), self.spec.local_coord(block, t))
    }

    /// Coefficients of the derivative, block by block.
    pub fn derivative(&self) -> CoeffVector {
        let m = self.spec.degree;
        let scale = self.spec.local_scale();
        let mut out = vec![0.0; self.c.len()];
        for n in 0..self.spec.blocks {
            let a = self.block(n);
            let d = &mut out[n * m..(n + 1) * m];
            // d_{k-1} = d_{k+1} + 2k a_k, then halve d_0
            for k in (1..m).rev() {
                let upper = if k + 1 < m { d[k + 1] } else { 0.0 };
                d[k - 1] = upper + 2.0 * k as f64 * a[k];
            }
            if m > 0 {
                d[0] *= 0.5;
            }
            for v in d.iter_mut() {
                *v *= scale;
            }
        }
        CoeffVector { spec: self.spec, c: out }
    }

    /// Zero-pads (or truncates) each block to a new per-block degree count.
    pub fn resized(&self, degree: usize) -> Result<CoeffVector, BasisError> {
        let spec = self.spec.with_degree(degree)?;
        let mut out = CoeffVector::zeros(spec);
        let keep = degree.min(self.spec.degree);
        for n in 0..self.spec.blocks {
            out.c[n * degree..n * degree + keep].copy_from_slice(&self.block(n)[..keep]);
        }
        Ok(out)
    }

    pub fn axpy(&mut self, alpha: f64, other: &CoeffVector) {
        debug_assert_eq!(self.spec, other.spec);
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += alpha * b;
        }
    }
}
