//! Operational matrices of integration and product, and the product
//! operational vector ("hat" transform).
//!
//! Conventions, with `H(t)` the column vector of basis functions:
//!
//! - integration: `int_{t0}^t H(s) ds ~ Q H(t)`, so row `r` of `Q` holds the
//!   coefficients of `int H_r`, and the coefficients of `int g` for
//!   `g = C^T H` are `Q^T C`;
//! - product: `H(t) H(t)^T C ~ Cbar^T H(t)`, so `Cbar V` are the coefficients
//!   of the product of the series `C` and `V`;
//! - hat: `H(t)^T B H(t) ~ Bhat H(t)`.
//!
//! Every product or integral that would produce degree `>= M` on a block is
//! truncated.

use nalgebra::DMatrix;

use crate::basis::{chebyshev_all, gauss_chebyshev_nodes, projection_nodes, BasisSpec, CoeffVector};
use crate::expr::{EvalError, Expr};

/// Dense `L x L` matrix tied to a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    spec: BasisSpec,
    a: DMatrix<f64>,
}

impl OpMatrix {
    pub fn new(spec: BasisSpec, a: DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), spec.dim(), "matrix side must equal N*M");
        assert_eq!(a.ncols(), spec.dim(), "matrix side must equal N*M");
        Self { spec, a }
    }

    pub fn zeros(spec: BasisSpec) -> Self {
        Self { spec, a: DMatrix::zeros(spec.dim(), spec.dim()) }
    }

    pub fn identity(spec: BasisSpec) -> Self {
        Self { spec, a: DMatrix::identity(spec.dim(), spec.dim()) }
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.a
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.a
    }

    pub fn transpose(&self) -> OpMatrix {
        Self { spec: self.spec, a: self.a.transpose() }
    }

    pub fn mul(&self, other: &OpMatrix) -> OpMatrix {
        Self { spec: self.spec, a: &self.a * &other.a }
    }

    /// `A * v` for a coefficient vector `v`.
    pub fn apply(&self, v: &CoeffVector) -> CoeffVector {
        let out = &self.a * nalgebra::DVector::from_column_slice(v.coeffs());
        CoeffVector::new(self.spec, out.as_slice().to_vec()).expect("dimension preserved")
    }

    /// `A^T * v`.
    pub fn apply_transpose(&self, v: &CoeffVector) -> CoeffVector {
        let out = self.a.tr_mul(&nalgebra::DVector::from_column_slice(v.coeffs()));
        CoeffVector::new(self.spec, out.as_slice().to_vec()).expect("dimension preserved")
    }
}

/// Product operational vector of `B` in a hybrid basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HatVector {
    spec: BasisSpec,
    b: Vec<f64>,
}

impl HatVector {
    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.b
    }

    pub fn into_coeffs(self) -> CoeffVector {
        CoeffVector::new(self.spec, self.b).expect("dimension preserved")
    }
}

/// `P` for the reference interval `[-1, 1]`: row `j` holds the Chebyshev
/// coefficients of `int_{-1}^x T_j`, truncated to degree `< m`.
pub fn reference_integration(m: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(m, m);
    let mut put = |i: usize, j: usize, v: f64| {
        if j < m {
            p[(i, j)] += v;
        }
    };
    // int T0 = T0 + T1
    put(0, 0, 1.0);
    put(0, 1, 1.0);
    if m > 1 {
        // int T1 = (T2 - T0) / 4
        put(1, 0, -0.25);
        put(1, 2, 0.25);
    }
    for j in 2..m {
        let jf = j as f64;
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        put(j, 0, sign / (jf * jf - 1.0));
        put(j, j - 1, -1.0 / (2.0 * (jf - 1.0)));
        put(j, j + 1, 1.0 / (2.0 * (jf + 1.0)));
    }
    p
}

/// Full-block integrals `int_{-1}^1 T_j`, the only nonzero column of `E`.
pub fn reference_block_integrals(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| if j % 2 == 1 { 0.0 } else { 2.0 / (1.0 - (j * j) as f64) })
        .collect()
}

/// Operational matrix of integration: `P/N` on the diagonal blocks, `E/N`
/// on every block to the right, both carrying the `1/A` interval factor.
pub fn integration_matrix(spec: &BasisSpec) -> OpMatrix {
    let m = spec.degree();
    let n = spec.blocks();
    let h = 1.0 / spec.local_scale();
    let p = reference_integration(m) * h;
    let e = reference_block_integrals(m);
    let mut q = DMatrix::zeros(spec.dim(), spec.dim());
    for blk in 0..n {
        q.view_mut((blk * m, blk * m), (m, m)).copy_from(&p);
        for later in blk + 1..n {
            for (j, ej) in e.iter().enumerate() {
                q[(blk * m + j, later * m)] = ej * h;
            }
        }
    }
    let q = OpMatrix::new(*spec, q);
    #[cfg(debug_assertions)]
    {
        let report = crate::oracle::integration_deviation(&q);
        debug_assert!(
            report.max_deviation <= 1e-9,
            "integration matrix disagrees with quadrature: {report:?}"
        );
    }
    q
}

/// Product operational matrix `Cbar` of a series: block diagonal, built from
/// `T_i T_j = (T_{i+j} + T_{|i-j|}) / 2` with degrees `>= M` dropped.
pub fn product_matrix(cv: &CoeffVector) -> OpMatrix {
    let spec = *cv.spec();
    let m = spec.degree();
    let mut a = DMatrix::zeros(spec.dim(), spec.dim());
    for blk in 0..spec.blocks() {
        let c = cv.block(blk);
        let off = blk * m;
        for i in 0..m {
            for (j, &cj) in c.iter().enumerate() {
                if cj == 0.0 {
                    continue;
                }
                let hi = i + j;
                if hi < m {
                    a[(off + hi, off + i)] += 0.5 * cj;
                }
                a[(off + i.abs_diff(j), off + i)] += 0.5 * cj;
            }
        }
    }
    OpMatrix::new(spec, a)
}

/// Hat transform: `Bhat(k) = sum c_ij b_ij` over each diagonal block, with
/// `c_ij = 1` when both `|i-j| = k` and `i+j = k` hold, `1/2` when exactly one
/// does (0-based local indices). Off-diagonal blocks multiply functions with
/// disjoint support and contribute nothing.
pub fn hat_vector(b: &OpMatrix) -> HatVector {
    let spec = b.spec;
    let m = spec.degree();
    let mut out = vec![0.0; spec.dim()];
    for blk in 0..spec.blocks() {
        let off = blk * m;
        for i in 0..m {
            for j in 0..m {
                let bij = b.a[(off + i, off + j)];
                if bij == 0.0 {
                    continue;
                }
                let diff = i.abs_diff(j);
                let sum = i + j;
                if diff == sum {
                    out[off + diff] += bij;
                } else {
                    out[off + diff] += 0.5 * bij;
                    if sum < m {
                        out[off + sum] += 0.5 * bij;
                    }
                }
            }
        }
    }
    HatVector { spec, b: out }
}

/// Coefficients of `u^r` through repeated truncated products; `r = 0` gives
/// the constant one.
pub fn power_vector(u: &CoeffVector, r: usize) -> CoeffVector {
    if r == 0 {
        return CoeffVector::constant(*u.spec(), 1.0);
    }
    let ubar = product_matrix(u);
    let mut acc = u.clone();
    for _ in 1..r {
        acc = ubar.apply(&acc);
    }
    acc
}

/// Kernel matrix with `k(x, t) ~ H(x)^T K H(t)`.
pub fn kernel_matrix(k: &Expr, spec: &BasisSpec) -> Result<OpMatrix, EvalError> {
    try_kernel_matrix(spec, |x, t| k.eval_xt(x, t))
}

pub fn try_kernel_matrix<F, E>(spec: &BasisSpec, mut k: F) -> Result<OpMatrix, E>
where
    F: FnMut(f64, f64) -> Result<f64, E>,
{
    let m = spec.degree();
    let n = spec.blocks();
    let q = projection_nodes(m);
    let nodes = gauss_chebyshev_nodes(q);
    // phi[a * m + i] = T_i(node_a)
    let mut phi = vec![0.0; q * m];
    let mut row = Vec::with_capacity(m);
    for (a, &x) in nodes.iter().enumerate() {
        chebyshev_all(m, x, &mut row);
        phi[a * m..(a + 1) * m].copy_from_slice(&row);
    }
    let phi = DMatrix::from_row_slice(q, m, &phi);
    let nu: Vec<f64> = (0..m).map(|i| if i == 0 { 1.0 } else { 2.0 } / q as f64).collect();

    let mut kmat = DMatrix::zeros(spec.dim(), spec.dim());
    let mut vals = DMatrix::zeros(q, q);
    for bx in 0..n {
        for bt in 0..n {
            for (a, &xs) in nodes.iter().enumerate() {
                let x = spec.from_local(bx, xs);
                for (b, &xt) in nodes.iter().enumerate() {
                    vals[(a, b)] = k(x, spec.from_local(bt, xt))?;
                }
            }
            let block = phi.tr_mul(&vals) * &phi;
            for i in 0..m {
                for j in 0..m {
                    kmat[(bx * m + i, bt * m + j)] = block[(i, j)] * nu[i] * nu[j];
                }
            }
        }
    }
    Ok(OpMatrix::new(*spec, kmat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{hcp_eval, Interval};

    fn spec(t0: f64, tf: f64, n: usize, m: usize) -> BasisSpec {
        BasisSpec::new(Interval::new(t0, tf).unwrap(), n, m).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    fn row(m: &OpMatrix, r: usize) -> Vec<f64> {
        m.matrix().row(r).iter().copied().collect()
    }

    #[test]
    fn reference_rows() {
        let p = integration_matrix(&spec(-1.0, 1.0, 1, 3));
        close(&row(&p, 0), &[1.0, 1.0, 0.0], 1e-15);
        close(&row(&p, 1), &[-0.25, 0.0, 0.25], 1e-15);
        let p = integration_matrix(&spec(-1.0, 1.0, 1, 4));
        close(&row(&p, 2), &[-1.0 / 3.0, -0.5, 0.0, 1.0 / 6.0], 1e-15);
    }

    #[test]
    fn last_rows_follow_the_closed_form() {
        // rows M-2 and M-1 of the displayed matrix, in terms of M
        let m = 7;
        let p = reference_integration(m);
        let mf = m as f64;
        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        assert!((p[(m - 2, 0)] - sign(m - 1) / ((mf - 1.0) * (mf - 3.0))).abs() < 1e-15);
        assert!((p[(m - 2, m - 3)] + 1.0 / (2.0 * (mf - 3.0))).abs() < 1e-15);
        assert!((p[(m - 2, m - 1)] - 1.0 / (2.0 * (mf - 1.0))).abs() < 1e-15);
        assert!((p[(m - 1, 0)] - sign(m) / (mf * (mf - 2.0))).abs() < 1e-15);
        assert!((p[(m - 1, m - 2)] + 1.0 / (2.0 * (mf - 2.0))).abs() < 1e-15);
        let e = reference_block_integrals(m);
        assert!((e[m - 1] - (sign(m) - 1.0) / (mf * (mf - 2.0))).abs() < 1e-15);
        assert!((e[2] + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hybrid_e_block() {
        let q = integration_matrix(&spec(0.0, 1.0, 2, 2));
        let e = q.matrix().view((0, 2), (2, 2)).clone_owned();
        close(e.as_slice(), &[0.5, 0.0, 0.0, 0.0], 1e-15);
        // lower-left block is zero
        assert!(q.matrix().view((2, 0), (2, 2)).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn product_of_one_is_identity() {
        let s = spec(0.0, 3.0, 3, 5);
        let one = CoeffVector::constant(s, 1.0);
        assert_eq!(product_matrix(&one), OpMatrix::identity(s));
    }

    #[test]
    fn product_of_first_polynomial() {
        let s = spec(-1.0, 1.0, 1, 3);
        let cv = CoeffVector::new(s, vec![0.0, 1.0, 0.0]).unwrap();
        let cbar_t = product_matrix(&cv).transpose();
        let expect = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0]);
        assert_eq!(cbar_t.matrix(), &expect);
        // pointwise: H_i(t) g(t) against row i of Cbar^T for the untruncated rows
        for k in 0..11 {
            let t = -1.0 + 0.2 * k as f64;
            for i in 0..2 {
                let lhs = hcp_eval(&s, i, t).unwrap() * t;
                let rhs: f64 = (0..3).map(|j| cbar_t.matrix()[(i, j)] * hcp_eval(&s, j, t).unwrap()).sum();
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hat_examples() {
        let s = spec(-1.0, 1.0, 1, 4);
        close(hat_vector(&OpMatrix::identity(s)).values(), &[2.5, 0.0, 0.5, 0.0], 1e-15);
        let mut b = OpMatrix::zeros(s);
        b.matrix_mut()[(0, 0)] = 1.0;
        close(hat_vector(&b).values(), &[1.0, 0.0, 0.0, 0.0], 0.0);
        let mut b = OpMatrix::zeros(s);
        b.matrix_mut()[(0, 1)] = 1.0;
        close(hat_vector(&b).values(), &[0.0, 1.0, 0.0, 0.0], 0.0);
        let s5 = spec(-1.0, 1.0, 1, 5);
        close(hat_vector(&OpMatrix::identity(s5)).values(), &[3.0, 0.0, 0.5, 0.0, 0.5], 1e-15);
    }

    #[test]
    fn hat_ignores_off_diagonal_blocks() {
        let s = spec(0.0, 1.0, 2, 3);
        let mut b = OpMatrix::zeros(s);
        b.matrix_mut()[(0, 3)] = 5.0;
        b.matrix_mut()[(4, 1)] = -2.0;
        assert!(hat_vector(&b).values().iter().all(|v| *v == 0.0));
        b.matrix_mut()[(3, 3)] = 1.0;
        close(hat_vector(&b).values(), &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn power_examples() {
        let s = spec(0.0, 2.0, 2, 4);
        let one = CoeffVector::constant(s, 1.0);
        assert_eq!(power_vector(&one, 7), one);
        let s = spec(-1.0, 1.0, 1, 4);
        let u = CoeffVector::project(s, |t| t);
        close(power_vector(&u, 2).coeffs(), &[0.5, 0.0, 0.5, 0.0], 1e-15);
        let s = spec(0.0, 1.0, 1, 6);
        let u = CoeffVector::project(s, |t| t);
        assert!((power_vector(&u, 3).eval(0.4) - 0.064).abs() < 1e-12);
        assert_eq!(power_vector(&u, 0), CoeffVector::constant(s, 1.0));
    }

    #[test]
    fn kernel_examples() {
        let s = spec(0.0, 1.0, 2, 3);
        let k = kernel_matrix(&Expr::parse("1").unwrap(), &s).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i % 3 == 0 && j % 3 == 0 { 1.0 } else { 0.0 };
                assert!((k.matrix()[(i, j)] - expect).abs() < 1e-14);
            }
        }
        let s = spec(-1.0, 1.0, 1, 3);
        let k = kernel_matrix(&Expr::parse("t*x").unwrap(), &s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == 1 && j == 1 { 1.0 } else { 0.0 };
                assert!((k.matrix()[(i, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn kernel_orientation_is_x_then_t() {
        // k = x only: K = e_{x-linear} (x) e_{t-constant}
        let s = spec(-1.0, 1.0, 1, 2);
        let k = kernel_matrix(&Expr::parse("x").unwrap(), &s).unwrap();
        assert!((k.matrix()[(1, 0)] - 1.0).abs() < 1e-14);
        assert!(k.matrix()[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn kernel_errors_propagate() {
        let s = spec(-1.0, 1.0, 1, 2);
        assert!(kernel_matrix(&Expr::parse("ln(x)").unwrap(), &s).is_err());
    }
}
