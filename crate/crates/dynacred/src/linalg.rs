//! Small dense symmetric linear algebra specialized to AR(1)-Toeplitz and
//! tridiagonal structures.
//!
//! Everything here operates on matrices of dimension ≤ a few dozen (one row
//! per policy period), so a direct LDLᵀ factorization is used throughout —
//! no blocking, no iterative refinement. Determinism matters more than
//! throughput: the same inputs must give bit-identical outputs on every run.
//!
//! Contents:
//!
//! - [`SymMatrix`] — dense symmetric matrix stored row-major.
//! - [`solve_spd`] — LDLᵀ solve with a loud failure on non-positive pivots.
//! - [`ar1_toeplitz`] / [`ar1_toeplitz_inverse`] — the correlation matrix
//!   `[rho^|i-j|]` and its closed-form tridiagonal inverse.
//! - [`tridiag_uv`] — the `d/δ/u/v` recursions that give the last column of
//!   the inverse of a symmetric tridiagonal matrix in O(T).
//! - [`rank_one_update_solve`] — Sherman–Morrison solve for `M + c·11ᵀ`.

use crate::error::{Error, Result};

/// Relative pivot tolerance for the positive-definiteness check in
/// [`solve_spd`]: a pivot below `PD_TOL × max diagonal` fails the solve.
pub const PD_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// SymMatrix
// ---------------------------------------------------------------------------

/// A dense symmetric real matrix, stored row-major with both triangles
/// populated.
///
/// Construction goes through [`SymMatrix::from_fn`] or [`SymMatrix::set`],
/// which write both `(i,j)` and `(j,i)`, so the symmetry invariant holds by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of dimension `dim` (≥ 1).
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("matrix dimension must be >= 1".to_string()));
        }
        Ok(Self { dim, data: vec![0.0; dim * dim] })
    }

    /// Identity matrix of dimension `dim`.
    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        Ok(m)
    }

    /// Build from a function of `(row, col)`; only the upper triangle is
    /// sampled and mirrored, so `f` need not be symmetric itself.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    /// Matrix dimension `T`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Matrix–vector product `A·x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "matvec: vector length {} vs matrix dimension {}",
                x.len(),
                self.dim
            )));
        }
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(out)
    }

    /// Matrix–matrix product `A·B` (plain dense multiply, used by tests and
    /// the Woodbury consistency check).
    pub fn matmul(&self, other: &SymMatrix) -> Result<Vec<Vec<f64>>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {} vs {}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out[i][j] = acc;
            }
        }
        Ok(out)
    }

    /// Scale every entry by `s` in place.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }
}

// ---------------------------------------------------------------------------
// LDL^T solve
// ---------------------------------------------------------------------------

/// Solve `A·x = b` for symmetric positive definite `A` via an LDLᵀ
/// factorization without pivoting.
///
/// Every pivot is checked against `PD_TOL × max diagonal`; a pivot at or
/// below that threshold aborts with [`Error::NotPositiveDefinite`], which for
/// this crate always means a degenerate covariance model (for example an
/// arbitrary-ACF specification that is not a valid correlation sequence).
pub fn solve_spd(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_spd: rhs length {} vs matrix dimension {}",
            b.len(),
            n
        )));
    }
    let max_diag = (0..n).map(|i| a.get(i, i).abs()).fold(0.0_f64, f64::max);
    let tol = PD_TOL * if max_diag > 0.0 { max_diag } else { 1.0 };

    // Factor A = L D L^T with unit lower-triangular L.
    let mut l = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = a.get(j, j);
        for k in 0..j {
            dj -= l[j][k] * l[j][k] * d[k];
        }
        if dj <= tol {
            return Err(Error::NotPositiveDefinite { pivot_index: j, pivot: dj });
        }
        d[j] = dj;
        l[j][j] = 1.0;
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l[i][k] * l[j][k] * d[k];
            }
            l[i][j] = v / dj;
        }
    }

    // Forward solve L z = b, diagonal scale, back solve L^T x = z.
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i][k] * x[k];
        }
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[k][i] * x[k];
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// AR(1) Toeplitz matrix and its closed-form inverse
// ---------------------------------------------------------------------------

/// The AR(1) correlation matrix: `entries[i][j] = rho^|i-j|`.
pub fn ar1_toeplitz(t: usize, rho: f64) -> Result<SymMatrix> {
    if t == 0 {
        return Err(Error::InvalidParams("ar1_toeplitz: T must be >= 1".to_string()));
    }
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::InvalidRho(rho));
    }
    SymMatrix::from_fn(t, |i, j| rho.powi((j as i32 - i as i32).abs()))
}

/// Closed-form inverse of [`ar1_toeplitz`]: `1/(1−rho²)` times the
/// tridiagonal pattern {1 at the two corners, `1+rho²` on the interior
/// diagonal, `−rho` on the off-diagonals}.
pub fn ar1_toeplitz_inverse(t: usize, rho: f64) -> Result<SymMatrix> {
    if t < 2 {
        return Err(Error::InvalidParams("ar1_toeplitz_inverse: T must be >= 2".to_string()));
    }
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::InvalidRho(rho));
    }
    let scale = 1.0 / (1.0 - rho * rho);
    SymMatrix::from_fn(t, |i, j| {
        let v = if i == j {
            if i == 0 || i == t - 1 {
                1.0
            } else {
                1.0 + rho * rho
            }
        } else if j == i + 1 {
            -rho
        } else {
            0.0
        };
        scale * v
    })
}

// ---------------------------------------------------------------------------
// Tridiagonal u/v recursions
// ---------------------------------------------------------------------------

/// The four sequences behind the last column of the inverse of the symmetric
/// tridiagonal matrix `S` with corner diagonal `1+xi`, interior diagonal
/// `1+rho²+xi` and off-diagonal `−rho`.
///
/// The recursions (all 1-indexed in the math, 0-indexed in the vectors):
///
/// - `d_T = 1+ξ_T`, `d_t = 1+ρ²+ξ_t − ρ²/d_{t+1}` for `t = T−1..2`,
///   `d_1 = 1+ξ_1 − ρ²/d_2` (backward sweep),
/// - `v_1 = 1/d_1`, `v_t = (ρ/d_t)·v_{t−1}` (forward sweep),
/// - `δ_1 = 1+ξ_1`, `δ_t = 1+ρ²+ξ_t − ρ²/δ_{t−1}` for `t = 2..T−1`,
///   `δ_T = 1+ξ_T − ρ²/δ_{T−1}` (forward sweep),
/// - `u_T = 1/(δ_T·v_T)`, `u_t = (ρ/δ_t)·u_{t+1}` (backward sweep).
///
/// The product `v_T·(u_1,…,u_T)` is the last column of `S⁻¹`. Because `v_T`
/// vanishes at `rho = 0` (making the raw `u` unbounded), the struct also
/// stores that product directly as `last_col`, computed by its own stable
/// recursion `w_T = 1/δ_T`, `w_t = (ρ/δ_t)·w_{t+1}`; the credibility closed
/// form consumes `last_col`, never `u` alone.
#[derive(Debug, Clone)]
pub struct UvSequences {
    /// Backward-sweep pivots `d_1..d_T`; all > 0.
    pub d: Vec<f64>,
    /// Forward-sweep pivots `δ_1..δ_T`; all > 0.
    pub delta: Vec<f64>,
    /// Non-decreasing sequence `u_1..u_T` (for `rho = 0` see `last_col`).
    pub u: Vec<f64>,
    /// Non-increasing sequence `v_1..v_T`.
    pub v: Vec<f64>,
    /// `v_T·u_t` — the last column of the tridiagonal inverse, finite for
    /// every `rho` in (−1, 1) including 0.
    pub last_col: Vec<f64>,
    /// Correlation the sequences were built with.
    pub rho: f64,
    /// Diagonal loadings the sequences were built with.
    pub xi: Vec<f64>,
}

/// Compute the [`UvSequences`] for positive loadings `xi` and `rho ∈ (−1,1)`.
///
/// The recursions are provably well-defined (every `d_t` and `δ_t` stays
/// positive for positive `xi`), so no error beyond precondition checks.
pub fn tridiag_uv(xi: &[f64], rho: f64) -> Result<UvSequences> {
    let t = xi.len();
    if t < 2 {
        return Err(Error::InvalidParams("tridiag_uv: need at least T = 2 loadings".to_string()));
    }
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::InvalidRho(rho));
    }
    for (i, &x) in xi.iter().enumerate() {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidParams(format!("tridiag_uv: xi[{}] = {} must be > 0", i, x)));
        }
    }
    let r2 = rho * rho;

    // d: backward, with the corner rows carrying no rho^2 term.
    let mut d = vec![0.0; t];
    d[t - 1] = 1.0 + xi[t - 1];
    for i in (1..t - 1).rev() {
        d[i] = 1.0 + r2 + xi[i] - r2 / d[i + 1];
    }
    d[0] = 1.0 + xi[0] - r2 / d[1];

    // delta: forward mirror of d.
    let mut delta = vec![0.0; t];
    delta[0] = 1.0 + xi[0];
    for i in 1..t - 1 {
        delta[i] = 1.0 + r2 + xi[i] - r2 / delta[i - 1];
    }
    delta[t - 1] = 1.0 + xi[t - 1] - r2 / delta[t - 2];

    // v: forward.
    let mut v = vec![0.0; t];
    v[0] = 1.0 / d[0];
    for i in 1..t {
        v[i] = rho / d[i] * v[i - 1];
    }

    // last_col = v_T * u, computed directly so rho = 0 stays finite.
    let mut last_col = vec![0.0; t];
    last_col[t - 1] = 1.0 / delta[t - 1];
    for i in (0..t - 1).rev() {
        last_col[i] = rho / delta[i] * last_col[i + 1];
    }

    // u: from its own definition where v_T is usable, otherwise (rho = 0)
    // by the convention u = last_col / 1, which keeps u monotone and makes
    // v_T·u degenerate to last_col only in the limit sense.
    let u = if v[t - 1] != 0.0 {
        let mut u = vec![0.0; t];
        u[t - 1] = 1.0 / (delta[t - 1] * v[t - 1]);
        for i in (0..t - 1).rev() {
            u[i] = rho / delta[i] * u[i + 1];
        }
        u
    } else {
        last_col.clone()
    };

    Ok(UvSequences { d, delta, u, v, last_col, rho, xi: xi.to_vec() })
}

impl UvSequences {
    /// Assemble the tridiagonal matrix the sequences describe (corner
    /// diagonal `1+ξ`, interior `1+ρ²+ξ`, off-diagonal `−ρ`). Used by the
    /// dense-inverse oracle tests.
    pub fn matrix(&self) -> Result<SymMatrix> {
        let t = self.xi.len();
        let rho = self.rho;
        SymMatrix::from_fn(t, |i, j| {
            if i == j {
                if i == 0 || i == t - 1 {
                    1.0 + self.xi[i]
                } else {
                    1.0 + rho * rho + self.xi[i]
                }
            } else if j == i + 1 {
                -rho
            } else {
                0.0
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Sherman–Morrison rank-one update
// ---------------------------------------------------------------------------

/// Solve `(M + c·E)·x = rhs` where `E` is the all-ones matrix, given only a
/// solver for `M` itself, via the Sherman–Morrison identity
///
/// ```text
/// (M + c·11ᵀ)⁻¹ b  =  M⁻¹b − c·(1ᵀM⁻¹b)/(1 + c·1ᵀM⁻¹1) · M⁻¹1
/// ```
///
/// `base_solve` must solve `M·x = b`; it is called twice. Fails with
/// [`Error::SingularUpdate`] when the denominator magnitude drops below
/// 1e-14.
pub fn rank_one_update_solve(
    base_solve: impl Fn(&[f64]) -> Result<Vec<f64>>,
    c: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let m_inv_b = base_solve(rhs)?;
    if c == 0.0 {
        return Ok(m_inv_b);
    }
    let ones = vec![1.0; n];
    let m_inv_1 = base_solve(&ones)?;
    let denom = 1.0 + c * m_inv_1.iter().sum::<f64>();
    if denom.abs() < 1e-14 {
        return Err(Error::SingularUpdate { denominator: denom });
    }
    let factor = c * m_inv_b.iter().sum::<f64>() / denom;
    Ok(m_inv_b.iter().zip(&m_inv_1).map(|(a, b)| a - factor * b).collect())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// Dense inverse by solving against unit vectors — the oracle for the
    /// closed-form and recursion results.
    fn dense_inverse(m: &SymMatrix) -> Vec<Vec<f64>> {
        let n = m.dim();
        let mut cols = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let x = solve_spd(m, &e).expect("oracle matrix must be PD");
            for i in 0..n {
                cols[i][j] = x[i];
            }
        }
        cols
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let a = SymMatrix::identity(3).unwrap();
        let x = solve_spd(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_scalar_matrix() {
        let mut a = SymMatrix::identity(2).unwrap();
        a.scale(2.0);
        let x = solve_spd(&a, &[4.0, 6.0]).unwrap();
        assert_eq!(x, vec![2.0, 3.0]);
    }

    #[test]
    fn solve_ar1_cross_vector_is_sparse() {
        // Sigma_{T,rho}^{-1} (rho^T, ..., rho)' = (0, ..., 0, rho)': the
        // cross-covariance vector of an AR(1) maps to a single active weight.
        let t = 4;
        let rho = 0.5_f64;
        let a = ar1_toeplitz(t, rho).unwrap();
        let b: Vec<f64> = (0..t).map(|i| rho.powi((t - i) as i32)).collect();
        let x = solve_spd(&a, &b).unwrap();
        let expect = [0.0, 0.0, 0.0, 0.5];
        assert!(
            max_abs_diff(&x, &expect) < 1e-12,
            "AR(1) cross solve should be (0,...,0,rho), got {:?}",
            x
        );
    }

    #[test]
    fn solve_residual_bound_holds() {
        let a = ar1_toeplitz(6, 0.8).unwrap();
        let b = [0.3, -1.0, 2.5, 0.0, 1.0, -0.7];
        let x = solve_spd(&a, &b).unwrap();
        let ax = a.matvec(&x).unwrap();
        let resid = max_abs_diff(&ax, &b);
        let b_inf = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(resid <= 1e-9 * (1.0 + b_inf), "residual {} too large", resid);
    }

    #[test]
    fn solve_rejects_indefinite_matrix() {
        let mut a = SymMatrix::identity(2).unwrap();
        a.set(0, 1, 2.0); // eigenvalues −1 and 3
        match solve_spd(&a, &[1.0, 1.0]) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            other => panic!("expected NotPositiveDefinite, got {:?}", other),
        }
    }

    #[test]
    fn toeplitz_definition_entries() {
        let a = ar1_toeplitz(2, 0.3).unwrap();
        assert_eq!(a.get(0, 0), 1.0);
        assert_eq!(a.get(0, 1), 0.3);
        let i3 = ar1_toeplitz(3, 0.0).unwrap();
        assert_eq!(i3, SymMatrix::identity(3).unwrap());
        let a = ar1_toeplitz(3, 0.5).unwrap();
        assert_eq!(a.get(0, 2), 0.25);
    }

    #[test]
    fn toeplitz_rejects_unit_rho() {
        assert!(matches!(ar1_toeplitz(3, 1.0), Err(Error::InvalidRho(_))));
        assert!(matches!(ar1_toeplitz_inverse(3, -1.0), Err(Error::InvalidRho(_))));
    }

    #[test]
    fn toeplitz_inverse_t2_rho0_is_identity() {
        let inv = ar1_toeplitz_inverse(2, 0.0).unwrap();
        assert_eq!(inv, SymMatrix::identity(2).unwrap());
    }

    #[test]
    fn toeplitz_inverse_pattern_t3() {
        // (1−rho²)·inverse has diagonal (1, 1+rho², 1) and off-diagonal −rho.
        let rho = 0.5;
        let mut inv = ar1_toeplitz_inverse(3, rho).unwrap();
        inv.scale(1.0 - rho * rho);
        assert!((inv.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((inv.get(1, 1) - 1.25).abs() < 1e-15);
        assert!((inv.get(2, 2) - 1.0).abs() < 1e-15);
        assert!((inv.get(0, 1) + 0.5).abs() < 1e-15);
        assert!((inv.get(0, 2)).abs() < 1e-15);
    }

    #[test]
    fn toeplitz_inverse_multiplies_back_to_identity() {
        for &t in &[2usize, 3, 5, 8, 10] {
            for &rho in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
                let a = ar1_toeplitz(t, rho).unwrap();
                let inv = ar1_toeplitz_inverse(t, rho).unwrap();
                let prod = inv.matmul(&a).unwrap();
                for i in 0..t {
                    for j in 0..t {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (prod[i][j] - expect).abs() < 1e-12,
                            "T={} rho={} entry ({},{}) = {}",
                            t,
                            rho,
                            i,
                            j,
                            prod[i][j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn uv_rho_zero_degenerates_to_diagonal() {
        // With rho = 0 the tridiagonal matrix is diagonal 1+xi, so the last
        // column of its inverse is (0, ..., 0, 1/(1+xi)).
        let xi = vec![0.7; 4];
        let s = tridiag_uv(&xi, 0.0).unwrap();
        for i in 0..4 {
            assert!((s.d[i] - 1.7).abs() < 1e-15);
            assert!((s.delta[i] - 1.7).abs() < 1e-15);
        }
        assert!(max_abs_diff(&s.last_col, &[0.0, 0.0, 0.0, 1.0 / 1.7]) < 1e-15);
    }

    #[test]
    fn uv_last_column_matches_dense_inverse() {
        let xi = [0.31, 2.4, 0.08, 1.9, 5.5];
        for &rho in &[0.6, 0.15, -0.4, 1e-9] {
            let s = tridiag_uv(&xi, rho).unwrap();
            let inv = dense_inverse(&s.matrix().unwrap());
            let last: Vec<f64> = (0..xi.len()).map(|i| inv[i][xi.len() - 1]).collect();
            assert!(
                max_abs_diff(&s.last_col, &last) < 1e-12,
                "rho={}: recursion {:?} vs dense {:?}",
                rho,
                s.last_col,
                last
            );
            // The product form v_T·u must agree wherever u is finite.
            let vt = s.v[xi.len() - 1];
            if vt != 0.0 {
                let prod: Vec<f64> = s.u.iter().map(|&u| vt * u).collect();
                assert!(max_abs_diff(&prod, &last) < 1e-10);
            }
        }
    }

    #[test]
    fn uv_monotonicity_of_u_and_v() {
        let xi = [1.0, 0.2, 3.3, 0.9];
        let s = tridiag_uv(&xi, 0.55).unwrap();
        for i in 0..3 {
            assert!(s.v[i] > s.v[i + 1], "v must strictly decrease for rho > 0");
            assert!(s.u[i] < s.u[i + 1], "u must strictly increase for rho > 0");
        }
    }

    #[test]
    fn uv_rejects_nonpositive_xi() {
        assert!(tridiag_uv(&[1.0, 0.0], 0.3).is_err());
        assert!(tridiag_uv(&[1.0], 0.3).is_err());
    }

    #[test]
    fn sherman_morrison_zero_update_is_identity_solve() {
        let base = |b: &[f64]| Ok(b.to_vec()); // M = I
        let x = rank_one_update_solve(base, 0.0, &[5.0, -2.0]).unwrap();
        assert_eq!(x, vec![5.0, -2.0]);
    }

    #[test]
    fn sherman_morrison_identity_plus_ones() {
        // (I + E)^{-1} (1,1)' = (1/3, 1/3)': E doubles the row sums.
        let base = |b: &[f64]| Ok(b.to_vec());
        let x = rank_one_update_solve(base, 1.0, &[1.0, 1.0]).unwrap();
        assert!(max_abs_diff(&x, &[1.0 / 3.0, 1.0 / 3.0]) < 1e-15);
    }

    #[test]
    fn sherman_morrison_matches_dense_solve() {
        let m = ar1_toeplitz(3, 0.4).unwrap();
        let c = 0.7;
        let rhs = [0.9, -1.3, 0.25];
        let updated = SymMatrix::from_fn(3, |i, j| m.get(i, j) + c).unwrap();
        let direct = solve_spd(&updated, &rhs).unwrap();
        let viasm = rank_one_update_solve(|b| solve_spd(&m, b), c, &rhs).unwrap();
        assert!(
            max_abs_diff(&direct, &viasm) < 1e-12,
            "direct {:?} vs Sherman-Morrison {:?}",
            direct,
            viasm
        );
    }

    #[test]
    fn sherman_morrison_detects_singular_update() {
        // M = I (n = 2), c = −1/2 makes 1 + c·1'M⁻¹1 = 0.
        let base = |b: &[f64]| Ok(b.to_vec());
        match rank_one_update_solve(base, -0.5, &[1.0, 0.0]) {
            Err(Error::SingularUpdate { .. }) => {}
            other => panic!("expected SingularUpdate, got {:?}", other),
        }
    }
}
