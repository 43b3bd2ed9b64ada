//! Dense complex matrices and the few numerical routines the rest of the
//! crate needs: Kronecker products, projection tests, rank-revealing
//! decompositions and operator norms.
//!
//! Everything is written against explicit, documented thresholds. Entrywise
//! predicates (`is_projection`, the magic-unitary checks built on top of
//! [`ComplexMatrix::max_diff`]) compare against an absolute epsilon, while
//! rank decisions in [`span_rank`] use a threshold relative to the largest
//! column norm, so that rescaling a family of vectors never changes its rank.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A validated comparison threshold. Construction rejects negative or
/// non-finite values; the default is `1e-10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    eps: f64,
}

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self, Error> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::Structural(format!(
                "tolerance must be finite and non-negative, got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps: 1e-10 }
    }
}

/// Serialized form of a matrix: row-major entries as `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(f64, f64)>,
}

/// A dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self, Error> {
        if raw.entries.len() != raw.rows * raw.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                raw.rows,
                raw.cols,
                raw.rows * raw.cols,
                raw.entries.len()
            )));
        }
        let data: Vec<Complex64> = raw
            .entries
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(raw.rows, raw.cols, data)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> RawMatrix {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            entries: m.data.iter().map(|z| (z.re, z.im)).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Build from row-major data. Rejects empty shapes, size mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, Error> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Convenience constructor from real entries, row-major.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, Error> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col] = value;
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Entries flattened row-major into a plain vector (used when matrices
    /// are treated as vectors in a span computation).
    pub fn flatten(&self) -> Vec<Complex64> {
        self.data.clone()
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<(), Error> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{op}: shapes {}x{} and {}x{} differ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_shape(other, "add")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_shape(other, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, Error> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "matmul: inner dimensions {} and {} differ",
                self.cols, other.rows
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Kronecker product: `(a ⊗ b)[(i1*rb+i2), (j1*cb+j2)] = a[i1,j1] * b[i2,j2]`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.data[i1 * self.cols + j1];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        let r = i1 * other.rows + i2;
                        let c = j1 * other.cols + j2;
                        out.data[r * cols + c] = a * other.data[i2 * other.cols + j2];
                    }
                }
            }
        }
        out
    }

    /// Largest entry magnitude, `max_{i,j} |m[i,j]|`.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference, `max_{i,j} |a[i,j] - b[i,j]|`.
    pub fn max_diff(&self, other: &Self) -> Result<f64, Error> {
        self.check_same_shape(other, "max_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Whether the matrix is an orthogonal projection: self-adjoint and
    /// idempotent, each up to `tol` entrywise. Non-square input is an error,
    /// not a `false`.
    pub fn is_projection(&self, tol: &Tolerance) -> Result<bool, Error> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "is_projection: matrix is {}x{}, not square",
                self.rows, self.cols
            )));
        }
        let herm = self.max_diff(&self.adjoint())?;
        let idem = self.matmul(self)?.max_diff(self)?;
        Ok(herm <= tol.eps() && idem <= tol.eps())
    }

    /// Operator norm (largest singular value), computed as the square root of
    /// the largest eigenvalue of the Hermitian matrix `AᴴA`.
    pub fn operator_norm(&self) -> f64 {
        let gram = self
            .adjoint()
            .matmul(self)
            .expect("adjoint() guarantees compatible shapes");
        let eigs = hermitian_eigenvalues(&gram);
        eigs.into_iter().fold(0.0, f64::max).max(0.0).sqrt()
    }
}

/// Numerical rank of the span of a family of vectors, all of the same length.
///
/// Uses Householder QR with column pivoting on the matrix whose columns are
/// the given vectors. After each reflection the remaining columns' residual
/// norms are recomputed from scratch (the family sizes here are small, and
/// the downdating formula loses accuracy precisely when it matters). A pivot
/// counts toward the rank while `r_kk >= eps * r_00` and `r_kk > 0`; the
/// relative threshold makes the rank invariant under rescaling the family.
pub fn span_rank(vectors: &[Vec<Complex64>], tol: &Tolerance) -> Result<usize, Error> {
    Ok(span_basis_indices(vectors, tol)?.len())
}

/// Indices (into `vectors`) of a subfamily whose span has full numerical
/// rank; `span_rank` is its length. Deterministic: pivoting always takes the
/// first column achieving the maximal residual norm.
#[allow(clippy::needless_range_loop)]
pub fn span_basis_indices(
    vectors: &[Vec<Complex64>],
    tol: &Tolerance,
) -> Result<Vec<usize>, Error> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let dim = vectors[0].len();
    if dim == 0 {
        return Err(Error::Dimension(
            "span_rank: vectors must have positive length".into(),
        ));
    }
    for (idx, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Dimension(format!(
                "span_rank: vector {idx} has length {}, expected {dim}",
                v.len()
            )));
        }
    }

    // Columns of the working matrix are the vectors; Householder reflections
    // are applied in place.
    let ncols = vectors.len();
    let mut a: Vec<Vec<Complex64>> = vectors.to_vec();
    let mut col_order: Vec<usize> = (0..ncols).collect();
    let mut basis = Vec::new();
    let mut first_pivot_norm = 0.0_f64;

    let steps = ncols.min(dim);
    for k in 0..steps {
        // Fresh residual norms of the not-yet-processed columns.
        let mut best = k;
        let mut best_norm = -1.0_f64;
        for c in k..ncols {
            let norm: f64 = a[c][k..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = c;
            }
        }
        if k == 0 {
            first_pivot_norm = best_norm;
        }
        let threshold = tol.eps() * first_pivot_norm;
        if best_norm <= threshold || best_norm == 0.0 {
            break;
        }
        a.swap(k, best);
        col_order.swap(k, best);
        basis.push(col_order[k]);

        // Householder vector for column k, zeroing rows k+1.. of that column.
        let x0 = a[k][k];
        let alpha = if x0 == Complex64::new(0.0, 0.0) {
            Complex64::new(-best_norm, 0.0)
        } else {
            -(x0 / x0.norm()) * best_norm
        };
        let mut v: Vec<Complex64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr > 0.0 {
            // Apply H = I - 2 v vᴴ / ‖v‖² to columns k..ncols (rows k..dim).
            for c in k..ncols {
                let dot: Complex64 = v
                    .iter()
                    .zip(&a[c][k..])
                    .map(|(vi, ai)| vi.conj() * ai)
                    .sum();
                let factor = dot * (2.0 / vnorm_sqr);
                for (vi, ai) in v.iter().zip(a[c][k..].iter_mut()) {
                    *ai -= factor * vi;
                }
            }
        }
        a[k][k] = alpha;
    }

    basis.sort_unstable();
    Ok(basis)
}

/// Dimension of the kernel of the linear map whose columns are `vectors`
/// (rank–nullity: number of vectors minus their span rank).
pub fn nullspace_dim(vectors: &[Vec<Complex64>], tol: &Tolerance) -> Result<usize, Error> {
    Ok(vectors.len() - span_rank(vectors, tol)?)
}

/// Eigenvalues of a Hermitian matrix by the cyclic Jacobi method with complex
/// rotations. The input is assumed Hermitian; only its Hermitian part matters
/// because each sweep re-symmetrizes the working copy implicitly.
#[allow(clippy::needless_range_loop)]
fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    assert!(m.is_square(), "eigenvalues need a square matrix");
    let n = m.rows();
    if n == 1 {
        return vec![m.get(0, 0).re];
    }
    let mut h: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j)).collect())
        .collect();

    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[i][j].norm_sqr())
            .sum();
        let scale: f64 = (0..n).map(|i| h[i][i].norm_sqr()).sum::<f64>().max(1.0);
        if off <= f64::EPSILON * f64::EPSILON * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let hpq = h[p][q];
                if hpq.norm() == 0.0 {
                    continue;
                }
                // Dephase: with phase = hpq/|hpq|, the rotation acts on the
                // real symmetric 2x2 [[app, r], [r, aqq]] with r = |hpq|.
                let r = hpq.norm();
                let phase = hpq / r;
                let app = h[p][p].re;
                let aqq = h[q][q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let new_pp = c * c * app - 2.0 * s * c * r + s * s * aqq;
                let new_qq = s * s * app + 2.0 * s * c * r + c * c * aqq;
                h[p][p] = Complex64::new(new_pp, 0.0);
                h[q][q] = Complex64::new(new_qq, 0.0);
                h[p][q] = Complex64::new(0.0, 0.0);
                h[q][p] = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let hkp = h[k][p];
                    let hkq = h[k][q];
                    let new_kp = c * hkp - (s * phase.conj()) * hkq;
                    let new_kq = (s * phase) * hkp + c * hkq;
                    h[k][p] = new_kp;
                    h[k][q] = new_kq;
                    h[p][k] = new_kp.conj();
                    h[q][k] = new_kq.conj();
                }
            }
        }
    }

    (0..n).map(|i| h[i][i].re).collect()
}
