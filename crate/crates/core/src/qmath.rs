//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here is sized for the tripartite system-pointer-pointer space,
//! whose dimension is `4d` with `d <= 16`. Storage is dense and row-major.
//! The Hermitian eigensolver is a cyclic complex Jacobi method; it is used for
//! trace distances, positivity checks and the eigendecomposition-based matrix
//! exponential that serves as an oracle for the closed-form coupling unitary.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute per-entry tolerance for approximate comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest supported system dimension; the tripartite space is then 64-dimensional.
pub const MAX_SYSTEM_DIM: usize = 16;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for col in 0..cols {
                m[(r, col)] = f(r, col);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows of entries. Panics on ragged input.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), n_cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::from_vec(n_rows, n_cols, data).expect("nonempty rows")
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let complex: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, col| u[r] * v[col].conj())
    }

    /// Rank-1 projector `|psi><psi|`.
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self[(col, r)].conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest absolute entrywise difference. Dimensions must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise comparison with an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max |m - m^dagger| over entries; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for col in r..self.cols {
                worst = worst.max((self[(r, col)] - self[(col, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.dagger().matmul(self).approx_eq(&Self::identity(self.rows), tol)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, col): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && col < self.cols);
        &self.data[r * self.cols + col]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && col < self.cols);
        &mut self.data[r * self.cols + col]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self[(r, col)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Square matrix of non-negative reals, used for per-element error tables.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for col in 0..dim {
                data.push(f(r, col));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (r, col): (usize, usize)) -> &f64 {
        &self.data[r * self.dim + col]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.dim + col]
    }
}

/// Kronecker product; the index of `a` is the major one.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of state vectors.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        out[(r, r)] = c(m[(r, r)].re, 0.0);
        for col in r + 1..n {
            let v = (m[(r, col)] + m[(col, r)].conj()) * 0.5;
            out[(r, col)] = v;
            out[(col, r)] = v.conj();
        }
    }
    Ok(out)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |r, col| {
            (0..n).map(|i| v[(r, i)] * weights[i] * v[(col, i)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| c(l, 0.0))
    }
}

/// Diagonalizes a Hermitian matrix with cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    hermitian_eigen_with_tol(m, DEFAULT_TOL)
}

pub fn hermitian_eigen_with_tol(m: &ComplexMatrix, herm_tol: f64) -> Result<HermitianEigenSystem> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let deviation = m.hermiticity_defect();
    if deviation > herm_tol {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;
    let mut a = hermitian_part(m)?;
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for col in 0..n {
                if r != col {
                    s += a[(r, col)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= f64::EPSILON * scale {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            if off <= JACOBI_TOL * scale {
                break;
            }
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase-rotate q so the pivot is real, then apply a real Jacobi rotation.
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let g_pp = c(cs, 0.0);
                let g_pq = c(sn, 0.0);
                let g_qp = phase.conj() * (-sn);
                let g_qq = phase.conj() * cs;
                // A <- A G
                for r in 0..n {
                    let x = a[(r, p)];
                    let y = a[(r, q)];
                    a[(r, p)] = x * g_pp + y * g_qp;
                    a[(r, q)] = x * g_pq + y * g_qq;
                }
                // A <- G^dagger A
                for col in 0..n {
                    let x = a[(p, col)];
                    let y = a[(q, col)];
                    a[(p, col)] = g_pp.conj() * x + g_qp.conj() * y;
                    a[(q, col)] = g_pq.conj() * x + g_qq.conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = c(a[(p, p)].re, 0.0);
                a[(q, q)] = c(a[(q, q)].re, 0.0);
                for r in 0..n {
                    let x = v[(r, p)];
                    let y = v[(r, q)];
                    v[(r, p)] = x * g_pp + y * g_qp;
                    v[(r, q)] = x * g_pq + y * g_qq;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, col| v[(r, order[col])]);
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(-i * scale * h)` for Hermitian `h`, computed from the eigendecomposition.
pub fn matrix_exponential(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.map_spectrum(|l| C64::from_polar(1.0, -scale * l)))
}

/// Trace distance `1/2 sum |lambda_i(a - b)|`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: b.rows,
        });
    }
    let eig = hermitian_eigen(&(a - b))?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Solves `a x = b` by LU with partial pivoting. Pivots below `pivot_tol`
/// (relative to the largest entry of `a`) are reported as rank deficiency.
pub fn solve(a: &ComplexMatrix, b: &[C64], pivot_tol: f64) -> Result<Vec<C64>> {
    let mut x = solve_many(a, &[b.to_vec()], pivot_tol)?;
    Ok(x.pop().expect("one right-hand side"))
}

/// Like [`solve`] for several right-hand sides sharing one factorization.
pub fn solve_many(a: &ComplexMatrix, rhs: &[Vec<C64>], pivot_tol: f64) -> Result<Vec<Vec<C64>>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    for b in rhs {
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
    }
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lu = a.clone();
    let mut xs: Vec<Vec<C64>> = rhs.to_vec();
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_mag <= pivot_tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient { pivot: pivot_mag });
        }
        if pivot_row != col {
            for k in 0..n {
                let tmp = lu[(col, k)];
                lu[(col, k)] = lu[(pivot_row, k)];
                lu[(pivot_row, k)] = tmp;
            }
            for x in xs.iter_mut() {
                x.swap(col, pivot_row);
            }
        }
        let pivot = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / pivot;
            if factor == ZERO {
                continue;
            }
            for k in col..n {
                let v = lu[(col, k)];
                lu[(r, k)] -= factor * v;
            }
            for x in xs.iter_mut() {
                let v = x[col];
                x[r] -= factor * v;
            }
        }
    }
    for x in xs.iter_mut() {
        for r in (0..n).rev() {
            let mut acc = x[r];
            for k in r + 1..n {
                acc -= lu[(r, k)] * x[k];
            }
            x[r] = acc / lu[(r, r)];
        }
    }
    Ok(xs)
}

/// Pauli and pointer operators on a single qubit.
pub mod pauli {
    use super::*;

    pub fn id2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]])
    }

    /// `|1><1| = (1 - Z)/2`.
    pub fn pi1() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]])
    }

    /// `exp(-i angle Y) = cos(angle) 1 - i sin(angle) Y`, a real rotation.
    pub fn y_rotation(angle: f64) -> ComplexMatrix {
        let (s, co) = angle.sin_cos();
        ComplexMatrix::from_real_rows(&[[co, -s], [s, co]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        hermitian_part(&random_matrix(rng, n)).unwrap()
    }

    #[test]
    fn tensor_identities_and_entries() {
        let i4 = tensor(&pauli::id2(), &pauli::id2());
        assert!(i4.approx_eq(&ComplexMatrix::identity(4), 0.0));

        let zz = tensor(&pauli::z(), &pauli::z());
        let expected = ComplexMatrix::diagonal(&[ONE, -ONE, -ONE, ONE]);
        assert!(zz.approx_eq(&expected, 0.0));

        // X (x) Y: block (0,1) of X is 1 * Y, whose (0,1) entry is -i.
        let xy = tensor(&pauli::x(), &pauli::y());
        assert_eq!(xy[(0, 3)], -I);
        assert_eq!(xy.rows(), 4);
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let cm = random_matrix(&mut rng, 2);
            let left = tensor(&tensor(&a, &b), &cm);
            let right = tensor(&a, &tensor(&b, &cm));
            assert!(left.approx_eq(&right, 1e-12));
        }
    }

    #[test]
    fn tensor_of_rectangular_shapes() {
        let col = ComplexMatrix::from_real_rows(&[[1.0], [2.0]]);
        let row = ComplexMatrix::from_real_rows(&[[1.0, 3.0]]);
        let t = tensor(&col, &row);
        assert_eq!((t.rows(), t.cols()), (2, 2));
        assert_eq!(t[(1, 1)], c(6.0, 0.0));
    }

    #[test]
    fn eigen_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 3, 5, 8, 16, 32] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_eigen(&h).unwrap();
            assert!(eig.reconstruct().approx_eq(&h, 1e-10), "n = {n}");
            let v = &eig.eigenvectors;
            assert!(v.dagger().matmul(v).approx_eq(&ComplexMatrix::identity(n), 1e-10));
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigen_handles_degenerate_spectra() {
        let h = tensor(&ComplexMatrix::projector(&[ONE, ZERO, ZERO]), &pauli::y());
        let eig = hermitian_eigen(&h).unwrap();
        let expected = [-1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        for (got, want) in eig.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(hermitian_eigen(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exponential_known_values() {
        let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(5), 4);
        let u0 = matrix_exponential(&h, 0.0).unwrap();
        assert!(u0.approx_eq(&ComplexMatrix::identity(4), 1e-12));

        let u = matrix_exponential(&pauli::y(), std::f64::consts::FRAC_PI_2).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(u.approx_eq(&expected, 1e-12));
        assert!(u.approx_eq(&pauli::y_rotation(std::f64::consts::FRAC_PI_2), 1e-12));
    }

    #[test]
    fn exponential_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 4, 6, 12] {
            let h = random_hermitian(&mut rng, n);
            let u = matrix_exponential(&h, rng.gen_range(-3.0..3.0)).unwrap();
            assert!(u.is_unitary(1e-10));
        }
    }

    #[test]
    fn exponential_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[[ZERO, I], [I, ZERO]]);
        assert!(matrix_exponential(&m, 1.0).is_err());
    }

    #[test]
    fn trace_distance_known_values() {
        let zero = ComplexMatrix::projector(&[ONE, ZERO]);
        let one = ComplexMatrix::projector(&[ZERO, ONE]);
        let mixed = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            trace_distance(&zero, &ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rand_state = |rng: &mut ChaCha8Rng| {
            let g = random_matrix(rng, 3);
            let p = g.matmul(&g.dagger());
            let tr = p.trace().re;
            p.scale_real(1.0 / tr)
        };
        for _ in 0..50 {
            let a = rand_state(&mut rng);
            let b = rand_state(&mut rng);
            let cm = rand_state(&mut rng);
            let ab = trace_distance(&a, &b).unwrap();
            let bc = trace_distance(&b, &cm).unwrap();
            let ac = trace_distance(&a, &cm).unwrap();
            assert!(ac <= ab + bc + 1e-10);
            assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_part_cases() {
        let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(1), 3);
        assert!(hermitian_part(&h).unwrap().approx_eq(&h, 1e-15));

        let m = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let expected = ComplexMatrix::from_real_rows(&[[0.0, 0.5], [0.5, 0.0]]);
        assert!(hermitian_part(&m).unwrap().approx_eq(&expected, 0.0));

        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_part(&rect), Err(Error::NotSquare { .. })));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let raw = random_matrix(&mut rng, 4).scale_real(100.0);
            assert!(hermitian_part(&raw).unwrap().is_hermitian(1e-15));
        }
    }

    #[test]
    fn solve_recovers_solution_and_flags_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 6);
        let x: Vec<C64> = (0..6).map(|i| c(i as f64, -(i as f64) / 2.0)).collect();
        let b = a.apply(&x);
        let got = solve(&a, &b, 1e-12).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-10);
        }

        let singular = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(
            solve(&singular, &[ONE, ONE], 1e-12),
            Err(Error::RankDeficient { .. })
        ));
    }
}
