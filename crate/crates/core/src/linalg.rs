//! Dense real matrices, symmetric elements, and the Jacobi eigensolver that
//! every other module builds on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::tolerance::{ToleranceConfig, MAX_SWEEPS};

/// A dense row-major real matrix. Used for products that leave the symmetric
/// elements (`ab`, orthonormal bases, ...).
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Spectral norm, `sqrt(λ_max(MᵀM))`.
    pub fn operator_norm(&self) -> f64 {
        if self.data.iter().all(|x| *x == 0.0) {
            return 0.0;
        }
        let gram = SymmetricElement::from_matrix_unchecked(self.transpose().matmul(self));
        match sym_eigen(&gram, &ToleranceConfig::default()) {
            Ok(eig) => eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            // Frobenius is always an upper bound.
            Err(_) => self.frobenius_norm(),
        }
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrize(&self) -> SymmetricElement {
        assert!(self.is_square(), "symmetrize needs a square matrix");
        let n = self.rows;
        SymmetricElement::from_matrix_unchecked(Matrix::from_fn(n, n, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i))
        }))
    }

    /// Distance to symmetry, `‖M - Mᵀ‖_F`.
    pub fn asymmetry(&self) -> f64 {
        self.zip_with(&self.transpose(), |a, b| a - b).frobenius_norm()
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }
}

impl Add<&Matrix> for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub<&Matrix> for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&Matrix> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

/// An element of the ambient algebra: an `n×n` real symmetric matrix.
///
/// Construction always symmetrizes, so `entries[i][j] == entries[j][i]`
/// holds bit-for-bit.
#[derive(Clone, PartialEq)]
pub struct SymmetricElement(Matrix);

impl fmt::Debug for SymmetricElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symmetric{:?}", self.0)
    }
}

impl SymmetricElement {
    /// Symmetrizes an arbitrary square matrix.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        if m.rows == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Ok(m.symmetrize())
    }

    /// Row-major input; ragged or non-square input is rejected.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::from_matrix(&Matrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        debug_assert!(m.is_square());
        SymmetricElement(m)
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricElement(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricElement(Matrix::identity(n))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        SymmetricElement(Matrix::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    /// `v vᵀ` (not normalized).
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        SymmetricElement(Matrix::from_fn(n, n, |i, j| v[i] * v[j]))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.clone().into_rows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymmetricElement(self.0.scale(s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// Operator norm, i.e. the largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        if self.0.data.iter().all(|x| *x == 0.0) {
            return 0.0;
        }
        match sym_eigen(self, &ToleranceConfig::default()) {
            Ok(eig) => eig.spectral_radius(),
            Err(_) => self.frobenius_norm(),
        }
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &SymmetricElement) -> f64 {
        (&self.0 - &other.0).frobenius_norm()
    }

    /// The (generally non-symmetric) product `self · other`.
    pub fn product(&self, other: &SymmetricElement) -> Matrix {
        self.0.matmul(&other.0)
    }

    /// Symmetrized product `(ab + ba)/2`; equals `ab` whenever the factors commute.
    pub fn commuting_product(&self, other: &SymmetricElement) -> SymmetricElement {
        self.product(other).symmetrize()
    }

    /// `x · self · x`, which is symmetric.
    pub fn sandwich(&self, x: &SymmetricElement) -> SymmetricElement {
        x.product(self).matmul(&x.0).symmetrize()
    }

    /// `self²`.
    pub fn square(&self) -> SymmetricElement {
        self.product(self).symmetrize()
    }

    /// `Vᵀ · self · V` for an `n×m` matrix `V`.
    pub fn congruence(&self, v: &Matrix) -> SymmetricElement {
        v.transpose().matmul(&self.0).matmul(v).symmetrize()
    }

    /// Commutator `ab - ba`.
    pub fn commutator(&self, other: &SymmetricElement) -> Matrix {
        &self.product(other) - &other.product(self)
    }
}

impl Add<&SymmetricElement> for &SymmetricElement {
    type Output = SymmetricElement;
    fn add(self, rhs: &SymmetricElement) -> SymmetricElement {
        SymmetricElement(&self.0 + &rhs.0)
    }
}

impl Sub<&SymmetricElement> for &SymmetricElement {
    type Output = SymmetricElement;
    fn sub(self, rhs: &SymmetricElement) -> SymmetricElement {
        SymmetricElement(&self.0 - &rhs.0)
    }
}

impl Add for SymmetricElement {
    type Output = SymmetricElement;
    fn add(self, rhs: SymmetricElement) -> SymmetricElement {
        &self + &rhs
    }
}

impl Sub for SymmetricElement {
    type Output = SymmetricElement;
    fn sub(self, rhs: SymmetricElement) -> SymmetricElement {
        &self - &rhs
    }
}

impl Neg for &SymmetricElement {
    type Output = SymmetricElement;
    fn neg(self) -> SymmetricElement {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SymmetricElement {
    type Output = SymmetricElement;
    fn mul(self, rhs: f64) -> SymmetricElement {
        self.scale(rhs)
    }
}

impl Mul<&SymmetricElement> for &SymmetricElement {
    type Output = Matrix;
    fn mul(self, rhs: &SymmetricElement) -> Matrix {
        self.product(rhs)
    }
}

/// `a = Q Λ Qᵀ` with eigenvalues ascending and eigenvectors in the columns of `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    /// `Q f(Λ) Qᵀ`.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> SymmetricElement {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_eigenvalues(&values)
    }

    pub fn with_eigenvalues(&self, values: &[f64]) -> SymmetricElement {
        let n = self.dim();
        let q = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in values.iter().enumerate() {
            if lambda == 0.0 {
                continue;
            }
            for i in 0..n {
                let qi = q.get(i, k) * lambda;
                if qi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += qi * q.get(j, k);
                }
            }
        }
        out.symmetrize()
    }

    pub fn reconstruct(&self) -> SymmetricElement {
        self.with_eigenvalues(&self.eigenvalues)
    }

    /// Sum of `v vᵀ` over the selected eigenvectors.
    pub fn projector(&self, select: impl Fn(usize, f64) -> bool) -> (SymmetricElement, usize) {
        let mut rank = 0;
        let indicator: Vec<f64> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                if select(k, l) {
                    rank += 1;
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        (self.with_eigenvalues(&indicator), rank)
    }

    /// Columns of `Q` whose eigenvalue passes `select`, as an `n×m` matrix.
    pub fn basis(&self, select: impl Fn(f64) -> bool) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..self.dim())
            .filter(|&k| select(self.eigenvalues[k]))
            .map(|k| self.eigenvector(k))
            .collect();
        Matrix::from_columns(self.dim(), &cols)
    }
}

fn off_diagonal_norm(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[i * n + j] * m[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// One cyclic Jacobi sweep over all off-diagonal pairs, accumulating the
/// rotations into `v`.
fn jacobi_sweep(m: &mut [f64], v: &mut [f64], n: usize) {
    for p in 0..n.saturating_sub(1) {
        for q in (p + 1)..n {
            let apq = m[p * n + q];
            if apq == 0.0 {
                continue;
            }
            let app = m[p * n + p];
            let aqq = m[q * n + q];
            // Negligible against both diagonal entries: drop it.
            if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                continue;
            }
            let theta = (aqq - app) / (2.0 * apq);
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            for k in 0..n {
                let akp = m[k * n + p];
                let akq = m[k * n + q];
                m[k * n + p] = c * akp - s * akq;
                m[k * n + q] = s * akp + c * akq;
            }
            for k in 0..n {
                let apk = m[p * n + k];
                let aqk = m[q * n + k];
                m[p * n + k] = c * apk - s * aqk;
                m[q * n + k] = s * apk + c * aqk;
            }
            m[p * n + q] = 0.0;
            m[q * n + p] = 0.0;
            for k in 0..n {
                let vkp = v[k * n + p];
                let vkq = v[k * n + q];
                v[k * n + p] = c * vkp - s * vkq;
                v[k * n + q] = s * vkp + c * vkq;
            }
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric element.
///
/// Sweeps run in fixed row order until the off-diagonal Frobenius norm drops
/// below `eig_off_eps · ‖a‖_F`, plus one polishing sweep. Output is sorted ascending and each
/// eigenvector's first non-negligible component is made positive, so equal
/// inputs give bit-identical output.
pub fn sym_eigen(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.0.data.clone();
    let mut v = Matrix::identity(n).data;
    let target = tol.eig_off_eps * a.frobenius_norm();

    // Sweep until the target is met, then once more: convergence is
    // quadratic, so the extra sweep takes the off-diagonal part to rounding
    // level and eigenvectors of close eigenvalues come out accurate.
    let mut residual = off_diagonal_norm(&m, n);
    let mut sweeps = 0;
    while residual > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NumericalFailure {
                sweeps: MAX_SWEEPS,
                residual,
            });
        }
        jacobi_sweep(&mut m, &mut v, n);
        residual = off_diagonal_norm(&m, n);
        sweeps += 1;
    }
    if residual > 0.0 {
        jacobi_sweep(&mut m, &mut v, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m[k * n + k]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let sign = (0..n)
            .map(|i| v[i * n + k])
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |x| x.signum());
        for i in 0..n {
            eigenvectors.set(i, col, sign * v[i * n + k]);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Functional calculus: `Q f(Λ) Qᵀ`.
pub fn apply_scalar_function(
    a: &SymmetricElement,
    f: impl Fn(f64) -> f64,
    tol: &ToleranceConfig,
) -> Result<SymmetricElement> {
    Ok(sym_eigen(a, tol)?.map(f))
}

/// Functional calculus for partial maps; `None` at an eigenvalue is a domain error.
pub fn try_apply_scalar_function(
    a: &SymmetricElement,
    name: &'static str,
    f: impl Fn(f64) -> Option<f64>,
    tol: &ToleranceConfig,
) -> Result<SymmetricElement> {
    let eig = sym_eigen(a, tol)?;
    let mut values = Vec::with_capacity(eig.dim());
    for &l in &eig.eigenvalues {
        values.push(f(l).ok_or(Error::Domain {
            function: name,
            value: l,
        })?);
    }
    Ok(eig.with_eigenvalues(&values))
}

fn check_dims(a: &SymmetricElement, b: &SymmetricElement) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Loewner order `a ≤ b`: `λ_min(b - a) ≥ -psd_eps · (1 + ‖b - a‖)`.
pub fn psd_leq(a: &SymmetricElement, b: &SymmetricElement, tol: &ToleranceConfig) -> Result<bool> {
    check_dims(a, b)?;
    let eig = sym_eigen(&(b - a), tol)?;
    Ok(eig.min_eigenvalue() >= -tol.psd_threshold(eig.spectral_radius()))
}

/// `‖ab - ba‖ ≤ comm_eps · (1 + ‖a‖‖b‖)` in operator norm.
pub fn commutes(a: &SymmetricElement, b: &SymmetricElement, tol: &ToleranceConfig) -> Result<bool> {
    check_dims(a, b)?;
    let residual = a.commutator(b).operator_norm();
    Ok(residual <= tol.comm_threshold(a.norm(), b.norm()))
}

pub(crate) fn ensure_same_dim(a: &SymmetricElement, b: &SymmetricElement) -> Result<()> {
    check_dims(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> SymmetricElement {
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        m.symmetrize()
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = sym_eigen(&SymmetricElement::identity(3), &ToleranceConfig::default()).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_input_is_sorted_with_permuted_basis() {
        let eig = sym_eigen(&SymmetricElement::diag(&[3.0, 1.0, 2.0]), &ToleranceConfig::default())
            .unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(eig.eigenvector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(eig.eigenvector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(eig.eigenvector(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_matrix() {
        let eig = sym_eigen(&SymmetricElement::zeros(4), &ToleranceConfig::default()).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn reconstruction_and_orthogonality_on_random_inputs() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let n = 2 + trial % 7;
            let a = random_symmetric(n, &mut rng);
            let eig = sym_eigen(&a, &tol).unwrap();
            let scale = 1.0 + a.norm();
            assert!(eig.reconstruct().distance(&a) <= 1e-12 * scale);
            let q = &eig.eigenvectors;
            let qtq = q.transpose().matmul(q);
            assert!((&qtq - &Matrix::identity(n)).frobenius_norm() <= 1e-12);
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn deterministic_output() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_symmetric(6, &mut rng);
        assert_eq!(sym_eigen(&a, &tol).unwrap(), sym_eigen(&a, &tol).unwrap());
    }

    #[test]
    fn sign_convention() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_symmetric(5, &mut rng);
        let eig = sym_eigen(&a, &tol).unwrap();
        for k in 0..5 {
            let v = eig.eigenvector(k);
            let first = v.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn scalar_functions() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_symmetric(4, &mut rng);
        let same = apply_scalar_function(&a, |x| x, &tol).unwrap();
        assert!(same.distance(&a) <= 1e-12);

        let root = apply_scalar_function(&SymmetricElement::diag(&[4.0, 9.0]), f64::sqrt, &tol).unwrap();
        assert!(root.distance(&SymmetricElement::diag(&[2.0, 3.0])) <= 1e-15);

        let v = [1.0 / 3f64.sqrt(); 3];
        let p = SymmetricElement::outer(&v);
        let p2 = apply_scalar_function(&p, |x| x * x, &tol).unwrap();
        assert!(p2.distance(&p) <= 1e-12);

        let exp = apply_scalar_function(&a, f64::exp, &tol).unwrap();
        assert!(commutes(&exp, &a, &tol).unwrap());
    }

    #[test]
    fn sqrt_of_negative_is_a_domain_error() {
        let tol = ToleranceConfig::default();
        let err = try_apply_scalar_function(
            &SymmetricElement::diag(&[1.0, -0.5]),
            "sqrt",
            |x| (x >= 0.0).then(|| x.sqrt()),
            &tol,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain { function: "sqrt", .. }));
    }

    #[test]
    fn loewner_order_examples() {
        let tol = ToleranceConfig::default();
        let zero = SymmetricElement::zeros(2);
        let one = SymmetricElement::identity(2);
        assert!(psd_leq(&zero, &one, &tol).unwrap());
        let e = SymmetricElement::diag(&[0.3, 0.9]);
        assert!(psd_leq(&e, &one, &tol).unwrap());
        let a = SymmetricElement::diag(&[1.0, 0.0]);
        let b = SymmetricElement::diag(&[0.0, 1.0]);
        assert!(!psd_leq(&a, &b, &tol).unwrap());
        assert!(!psd_leq(&b, &a, &tol).unwrap());
        assert!(matches!(
            psd_leq(&a, &SymmetricElement::zeros(3), &tol),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commutation_examples() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_symmetric(3, &mut rng);
        assert!(commutes(&a, &SymmetricElement::identity(3), &tol).unwrap());
        assert!(commutes(
            &SymmetricElement::diag(&[1.0, 2.0, 3.0]),
            &SymmetricElement::diag(&[-4.0, 0.5, 9.0]),
            &tol
        )
        .unwrap());
        let p = SymmetricElement::outer(&[1.0 / 3f64.sqrt(); 3]);
        let e = SymmetricElement::diag(&[0.25, 0.5, 0.75]);
        assert!(!commutes(&p, &e, &tol).unwrap());
    }

    #[test]
    fn construction_symmetrizes_and_validates() {
        let s = SymmetricElement::from_rows(&[vec![1.0, 2.0], vec![4.0, 3.0]]).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));
        assert_eq!(s.get(0, 1), 3.0);
        assert!(SymmetricElement::from_rows(&[vec![1.0, 2.0], vec![4.0]]).is_err());
        assert!(SymmetricElement::from_rows(&[]).is_err());
    }

    #[test]
    fn operator_norm_matches_spectral_radius() {
        let a = SymmetricElement::diag(&[-3.0, 2.0]);
        assert!((a.norm() - 3.0).abs() < 1e-14);
        assert!((a.as_matrix().operator_norm() - 3.0).abs() < 1e-12);
    }
}
