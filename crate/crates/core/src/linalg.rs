//! Dense operators, superoperators and the small set of solvers the pipeline needs.
//!
//! Vectorization is column stacking, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. nalgebra stores
//! matrices column-major, which makes `vec` a plain copy of the storage.

use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 16;

/// Absolute tolerance for quantities that should vanish exactly.
pub const TOL_ABS: f64 = 1e-10;
/// Relative tolerance for cross-checks between independent routes.
pub const TOL_REL: f64 = 1e-8;
/// Allowed negative eigenvalue of a state before it counts as unphysical.
pub const TOL_PSD: f64 = 1e-9;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// A square complex operator on a Hilbert space of dimension 2..=16.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOp(CMatrix);

impl DenseOp {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self(CMatrix::zeros(dim, dim)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self(CMatrix::identity(dim, dim)))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        check_dim(m.nrows())?;
        Ok(Self(m))
    }

    /// `|k⟩⟨l|`
    pub fn ket_bra(dim: usize, k: usize, l: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim || l >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: k.max(l) + 1 });
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, l)] = c(1.0);
        Ok(Self(m))
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        check_dim(values.len())?;
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| c(v)));
        Ok(Self(CMatrix::from_diagonal(&d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn vectorize(&self) -> CVector {
        CVector::from_column_slice(self.0.as_slice())
    }

    pub fn from_vector(dim: usize, v: &CVector) -> Result<Self> {
        check_dim(dim)?;
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: v.len() });
        }
        Ok(Self(CMatrix::from_column_slice(dim, dim, v.as_slice())))
    }

    pub fn diagonal_re(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * c(0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest entry modulus over positions not listed in `allowed`.
    pub fn max_outside(&self, allowed: &[(usize, usize)]) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                if !allowed.contains(&(i, j)) {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Nonzero entries `(k, l, coefficient)`.
    pub fn entries(&self, tol: f64) -> Vec<(usize, usize, Complex64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for l in 0..d {
            for k in 0..d {
                let z = self.0[(k, l)];
                if z.norm() > tol {
                    out.push((k, l, z));
                }
            }
        }
        out
    }
}

/// A linear map on operators of a fixed dimension, stored as a `d² × d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) })
    }

    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        check_dim(dim)?;
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { dim, matrix })
    }

    /// `X ↦ A X B`
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        let dim = a.nrows();
        Self { dim, matrix: b.transpose().kronecker(a) }
    }

    /// `X ↦ M X + X M`
    pub fn anticommutator(m: &CMatrix) -> Self {
        let id = CMatrix::identity(m.nrows(), m.nrows());
        Self::sandwich(m, &id) + Self::sandwich(&id, m)
    }

    /// `X ↦ -i [H, X]`
    pub fn hamiltonian(h: &CMatrix) -> Self {
        let id = CMatrix::identity(h.nrows(), h.nrows());
        let comm = Self::sandwich(h, &id) - Self::sandwich(&id, h);
        comm * Complex64::new(0.0, -1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, op: &DenseOp) -> Result<DenseOp> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: op.dim() });
        }
        DenseOp::from_vector(self.dim, &(&self.matrix * op.vectorize()))
    }

    /// `max |Tr L(X)|` over matrix units; zero for a trace-annihilating map.
    pub fn trace_defect(&self) -> f64 {
        let t = trace_row(self.dim);
        (t * &self.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.clone() * c(s)
    }
}

impl Add for Superoperator {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.matrix += rhs.matrix;
        self
    }
}

impl AddAssign for Superoperator {
    fn add_assign(&mut self, rhs: Self) {
        self.matrix += rhs.matrix;
    }
}

impl Sub for Superoperator {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.matrix -= rhs.matrix;
        self
    }
}

impl Mul<Complex64> for Superoperator {
    type Output = Self;
    fn mul(mut self, rhs: Complex64) -> Self {
        self.matrix *= rhs;
        self
    }
}

/// Row vector `vec(I)ᵀ`, so that `trace_row · vec(X) = Tr X`.
pub fn trace_row(dim: usize) -> nalgebra::RowDVector<Complex64> {
    let mut t = nalgebra::RowDVector::zeros(dim * dim);
    for k in 0..dim {
        t[k * dim + k] = c(1.0);
    }
    t
}

/// Least-squares solution of `a x = b` together with the residual norm.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(b, 1e-13 * svd.singular_values.max().max(1.0))
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = (a * &x - b).norm();
    Ok((x, residual))
}

/// Normalized null vector of a rate matrix whose columns sum to zero.
///
/// Fails unless the null space is one-dimensional: the second-smallest eigenvalue
/// modulus has to clear the smallest by three orders of magnitude.
pub fn stationary_distribution(w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = w.nrows();
    let mut mods: Vec<f64> = w.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    mods.sort_by(f64::total_cmp);
    let scale = w.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if n > 1 && mods[1] <= (1e3 * mods[0]).max(1e-12 * scale) {
        return Err(Error::NonUniqueNullSpace { smallest: mods[0], next: mods[1] });
    }
    let mut a = DMatrix::zeros(n + 1, n);
    a.view_mut((0, 0), (n, n)).copy_from(w);
    a.row_mut(n).fill(1.0);
    let mut b = DVector::zeros(n + 1);
    b[n] = 1.0;
    let (x, residual) = least_squares(&a, &b)?;
    if residual > TOL_REL * scale.max(1.0) {
        return Err(Error::CrossCheck { quantity: "stationary distribution".into(), deviation: residual });
    }
    Ok(x)
}

/// Stationary state of a Lindblad generator by replacing one equation with `Tr ρ = 1`.
pub fn stationary_state(l: &Superoperator) -> Result<DenseOp> {
    let d = l.dim();
    let mut a = l.matrix().clone();
    a.set_row(0, &trace_row(d));
    let mut b = CVector::zeros(d * d);
    b[0] = c(1.0);
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("stationary equations are singular".into()))?;
    let residual = (l.matrix() * &x).norm();
    if residual > TOL_REL * (1.0 + l.matrix().norm()) {
        return Err(Error::CrossCheck { quantity: "stationary state".into(), deviation: residual });
    }
    let rho = DenseOp::from_vector(d, &x)?;
    Ok(DenseOp::from_matrix((rho.matrix() + rho.matrix().adjoint()) * c(0.5))?)
}

/// Solve `L x = y` for `x` with `Tr x = 0`, where `y` is traceless and `ρ` spans ker L.
pub fn solve_traceless(l: &Superoperator, rho: &DenseOp, y: &CVector) -> Result<CVector> {
    let n = l.dim() * l.dim();
    let mut a = CMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(l.matrix());
    a.view_mut((0, n), (n, 1)).copy_from(&rho.vectorize());
    a.view_mut((n, 0), (1, n)).copy_from(&trace_row(l.dim()));
    let mut b = CVector::zeros(n + 1);
    b.rows_mut(0, n).copy_from(y);
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("bordered system is singular".into()))?;
    Ok(x.rows(0, n).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(dim: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        CMatrix::from_fn(dim, dim, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (s >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (s >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
            Complex64::new(a, b)
        })
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let (a, b, x) = (random_matrix(3, 1), random_matrix(3, 2), random_matrix(3, 3));
        let s = Superoperator::sandwich(&a, &b);
        let got = s.apply(&DenseOp::from_matrix(x.clone()).unwrap()).unwrap();
        assert!((got.matrix() - &a * &x * &b).norm() < 1e-12);
    }

    #[test]
    fn hamiltonian_part_is_trace_annihilating() {
        let h = random_matrix(4, 7);
        let h = (&h + h.adjoint()) * c(0.5);
        assert!(Superoperator::hamiltonian(&h).trace_defect() < 1e-12);
    }

    #[test]
    fn dimension_limits() {
        assert!(DenseOp::zeros(1).is_err());
        assert!(DenseOp::zeros(17).is_err());
        assert!(DenseOp::zeros(16).is_ok());
    }

    #[test]
    fn two_state_chain_stationary() {
        let w = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -2.0]);
        let p = stationary_distribution(&w).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn disconnected_chain_rejected() {
        let w = DMatrix::zeros(3, 3);
        assert!(matches!(stationary_distribution(&w), Err(Error::NonUniqueNullSpace { .. })));
    }
}
