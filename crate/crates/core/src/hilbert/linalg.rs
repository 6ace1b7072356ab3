//! Dense Hermitian linear algebra on `DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Hermiticity tolerance (max entrywise |H - H†|).
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Eigenvalues at or below this are outside the support.
pub const TOL_SUPPORT: f64 = 1e-10;
/// Reconstruction and marginal checks.
pub const TOL_CHECK: f64 = 1e-9;

pub const LN_2: f64 = std::f64::consts::LN_2;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn hermitian_deviation(h: &ComplexMatrix) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(h: &ComplexMatrix) -> ComplexMatrix {
    (h + h.adjoint()).scale(0.5)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
///
/// Eigenvector phases are fixed so the largest-modulus entry of each column
/// (first one on ties) is real and positive; equal eigenvalues keep the
/// solver's order, which is deterministic for a given input.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> ComplexVector {
        self.vectors.column(i).into_owned()
    }

    /// V diag(f(λ)) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    /// Columns whose eigenvalue exceeds `tol`.
    pub fn support_basis(&self, tol: f64) -> ComplexMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| self.values[i] > tol).collect();
        self.vectors.select_columns(idx.iter())
    }
}

pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    if !is_finite(h) {
        return Err(Error::InvalidState("non-finite matrix entry".into()));
    }
    let dev = hermitian_deviation(h);
    if dev > TOL_HERMITIAN {
        return Err(Error::NotHermitian(dev));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col
            .iter()
            .position(|z| z.norm() >= max - 1e-12)
            .unwrap_or(0);
        let phase = if col[pivot].norm() > 0.0 {
            col[pivot].conj() / col[pivot].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Scalar functions applied to the spectrum of a state on its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportFn {
    Log2,
    Ln,
    Sqrt,
    InvSqrt,
    Inverse,
    Power(f64),
}

impl SupportFn {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            SupportFn::Log2 => x.log2(),
            SupportFn::Ln => x.ln(),
            SupportFn::Sqrt => x.sqrt(),
            SupportFn::InvSqrt => 1.0 / x.sqrt(),
            SupportFn::Inverse => 1.0 / x,
            SupportFn::Power(p) => x.powf(p),
        }
    }
}

/// Result of a support-restricted matrix function.
#[derive(Debug, Clone)]
pub struct SupportFnOutput {
    pub matrix: ComplexMatrix,
    /// Projector onto the eigenvectors with eigenvalue > `TOL_SUPPORT`.
    pub support: ComplexMatrix,
    pub rank: usize,
}

/// f(H) on the support of H; directions with eigenvalue ≤ `TOL_SUPPORT`
/// are mapped to zero.
pub fn fn_on_support(eig: &HermitianEigen, f: SupportFn) -> SupportFnOutput {
    let matrix = eig.reconstruct_with(|x| if x > TOL_SUPPORT { f.apply(x) } else { 0.0 });
    let support = eig.reconstruct_with(|x| if x > TOL_SUPPORT { 1.0 } else { 0.0 });
    let rank = eig.values.iter().filter(|&&x| x > TOL_SUPPORT).count();
    SupportFnOutput {
        matrix,
        support,
        rank,
    }
}

/// exp(H) for a Hermitian H restricted to the subspace spanned by the
/// orthonormal columns of `basis`; zero on the complement.
pub fn exp_on_subspace(h: &ComplexMatrix, basis: &ComplexMatrix) -> Result<ComplexMatrix> {
    if basis.ncols() == 0 {
        return Ok(ComplexMatrix::zeros(h.nrows(), h.ncols()));
    }
    let reduced = hermitian_part(&(basis.adjoint() * h * basis));
    let eig = eig_hermitian(&reduced)?;
    let exp_reduced = eig.reconstruct_with(f64::exp);
    Ok(basis * exp_reduced * basis.adjoint())
}

/// Orthonormal basis of the intersection of the ranges of two projectors.
pub fn projector_intersection(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let sum = hermitian_part(&(p + q));
    let eig = eig_hermitian(&sum)?;
    let idx: Vec<usize> = (0..eig.dim())
        .filter(|&i| eig.values[i] > 2.0 - 1e-8)
        .collect();
    Ok(eig.vectors.select_columns(idx.iter()))
}

/// Schatten-1 norm of a Hermitian matrix.
pub fn trace_norm_hermitian(h: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.values.iter().map(|x| x.abs()).sum())
}

/// Schatten-1 norm of an arbitrary square matrix.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}
