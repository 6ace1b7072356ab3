//! Seeded random instances: Haar-style states, unitaries and projective measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::layout::RegisterLayout;
use super::linalg::{c64, ComplexMatrix, ComplexVector, C64};
use super::state::{DensityMatrix, Projector, StateVector};
use crate::error::{Error, Result};

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_for_stream(seed: u64, stream: u64) -> InstanceRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random unitary: QR of a Ginibre matrix with the R-diagonal phases removed.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// ρ = G G† / Tr with G a `dim × rank` complex Gaussian matrix.
pub fn random_density_on<R: Rng + ?Sized>(
    layout: RegisterLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = layout.dim();
    if rank == 0 || rank > n {
        return Err(Error::Parameter(format!("rank {rank} not in 1..={n}")));
    }
    let g = gaussian_matrix(n, rank, rng);
    DensityMatrix::from_unnormalized(&g * g.adjoint(), layout)
}

/// Random state on a single register named "A".
pub fn random_density(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_on(RegisterLayout::single("A", n), rank, &mut rng_from_seed(seed))
}

pub fn random_pure<R: Rng + ?Sized>(layout: RegisterLayout, rng: &mut R) -> StateVector {
    let v = ComplexVector::from_fn(layout.dim(), |_, _| complex_gaussian(rng));
    StateVector::from_unnormalized(v, layout).expect("Gaussian vector is nonzero")
}

/// Random state with a prescribed spectrum and Haar eigenbasis.
pub fn random_density_with_spectrum<R: Rng + ?Sized>(
    layout: RegisterLayout,
    spectrum: &[f64],
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = layout.dim();
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: spectrum.len(),
        });
    }
    let u = random_unitary(n, rng);
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        spectrum.iter().map(|&x| c64(x, 0.0)),
    ));
    DensityMatrix::from_unnormalized(&u * d * u.adjoint(), layout)
}

/// Splits orthonormal columns into `w` contiguous groups of near-equal size
/// and returns the group projectors.
fn partition_basis(basis: &ComplexMatrix, w: usize, layout: &RegisterLayout) -> Vec<Projector> {
    let r = basis.ncols();
    let (base, extra) = (r / w, r % w);
    let mut start = 0;
    (0..w)
        .map(|g| {
            let size = base + usize::from(g < extra);
            let cols = basis.columns(start, size);
            start += size;
            Projector::from_parts_unchecked(cols * cols.adjoint(), layout.clone())
        })
        .collect()
}

/// Haar-random orthonormal basis of C^dim partitioned into `w` outcomes.
pub fn random_projective_measurement(dim: usize, w: usize, seed: u64) -> Result<Vec<Projector>> {
    random_projective_measurement_on(
        &RegisterLayout::single("A", dim),
        &ComplexMatrix::identity(dim, dim),
        w,
        &mut rng_from_seed(seed),
    )
}

/// Projective measurement whose outcomes sum to the given support projector.
pub fn random_projective_measurement_on<R: Rng + ?Sized>(
    layout: &RegisterLayout,
    support: &ComplexMatrix,
    w: usize,
    rng: &mut R,
) -> Result<Vec<Projector>> {
    let support = Projector::new(support.clone(), layout.clone())?;
    let eig = super::linalg::eig_hermitian(support.matrix())?;
    let basis = eig.support_basis(0.5);
    let r = basis.ncols();
    if w == 0 || w > r {
        return Err(Error::Parameter(format!("{w} outcomes for a rank-{r} support")));
    }
    let rotated = &basis * random_unitary(r, rng);
    Ok(partition_basis(&rotated, w, layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::max_abs_diff;

    #[test]
    fn random_density_contract() {
        let rho = random_density(4, 4, 3).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(rho.eigen().values[3] >= -1e-10);
        assert!(random_density(3, 4, 0).is_err());
    }

    #[test]
    fn measurement_is_complete_and_orthogonal() {
        let m = random_projective_measurement(4, 2, 11).unwrap();
        let sum = m[0].matrix() + m[1].matrix();
        assert!(max_abs_diff(&sum, &ComplexMatrix::identity(4, 4)) < 1e-10);
        assert!(max_abs_diff(&(m[0].matrix() * m[1].matrix()), &ComplexMatrix::zeros(4, 4)) < 1e-10);
        assert!(max_abs_diff(&(m[0].matrix() * m[0].matrix()), m[0].matrix()) < 1e-10);
        assert!(random_projective_measurement(2, 3, 0).is_err());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_density(5, 3, 42).unwrap();
        let b = random_density(5, 3, 42).unwrap();
        let bytes = |m: &ComplexMatrix| -> Vec<u64> {
            m.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect()
        };
        assert_eq!(bytes(a.matrix()), bytes(b.matrix()));
        let c = random_density(5, 3, 43).unwrap();
        assert_ne!(bytes(a.matrix()), bytes(c.matrix()));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = random_unitary(6, &mut rng_from_seed(1));
        assert!(max_abs_diff(&(u.adjoint() * &u), &ComplexMatrix::identity(6, 6)) < 1e-12);
    }
}
