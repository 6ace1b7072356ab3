use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::layout::{IndexSplit, RegisterLayout};
use super::linalg::{
    self, c64, eig_hermitian, hermitian_deviation, hermitian_part, is_finite, ComplexMatrix,
    ComplexVector, HermitianEigen, C64, TOL_HERMITIAN, TOL_SUPPORT,
};
use crate::error::{Error, Result};

const TOL_TRACE: f64 = 1e-10;
const TOL_NORM: f64 = 1e-10;
const TOL_PSD: f64 = 1e-10;

fn check_layout_dim(layout: &RegisterLayout, dim: usize) -> Result<()> {
    if layout.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            found: dim,
        });
    }
    Ok(())
}

fn positions(layout: &RegisterLayout, names: &[&str]) -> Result<Vec<usize>> {
    layout.mask(names)?;
    names.iter().map(|n| layout.position(n)).collect()
}

/// Positive semidefinite, unit-trace operator on a register layout, with
/// its eigendecomposition computed at construction.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    layout: RegisterLayout,
    eig: OnceLock<HermitianEigen>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, layout: RegisterLayout) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_layout_dim(&layout, matrix.nrows())?;
        if !is_finite(&matrix) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > TOL_HERMITIAN {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = hermitian_part(&matrix);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = eig_hermitian(&matrix)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            matrix,
            layout,
            eig: OnceLock::from(eig),
        })
    }

    /// Normalizes by the trace first. The input must be PSD up to rounding.
    pub fn from_unnormalized(matrix: ComplexMatrix, layout: RegisterLayout) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        let scaled = hermitian_part(&matrix.unscale(tr));
        Self::new(scaled, layout)
    }

    pub fn from_diagonal(values: &[f64], layout: RegisterLayout) -> Result<Self> {
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            values.len(),
            values.iter().map(|&x| c64(x, 0.0)),
        ));
        Self::new(m, layout)
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        let m = ComplexMatrix::identity(d, d).unscale(d as f64);
        Self::new(m, layout).expect("maximally mixed state is valid")
    }

    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self::new(hermitian_part(&(a * a.adjoint())), state.layout().clone())
            .expect("projector onto a unit vector is a state")
    }

    pub fn basis(index: usize, layout: RegisterLayout) -> Result<Self> {
        Ok(Self::pure(&StateVector::basis(index, layout)?))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> &HermitianEigen {
        self.eig
            .get_or_init(|| eig_hermitian(&self.matrix).expect("validated at construction"))
    }

    /// Descending eigenvalues clamped at zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = match self.eig.get() {
            Some(e) => e.values.clone(),
            None => hermitian_part(&self.matrix).symmetric_eigenvalues().iter().copied().collect(),
        };
        values.sort_by(|a, b| b.total_cmp(a));
        values.into_iter().map(|x| x.max(0.0)).collect()
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigen().vectors
    }

    pub fn rank(&self) -> usize {
        self.eigen().values.iter().filter(|&&x| x > TOL_SUPPORT).count()
    }

    pub fn support_projector(&self) -> ComplexMatrix {
        self.eigen()
            .reconstruct_with(|x| if x > TOL_SUPPORT { 1.0 } else { 0.0 })
    }

    pub fn support_basis(&self) -> ComplexMatrix {
        self.eigen().support_basis(TOL_SUPPORT)
    }

    pub fn map(&self, f: linalg::SupportFn) -> linalg::SupportFnOutput {
        linalg::fn_on_support(self.eigen(), f)
    }

    pub fn with_layout(&self, layout: RegisterLayout) -> Result<Self> {
        check_layout_dim(&layout, self.dim())?;
        Ok(Self {
            matrix: self.matrix.clone(),
            layout,
            eig: self.eig.clone(),
        })
    }

    /// For operations that map states to states; the spectrum is computed on
    /// first use.
    fn derived(matrix: ComplexMatrix, layout: RegisterLayout) -> Self {
        Self {
            matrix,
            layout,
            eig: OnceLock::new(),
        }
    }

    /// Entrywise complex conjugate (the same state read in the conjugate basis).
    pub fn conjugate(&self) -> Self {
        Self::derived(self.matrix.map(|z| z.conj()), self.layout.clone())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self::derived(self.matrix.kronecker(&other.matrix), layout))
    }

    /// Marginal on the named registers (kept in layout order).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let layout = self.layout.select(keep)?;
        if layout == self.layout {
            return Ok(self.clone());
        }
        let m = partial_trace_matrix(&self.matrix, &self.layout, keep)?;
        Ok(Self::derived(hermitian_part(&m), layout))
    }

    /// O ρ O† with O acting on the named registers (in the given order);
    /// returns the unnormalized operator.
    pub fn conjugate_by(&self, op: &ComplexMatrix, targets: &[&str]) -> Result<ComplexMatrix> {
        let full = embed_operator(op, &self.layout, targets)?;
        Ok(&full * &self.matrix * full.adjoint())
    }

    /// Tr(O ρ).
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        (op * &self.matrix).trace()
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr::from(&self.matrix).serialize(s)
    }
}

/// `[[re, im], ...]` rows, the on-disk form of complex matrices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<Vec<[f64; 2]>>);

impl From<&ComplexMatrix> for MatrixRepr {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixRepr(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl MatrixRepr {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Fixture("ragged matrix".into()));
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
            c64(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}

/// Unit vector on a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: ComplexVector,
    layout: RegisterLayout,
}

impl StateVector {
    pub fn new(amplitudes: ComplexVector, layout: RegisterLayout) -> Result<Self> {
        check_layout_dim(&layout, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("vector norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    pub fn from_unnormalized(amplitudes: ComplexVector, layout: RegisterLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub fn basis(index: usize, layout: RegisterLayout) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::Parameter(format!("basis index {index} ≥ dimension {d}")));
        }
        let mut v = ComplexVector::zeros(d);
        v[index] = c64(1.0, 0.0);
        Ok(Self {
            amplitudes: v,
            layout,
        })
    }

    /// Σ_i |i⟩_a|i⟩_b / √d on two registers of equal dimension d.
    pub fn maximally_entangled(a: &str, b: &str, d: usize) -> Result<Self> {
        let layout = RegisterLayout::new([(a, d), (b, d)])?;
        let mut v = ComplexVector::zeros(d * d);
        let amp = c64(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = amp;
        }
        Ok(Self {
            amplitudes: v,
            layout,
        })
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            layout,
        })
    }

    /// Applies `op` to the named registers; the result is generally unnormalized.
    pub fn apply(&self, op: &ComplexMatrix, targets: &[&str]) -> Result<ComplexVector> {
        apply_local(&self.amplitudes, &self.layout, op, targets)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let m = reduced_density(&self.amplitudes, &self.layout, keep)?;
        DensityMatrix::new(hermitian_part(&m), self.layout.select(keep)?)
    }
}

/// Hermitian idempotent on a register layout.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: ComplexMatrix,
    layout: RegisterLayout,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix, layout: RegisterLayout) -> Result<Self> {
        check_layout_dim(&layout, matrix.nrows())?;
        let dev = hermitian_deviation(&matrix);
        if dev > linalg::TOL_CHECK {
            return Err(Error::NotHermitian(dev));
        }
        let idem = linalg::max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem > linalg::TOL_CHECK {
            return Err(Error::Measurement(format!("not idempotent (deviation {idem:.3e})")));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
            layout,
        })
    }

    /// Projector onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(columns: &ComplexMatrix, layout: RegisterLayout) -> Result<Self> {
        Self::new(columns * columns.adjoint(), layout)
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, layout: RegisterLayout) -> Self {
        Self { matrix, layout }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round() as usize
    }

    pub fn conjugate(&self) -> Self {
        Self {
            matrix: self.matrix.map(|z| z.conj()),
            layout: self.layout.clone(),
        }
    }

    pub fn complement(&self) -> Self {
        let d = self.matrix.nrows();
        Self {
            matrix: ComplexMatrix::identity(d, d) - &self.matrix,
            layout: self.layout.clone(),
        }
    }
}

/// (op on `targets`) ⊗ identity on the rest, applied to a raw amplitude vector.
pub fn apply_local(
    psi: &ComplexVector,
    layout: &RegisterLayout,
    op: &ComplexMatrix,
    targets: &[&str],
) -> Result<ComplexVector> {
    check_layout_dim(layout, psi.len())?;
    let pos = positions(layout, targets)?;
    let split = IndexSplit::new(layout, &pos);
    if op.nrows() != split.target_dim || op.ncols() != split.target_dim {
        return Err(Error::DimensionMismatch {
            expected: split.target_dim,
            found: op.nrows(),
        });
    }
    let mut out = ComplexVector::zeros(psi.len());
    let mut column = vec![C64::new(0.0, 0.0); split.target_dim];
    for r in 0..split.rest_dim {
        for (t, slot) in column.iter_mut().enumerate() {
            *slot = psi[split.flat(t, r)];
        }
        for t_out in 0..split.target_dim {
            let mut acc = C64::new(0.0, 0.0);
            for (t_in, v) in column.iter().enumerate() {
                acc += op[(t_out, t_in)] * v;
            }
            out[split.flat(t_out, r)] = acc;
        }
    }
    Ok(out)
}

/// Tr_rest |ψ⟩⟨ψ| for an unnormalized ψ; the kept registers stay in layout order.
pub fn reduced_density(
    psi: &ComplexVector,
    layout: &RegisterLayout,
    keep: &[&str],
) -> Result<ComplexMatrix> {
    check_layout_dim(layout, psi.len())?;
    let mask = layout.mask(keep)?;
    let pos: Vec<usize> = (0..layout.len()).filter(|&p| mask[p]).collect();
    let split = IndexSplit::new(layout, &pos);
    let mut reshaped = ComplexMatrix::zeros(split.target_dim, split.rest_dim);
    for t in 0..split.target_dim {
        for r in 0..split.rest_dim {
            reshaped[(t, r)] = psi[split.flat(t, r)];
        }
    }
    Ok(&reshaped * reshaped.adjoint())
}

/// Partial trace of an operator onto the kept registers (layout order).
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    layout: &RegisterLayout,
    keep: &[&str],
) -> Result<ComplexMatrix> {
    check_layout_dim(layout, m.nrows())?;
    let mask = layout.mask(keep)?;
    let pos: Vec<usize> = (0..layout.len()).filter(|&p| mask[p]).collect();
    let split = IndexSplit::new(layout, &pos);
    let mut out = ComplexMatrix::zeros(split.target_dim, split.target_dim);
    for a in 0..split.target_dim {
        for b in 0..split.target_dim {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..split.rest_dim {
                acc += m[(split.flat(a, r), split.flat(b, r))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Full-space matrix of (op on `targets`, in the given order) ⊗ I.
pub fn embed_operator(
    op: &ComplexMatrix,
    layout: &RegisterLayout,
    targets: &[&str],
) -> Result<ComplexMatrix> {
    let pos = positions(layout, targets)?;
    let split = IndexSplit::new(layout, &pos);
    if op.nrows() != split.target_dim || op.ncols() != split.target_dim {
        return Err(Error::DimensionMismatch {
            expected: split.target_dim,
            found: op.nrows(),
        });
    }
    let d = layout.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..split.rest_dim {
        for a in 0..split.target_dim {
            for b in 0..split.target_dim {
                out[(split.flat(a, r), split.flat(b, r))] = op[(a, b)];
            }
        }
    }
    Ok(out)
}
