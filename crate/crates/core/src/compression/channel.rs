use serde::Serialize;

use super::protocol::{CompressionSession, ProtocolConfig, ProtocolRun};
use super::sideinfo::{side_info_tau, side_info_rate};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, c64, hermitian_part, ComplexMatrix, ComplexVector};
use crate::hilbert::{DensityMatrix, RegisterLayout, TOL_CHECK};
use crate::info;

/// Quantum channel in Kraus form, all operators d_out × d_in.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::Channel("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &kraus {
            if k.shape() != (d_out, d_in) {
                return Err(Error::Channel("Kraus operators of different shapes".into()));
            }
            sum += k.adjoint() * k;
        }
        let dev = linalg::max_abs_diff(&sum, &ComplexMatrix::identity(d_in, d_in));
        if dev > TOL_CHECK {
            return Err(Error::Channel(format!("Σ K†K deviates from I by {dev:.2e}")));
        }
        Ok(Self { kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d, d)]).expect("identity is a channel")
    }

    /// ρ ↦ (1 − p)ρ + p·I/2 on a qubit.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("depolarizing probability {p}")));
        }
        let s = |x: f64| c64(x, 0.0);
        let paulis = [
            ComplexMatrix::from_row_slice(2, 2, &[s(1.0), s(0.0), s(0.0), s(1.0)]),
            ComplexMatrix::from_row_slice(2, 2, &[s(0.0), s(1.0), s(1.0), s(0.0)]),
            ComplexMatrix::from_row_slice(2, 2, &[s(0.0), c64(0.0, -1.0), c64(0.0, 1.0), s(0.0)]),
            ComplexMatrix::from_row_slice(2, 2, &[s(1.0), s(0.0), s(0.0), s(-1.0)]),
        ];
        let weights = [1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0];
        Self::new(
            paulis
                .into_iter()
                .zip(weights)
                .map(|(m, w)| m * s(w.sqrt()))
                .collect(),
        )
    }

    /// Random channel with `r` Kraus operators: blocks of a Haar isometry.
    pub fn random<R: rand::Rng + ?Sized>(d_in: usize, d_out: usize, r: usize, rng: &mut R) -> Result<Self> {
        let u = crate::hilbert::random::random_unitary(d_out * r, rng);
        if d_in > d_out * r {
            return Err(Error::Channel("isometry needs d_out·r ≥ d_in".into()));
        }
        let v = u.columns(0, d_in).into_owned();
        let kraus = (0..r)
            .map(|e| ComplexMatrix::from_fn(d_out, d_in, |b, a| v[(b * r + e, a)]))
            .collect();
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn d_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus.iter().map(|k| k * rho * k.adjoint()).sum()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.d_in() {
            return Err(Error::DimensionMismatch {
                expected: self.d_in(),
                found: rho.dim(),
            });
        }
        DensityMatrix::new(hermitian_part(&self.apply_matrix(rho.matrix())), RegisterLayout::single("B", self.d_out()))
    }
}

/// Unitary U on A ⊗ C_in = B ⊗ C_out with Tr_{C_out} U(ρ ⊗ |0⟩⟨0|)U† = E(ρ).
#[derive(Debug, Clone)]
pub struct Stinespring {
    pub unitary: ComplexMatrix,
    pub d_in: usize,
    pub d_out: usize,
    pub env_in: usize,
    pub env_out: usize,
}

pub fn stinespring(ch: &Channel) -> Stinespring {
    let (d_in, d_out, r) = (ch.d_in(), ch.d_out(), ch.kraus().len());
    let env_in = d_out * r;
    let env_out = d_in * r;
    let dim = d_in * env_in;
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut filled = vec![false; dim];
    for a in 0..d_in {
        for (e, k) in ch.kraus().iter().enumerate() {
            for b in 0..d_out {
                u[(b * env_out + e, a * env_in)] = k[(b, a)];
            }
        }
        filled[a * env_in] = true;
    }
    // Gram–Schmidt over the standard basis for the remaining columns
    let mut basis: Vec<ComplexVector> = (0..d_in).map(|a| u.column(a * env_in).into_owned()).collect();
    let mut candidates = 0..dim;
    for col in 0..dim {
        if filled[col] {
            continue;
        }
        loop {
            let e = candidates.next().expect("completion exists");
            let mut v = ComplexVector::zeros(dim);
            v[e] = c64(1.0, 0.0);
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                let v = v.unscale(norm);
                u.set_column(col, &v);
                basis.push(v);
                break;
            }
        }
    }
    Stinespring {
        unitary: u,
        d_in,
        d_out,
        env_in,
        env_out,
    }
}

impl Stinespring {
    pub fn isometry(&self) -> ComplexMatrix {
        let cols: Vec<usize> = (0..self.d_in).map(|a| a * self.env_in).collect();
        self.unitary.select_columns(cols.iter())
    }

    pub fn output_layout(&self) -> RegisterLayout {
        RegisterLayout::new([("B", self.d_out), ("E", self.env_out)]).expect("distinct names")
    }

    /// U(ρ ⊗ |0⟩⟨0|)U† on B ⊗ E.
    pub fn dilate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let v = self.isometry();
        DensityMatrix::new(hermitian_part(&(&v * rho.matrix() * v.adjoint())), self.output_layout())
    }

    /// V† ω V renormalized, or None when ω has no weight in the range of V.
    pub fn undilate(&self, omega: &DensityMatrix, layout: RegisterLayout) -> Result<Option<DensityMatrix>> {
        let v = self.isometry();
        let back = hermitian_part(&(v.adjoint() * omega.matrix() * &v));
        if back.trace().re < 1e-12 {
            return Ok(None);
        }
        Ok(Some(DensityMatrix::from_unnormalized(back, layout)?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelRun {
    /// D(ρ‖σ) − D(E(ρ)‖E(σ)).
    pub rate: f64,
    pub z: f64,
    pub run: ProtocolRun,
    #[serde(skip)]
    pub session: CompressionSession,
}

/// Bob holds E(ρ) and needs the purifying environment: compress the dilated
/// state against the side-information τ, then map Bob's output back through V†.
pub fn channel_protocol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ch: &Channel,
    mut config: ProtocolConfig,
) -> Result<ChannelRun> {
    info::check_support(rho, sigma)?;
    let dil = stinespring(ch);
    let rho_be = dil.dilate(rho)?;
    let sigma_be = dil.dilate(sigma)?;
    let rho_b = rho_be.partial_trace(&["B"])?;
    let side = side_info_tau(&rho_b, &sigma_be)?;
    let rate = side_info_rate(&rho_be, &sigma_be, &["B"])?;
    config.c_override.get_or_insert(rate);
    let mut session = CompressionSession::prepare(&rho_be, &side.tau, config)?;
    session.rescore(|omega| match dil.undilate(omega, rho.layout().clone())? {
        Some(back) => info::fidelity(rho, &back),
        None => Ok(0.0),
    })?;
    let run = session.run();
    Ok(ChannelRun {
        rate,
        z: side.z,
        run,
        session,
    })
}
