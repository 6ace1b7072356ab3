use serde::Serialize;

use super::protocol::{CompressionSession, ProtocolConfig, ProtocolRun};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, hermitian_part};
use crate::hilbert::{embed_operator, DensityMatrix, SupportFn};
use crate::info;

#[derive(Debug, Clone, Serialize)]
pub struct SideInfoTau {
    #[serde(skip)]
    pub tau: DensityMatrix,
    /// Tr exp(log σ_AB − log σ_A ⊗ I + log ρ_A ⊗ I), at most 1.
    pub z: f64,
}

/// τ_AB ∝ exp(log σ_AB − log σ_A ⊗ I_B + log ρ_A ⊗ I_B).
///
/// The A registers are the ones named in `rho_a`'s layout. The exponent is
/// taken on the intersection of supp(σ_AB) and supp(ρ_A) ⊗ I, zero elsewhere.
pub fn side_info_tau(rho_a: &DensityMatrix, sigma_ab: &DensityMatrix) -> Result<SideInfoTau> {
    let a: Vec<&str> = rho_a.layout().names().collect();
    let sigma_a = sigma_ab.partial_trace(&a)?;
    if sigma_a.layout() != rho_a.layout() {
        return Err(Error::InvalidState("ρ_A layout differs from σ_AB's A registers".into()));
    }
    info::check_support(rho_a, &sigma_a)?;
    let layout = sigma_ab.layout();
    let log_sab = sigma_ab.map(SupportFn::Ln);
    let log_sa = embed_operator(&sigma_a.map(SupportFn::Ln).matrix, layout, &a)?;
    let log_ra = rho_a.map(SupportFn::Ln);
    let exponent = hermitian_part(&(&log_sab.matrix - log_sa + embed_operator(&log_ra.matrix, layout, &a)?));
    let basis = linalg::projector_intersection(&log_sab.support, &embed_operator(&log_ra.support, layout, &a)?)?;
    let unnorm = hermitian_part(&linalg::exp_on_subspace(&exponent, &basis)?);
    let z = unnorm.trace().re;
    let tau = DensityMatrix::from_unnormalized(unnorm, layout.clone())?;
    Ok(SideInfoTau { tau, z })
}

/// D(ρ_AB‖σ_AB) − D(ρ_A‖σ_A), the rate the side-information variant pays.
pub fn side_info_rate(rho_ab: &DensityMatrix, sigma_ab: &DensityMatrix, a: &[&str]) -> Result<f64> {
    let d_ab = info::rel_entropy(rho_ab, sigma_ab)?;
    let d_a = info::rel_entropy(&rho_ab.partial_trace(a)?, &sigma_ab.partial_trace(a)?)?;
    Ok((d_ab - d_a).max(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SideInfoRun {
    pub z: f64,
    pub rate: f64,
    pub rel_entropy_to_tau: f64,
    pub run: ProtocolRun,
    #[serde(skip)]
    pub session: CompressionSession,
}

/// Compresses ρ_AB when Bob already knows ρ_A: the protocol runs against τ_AB
/// with c = D(ρ_AB‖σ_AB) − D(ρ_A‖σ_A) unless the config overrides it.
pub fn side_info_protocol(
    rho_ab: &DensityMatrix,
    sigma_ab: &DensityMatrix,
    a: &[&str],
    mut config: ProtocolConfig,
) -> Result<SideInfoRun> {
    let rho_a = rho_ab.partial_trace(a)?;
    let SideInfoTau { tau, z } = side_info_tau(&rho_a, sigma_ab)?;
    let rate = side_info_rate(rho_ab, sigma_ab, a)?;
    config.c_override.get_or_insert(rate);
    let session = CompressionSession::prepare(rho_ab, &tau, config)?;
    let run = session.run();
    Ok(SideInfoRun {
        z,
        rate,
        rel_entropy_to_tau: session.rel_entropy,
        run,
        session,
    })
}
