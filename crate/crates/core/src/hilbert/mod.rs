//! Dense complex linear algebra over named composite registers.

pub mod layout;
pub mod linalg;
pub mod pair;
pub mod random;
pub mod state;

pub use layout::{Register, RegisterLayout};
pub use pair::StatePair;
pub use linalg::{
    c64, eig_hermitian, fn_on_support, ComplexMatrix, ComplexVector, HermitianEigen, SupportFn,
    SupportFnOutput, C64, TOL_CHECK, TOL_HERMITIAN, TOL_SUPPORT,
};
pub use random::{
    random_density, random_density_on, random_projective_measurement,
    random_projective_measurement_on, rng_for_stream, rng_from_seed, InstanceRng,
};
pub use state::{
    apply_local, embed_operator, partial_trace_matrix, reduced_density, DensityMatrix, MatrixRepr,
    Projector, StateVector,
};

/// Applies a support-restricted function to a state's spectrum.
pub fn mat_fn_on_support(rho: &DensityMatrix, f: SupportFn) -> SupportFnOutput {
    rho.map(f)
}
