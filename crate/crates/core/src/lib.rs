//! One-shot quantum message compression against a reference state, with the
//! side-information and channel variants, quantum correlated sampling and a
//! one-way communication cost calculator.

pub mod compression;
pub mod corrsample;
pub mod error;
pub mod facts;
pub mod hilbert;
pub mod info;
pub mod oneway;
pub mod oracle;
pub mod substate;

pub use compression::{
    channel_protocol, index_stats, make_params, run_protocol, side_info_tau, Channel, CompressionParams,
    CompressionSession, IndexStats, ProtocolConfig, ProtocolOutcome, ProtocolRun,
};
pub use corrsample::{exact_joint_output, JointOutput};
pub use error::{Error, Result};
pub use hilbert::{
    ComplexMatrix, ComplexVector, DensityMatrix, MatrixRepr, Projector, RegisterLayout, StateVector, C64,
};
pub use oneway::{OneWayProtocol, ProtocolFixture, RelationTable};
pub use substate::{smooth_substate, SmoothedState};
