//! Entanglement-assisted rejection sampling of ρ against σ, with the
//! side-information and channel variants.

pub mod channel;
pub mod params;
pub mod projectors;
pub mod protocol;
pub mod sideinfo;
pub mod stats;

pub use channel::{channel_protocol, stinespring, Channel, ChannelRun, Stinespring};
pub use params::{discretization_tolerance, make_params, CompressionParams, DEFAULT_K};
pub use projectors::{projectors, AcceptanceProjectors};
pub use protocol::{
    run_protocol, CompressionSession, OutputKind, ProtocolConfig, ProtocolOutcome, ProtocolRun,
    ProtocolSummary,
};
pub use sideinfo::{side_info_protocol, side_info_rate, side_info_tau, SideInfoRun, SideInfoTau};
pub use stats::{index_stats, IndexStats};
