//! Dynamic alliance-network model of leadership.
//!
//! Individuals hold a conserved status and a fixed number of outgoing
//! alliances. Status flows over links with an inequality parameter `q`
//! favouring link targets, and individuals repeatedly drop their least
//! valuable alliance for a random new one. The [`metrics`] module turns
//! trajectories into leader counts, tenures, degree histograms and phase
//! labels; [`sweep`] runs seeded parameter grids.

pub mod error;
pub mod metrics;
pub mod network;
pub mod params;
pub mod rng;
pub mod simulate;
pub mod sweep;

pub use error::{MetricsError, ModelError};
pub use metrics::{MetricsConfig, PhaseLabel, RunMetrics, RunSummary};
pub use network::{NetworkState, RewireEvent, RewireRule};
pub use params::ModelParams;
pub use rng::RngStream;
pub use simulate::{simulate, Observer, Simulation};
