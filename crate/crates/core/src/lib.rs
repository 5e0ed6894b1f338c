//! Blocking, dropping and bandwidth analysis of unicast IPTV in a cellular
//! cell whose zones use different modulation and coding schemes.
//!
//! - [`model`]: scenario, states, zone geometry.
//! - [`exact`]: product-form solution without mobility, Kaufman-Roberts.
//! - [`mobility`]: approximate solution when users change zones.
//! - [`planning`]: smallest capacity meeting a blocking target.
//! - [`oracle`]: brute-force generator solve and Erlang-B.
//! - [`sim`]: discrete-event simulation with Markov and random-walk mobility.

pub mod error;
pub mod exact;
pub mod logspace;
pub mod mobility;
pub mod model;
pub mod oracle;
pub mod planning;
mod profile;
pub mod report;
pub mod sim;
mod weights;

pub use error::{Error, Result};
pub use exact::{blocking_rate, exact_report, exact_weights, kaufman_roberts_blocking, mean_bandwidth, Blocking};
pub use mobility::{
    analyze, dropping_rate, fit_alpha_curve, fit_quadratic_ols, fitted_alpha, local_factor, mobility_bandwidth,
    mobility_blocking, mobility_rate_from_sojourn, mobility_report, mobility_weights, total_departure_rate,
    AlphaPolicy, QuadraticFit,
};
pub use model::{
    blocking_set_membership, dropping_set_membership, enumerate_states, CellScenario, McsClass, MobilitySpec,
    SystemState, TransitionRates, ZoneGeometry,
};
pub use profile::LoadProfile;
pub use report::PerformanceReport;
pub use weights::StationaryWeights;
