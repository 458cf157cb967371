//! Coverage-range simulation for massive-MIMO base stations on tall towers.
//!
//! The crate answers two questions end to end:
//!
//! 1. **Radio:** how far can a base station serve `K` simultaneous users at a
//!    guaranteed downlink rate? A cylindrical antenna array ([`array`]) feeds
//!    a rural 3GPP channel model ([`channel`]); regularized zero-forcing with
//!    max-min power control ([`mimo`]) turns channel draws into per-user
//!    rates; a seeded Monte-Carlo sweep ([`coverage`]) converts pass/fail
//!    statistics into a coverage range per configuration.
//! 2. **Geography:** how many people live inside those ranges? Population
//!    rasters and tower inventories ([`geo`]) yield covered-population
//!    counts, what-if scenarios, and greedy relocation of high towers.
//!
//! Every simulation entry point takes an explicit seed and produces output
//! that is bit-identical across runs, worker counts, and the `parallel`
//! feature flag — integer satisfaction counts and fixed-shape floating-point
//! reductions, never scheduling-order-dependent sums.

pub mod array;
pub mod channel;
pub mod coverage;
pub mod error;
pub mod geo;
mod linalg;
pub mod mimo;
pub mod rng;

pub use error::{Error, Result};

/// Rounds to 6 decimal places — the precision all artifacts (CSV tables,
/// GeoJSON coordinates) are emitted at, chosen so values print in their
/// shortest decimal form instead of exposing floating-point dust.
pub(crate) fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}
