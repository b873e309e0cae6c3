//! Entropic chaos degree and Lyapunov exponents for discrete-time maps.
//!
//! The pipeline is: a [`MapSystem`] generates an [`Orbit`], a
//! [`GridPartition`] turns it into [`TransitionCounts`], and [`ecd`] reduces
//! the counts to an [`EcdResult`]. The same orbit feeds
//! [`lyapunov::spectrum_along`]. [`sweep::run_sweep`] repeats both over a
//! parameter grid.
//!
//! ```
//! use chaosdeg::{builtin, ecd_pipeline, default_partition, LogBase, OrbitConfig};
//!
//! let map = builtin("bernoulli").unwrap();
//! let cfg = OrbitConfig::new(vec![0.3], 1000, 20_000);
//! let out = ecd_pipeline(&map, &[0.4], &default_partition("bernoulli").unwrap(), &cfg, LogBase::E)
//!     .unwrap()
//!     .bounded()
//!     .unwrap();
//! assert_eq!(out.ecd, 0.0);
//! ```

pub mod dynsys;
pub mod error;
pub mod estimator;
pub mod lyapunov;
pub mod mapdsl;
pub mod partition;
pub mod sweep;

pub use dynsys::{builtin, Derivative, Domain, MapSystem, BUILTIN_NAMES};
pub use error::{Error, ParseError, Result};
pub use estimator::{
    count_transitions, ecd, ecd_pipeline, generate_orbit, EcdResult, LogBase, Orbit, OrbitConfig, Outcome, Transition,
    TransitionCounts,
};
pub use lyapunov::{lyapunov_1d, lyapunov_spectrum, LyapunovSpectrum};
pub use partition::{default_partition, GridPartition};
pub use sweep::{run_sweep, Analyses, RowStatus, SweepConfig, SweepRow};
