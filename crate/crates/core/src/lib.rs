//! Exact simulation and analysis of the Kadanoff sand pile model KSPM(D).
//!
//! A configuration is a sequence of height differences `σ_i = h_i - h_{i+1}`
//! with an implicit zero tail. Firing column `i` (allowed when `σ_i >= D`)
//! moves `D-1` grains from column `i` onto the next `D-1` columns.
//!
//! The crate is organised bottom-up:
//!
//! * [`config`]: configurations, the firing rule, leftmost stabilization,
//!   fixed points `π(N)` and shot vectors.
//! * [`avalanche`]: per-grain avalanche records, peaks, density columns,
//!   long avalanches and the peak-chain fast path.
//! * [`transducer`]: interval states, traces and the word transducer mapping
//!   the trace on one interval to the trace on the next.
//! * [`predict`]: wave-shaped suffix prediction, the `x`-sequence
//!   diagnostics for `D = 3` and the wave-onset scanner.
//! * [`verify`]: named invariant checks shared by the CLI and test suites.

pub mod avalanche;
pub mod config;
pub mod error;
pub mod predict;
pub mod transducer;
pub mod verify;

pub use avalanche::{AvalancheRecord, FastEngine, History, LongAvalancheSeq};
pub use config::{Config, FiringStrategy, ShotVector};
pub use error::{KspmError, Result};
pub use transducer::{IntervalState, TraceWord, Transducer};
