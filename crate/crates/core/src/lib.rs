//! Multi-access coded caching with uncoded placement.
//!
//! `K` users sit on a ring of `K` caches and each user reads `z` neighbouring
//! caches with cyclic wrap-around. Every file is split into `K` sub-files and
//! cache `c` stores sub-files `kc, ..., kc + k - 1` (mod `K`) of every file, so
//! the normalized cache size is `k / K`. The server then broadcasts XOR-coded
//! symbols, round by round, from which each user peels the sub-files it cannot
//! reach.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: instance parameters, cyclic index algebra, demand resolution.
//! * [`placement`]: cache contents and per-user views.
//! * [`delivery`]: the transmission schedule and payload encoding.
//! * [`decoder`]: generic peeling and the explicit per-user decode plans.
//! * [`analysis`]: closed-form rates, baselines, bounds, envelopes, sweeps.
//! * [`harness`]: synthetic file stores and end-to-end trials.
//! * [`cli`]: the `macc` command-line front end.

pub mod analysis;
pub mod cli;
pub mod decoder;
pub mod delivery;
mod error;
pub mod harness;
pub mod model;
pub mod placement;
pub mod render;

pub use error::{Error, Result};
pub use model::{DemandVector, SubfileIndex, SystemParams};
