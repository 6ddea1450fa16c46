//! Design and simulation toolkit for cavity-enhanced quantum frequency
//! conversion (sum-frequency generation) in periodically poled thin-film
//! lithium niobate microring resonators.
//!
//! The crate is organised by subsystem:
//!
//! - [`dispersion`]: polynomial effective/group index models and resonance inversion
//! - [`ring`]: resonator geometry, quasi-phase matching, pulley coupler matching, η_max
//! - [`cmt`]: coupled-mode dynamics, conversion efficiency versus pump power
//! - [`spectra`]: through-port spectra, Lorentzian Q extraction, directional coupler
//! - [`layout`]: Euler bends, tapers, path polylines
//! - [`system`]: loss chains, pump budgets, DFB thermal tuning, noise model
//! - [`config`] and [`run`]: the JSON config schema and the report pipeline behind the `qfc` CLI

// `!(x > 0.0)` style guards are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmt;
pub mod config;
pub mod consts;
pub mod dispersion;
mod error;
pub mod format;
pub mod layout;
pub mod ring;
pub mod run;
pub mod spectra;
pub mod system;

pub use error::{Error, Result};

pub use dispersion::{Band, IndexModel};
pub use ring::{CouplerSpec, ModeTriple, QSet, RingParams};
