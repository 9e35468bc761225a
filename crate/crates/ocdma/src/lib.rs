//! Optical-CDMA access-link analysis over dense WDM.
//!
//! Transmitters spread on-off-keyed bits with optical orthogonal codes
//! (OOC); several users share one wavelength, and neighboring wavelengths
//! with wide-spectrum sources leak a fraction of their power into the
//! receiver's filter. This crate models the resulting bit errors four ways
//! and cross-checks the routes against each other:
//!
//! - [`ooc`] constructs and validates code families and their correlation
//!   properties, plus the on-disk code-family text format.
//! - [`analytic`] evaluates the closed-form error probabilities for the
//!   conventional correlation receiver (CCR) and the two-stage parallel
//!   interference cancellation receiver (PIC) in log domain, keeping results
//!   finite far below 1e-300.
//! - [`mcsim`] is the first-principles reference: exact enumeration of the
//!   chip-synchronous decision model for small systems, and a seeded,
//!   reproducible Monte Carlo simulator for everything else.
//! - [`sweep`] parses experiment configs, runs parameter grids with every
//!   requested method, and emits deterministic CSV and plot data.
//!
//! The `examples/` directory has one runnable program per capability;
//! `ocdma --help` covers the command-line front end.

pub mod analytic;
pub mod mcsim;
pub mod numeric;
pub mod ooc;
pub mod sweep;

pub use analytic::{BerFlags, BerValue, CcrConfig, EvalMode, InterferenceProfile, PicConfig};
pub use mcsim::{BerEstimate, ChannelModel, LinkModel, SimMode};
pub use numeric::Alpha;
pub use ooc::{CodeFamily, Codeword};
