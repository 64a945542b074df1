//! Bit error rate (BER) analysis of STAR-RIS assisted power-domain NOMA downlinks.
//!
//! The crate has two independent routes to the BER of each user:
//!
//! * [`analytic`]: closed-form and numerically integrated expressions built on
//!   the Gaussian (CLT) model of the aligned cascaded channel, and
//! * [`mc`]: Monte Carlo simulation of the exact signal model, with the mutual
//!   subsurface interference generated from sampled channels.
//!
//! [`channel`] and [`noma`] hold the physical layer used by the simulator;
//! [`scenario`] describes experiments and parses the TOML scenario format.

pub mod analytic;
pub mod channel;
mod error;
pub mod mc;
pub mod noma;
pub mod quadrature;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
