//! Closed-form performance analysis and chip-level Monte Carlo simulation of
//! time-hopping spread-spectrum full-duplex backscatter networks.
//!
//! Each link is a reader with its own tag. The reader emits its
//! carrier in one chip per symbol, selected by the tag's bit from the tag's
//! two-chip pattern; the tag decides its bit by comparing energies and
//! backscatters its own BPSK symbol to the reader.
#![cfg_attr(not(test), no_std)]
extern crate alloc;

pub mod analytic;
pub mod error;
pub mod numerics;
pub mod simulator;

pub use error::{Error, Result};
pub mod thss;
pub mod topology;
