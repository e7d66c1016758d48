//! Closed-form BER, energy-transfer-rate and energy-outage expressions.
//!
//! Link indices are zero-based: link 0 is the observed link, link 1 its
//! interferer in the two-link forms. Fading forms work with the mean gains
//! `a_mn = d_mn^{-λ}` and the two-hop gains `c_mn = (d_mn·d_t)^{-λ}`.

mod asynchronous;
mod klink;
mod sync;

pub use asynchronous::{etr_async, outage_async, reader_ber_async, tag_ber_async};
pub use klink::{klink_et_asymptotics, reader_ber_klink, tag_ber_klink, KLinkEnergy};
pub use sync::{
    etr, etr_asymptote, etr_coefficients, etr_fading, etr_static, outage, outage_asymptote,
    outage_fading, outage_static, p_bpsk, reader_ber_sync, tag_ber, tag_ber_fading,
    tag_ber_fading_closed_form, tag_ber_fading_split_scaling, tag_ber_static,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::topology::{ChannelRealization, SystemConfig};

/// Received chip powers at tag 0 for one channel realization and one
/// interferer symbol `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChipPowerSet {
    /// Own reader only, in an on-chip.
    pub p0: f64,
    /// Both readers and the interfering tag's reflections in the shared on-chip.
    pub p1: f64,
    /// Interfering reader and its tag, in tag 0's idle on-chip.
    pub p2: f64,
    /// Own reader plus the interfering tag's reflection of it.
    pub p3: f64,
    /// Interfering reader and its tag in an off-chip (no reflection loss).
    pub peh: f64,
}

impl ChipPowerSet {
    pub fn from_channels(cfg: &SystemConfig, ch: &ChannelRealization, q: f64) -> Self {
        let f = |m, n| ch.forward[(m, n)];
        let g = ch.tag_tag[(1, 0)];
        let bs = libm::sqrt(cfg.reflection) * q * g;
        let harvest = cfg.harvest_efficiency * cfg.tx_power;
        let on = harvest * (1.0 - cfg.reflection);
        let own: Complex64 = f(0, 0);
        let own_reflected = f(0, 1) * bs;
        let cross = f(1, 0);
        let cross_reflected = f(1, 1) * bs;
        Self {
            p0: on * own.norm_sqr(),
            p1: on * (own + own_reflected + cross + cross_reflected).norm_sqr(),
            p2: on * (cross + cross_reflected).norm_sqr(),
            p3: on * (own + own_reflected).norm_sqr(),
            peh: harvest * (cross + cross_reflected).norm_sqr(),
        }
    }

    /// The two sets for `q = +1` and `q = -1`.
    pub fn both_symbols(cfg: &SystemConfig, ch: &ChannelRealization) -> [Self; 2] {
        [Self::from_channels(cfg, ch, 1.0), Self::from_channels(cfg, ch, -1.0)]
    }
}

/// Normalized energy threshold `Ξ = N·E0/(η·P·T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageScale {
    pub xi: f64,
}

impl OutageScale {
    pub fn new(cfg: &SystemConfig) -> Self {
        Self {
            xi: cfg.seq_len as f64 * cfg.energy_requirement
                / (cfg.harvest_efficiency * cfg.tx_power * cfg.symbol_duration),
        }
    }
}

/// Coefficients of the fading ETR as a quadratic in `ρ`:
/// `E = (η·P·T/N)(ν1 ρ² + ν2 ρ + ν3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtrCoefficients {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl EtrCoefficients {
    pub fn eval(&self, rho: f64) -> f64 {
        (self.nu1 * rho + self.nu2) * rho + self.nu3
    }
}

/// Mean gains of the two-link geometry.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TwoLinkGains {
    pub a11: f64,
    pub a21: f64,
    pub c12: f64,
    pub c22: f64,
}

impl TwoLinkGains {
    pub fn new(cfg: &SystemConfig) -> Self {
        let tau = cfg.tag_tag_gain(1, 0);
        let a12 = cfg.reader_tag_gain(0, 1);
        let a22 = cfg.reader_tag_gain(1, 1);
        Self {
            a11: cfg.reader_tag_gain(0, 0),
            a21: cfg.reader_tag_gain(1, 0),
            c12: a12 * tau,
            c22: a22 * tau,
        }
    }
}

pub(crate) fn require_two_links(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.links != 2 {
        return Err(Error::Unsupported("two-link expression requires K = 2"));
    }
    Ok(())
}

pub(crate) fn mean2(f: impl Fn(f64) -> f64) -> f64 {
    0.5 * (f(1.0) + f(-1.0))
}

pub(crate) fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}
