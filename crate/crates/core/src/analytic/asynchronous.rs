//! Two links with a fractional chip offset `β` between them.

use super::{indicator, mean2, require_two_links, ChipPowerSet, TwoLinkGains};
use crate::error::{invalid, Result};
use crate::numerics::{integrate_exp_weighted, QuadratureSpec};
use crate::topology::{ChannelModel, SystemConfig};

/// Expected reader BER with an offset. Any partial overlap of the transmitted
/// chips is scored as a coin flip, so the result does not depend on `β`.
pub fn reader_ber_async(cfg: &SystemConfig) -> Result<f64> {
    let n = cfg.seq_len;
    if n < 6 {
        return Err(invalid("N", "must be at least 6 for asynchronous analysis"));
    }
    let pb = super::p_bpsk(cfg)?;
    let n = n as f64;
    let pairs = n * (n - 1.0);
    Ok(pb * (n - 3.0) * (n - 2.0) / pairs + (2.0 * n - 3.0) / pairs)
}

/// Large-`N` tag BER at offset `beta`: the interferer's transmitted chip
/// covers tag 0's idle chip for a fraction `1 − β` or `β` of it.
pub fn tag_ber_async(cfg: &SystemConfig, beta: f64) -> Result<f64> {
    require_two_links(cfg)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid("beta", "must lie in [0, 1)"));
    }
    let n = cfg.seq_len as f64;
    match cfg.channel_model {
        ChannelModel::Static => {
            let sets = ChipPowerSet::both_symbols(cfg, cfg.static_channels()?);
            Ok(mean2(|q| {
                let s = if q > 0.0 { sets[0] } else { sets[1] };
                indicator(s.p0 < (1.0 - beta) * s.p2) + indicator(s.p0 < beta * s.p2)
            }) / n)
        }
        ChannelModel::Rayleigh => {
            let g = TwoLinkGains::new(cfg);
            let rho = cfg.reflection;
            // Interferer-to-own mean power ratio given the tag-to-tag gain.
            let ratio = |u: f64| (g.a21 + rho * g.c22 * u) / g.a11;
            let spec = QuadratureSpec::default();
            let kept = integrate_exp_weighted(
                |u| 1.0 / (1.0 + beta * ratio(u)) + 1.0 / (1.0 + (1.0 - beta) * ratio(u)),
                2.0,
                &spec,
            )?;
            Ok((2.0 - kept) / n)
        }
    }
}

/// The offset averages out of the harvested energy, so this is the
/// synchronous ETR.
pub fn etr_async(cfg: &SystemConfig) -> Result<f64> {
    super::etr(cfg)
}

/// Large-`N` outage probability with an offset; equal to the synchronous
/// large-`N` value.
pub fn outage_async(cfg: &SystemConfig) -> Result<f64> {
    super::outage_asymptote(cfg)
}
