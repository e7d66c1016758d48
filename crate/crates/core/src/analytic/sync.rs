//! Synchronous two-link expressions.

use super::{indicator, mean2, require_two_links, ChipPowerSet, EtrCoefficients, OutageScale, TwoLinkGains};
use crate::error::{Error, Result};
use crate::numerics::{
    e1_scaled, erfcx, g_detect, gamma_e1, integrate_exp_weighted, m_outage, m_tilde_outage,
    q_function, QuadratureSpec,
};
use crate::thss::overlap_probs;
use crate::topology::{ChannelModel, SystemConfig};

/// BER of coherent BPSK detection of the own tag at the reader, without
/// interference.
pub fn p_bpsk(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    let (p, rho, s2) = (cfg.tx_power, cfg.reflection, cfg.noise_reader);
    match cfg.channel_model {
        ChannelModel::Static => {
            // |f11 b11| = |f11|² under reciprocity.
            let gain = cfg.static_channels()?.forward[(0, 0)].norm_sqr();
            if gain == 0.0 {
                return Ok(0.5);
            }
            if s2 == 0.0 {
                return Ok(0.0);
            }
            Ok(q_function(libm::sqrt(2.0 * p * rho * gain * gain / s2)))
        }
        ChannelModel::Rayleigh => {
            let z = 0.5 / cfg.reader_tag_gain(0, 0) * libm::sqrt(s2 / (p * rho));
            Ok(0.5 * (1.0 - erfcx(z)))
        }
    }
}

/// Expected reader BER: a collision of the transmitted chips is scored as a
/// coin flip.
pub fn reader_ber_sync(cfg: &SystemConfig) -> Result<f64> {
    let n = cfg.seq_len as f64;
    Ok(collision_mix(p_bpsk(cfg)?, (n - 2.0) / n))
}

/// `P_BPSK` with probability `clear`, a coin flip otherwise.
pub(crate) fn collision_mix(pb: f64, clear: f64) -> f64 {
    pb * clear + 0.5 * (1.0 - clear)
}

/// Static-channel tag BER.
///
/// With `high_snr` each pairwise detection error becomes the indicator
/// `1{wrong chip energy > right chip energy}`; otherwise it is the exact
/// non-coherent comparison [`g_detect`] at the tag noise level.
pub fn tag_ber_static(cfg: &SystemConfig, high_snr: bool) -> Result<f64> {
    require_two_links(cfg)?;
    let ch = cfg.static_channels()?;
    let p = overlap_probs(cfg.seq_len)?;
    let s2 = cfg.noise_tag;
    let g = |wrong: f64, right: f64| -> Result<f64> {
        if high_snr {
            Ok(indicator(wrong > right))
        } else if s2 == 0.0 {
            Ok(if wrong == right { 0.5 } else { indicator(wrong > right) })
        } else {
            g_detect(2.0 * wrong / s2, 2.0 * right / s2)
        }
    };
    let mut total = 0.0;
    for set in ChipPowerSet::both_symbols(cfg, ch) {
        let ChipPowerSet { p0, p1, p2, p3, .. } = set;
        total += (p.p0 + 0.25 * p.p1) * g(0.0, p0)?
            + p.p1 * 0.25 * (g(0.0, p1)? + g(p2, p0)? + g(0.0, p3)?)
            + p.p2 * 0.5 * (g(0.0, p1)? + g(p2, p3)?);
    }
    Ok(0.5 * total)
}

/// Weights of the two error events `P[P2 > P0]` and `P[P2 > P3]`.
fn tag_event_weights(n: usize) -> (f64, f64) {
    let n = n as f64;
    ((n - 2.0) / (n * (n - 1.0)), 1.0 / (n * (n - 1.0)))
}

/// `P[P2 > P0]` and `P[P2 > P3]` under Rayleigh fading by conditioning on the
/// tag-to-tag gain and integrating over it.
pub(crate) fn fading_event_probs(g: &TwoLinkGains, rho: f64) -> Result<(f64, f64)> {
    let spec = QuadratureSpec::default();
    let m2 = |u: f64| g.a21 + rho * g.c22 * u;
    let m3 = |u: f64| g.a11 + rho * g.c12 * u;
    let over_p0 = integrate_exp_weighted(|u| m2(u) / (g.a11 + m2(u)), 1.0, &spec)?;
    let over_p3 = integrate_exp_weighted(|u| m2(u) / (m3(u) + m2(u)), 1.0, &spec)?;
    Ok((over_p0, over_p3))
}

/// Fading tag BER at high SNR, by quadrature over the tag-to-tag gain.
pub fn tag_ber_fading(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let (wa, wb) = tag_event_weights(cfg.seq_len);
    let (e0, e3) = fading_event_probs(&TwoLinkGains::new(cfg), cfg.reflection)?;
    Ok(wa * e0 + wb * e3)
}

/// `P[P2 > P3]` through the exponential integral.
fn over_p3_closed_form(g: &TwoLinkGains, rho: f64) -> Result<f64> {
    let (a2, b2, a3, b3) = (g.a21, rho * g.c22, g.a11, rho * g.c12);
    let w = (a2 + a3) / (b2 + b3);
    Ok(b2 / (b2 + b3) + (a2 * b3 - b2 * a3) / ((b2 + b3) * (b2 + b3)) * e1_scaled(w)?)
}

/// The same quantity through exponential integrals.
pub fn tag_ber_fading_closed_form(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let g = TwoLinkGains::new(cfg);
    let rho = cfg.reflection;
    let (wa, wb) = tag_event_weights(cfg.seq_len);
    let b = rho * g.c22;
    let over_p0 = 1.0 - g.a11 / b * e1_scaled((g.a11 + g.a21) / b)?;
    Ok(wa * over_p0 + wb * over_p3_closed_form(&g, rho)?)
}

/// Variant of the closed form, kept for regression.
///
/// Its incomplete-gamma argument applies `d_t^λ/ρ` to the first distance
/// ratio only, unlike the matching exponential, so it agrees with
/// [`tag_ber_fading`] only when `d_t^λ = ρ`. At typical distances the
/// exponential factor leaves the `f64` range and an overflow error results.
pub fn tag_ber_fading_split_scaling(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let lam = cfg.path_loss_exp;
    let rho = cfg.reflection;
    let d = &cfg.distances;
    let (d11, d21, d22) = (d.reader_tag[(0, 0)], d.reader_tag[(1, 0)], d.reader_tag[(1, 1)]);
    let dt = d.tag_tag[(1, 0)];
    let pw = |x: f64| libm::pow(x, lam);
    let prefactor = pw(d22 * dt / d11) / rho;
    let exp_arg = pw(dt) / rho * (pw(d22 / d21) + pw(d22 / d11));
    let gamma_arg = pw(dt) / rho * pw(d22 / d21) + pw(d22 / d11);
    let first = prefactor * libm::exp(exp_arg) * gamma_e1(gamma_arg)?;
    if !first.is_finite() {
        return Err(Error::Overflow {
            what: "split-scaling tag BER closed form",
        });
    }
    let (wa, wb) = tag_event_weights(cfg.seq_len);
    Ok(wa * (1.0 - first) + wb * over_p3_closed_form(&TwoLinkGains::new(cfg), rho)?)
}

/// Tag BER for the configured channel model (high-SNR form).
pub fn tag_ber(cfg: &SystemConfig) -> Result<f64> {
    match cfg.channel_model {
        ChannelModel::Static => tag_ber_static(cfg, true),
        ChannelModel::Rayleigh => tag_ber_fading(cfg),
    }
}

/// Expected harvested energy per symbol for given mean chip powers.
fn etr_from_means(cfg: &SystemConfig, m: &ChipPowerSet) -> f64 {
    let n = cfg.seq_len as f64;
    cfg.symbol_duration / n * ((n - 2.0) / n * (m.p0 + m.peh) + (m.p1 + m.p2 + m.p3) / n)
}

/// Static-channel ETR in joules per symbol.
pub fn etr_static(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let [a, b] = ChipPowerSet::both_symbols(cfg, cfg.static_channels()?);
    let m = ChipPowerSet {
        p0: 0.5 * (a.p0 + b.p0),
        p1: 0.5 * (a.p1 + b.p1),
        p2: 0.5 * (a.p2 + b.p2),
        p3: 0.5 * (a.p3 + b.p3),
        peh: 0.5 * (a.peh + b.peh),
    };
    Ok(etr_from_means(cfg, &m))
}

/// Mean chip powers under Rayleigh fading.
fn fading_means(cfg: &SystemConfig) -> ChipPowerSet {
    let g = TwoLinkGains::new(cfg);
    let rho = cfg.reflection;
    let harvest = cfg.harvest_efficiency * cfg.tx_power;
    let on = harvest * (1.0 - rho);
    ChipPowerSet {
        p0: on * g.a11,
        p1: on * (g.a11 + g.a21 + rho * (g.c12 + g.c22)),
        p2: on * (g.a21 + rho * g.c22),
        p3: on * (g.a11 + rho * g.c12),
        peh: harvest * (g.a21 + rho * g.c22),
    }
}

/// Fading ETR in joules per symbol.
pub fn etr_fading(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    Ok(etr_from_means(cfg, &fading_means(cfg)))
}

/// Coefficients of the fading ETR as a polynomial in `ρ`.
pub fn etr_coefficients(cfg: &SystemConfig) -> Result<EtrCoefficients> {
    require_two_links(cfg)?;
    let g = TwoLinkGains::new(cfg);
    let n = cfg.seq_len as f64;
    Ok(EtrCoefficients {
        nu1: -2.0 / n * (g.c12 + g.c22),
        nu2: (g.c22 - g.a11) + 2.0 / n * (g.c12 - g.a21),
        nu3: g.a11 + g.a21,
    })
}

pub fn etr(cfg: &SystemConfig) -> Result<f64> {
    match cfg.channel_model {
        ChannelModel::Static => etr_static(cfg),
        ChannelModel::Rayleigh => etr_fading(cfg),
    }
}

/// Scenario weights of the outage terms: no overlap, each single-overlap
/// case, each full-overlap case.
fn outage_weights(n: usize) -> Result<(f64, f64, f64)> {
    let p = overlap_probs(n)?;
    Ok((p.p0, 0.25 * p.p1, 0.5 * p.p2))
}

/// Fading energy-outage probability.
pub fn outage_fading(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let g = TwoLinkGains::new(cfg);
    let xi = OutageScale::new(cfg).xi;
    let r = cfg.reflection;
    let s = 1.0 - r;
    let (w0, w1, w2) = outage_weights(cfg.seq_len)?;
    // P0 + Peh appears in the no-overlap case and one single-overlap case.
    let quiet = m_outage(s * g.a11, 0.0, g.a21, r * g.c22, xi)?;
    let shared_idle = m_outage(s * g.a11, 0.0, s * g.a21, s * r * g.c22, xi)?;
    let reflected_own = m_outage(s * g.a11, s * r * g.c12, g.a21, r * g.c22, xi)?;
    let full = m_outage(s * g.a11, s * r * g.c12, s * g.a21, s * r * g.c22, xi)?;
    let collided = m_tilde_outage(s * (g.a11 + g.a21), s * r * (g.c12 + g.c22), xi)?;
    Ok((w0 + w1) * quiet
        + w1 * (shared_idle + reflected_own)
        + w2 * full
        + (w1 + w2) * collided)
}

/// Static-channel energy-outage probability at zero tag noise.
pub fn outage_static(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let ch = cfg.static_channels()?;
    let scale = cfg.symbol_duration / cfg.seq_len as f64;
    let e0 = cfg.energy_requirement;
    let (w0, w1, w2) = outage_weights(cfg.seq_len)?;
    let short = |p: f64| indicator(scale * p < e0);
    let sets = ChipPowerSet::both_symbols(cfg, ch);
    Ok(mean2(|q| {
        let s = if q > 0.0 { sets[0] } else { sets[1] };
        w0 * short(s.p0 + s.peh)
            + w1 * (short(s.p1) + short(s.p0 + s.p2) + short(s.p3 + s.peh) + short(s.p0 + s.peh))
            + w2 * (short(s.p1) + short(s.p3 + s.p2))
    }))
}

pub fn outage(cfg: &SystemConfig) -> Result<f64> {
    match cfg.channel_model {
        ChannelModel::Static => outage_static(cfg),
        ChannelModel::Rayleigh => outage_fading(cfg),
    }
}

/// Large-`N` ETR: only the no-overlap scenario survives. Under fixed chip
/// energy this tends to a constant as `N` grows.
pub fn etr_asymptote(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    let m = match cfg.channel_model {
        ChannelModel::Rayleigh => fading_means(cfg),
        ChannelModel::Static => {
            let [a, b] = ChipPowerSet::both_symbols(cfg, cfg.static_channels()?);
            ChipPowerSet {
                peh: 0.5 * (a.peh + b.peh),
                ..a
            }
        }
    };
    Ok(cfg.symbol_duration / cfg.seq_len as f64 * (m.p0 + m.peh))
}

/// Large-`N` outage probability: `P[(T/N)(P0 + Peh) < E0]`.
pub fn outage_asymptote(cfg: &SystemConfig) -> Result<f64> {
    require_two_links(cfg)?;
    match cfg.channel_model {
        ChannelModel::Rayleigh => {
            let g = TwoLinkGains::new(cfg);
            let r = cfg.reflection;
            m_outage((1.0 - r) * g.a11, 0.0, g.a21, r * g.c22, OutageScale::new(cfg).xi)
        }
        ChannelModel::Static => {
            let sets = ChipPowerSet::both_symbols(cfg, cfg.static_channels()?);
            let scale = cfg.symbol_duration / cfg.seq_len as f64;
            Ok(mean2(|q| {
                let s = if q > 0.0 { sets[0] } else { sets[1] };
                indicator(scale * (s.p0 + s.peh) < cfg.energy_requirement)
            }))
        }
    }
}
