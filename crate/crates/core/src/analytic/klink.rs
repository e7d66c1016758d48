//! Synchronous `K`-link expressions, evaluated for link 0.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::{indicator, OutageScale};
use crate::error::{invalid, Result};
use crate::numerics::{
    exp_sum_cdf, integrate_exp_weighted, m_outage, try_integrate_exp_weighted, QuadratureSpec,
};
use crate::thss::overlap_probs;
use crate::topology::{ChannelModel, SystemConfig};

/// Conditional draws used by the outage estimator for `K > 3`.
pub const KLINK_OUTAGE_SAMPLES: usize = 200_000;
const KLINK_OUTAGE_SEED: u64 = 0x006b_6c69_6e6b;

/// Large-`N` energy figures of tag 0 with `K − 1` interferers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KLinkEnergy {
    /// Joules per symbol.
    pub etr: f64,
    pub outage: f64,
}

/// Mean gains of interferer `k` towards tag 0: the direct reader path and
/// the two-hop path through tag `k`, the latter per unit tag-to-tag fading.
#[derive(Debug, Clone, Copy)]
struct Interferer {
    direct: f64,
    two_hop: f64,
}

fn interferers(cfg: &SystemConfig) -> Vec<Interferer> {
    (1..cfg.links)
        .map(|k| Interferer {
            direct: cfg.reader_tag_gain(k, 0),
            two_hop: cfg.reader_tag_gain(k, k) * cfg.tag_tag_gain(k, 0),
        })
        .collect()
}

/// `|f_k0 + √ρ q f_kk g_k0|²` for a static realization.
fn static_interference(cfg: &SystemConfig, k: usize, q: f64) -> Result<f64> {
    let ch = cfg.static_channels()?;
    let bs = libm::sqrt(cfg.reflection) * q * ch.tag_tag[(k, 0)];
    let v: Complex64 = ch.forward[(k, 0)] + ch.forward[(k, k)] * bs;
    Ok(v.norm_sqr())
}

/// Expected reader BER with `K − 1` interferers.
pub fn reader_ber_klink(cfg: &SystemConfig) -> Result<f64> {
    let pb = super::p_bpsk(cfg)?;
    let n = cfg.seq_len as f64;
    let clear = libm::pow((n - 2.0) / n, (cfg.links - 1) as f64);
    Ok(super::sync::collision_mix(pb, clear))
}

/// Large-`N` tag BER: only the case where exactly one interferer hits tag
/// 0's idle chip and no other link overlaps is kept.
pub fn tag_ber_klink(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.seq_len as f64;
    let p0 = overlap_probs(cfg.seq_len)?.p0;
    let prefactor = (n - 2.0) / (n * (n - 1.0)) * libm::pow(p0, (cfg.links - 2) as f64);
    let rho = cfg.reflection;
    let mut sum = 0.0;
    match cfg.channel_model {
        ChannelModel::Rayleigh => {
            let own = cfg.reader_tag_gain(0, 0);
            let spec = QuadratureSpec::default();
            for it in interferers(cfg) {
                let m = |u: f64| it.direct + rho * it.two_hop * u;
                sum += integrate_exp_weighted(|u| m(u) / (own + m(u)), 1.0, &spec)?;
            }
        }
        ChannelModel::Static => {
            let own = cfg.static_channels()?.forward[(0, 0)].norm_sqr();
            for k in 1..cfg.links {
                let hit = |q| -> Result<f64> { Ok(indicator(static_interference(cfg, k, q)? > own)) };
                sum += 0.5 * (hit(1.0)? + hit(-1.0)?);
            }
        }
    }
    Ok(prefactor * sum)
}

/// Large-`N` ETR and outage of tag 0: the own reader on-chip plus the
/// off-chip harvest from every interferer.
pub fn klink_et_asymptotics(cfg: &SystemConfig) -> Result<KLinkEnergy> {
    cfg.validate()?;
    let rho = cfg.reflection;
    let harvest = cfg.harvest_efficiency * cfg.tx_power;
    let per_chip = cfg.symbol_duration / cfg.seq_len as f64;
    let xi = OutageScale::new(cfg).xi;
    match cfg.channel_model {
        ChannelModel::Rayleigh => {
            let own = (1.0 - rho) * cfg.reader_tag_gain(0, 0);
            let its = interferers(cfg);
            let etr = per_chip
                * harvest
                * (own + its.iter().map(|i| i.direct + rho * i.two_hop).sum::<f64>());
            let outage = fading_klink_outage(own, &its, rho, xi)?;
            Ok(KLinkEnergy { etr, outage })
        }
        ChannelModel::Static => {
            let own = harvest * (1.0 - rho) * cfg.static_channels()?.forward[(0, 0)].norm_sqr();
            let others = cfg.links - 1;
            let mut mean_eh = 0.0;
            for k in 1..cfg.links {
                mean_eh += 0.5 * harvest * (static_interference(cfg, k, 1.0)? + static_interference(cfg, k, -1.0)?);
            }
            if others >= 24 {
                return Err(invalid("K", "static outage enumerates 2^(K-1) symbol patterns; K must be below 25"));
            }
            let combos = 1usize << others;
            let mut short = 0.0;
            for mask in 0..combos {
                let mut total = own;
                for k in 1..cfg.links {
                    let q = if mask >> (k - 1) & 1 == 1 { -1.0 } else { 1.0 };
                    total += harvest * static_interference(cfg, k, q)?;
                }
                short += indicator(per_chip * total < cfg.energy_requirement);
            }
            Ok(KLinkEnergy {
                etr: per_chip * (own + mean_eh),
                outage: short / combos as f64,
            })
        }
    }
}

/// `P[own·X0 + Σ (direct_k + ρ·two_hop_k·u_k)·X_k < ξ]` with all `X`, `u`
/// unit exponentials.
fn fading_klink_outage(own: f64, its: &[Interferer], rho: f64, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let mean = |it: &Interferer, u: f64| it.direct + rho * it.two_hop * u;
    match its {
        [one] => m_outage(own, 0.0, one.direct, rho * one.two_hop, xi),
        [first, second] => {
            let outer = QuadratureSpec::with_tol(1e-9, 1e-7);
            let inner = QuadratureSpec::with_tol(1e-10, 1e-8);
            try_integrate_exp_weighted(
                |u1| {
                    try_integrate_exp_weighted(
                        |u2| exp_sum_cdf(&[own, mean(first, u1), mean(second, u2)], xi),
                        1.0,
                        &inner,
                    )
                },
                1.0,
                &outer,
            )
        }
        _ => {
            // Conditional on the tag-to-tag gains the outage is an exact
            // hypoexponential CDF, so only the gains are sampled.
            let mut rng = ChaCha8Rng::seed_from_u64(KLINK_OUTAGE_SEED);
            let mut means = Vec::with_capacity(its.len() + 1);
            let mut acc = 0.0;
            for _ in 0..KLINK_OUTAGE_SAMPLES {
                means.clear();
                means.push(own);
                for it in its {
                    let u: f64 = Exp1.sample(&mut rng);
                    means.push(mean(it, u));
                }
                acc += exp_sum_cdf(&means, xi)?;
            }
            Ok(acc / KLINK_OUTAGE_SAMPLES as f64)
        }
    }
}
