//! Outage-type probabilities for sums of exponential powers.

use alloc::vec;

use super::quadrature::{try_integrate_exp_weighted, QuadratureSpec};
use crate::error::{domain, Result};

/// `(1 - e^{-t}) / t`, continuous at zero.
fn one_minus_exp_over(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        -libm::expm1(-t) / t
    }
}

/// `P[X + Y > ξ]` for independent exponentials with means `m1`, `m2`.
///
/// The textbook form `(m1 e^{-ξ/m1} - m2 e^{-ξ/m2}) / (m1 - m2)` is rewritten
/// around the larger mean so the equal-mean limit needs no special branch.
pub(crate) fn pair_survival(m1: f64, m2: f64, xi: f64) -> f64 {
    let (hi, lo) = if m1 >= m2 { (m1, m2) } else { (m2, m1) };
    let t = xi * (hi - lo) / (hi * lo);
    libm::exp(-xi / hi) * (1.0 + (xi / hi) * one_minus_exp_over(t))
}

fn check_means(a: f64, b: f64, xi: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a));
    }
    if !(b >= 0.0) || !b.is_finite() {
        return Err(domain("b", b));
    }
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(domain("xi", xi));
    }
    Ok(())
}

/// `M(a, b, c, d) = P[X + Y < ξ]` where, given `u ~ Exp(1)`, `X` and `Y` are
/// independent exponentials with means `a + b u` and `c + d u`.
pub fn m_outage(a: f64, b: f64, c: f64, d: f64, xi: f64) -> Result<f64> {
    check_means(a, b, xi)?;
    check_means(c, d, xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec::default();
    let survival =
        try_integrate_exp_weighted(|u| Ok(pair_survival(a + b * u, c + d * u, xi)), 1.0, &spec)?;
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

/// `M̃(a, b) = P[Z < ξ]` where, given `u ~ Exp(1)`, `Z` is exponential with
/// mean `a + b u`.
pub fn m_tilde_outage(a: f64, b: f64, xi: f64) -> Result<f64> {
    check_means(a, b, xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    if b == 0.0 {
        return Ok(-libm::expm1(-xi / a));
    }
    let spec = QuadratureSpec::default();
    let survival = try_integrate_exp_weighted(|u| Ok(libm::exp(-xi / (a + b * u))), 1.0, &spec)?;
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

/// `P[Σ X_i ≤ t]` for independent exponentials with the given means.
///
/// Uses uniformization of the sequential phase-type chain, so every term is
/// non-negative and equal or nearly equal means need no special handling.
pub fn exp_sum_cdf(means: &[f64], t: f64) -> Result<f64> {
    for &m in means {
        if !(m > 0.0) || !m.is_finite() {
            return Err(domain("mean", m));
        }
    }
    if !(t >= 0.0) {
        return Err(domain("t", t));
    }
    if means.is_empty() {
        return Ok(1.0);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let uniform_rate = means.iter().fold(0.0f64, |acc, &m| acc.max(1.0 / m));
    let lt = uniform_rate * t;
    if !lt.is_finite() || lt > 1e7 {
        return Err(domain("t / min(mean)", lt));
    }
    let advance: alloc::vec::Vec<f64> = means.iter().map(|&m| 1.0 / (m * uniform_rate)).collect();
    let n = means.len();
    // occupancy[i] = P[in phase i after k uniformized events], last slot absorbed.
    let mut occ = vec![0.0; n + 1];
    occ[0] = 1.0;
    let log_lt = libm::log(lt);
    let mut log_fact = 0.0;
    let mut cdf = 0.0;
    let mut seen_weight = 0.0;
    let k_max = (lt + 40.0 * libm::sqrt(lt) + 60.0) as usize;
    for k in 0..=k_max {
        if k > 0 {
            log_fact += libm::log(k as f64);
            for i in (0..n).rev() {
                let moved = occ[i] * advance[i];
                occ[i] -= moved;
                occ[i + 1] += moved;
            }
        }
        let w = libm::exp(-lt + k as f64 * log_lt - log_fact);
        cdf += w * occ[n];
        seen_weight += w;
        if k as f64 > lt && 1.0 - seen_weight < 1e-17 {
            break;
        }
    }
    Ok(cdf.clamp(0.0, 1.0))
}
