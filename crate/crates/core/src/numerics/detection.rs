//! Pairwise energy-detection error probability.

use super::quadrature::{try_integrate, QuadratureSpec};
use super::special::{marcum_q1, rice_pdf, RICE_WINDOW};
use crate::error::{domain, Result};

/// `G(a, b) = P[E_A > E_B]` for independent non-central chi-square variables
/// with two degrees of freedom (unit variance per component) and
/// non-centralities `a` and `b`.
///
/// Evaluated as `E[Q1(√a, R)]` where `R = √E_B` is Rice distributed, which
/// is the substitution `x = (√b + s)²` of the defining integral.
pub fn g_detect(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(domain("a", a));
    }
    if !(b >= 0.0) || !b.is_finite() {
        return Err(domain("b", b));
    }
    let alpha = libm::sqrt(a);
    let nu = libm::sqrt(b);
    if alpha == 0.0 {
        // Central E_A has survival e^{-x/2}; its mean over E_B is the MGF at -1/2.
        return Ok(0.5 * libm::exp(-0.25 * b));
    }
    let lo = libm::fmax(0.0, nu - RICE_WINDOW);
    let hi = nu + RICE_WINDOW;
    let spec = QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        ..QuadratureSpec::default()
    };
    // Splitting at the Q1 transition keeps the adaptive rule from chasing it.
    let mut total = 0.0;
    let mut edges = [lo, libm::fmin(libm::fmax(alpha, lo), hi), hi];
    edges.sort_by(|x, y| x.total_cmp(y));
    for w in edges.windows(2) {
        let (v, _) = try_integrate(|r| Ok(marcum_q1(alpha, r)? * rice_pdf(r, nu)), w[0], w[1], &spec)?;
        total += v;
    }
    Ok(total.clamp(0.0, 1.0))
}
