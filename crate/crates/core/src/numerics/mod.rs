//! Special functions, quadrature and the derived probability primitives.

mod detection;
mod outage;
mod quadrature;
mod special;

pub use detection::g_detect;
pub use outage::{exp_sum_cdf, m_outage, m_tilde_outage};
pub use quadrature::{
    integrate, integrate_exp_weighted, integrate_semi_infinite, try_integrate,
    try_integrate_exp_weighted, QuadratureSpec,
};
pub use special::{bessel_i0, bessel_i0e, e1_scaled, erfc, erfcx, gamma_e1, marcum_q1, q_function};
