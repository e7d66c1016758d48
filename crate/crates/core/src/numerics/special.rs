//! Special functions: Gaussian tail, Bessel I0, exponential integral,
//! first-order Marcum Q.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use super::quadrature::{try_integrate, QuadratureSpec};
use crate::error::{domain, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // Grows like 2e^{x²}; overflows past x ≈ -26.6.
        return 2.0 * libm::exp(x * x) - erfcx(-x);
    }
    if x < 26.0 {
        return libm::exp(x * x) * libm::erfc(x);
    }
    // Continued fraction, evaluated bottom-up:
    // √π erfcx(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
    let mut tail = x;
    for n in (1..=40).rev() {
        tail = x + 0.5 * n as f64 / tail;
    }
    1.0 / (tail * libm::sqrt(PI))
}

const I0_A: [f64; 30] = [
    -4.415_341_646_479_339_5E-18,
    3.330_794_518_822_238_4E-17,
    -2.431_279_846_547_955E-16,
    1.715_391_285_555_133E-15,
    -1.168_533_287_799_345_1E-14,
    7.676_185_498_604_936E-14,
    -4.856_446_783_111_929E-13,
    2.955_052_663_129_64E-12,
    -1.726_826_291_441_556E-11,
    9.675_809_035_373_237E-11,
    -5.189_795_601_635_263E-10,
    2.659_823_724_682_386_6E-9,
    -1.300_025_009_986_248E-8,
    6.046_995_022_541_919E-8,
    -2.670_793_853_940_612E-7,
    1.117_387_539_120_103_7E-6,
    -4.416_738_358_458_750_5E-6,
    1.644_844_807_072_889_6E-5,
    -5.754_195_010_082_104E-5,
    1.885_028_850_958_416_5E-4,
    -5.763_755_745_385_824E-4,
    1.639_475_616_941_335_7E-3,
    -4.324_309_995_050_576E-3,
    1.054_646_039_459_499_8E-2,
    -2.373_741_480_589_947E-2,
    4.930_528_423_967_071E-2,
    -9.490_109_704_804_764E-2,
    1.716_209_015_222_087_7E-1,
    -3.046_826_723_431_984E-1,
    6.767_952_744_094_761E-1,
];

const I0_B: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in &coeffs[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x * b1 - b2 + c;
    }
    0.5 * (b0 - b2)
}

/// Exponentially scaled Bessel function `e^{-|x|} I0(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 8.0 {
        chbevl(0.5 * x - 2.0, &I0_A)
    } else {
        chbevl(32.0 / x - 2.0, &I0_B) / libm::sqrt(x)
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("x", x));
    }
    let v = libm::exp(x.abs()) * bessel_i0e(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { what: "bessel_i0" })
    }
}

/// `e^x E1(x)` for `x > 0`; stays representable for large `x`.
pub fn e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= 1.0 {
        return Ok(libm::exp(x) * e1_series(x));
    }
    // Modified Lentz on the even form of the continued fraction.
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "exponential integral",
    })
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let t = term / k as f64;
        sum += t;
        if t.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - libm::log(x) - sum
}

/// Exponential integral `E1(x) = Γ(0, x) = ∫_x^∞ e^{-t}/t dt`.
pub fn gamma_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    if x <= 1.0 {
        return Ok(e1_series(x));
    }
    Ok(e1_scaled(x)? * libm::exp(-x))
}

/// Density of the Rice distribution with unit scale and offset `nu`.
pub(crate) fn rice_pdf(r: f64, nu: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let d = r - nu;
    r * libm::exp(-0.5 * d * d) * bessel_i0e(nu * r)
}

/// Half-width, in standard deviations, of the window kept around a Rice mode.
pub(crate) const RICE_WINDOW: f64 = 12.0;

/// First-order Marcum Q function `Q1(a, b) = ∫_b^∞ x e^{-(x²+a²)/2} I0(ax) dx`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(domain("a", a));
    }
    if !(b >= 0.0) {
        return Err(domain("b", b));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    if b == f64::INFINITY {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok(libm::exp(-0.5 * b * b));
    }
    let spec = QuadratureSpec {
        abs_tol: f64::MIN_POSITIVE,
        rel_tol: 1e-13,
        ..QuadratureSpec::default()
    };
    let pdf = |r: f64| Ok(rice_pdf(r, a));
    if b >= a {
        let upper = b + RICE_WINDOW;
        let (v, _) = try_integrate(pdf, b, upper, &spec)?;
        Ok(v.clamp(0.0, 1.0))
    } else {
        let lower = libm::fmax(0.0, a - RICE_WINDOW);
        if b <= lower {
            return Ok(1.0);
        }
        let (v, _) = try_integrate(pdf, lower, b, &spec)?;
        Ok((1.0 - v).clamp(0.0, 1.0))
    }
}
