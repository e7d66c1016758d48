//! Adaptive Gauss–Kronrod (10/21) quadrature.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

/// Tolerances and bounds for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Hard upper bound used when a semi-infinite range has to be cut.
    pub truncation_cap: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            truncation_cap: 700.0,
            max_intervals: 400,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0) {
            return Err(domain("abs_tol", self.abs_tol));
        }
        if !(self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(domain("rel_tol", self.rel_tol));
        }
        if !(self.truncation_cap > 0.0) {
            return Err(domain("truncation_cap", self.truncation_cap));
        }
        Ok(())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_185_620_690,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [0.0f64; 20];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::NonConvergence {
            what: "non-finite integrand",
        });
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * libm::fmin(1.0, libm::pow(200.0 * error / asc, 1.5));
    }
    let resabs = abs_sum * half.abs();
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = libm::fmax(50.0 * f64::EPSILON * resabs, error);
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error,
    })
}

/// Globally adaptive integration of a fallible integrand over `[a, b]`.
/// Returns the value and the final error estimate.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.check()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(domain("integration bound", if a.is_finite() { b } else { a }));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    let first = gk21(&mut f, a, b)?;
    let mut segments: Vec<Segment> = Vec::with_capacity(16);
    segments.push(first);
    let mut total = first.value;
    let mut total_err = first.error;
    loop {
        let tol = libm::fmax(spec.abs_tol, spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok((total, total_err));
        }
        if segments.len() >= spec.max_intervals {
            return Err(Error::NonConvergence {
                what: "adaptive subdivision limit",
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            return Err(Error::NonConvergence {
                what: "interval underflow",
            });
        }
        let left = gk21(&mut f, seg.a, mid)?;
        let right = gk21(&mut f, mid, seg.b)?;
        segments.push(left);
        segments.push(right);
        total = segments.iter().map(|s| s.value).sum();
        total_err = segments.iter().map(|s| s.error).sum();
    }
}

/// Integrate a plain integrand over the finite range `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, spec).map(|r| r.0)
}

/// `∫₀^∞ e^{-x} g(x) dx` for `|g| ≤ bound`.
///
/// The range is cut at the point where the exponential envelope of the tail
/// drops below `abs_tol / 10`, or at `truncation_cap` if that comes first.
pub fn try_integrate_exp_weighted<F>(mut g: F, bound: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.check()?;
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(domain("bound", bound));
    }
    let floor = libm::fmax(spec.abs_tol, f64::MIN_POSITIVE);
    let cap = libm::fmin(spec.truncation_cap, libm::log(10.0 * bound / floor).max(1.0));
    let inner = QuadratureSpec {
        abs_tol: 0.9 * spec.abs_tol,
        ..*spec
    };
    try_integrate(|x| Ok(libm::exp(-x) * g(x)?), 0.0, cap, &inner).map(|r| r.0)
}

pub fn integrate_exp_weighted<F>(mut g: F, bound: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_exp_weighted(|x| Ok(g(x)), bound, spec)
}

/// `∫₀^∞ f(x) dx` for an integrand that decays at least exponentially.
///
/// Integrates panels `[0,1], [1,2], [2,4], ...` until one contributes less
/// than `abs_tol / 10` or `truncation_cap` is reached.
pub fn integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    spec.check()?;
    let panel_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / 8.0,
        ..*spec
    };
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let hi_c = libm::fmin(hi, spec.truncation_cap);
        let part = integrate(&mut f, lo, hi_c, &panel_spec)?;
        total += part;
        if hi_c >= spec.truncation_cap {
            return Ok(total);
        }
        if lo >= 1.0 && part.abs() < 0.1 * libm::fmax(spec.abs_tol, spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        lo = hi_c;
        hi = 2.0 * hi_c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_high_degree_polynomials() {
        // A single 21-point Kronrod rule is exact through degree 31.
        let v = integrate(|x| libm::pow(x, 30.0), -1.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
        let v = integrate(|x| libm::pow(x, 8.0), -1.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_tails() {
        let spec = QuadratureSpec::with_tol(1e-13, 1e-12);
        let v = integrate_semi_infinite(|x| x * libm::exp(-x), &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-11, "{v}");
        let v = integrate_exp_weighted(|x| libm::cos(x), 1.0, &spec).unwrap();
        assert!((v - 0.5).abs() < 1e-11, "{v}");
    }

    #[test]
    fn sharp_peak_is_resolved() {
        let spec = QuadratureSpec::with_tol(1e-12, 1e-10);
        let v = integrate(|x| 1e-3 / (x * x + 1e-6), -1.0, 1.0, &spec).unwrap();
        let exact = 2.0 * libm::atan(1e3);
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn rejects_bad_tolerances() {
        let spec = QuadratureSpec::with_tol(0.0, 0.0);
        assert!(integrate(|x| x, 0.0, 1.0, &spec).is_err());
    }
}
