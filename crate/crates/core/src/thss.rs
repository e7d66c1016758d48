//! Time-hopping patterns and pattern-overlap combinatorics.

use core::ops::{Add, Div, Mul, Sub};

use num_rational::Ratio;
use rand::Rng;

use crate::error::{invalid, Result};

/// Exact probabilities for small `N`.
pub type Rational = Ratio<i128>;

/// The two on-chips of one link's pattern. `s0` carries bit 0, `s1` bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThssPattern {
    pub s0: usize,
    pub s1: usize,
}

impl ThssPattern {
    pub fn new(s0: usize, s1: usize) -> Option<Self> {
        (s0 != s1).then_some(Self { s0, s1 })
    }

    pub fn contains(&self, chip: usize) -> bool {
        self.s0 == chip || self.s1 == chip
    }

    pub fn transmit(&self, bit: bool) -> TransmittedChip {
        TransmittedChip {
            chip: if bit { self.s1 } else { self.s0 },
            bit,
        }
    }

    /// The on-chip not used for `bit`.
    pub fn idle(&self, bit: bool) -> usize {
        if bit {
            self.s0
        } else {
            self.s1
        }
    }

    /// Whether the two chips are adjacent on the length-`n` cycle.
    pub fn is_consecutive(&self, n: usize) -> bool {
        (self.s0 + 1) % n == self.s1 || (self.s1 + 1) % n == self.s0
    }
}

/// The chip a reader actually transmits in, with the bit that selected it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransmittedChip {
    pub chip: usize,
    pub bit: bool,
}

/// Uniform unordered pair of distinct chips with uniform orientation.
pub fn generate_pattern<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ThssPattern> {
    if n < 4 {
        return Err(invalid("N", "must be at least 4"));
    }
    Ok(sample_pattern(n, rng))
}

pub(crate) fn sample_pattern<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ThssPattern {
    let s0 = rng.random_range(0..n);
    let mut s1 = rng.random_range(0..n - 1);
    if s1 >= s0 {
        s1 += 1;
    }
    ThssPattern { s0, s1 }
}

/// Number of shared chips of two patterns.
pub fn classify_overlap(a: ThssPattern, b: ThssPattern) -> u8 {
    b.contains(a.s0) as u8 + b.contains(a.s1) as u8
}

/// Field operations shared by the `f64` and exact evaluations.
pub trait Prob:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn count(n: u64) -> Self;

    fn powi(self, k: u32) -> Self {
        (0..k).fold(Self::count(1), |acc, _| acc * self)
    }
}

impl Prob for f64 {
    fn count(n: u64) -> Self {
        n as f64
    }

    fn powi(self, k: u32) -> Self {
        libm::pow(self, k as f64)
    }
}

impl Prob for Rational {
    fn count(n: u64) -> Self {
        Ratio::from_integer(n as i128)
    }
}

/// Probabilities that two synchronous patterns share 0, 1 or 2 chips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapProbs<T = f64> {
    pub p0: T,
    pub p1: T,
    pub p2: T,
}

pub fn overlap_probs_in<T: Prob>(n: usize) -> Result<OverlapProbs<T>> {
    if n < 4 {
        return Err(invalid("N", "must be at least 4"));
    }
    let c = |k: u64| T::count(k);
    let nn = c(n as u64);
    let pairs = nn * (nn - c(1));
    Ok(OverlapProbs {
        p0: (nn - c(2)) * (nn - c(3)) / pairs,
        p1: c(4) * (nn - c(2)) / pairs,
        p2: c(2) / pairs,
    })
}

pub fn overlap_probs(n: usize) -> Result<OverlapProbs> {
    overlap_probs_in(n)
}

pub fn overlap_probs_exact(n: usize) -> Result<OverlapProbs<Rational>> {
    overlap_probs_in(n)
}

/// Overlap sub-scenario probabilities under a chip offset between two links.
///
/// `p_dis` / `p_con` are the probabilities that link 1's chips are disjunct or
/// adjacent. The remaining fields are conditional on that split: `d*` given
/// disjunct, `c*` given consecutive. In the labels `n_i`, `n` counts link 2's
/// chips touching link 1's pattern. Disjunct: `1_1` covers a link-1 chip for
/// `1 − β` of it, `1_2` for `β`; `2_1` both aligned, `2_2` both offset, `2_3`
/// one of each on different chips, `2_4` both on the same link-1 chip.
/// Consecutive: `1_1`/`1_2` touch one chip, `1_3` straddles both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsyncScenarioProbs<T = f64> {
    pub p_dis: T,
    pub p_con: T,
    pub d0: T,
    pub d1_1: T,
    pub d1_2: T,
    pub d2_1: T,
    pub d2_2: T,
    pub d2_3: T,
    pub d2_4: T,
    pub c0: T,
    pub c1_1: T,
    pub c1_2: T,
    pub c1_3: T,
    pub c2_1: T,
    pub c2_2: T,
    pub c2_3: T,
}

impl<T: Prob> AsyncScenarioProbs<T> {
    /// Joint probabilities `p_dis·d*` then `p_con·c*`, in field order.
    pub fn joint(&self) -> [T; 14] {
        let (d, c) = (self.p_dis, self.p_con);
        [
            d * self.d0,
            d * self.d1_1,
            d * self.d1_2,
            d * self.d2_1,
            d * self.d2_2,
            d * self.d2_3,
            d * self.d2_4,
            c * self.c0,
            c * self.c1_1,
            c * self.c1_2,
            c * self.c1_3,
            c * self.c2_1,
            c * self.c2_2,
            c * self.c2_3,
        ]
    }
}

pub fn async_scenario_probs_in<T: Prob>(n: usize) -> Result<AsyncScenarioProbs<T>> {
    if n < 6 {
        return Err(invalid("N", "must be at least 6 for asynchronous analysis"));
    }
    let c = |k: u64| T::count(k);
    let nn = c(n as u64);
    let pairs = nn * (nn - c(1));
    Ok(AsyncScenarioProbs {
        p_dis: (nn - c(3)) / (nn - c(1)),
        p_con: c(2) / (nn - c(1)),
        d0: (nn - c(4)) * (nn - c(5)) / pairs,
        d1_1: (c(4) * nn - c(16)) / pairs,
        d1_2: (c(4) * nn - c(16)) / pairs,
        d2_1: c(2) / pairs,
        d2_2: c(2) / pairs,
        d2_3: c(4) / pairs,
        d2_4: c(4) / pairs,
        c0: (nn - c(3)) * (nn - c(4)) / pairs,
        c1_1: (c(2) * nn - c(6)) / pairs,
        c1_2: (c(2) * nn - c(6)) / pairs,
        c1_3: (c(2) * nn - c(6)) / pairs,
        c2_1: c(2) / pairs,
        c2_2: c(2) / pairs,
        c2_3: c(2) / pairs,
    })
}

pub fn async_scenario_probs(n: usize) -> Result<AsyncScenarioProbs> {
    async_scenario_probs_in(n)
}

pub fn async_scenario_probs_exact(n: usize) -> Result<AsyncScenarioProbs<Rational>> {
    async_scenario_probs_in(n)
}

/// Probabilities that 0, 1 or 2 of link 1's chips lie in the union of the
/// other `K − 1` patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KLinkOverlapProbs<T = f64> {
    pub rho0: T,
    pub rho1: T,
    pub rho2: T,
}

fn check_links(k: usize) -> Result<u32> {
    if k < 2 {
        return Err(invalid("K", "must be at least 2"));
    }
    u32::try_from(k - 1).map_err(|_| invalid("K", "too large"))
}

pub fn klink_overlap_probs_in<T: Prob>(n: usize, k: usize) -> Result<KLinkOverlapProbs<T>> {
    let others = check_links(k)?;
    let p = overlap_probs_in::<T>(n)?;
    let one = T::count(1);
    let half = one / T::count(2);
    let rho0 = p.p0.powi(others);
    let rho1 = T::count(2) * ((p.p0 + half * p.p1).powi(others) - rho0);
    Ok(KLinkOverlapProbs {
        rho0,
        rho1,
        rho2: one - rho0 - rho1,
    })
}

pub fn klink_overlap_probs(n: usize, k: usize) -> Result<KLinkOverlapProbs> {
    klink_overlap_probs_in(n, k)
}

pub fn klink_overlap_probs_exact(n: usize, k: usize) -> Result<KLinkOverlapProbs<Rational>> {
    klink_overlap_probs_in(n, k)
}

/// Probability that exactly one chip of link 1 is hit, by exactly one other link.
pub fn dominant_single_overlap_prob_in<T: Prob>(n: usize, k: usize) -> Result<T> {
    let others = check_links(k)?;
    let p = overlap_probs_in::<T>(n)?;
    Ok(T::count(others as u64) * p.p1 * p.p0.powi(others - 1))
}

pub fn dominant_single_overlap_prob(n: usize, k: usize) -> Result<f64> {
    dominant_single_overlap_prob_in(n, k)
}

pub fn dominant_single_overlap_prob_exact(n: usize, k: usize) -> Result<Rational> {
    dominant_single_overlap_prob_in(n, k)
}
