//! Chip-level Monte Carlo of one symbol period, measured at link 0.
//!
//! Every trial draws its randomness from its own ChaCha8 stream, keyed by the
//! run seed and selected by the trial index, so any partition of the trials
//! into blocks gives the same per-trial outcomes.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::thss::{sample_pattern, ThssPattern};
use crate::topology::{ChannelModel, ChannelRealization, FadingScales, SystemConfig};

/// Trials per block of the blockwise runners.
pub const BLOCK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timing {
    /// All chip grids aligned.
    Sync,
    /// Link 1's grid lags link 0's by `delay_offset` chips. Two links only.
    Async,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Tags reflect only in the chip they detected instead of both pattern
    /// chips. Synchronous timing only.
    pub couple_tag_detection: bool,
}

/// Outcome of one symbol at link 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolTrial {
    pub reader_bit_ok: bool,
    pub tag_bit_ok: bool,
    /// Joules harvested by tag 0 over the symbol.
    pub energy_harvested: f64,
    pub outage: bool,
    /// How many of tag 0's pattern chips are also used by another link.
    pub overlap: u8,
}

/// Stretch of a link-0 chip with a fixed set of active readers and
/// reflecting tags. `readers` and `tags` are bit masks over link indices.
#[derive(Debug, Clone, Copy, Default)]
struct Segment {
    weight: f64,
    readers: u64,
    tags: u64,
}

/// Reusable per-symbol simulator for one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SystemConfig,
    timing: Timing,
    couple: bool,
    fading: Option<FadingScales>,
    ch: ChannelRealization,
    patterns: Vec<ThssPattern>,
    chips: Vec<usize>,
    q: Vec<f64>,
    /// Chip each tag reflects in when detection is coupled.
    detected: Vec<usize>,
    tag_noise: Vec<[Complex64; 2]>,
    sqrt_rho: f64,
    detect_scale: f64,
    tag_noise_scale: f64,
    reader_noise_scale: f64,
}

impl Simulator {
    pub fn new(cfg: &SystemConfig, timing: Timing, opts: SimOptions) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.links;
        if k > 64 {
            return Err(invalid("K", "simulator supports at most 64 links"));
        }
        if timing == Timing::Async {
            if k != 2 {
                return Err(Error::Unsupported("asynchronous timing requires K = 2"));
            }
            if cfg.seq_len < 6 {
                return Err(invalid("N", "must be at least 6 for asynchronous timing"));
            }
            if opts.couple_tag_detection {
                return Err(Error::Unsupported("coupled tag detection with asynchronous timing"));
            }
        }
        let ch = match cfg.channel_model {
            ChannelModel::Static => cfg.static_channels()?.clone(),
            ChannelModel::Rayleigh => ChannelRealization::zeros(k),
        };
        let fading = match cfg.channel_model {
            ChannelModel::Static => None,
            ChannelModel::Rayleigh => Some(FadingScales::new(cfg)),
        };
        Ok(Self {
            timing,
            couple: opts.couple_tag_detection,
            fading,
            ch,
            patterns: vec![ThssPattern { s0: 0, s1: 1 }; k],
            chips: vec![0; k],
            q: vec![1.0; k],
            detected: vec![0; k],
            tag_noise: vec![[Complex64::new(0.0, 0.0); 2]; k],
            sqrt_rho: libm::sqrt(cfg.reflection),
            detect_scale: libm::sqrt(cfg.harvest_efficiency * (1.0 - cfg.reflection) * cfg.tx_power),
            tag_noise_scale: libm::sqrt(0.5 * cfg.noise_tag),
            reader_noise_scale: libm::sqrt(0.5 * cfg.noise_reader),
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn timing(&self) -> Timing {
        self.timing
    }

    /// Simulate one symbol period.
    pub fn simulate_symbol<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SymbolTrial {
        let k = self.cfg.links;
        let n = self.cfg.seq_len;
        for p in self.patterns.iter_mut() {
            *p = sample_pattern(n, rng);
        }
        for (chip, p) in self.chips.iter_mut().zip(&self.patterns) {
            *chip = p.transmit(rng.random::<bool>()).chip;
        }
        for q in self.q.iter_mut() {
            *q = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        if let Some(scales) = &self.fading {
            if self.couple {
                scales.fill(&mut self.ch, rng);
            } else {
                scales.fill_towards(&mut self.ch, 0, rng);
            }
        }
        let noisy_tags = if self.couple { k } else { 1 };
        for slot in self.tag_noise.iter_mut().take(noisy_tags) {
            for w in slot.iter_mut() {
                *w = complex_normal(rng, self.tag_noise_scale);
            }
        }
        let reader_noise = if self.reader_noise_scale > 0.0 {
            self.reader_noise_scale * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };

        let own = self.patterns[0];
        let own_chip = self.chips[0];
        let own_bit = own_chip == own.s1;
        let tag_choice = self.detect(0, rng);
        let tag_bit_ok = tag_choice == own_bit;
        if self.couple {
            self.detected[0] = own.transmit(tag_choice).chip;
            for t in 1..k {
                let p = self.patterns[t];
                let bit = self.detect(t, rng);
                self.detected[t] = p.transmit(bit).chip;
            }
        }

        let energy = self.harvested_energy();
        let statistic = self.reader_statistic(own_chip) + reader_noise * self.ch.forward[(0, 0)].norm_sqr();
        let decided_plus = if statistic == 0.0 { rng.random::<bool>() } else { statistic > 0.0 };
        let overlap = self.overlap();
        SymbolTrial {
            reader_bit_ok: decided_plus == (self.q[0] > 0.0),
            tag_bit_ok,
            energy_harvested: energy,
            outage: energy < self.cfg.energy_requirement,
            overlap,
        }
    }

    fn overlap(&self) -> u8 {
        let own = self.patterns[0];
        let hit = |c: usize| self.patterns[1..].iter().any(|p| p.contains(c));
        hit(own.s0) as u8 + hit(own.s1) as u8
    }

    fn reflects(&self, tag: usize, chip: usize) -> bool {
        if self.couple {
            self.detected[tag] == chip
        } else {
            self.patterns[tag].contains(chip)
        }
    }

    /// Segments of link-0 chip `c`, returned with their count.
    fn segments(&self, c: usize) -> ([Segment; 2], usize) {
        let mut out = [Segment::default(); 2];
        match self.timing {
            Timing::Sync => {
                let mut readers = 0u64;
                let mut tags = 0u64;
                for (j, &chip) in self.chips.iter().enumerate() {
                    readers |= ((chip == c) as u64) << j;
                }
                for t in 0..self.cfg.links {
                    tags |= (self.reflects(t, c) as u64) << t;
                }
                out[0] = Segment { weight: 1.0, readers, tags };
                (out, 1)
            }
            Timing::Async => {
                let n = self.cfg.seq_len;
                let beta = self.cfg.delay_offset;
                let own_active = (self.chips[0] == c) as u64;
                let own_reflects = self.patterns[0].contains(c) as u64;
                let mut count = 0;
                // Link 1's chip c − 1 covers the first β of chip c, its chip c the rest.
                for (weight, other) in [(beta, (c + n - 1) % n), (1.0 - beta, c)] {
                    if weight == 0.0 {
                        continue;
                    }
                    out[count] = Segment {
                        weight,
                        readers: own_active | ((self.chips[1] == other) as u64) << 1,
                        tags: own_reflects | (self.patterns[1].contains(other) as u64) << 1,
                    };
                    count += 1;
                }
                (out, count)
            }
        }
    }

    /// Complex amplitude incident at `tag` during one segment, per unit `√P`.
    fn incident(&self, tag: usize, seg: &Segment) -> Complex64 {
        let f = &self.ch.forward;
        let g = &self.ch.tag_tag;
        let mut total = Complex64::new(0.0, 0.0);
        for j in mask_iter(seg.readers) {
            let mut a = f[(j, tag)];
            for k in mask_iter(seg.tags & !(1u64 << tag)) {
                a += f[(j, k)] * g[(k, tag)] * (self.sqrt_rho * self.q[k]);
            }
            total += a;
        }
        total
    }

    /// Energy detection at `tag`; returns the decided bit.
    fn detect<R: Rng + ?Sized>(&self, tag: usize, rng: &mut R) -> bool {
        let p = self.patterns[tag];
        let noise = self.tag_noise[tag];
        let energy = |chip: usize, w: Complex64| {
            let (segs, count) = self.segments_for(tag, chip);
            segs[..count]
                .iter()
                .map(|s| s.weight * (self.incident(tag, s) * self.detect_scale + w).norm_sqr())
                .sum::<f64>()
        };
        let e0 = energy(p.s0, noise[0]);
        let e1 = energy(p.s1, noise[1]);
        if e0 == e1 {
            rng.random::<bool>()
        } else {
            e1 > e0
        }
    }

    /// Segments as seen by `tag`. Only tag 0 is ever detected under
    /// asynchronous timing, and coupled detection of the other tags uses the
    /// uncoupled reflection pattern.
    fn segments_for(&self, tag: usize, chip: usize) -> ([Segment; 2], usize) {
        if tag == 0 && !self.couple {
            return self.segments(chip);
        }
        let mut readers = 0u64;
        let mut tags = 0u64;
        for (j, &c) in self.chips.iter().enumerate() {
            readers |= ((c == chip) as u64) << j;
        }
        for (t, p) in self.patterns.iter().enumerate() {
            tags |= (p.contains(chip) as u64) << t;
        }
        let mut out = [Segment::default(); 2];
        out[0] = Segment { weight: 1.0, readers, tags };
        (out, 1)
    }

    /// Energy harvested by tag 0, in joules.
    fn harvested_energy(&self) -> f64 {
        let cfg = &self.cfg;
        let n = cfg.seq_len;
        let eta = cfg.harvest_efficiency;
        let mut active = [0usize; 64];
        let mut count = 0;
        let mut push = |c: usize| {
            if !active[..count].contains(&c) {
                active[count] = c;
                count += 1;
            }
        };
        for &c in &self.chips {
            push(c);
            if self.timing == Timing::Async {
                push((c + 1) % n);
            }
        }
        let mut power = 0.0;
        for &c in &active[..count] {
            let factor = if self.reflects(0, c) { eta * (1.0 - cfg.reflection) } else { eta };
            let (segs, m) = self.segments(c);
            let received: f64 = segs[..m].iter().map(|s| s.weight * self.incident(0, s).norm_sqr()).sum();
            power += factor * received;
        }
        cfg.symbol_duration / n as f64 * cfg.tx_power * power
    }

    /// Noise-free coherent decision statistic `Re(conj(f00 b00) r)` at reader 0.
    fn reader_statistic(&self, own_chip: usize) -> f64 {
        let f = &self.ch.forward;
        let h = &self.ch.reader_reader;
        let (segs, m) = self.segments(own_chip);
        let mut r = Complex64::new(0.0, 0.0);
        for s in &segs[..m] {
            let mut y = Complex64::new(0.0, 0.0);
            for k in mask_iter(s.tags) {
                let mut incident = Complex64::new(0.0, 0.0);
                for j in mask_iter(s.readers) {
                    incident += f[(j, k)];
                }
                y += f[(0, k)].conj() * incident * (self.sqrt_rho * self.q[k]);
            }
            for j in mask_iter(s.readers & !1) {
                y += h[(j, 0)];
            }
            r += y * s.weight;
        }
        // f00·b00 = |f00|² is real and non-negative.
        libm::sqrt(self.cfg.tx_power) * r.re * f[(0, 0)].norm_sqr()
    }
}

fn mask_iter(mut mask: u64) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    if scale == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// One symbol with a freshly built simulator.
pub fn simulate_symbol<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R, timing: Timing) -> Result<SymbolTrial> {
    Ok(Simulator::new(cfg, timing, SimOptions::default())?.simulate_symbol(rng))
}

/// Counts and energy sums over a set of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub trials: u64,
    pub reader_errors: u64,
    pub tag_errors: u64,
    pub outages: u64,
    pub energy_sum: f64,
    pub energy_sq_sum: f64,
    pub overlap: [u64; 3],
}

impl Tally {
    pub fn record(&mut self, t: &SymbolTrial) {
        self.trials += 1;
        self.reader_errors += !t.reader_bit_ok as u64;
        self.tag_errors += !t.tag_bit_ok as u64;
        self.outages += t.outage as u64;
        self.energy_sum += t.energy_harvested;
        self.energy_sq_sum += t.energy_harvested * t.energy_harvested;
        self.overlap[t.overlap as usize] += 1;
    }

    /// Append `other`. Merging in a fixed order keeps float sums reproducible.
    pub fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.reader_errors += other.reader_errors;
        self.tag_errors += other.tag_errors;
        self.outages += other.outages;
        self.energy_sum += other.energy_sum;
        self.energy_sq_sum += other.energy_sq_sum;
        for (a, b) in self.overlap.iter_mut().zip(other.overlap) {
            *a += b;
        }
    }

    pub fn report(&self, seed: u64, config_digest: u64) -> MetricsReport {
        let n = self.trials;
        let mean = if n == 0 { 0.0 } else { self.energy_sum / n as f64 };
        let stderr = if n < 2 {
            0.0
        } else {
            let nf = n as f64;
            let var = (self.energy_sq_sum / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
            libm::sqrt(var / nf)
        };
        MetricsReport {
            n_trials: n,
            reader_ber: Estimate::proportion(self.reader_errors, n),
            tag_ber: Estimate::proportion(self.tag_errors, n),
            outage_prob: Estimate::proportion(self.outages, n),
            etr: Estimate { mean, stderr },
            seed,
            config_digest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Binomial proportion with standard error `√(p(1−p)/n)`.
    pub fn proportion(hits: u64, n: u64) -> Self {
        if n == 0 {
            return Self { mean: 0.0, stderr: 0.0 };
        }
        let p = hits as f64 / n as f64;
        Self {
            mean: p,
            stderr: libm::sqrt(p * (1.0 - p) / n as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub n_trials: u64,
    pub reader_ber: Estimate,
    pub tag_ber: Estimate,
    pub outage_prob: Estimate,
    /// Joules per symbol.
    pub etr: Estimate,
    pub seed: u64,
    pub config_digest: u64,
}

/// ChaCha8 key shared by every trial of a run.
pub fn trial_key(seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

/// Generator of trial `index` of the run keyed by `key`.
pub fn trial_rng(key: &[u8; 32], index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(index);
    rng
}

pub fn block_count(n_trials: u64) -> u64 {
    n_trials.div_ceil(BLOCK_SIZE)
}

pub fn block_range(n_trials: u64, block: u64) -> Range<u64> {
    let start = block * BLOCK_SIZE;
    start.min(n_trials)..(start + BLOCK_SIZE).min(n_trials)
}

/// Run the trials with indices in `range`.
pub fn run_block(sim: &mut Simulator, key: &[u8; 32], range: Range<u64>) -> Tally {
    let mut tally = Tally::default();
    for i in range {
        let mut rng = trial_rng(key, i);
        tally.record(&sim.simulate_symbol(&mut rng));
    }
    tally
}

/// Serial run of `n_trials` trials; matches any blockwise parallel run that
/// merges block tallies in block order.
pub fn run_trials(
    cfg: &SystemConfig,
    n_trials: u64,
    seed: u64,
    timing: Timing,
    opts: SimOptions,
) -> Result<MetricsReport> {
    if n_trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let mut sim = Simulator::new(cfg, timing, opts)?;
    let key = trial_key(seed);
    let mut total = Tally::default();
    for b in 0..block_count(n_trials) {
        total.merge(&run_block(&mut sim, &key, block_range(n_trials, b)));
    }
    Ok(total.report(seed, cfg.digest()))
}
