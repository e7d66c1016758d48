//! System parameters, link geometry and channel realizations.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// Dense `K × K` matrix indexed by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone> SquareMatrix<T> {
    pub fn filled(dim: usize, value: T) -> Self {
        Self {
            dim,
            data: vec![value; dim * dim],
        }
    }

    /// Build from rows; fails unless every row has `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(Self {
            dim,
            data: rows.iter().flat_map(|r| r.iter().cloned()).collect(),
        })
    }
}

impl<T> SquareMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.dim.max(1))
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.dim && c < self.dim);
        &self.data[r * self.dim + c]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.dim && c < self.dim);
        &mut self.data[r * self.dim + c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Rayleigh,
    Static,
}

/// How transmit power scales when the sequence length changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// Fixed chip power: `P` stays put.
    Fcp,
    /// Fixed chip energy: `P·T/N` stays put.
    Fce,
}

/// Link distances in metres. Row index is the transmitter side: `reader_tag[(m, n)]`
/// is reader `m` to tag `n`, `tag_tag[(m, n)]` tag `m` to tag `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distances {
    pub reader_tag: SquareMatrix<f64>,
    pub tag_tag: SquareMatrix<f64>,
    pub reader_reader: SquareMatrix<f64>,
}

pub const DEFAULT_OWN_LINK: f64 = 10.0;
pub const DEFAULT_CROSS_LINK: f64 = 22.0;
pub const DEFAULT_TAG_TAG: f64 = 20.0;
pub const DEFAULT_READER_READER: f64 = 20.0;

impl Distances {
    /// Every reader sits `DEFAULT_OWN_LINK` from its tag and `DEFAULT_CROSS_LINK`
    /// from every other tag.
    pub fn symmetric(links: usize) -> Self {
        let mut reader_tag = SquareMatrix::filled(links, DEFAULT_CROSS_LINK);
        let mut tag_tag = SquareMatrix::filled(links, DEFAULT_TAG_TAG);
        let mut reader_reader = SquareMatrix::filled(links, DEFAULT_READER_READER);
        for k in 0..links {
            reader_tag[(k, k)] = DEFAULT_OWN_LINK;
            tag_tag[(k, k)] = 0.0;
            reader_reader[(k, k)] = 0.0;
        }
        Self {
            reader_tag,
            tag_tag,
            reader_reader,
        }
    }
}

/// Complex channel coefficients of one realization.
///
/// Backward (tag to reader) coefficients follow from reciprocity and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `forward[(m, n)]`: reader `m` to tag `n`.
    pub forward: SquareMatrix<Complex64>,
    /// `tag_tag[(m, n)]`: tag `m` to tag `n`.
    pub tag_tag: SquareMatrix<Complex64>,
    /// `reader_reader[(m, n)]`: reader `m` to reader `n`.
    pub reader_reader: SquareMatrix<Complex64>,
}

impl ChannelRealization {
    pub fn zeros(links: usize) -> Self {
        let z = SquareMatrix::filled(links, Complex64::new(0.0, 0.0));
        Self {
            forward: z.clone(),
            tag_tag: z.clone(),
            reader_reader: z,
        }
    }

    pub fn links(&self) -> usize {
        self.forward.dim()
    }

    /// Tag `n` to reader `m`.
    pub fn backward(&self, tag: usize, reader: usize) -> Complex64 {
        self.forward[(reader, tag)].conj()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of links `K`.
    pub links: usize,
    /// Chips per symbol `N`.
    pub seq_len: usize,
    /// Symbol duration `T` in seconds.
    pub symbol_duration: f64,
    /// Reader chip transmit power `P` in watts.
    pub tx_power: f64,
    /// Power reflection coefficient `ρ`.
    pub reflection: f64,
    /// Energy harvesting efficiency `η`.
    pub harvest_efficiency: f64,
    pub noise_reader: f64,
    pub noise_tag: f64,
    pub path_loss_exp: f64,
    /// Per-symbol energy a tag needs, `E0`, in joules.
    pub energy_requirement: f64,
    /// Chip offset of link 2 relative to link 1 in the asynchronous model,
    /// as a fraction of a chip.
    pub delay_offset: f64,
    pub channel_model: ChannelModel,
    pub power_mode: PowerMode,
    pub distances: Distances,
    pub static_coeffs: Option<ChannelRealization>,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

impl SystemConfig {
    /// Default two-link setup.
    pub fn two_link_defaults() -> Self {
        Self::symmetric_defaults(2)
    }

    /// The two-link defaults extended to `links` links with symmetric geometry.
    pub fn symmetric_defaults(links: usize) -> Self {
        let symbol_duration = 1e-3;
        Self {
            links,
            seq_len: 1000,
            symbol_duration,
            tx_power: 0.05,
            reflection: 0.5,
            harvest_efficiency: 0.5,
            noise_reader: dbm_to_watts(-100.0),
            noise_tag: dbm_to_watts(-100.0),
            path_loss_exp: 2.5,
            energy_requirement: 1e-8 * symbol_duration,
            delay_offset: 0.0,
            channel_model: ChannelModel::Rayleigh,
            power_mode: PowerMode::Fcp,
            distances: Distances::symmetric(links),
            static_coeffs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.links;
        if k < 2 {
            return Err(invalid("K", "must be at least 2"));
        }
        if self.seq_len < 4 {
            return Err(invalid("N", "must be at least 4"));
        }
        if self.delay_offset > 0.0 && self.seq_len < 6 {
            return Err(invalid("N", "must be at least 6 when beta > 0"));
        }
        if !(self.delay_offset >= 0.0 && self.delay_offset < 1.0) {
            return Err(invalid("beta", "must lie in [0, 1)"));
        }
        if !(self.reflection > 0.0 && self.reflection < 1.0) {
            return Err(invalid("rho", "must lie in (0, 1)"));
        }
        if !(self.harvest_efficiency > 0.0 && self.harvest_efficiency <= 1.0) {
            return Err(invalid("eta", "must lie in (0, 1]"));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.symbol_duration) {
            return Err(invalid("T", "must be positive"));
        }
        if !positive(self.tx_power) {
            return Err(invalid("P", "must be positive"));
        }
        if !positive(self.path_loss_exp) {
            return Err(invalid("lambda", "must be positive"));
        }
        if !(self.noise_reader >= 0.0 && self.noise_reader.is_finite()) {
            return Err(invalid("sigma2_reader", "must be non-negative"));
        }
        if !(self.noise_tag >= 0.0 && self.noise_tag.is_finite()) {
            return Err(invalid("sigma2_tag", "must be non-negative"));
        }
        if !(self.energy_requirement >= 0.0 && self.energy_requirement.is_finite()) {
            return Err(invalid("E0", "must be non-negative"));
        }
        let d = &self.distances;
        for (m, field) in [
            (&d.reader_tag, "d_reader_tag"),
            (&d.tag_tag, "d_tag_tag"),
            (&d.reader_reader, "d_reader_reader"),
        ] {
            if m.dim() != k {
                return Err(invalid(field, "must be K x K"));
            }
            for r in 0..k {
                for c in 0..k {
                    let needed = field == "d_reader_tag" || r != c;
                    if needed && !positive(m[(r, c)]) {
                        return Err(invalid(field, "entries must be positive"));
                    }
                }
            }
        }
        if self.channel_model == ChannelModel::Static {
            let ch = self.static_coeffs.as_ref().ok_or(Error::MissingStaticCoefficients)?;
            if ch.forward.dim() != k || ch.tag_tag.dim() != k || ch.reader_reader.dim() != k {
                return Err(invalid("static_coeffs", "must be K x K"));
            }
        }
        Ok(())
    }

    /// The same system with `N` changed; under fixed chip energy the power
    /// is rescaled so `P·T/N` is unchanged.
    pub fn with_seq_len(&self, seq_len: usize) -> Self {
        let mut cfg = self.clone();
        if self.power_mode == PowerMode::Fce {
            cfg.tx_power = self.tx_power * seq_len as f64 / self.seq_len as f64;
        }
        cfg.seq_len = seq_len;
        cfg
    }

    /// Chip energy `P·T/N`.
    pub fn chip_energy(&self) -> f64 {
        self.tx_power * self.symbol_duration / self.seq_len as f64
    }

    /// Mean power gain `d^{-λ}`.
    pub fn path_gain(&self, distance: f64) -> f64 {
        libm::pow(distance, -self.path_loss_exp)
    }

    /// Mean power gain of reader `m` to tag `n`.
    pub fn reader_tag_gain(&self, reader: usize, tag: usize) -> f64 {
        self.path_gain(self.distances.reader_tag[(reader, tag)])
    }

    pub fn tag_tag_gain(&self, from: usize, to: usize) -> f64 {
        self.path_gain(self.distances.tag_tag[(from, to)])
    }

    pub fn reader_reader_gain(&self, from: usize, to: usize) -> f64 {
        self.path_gain(self.distances.reader_reader[(from, to)])
    }

    pub(crate) fn static_channels(&self) -> Result<&ChannelRealization> {
        self.static_coeffs.as_ref().ok_or(Error::MissingStaticCoefficients)
    }

    /// Short stable fingerprint of every parameter, as 16 hex digits.
    pub fn digest(&self) -> u64 {
        let mut h = Sha256::new();
        let mut put = |v: f64| h.update(v.to_le_bytes());
        put(self.links as f64);
        put(self.seq_len as f64);
        put(self.symbol_duration);
        put(self.tx_power);
        put(self.reflection);
        put(self.harvest_efficiency);
        put(self.noise_reader);
        put(self.noise_tag);
        put(self.path_loss_exp);
        put(self.energy_requirement);
        put(self.delay_offset);
        put(match self.channel_model {
            ChannelModel::Rayleigh => 0.0,
            ChannelModel::Static => 1.0,
        });
        put(match self.power_mode {
            PowerMode::Fcp => 0.0,
            PowerMode::Fce => 1.0,
        });
        let d = &self.distances;
        for m in [&d.reader_tag, &d.tag_tag, &d.reader_reader] {
            m.data.iter().for_each(|&v| put(v));
        }
        if let Some(ch) = &self.static_coeffs {
            for m in [&ch.forward, &ch.tag_tag, &ch.reader_reader] {
                m.data.iter().for_each(|v| {
                    put(v.re);
                    put(v.im);
                });
            }
        }
        let out = h.finalize();
        u64::from_be_bytes(out[..8].try_into().expect("digest has 32 bytes"))
    }
}

/// Per-coefficient amplitude scales `sqrt(d^{-λ} / 2)` of the real and
/// imaginary parts under Rayleigh fading.
#[derive(Debug, Clone)]
pub(crate) struct FadingScales {
    pub forward: SquareMatrix<f64>,
    pub tag_tag: SquareMatrix<f64>,
    pub reader_reader: SquareMatrix<f64>,
}

impl FadingScales {
    pub fn new(cfg: &SystemConfig) -> Self {
        let k = cfg.links;
        let mut s = Self {
            forward: SquareMatrix::filled(k, 0.0),
            tag_tag: SquareMatrix::filled(k, 0.0),
            reader_reader: SquareMatrix::filled(k, 0.0),
        };
        for m in 0..k {
            for n in 0..k {
                s.forward[(m, n)] = libm::sqrt(0.5 * cfg.reader_tag_gain(m, n));
                if m != n {
                    s.tag_tag[(m, n)] = libm::sqrt(0.5 * cfg.tag_tag_gain(m, n));
                    s.reader_reader[(m, n)] = libm::sqrt(0.5 * cfg.reader_reader_gain(m, n));
                }
            }
        }
        s
    }

    pub fn fill<R: Rng + ?Sized>(&self, out: &mut ChannelRealization, rng: &mut R) {
        for (scale, dst) in [
            (&self.forward, &mut out.forward),
            (&self.tag_tag, &mut out.tag_tag),
            (&self.reader_reader, &mut out.reader_reader),
        ] {
            for (s, v) in scale.data.iter().zip(dst.data.iter_mut()) {
                if *s == 0.0 {
                    *v = Complex64::new(0.0, 0.0);
                } else {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *v = Complex64::new(s * re, s * im);
                }
            }
        }
    }

    /// Like [`fill`](Self::fill) but only the coefficients that reach link
    /// `target`: every reader-to-tag entry, and the tag-to-tag and
    /// reader-to-reader entries ending at `target`. Others are left untouched.
    pub fn fill_towards<R: Rng + ?Sized>(&self, out: &mut ChannelRealization, target: usize, rng: &mut R) {
        let draw = |s: f64, rng: &mut R| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        };
        for (s, v) in self.forward.data.iter().zip(out.forward.data.iter_mut()) {
            *v = draw(*s, rng);
        }
        for m in (0..self.forward.dim).filter(|&m| m != target) {
            out.tag_tag[(m, target)] = draw(self.tag_tag[(m, target)], rng);
            out.reader_reader[(m, target)] = draw(self.reader_reader[(m, target)], rng);
        }
    }
}

/// One channel realization: independent `CN(0, d^{-λ})` draws under Rayleigh
/// fading, or the configured coefficients under the static model.
pub fn sample_channels<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate()?;
    match cfg.channel_model {
        ChannelModel::Static => Ok(cfg.static_channels()?.clone()),
        ChannelModel::Rayleigh => {
            let mut ch = ChannelRealization::zeros(cfg.links);
            FadingScales::new(cfg).fill(&mut ch, rng);
            Ok(ch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = SystemConfig::two_link_defaults();
        cfg.validate().unwrap();
        assert!((cfg.tx_power - 0.05).abs() < 1e-15);
        assert!((cfg.noise_tag - 1e-13).abs() < 1e-27);
        SystemConfig::symmetric_defaults(6).validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let base = SystemConfig::two_link_defaults();
        let mut c = base.clone();
        c.reflection = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.seq_len = 5;
        c.delay_offset = 0.2;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.channel_model = ChannelModel::Static;
        assert_eq!(c.validate(), Err(Error::MissingStaticCoefficients));
        let mut c = base.clone();
        c.distances.reader_tag[(0, 1)] = 0.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.links = 3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn fce_keeps_chip_energy() {
        let mut cfg = SystemConfig::two_link_defaults();
        cfg.power_mode = PowerMode::Fce;
        let big = cfg.with_seq_len(8000);
        assert!((big.chip_energy() - cfg.chip_energy()).abs() < 1e-20);
        cfg.power_mode = PowerMode::Fcp;
        assert_eq!(cfg.with_seq_len(8000).tx_power, cfg.tx_power);
    }
}
