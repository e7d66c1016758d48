//! Named scenarios: analytic values next to Monte Carlo estimates, with an
//! optional one-parameter sweep.

use std::fmt;
use std::str::FromStr;

use backcom_core::analytic;
use backcom_core::simulator::{MetricsReport, SimOptions, Timing};
use backcom_core::topology::{Distances, SquareMatrix, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::config::config_error;
use crate::error::{Error, Result};
use crate::runner::run_parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    TwoLinkSync,
    TwoLinkAsync,
    KLink,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::TwoLinkSync, Scenario::TwoLinkAsync, Scenario::KLink];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TwoLinkSync => "two_link_sync",
            Scenario::TwoLinkAsync => "two_link_async",
            Scenario::KLink => "k_link",
        }
    }

    fn timing(self) -> Timing {
        match self {
            Scenario::TwoLinkAsync => Timing::Async,
            _ => Timing::Sync,
        }
    }

    /// Analytic value of `metric` for this scenario.
    pub fn analytic(self, metric: Metric, cfg: &SystemConfig) -> Result<f64> {
        let v = match (self, metric) {
            (Scenario::TwoLinkSync, Metric::ReaderBer) => analytic::reader_ber_sync(cfg)?,
            (Scenario::TwoLinkSync, Metric::TagBer) => analytic::tag_ber(cfg)?,
            (Scenario::TwoLinkSync, Metric::Etr) => analytic::etr(cfg)?,
            (Scenario::TwoLinkSync, Metric::Outage) => analytic::outage(cfg)?,
            (Scenario::TwoLinkAsync, Metric::ReaderBer) => analytic::reader_ber_async(cfg)?,
            (Scenario::TwoLinkAsync, Metric::TagBer) => analytic::tag_ber_async(cfg, cfg.delay_offset)?,
            (Scenario::TwoLinkAsync, Metric::Etr) => analytic::etr_async(cfg)?,
            (Scenario::TwoLinkAsync, Metric::Outage) => analytic::outage_async(cfg)?,
            (Scenario::KLink, Metric::ReaderBer) => analytic::reader_ber_klink(cfg)?,
            (Scenario::KLink, Metric::TagBer) => analytic::tag_ber_klink(cfg)?,
            (Scenario::KLink, Metric::Etr) => analytic::klink_et_asymptotics(cfg)?.etr,
            (Scenario::KLink, Metric::Outage) => analytic::klink_et_asymptotics(cfg)?.outage,
        };
        Ok(v)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario {
                name: s.to_string(),
                valid: Scenario::ALL.map(Scenario::name).join(", "),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    ReaderBer,
    TagBer,
    Etr,
    Outage,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::ReaderBer, Metric::TagBer, Metric::Etr, Metric::Outage];

    pub fn name(self) -> &'static str {
        match self {
            Metric::ReaderBer => "reader_ber",
            Metric::TagBer => "tag_ber",
            Metric::Etr => "etr",
            Metric::Outage => "outage",
        }
    }

    fn estimate(self, r: &MetricsReport) -> (f64, f64) {
        let e = match self {
            Metric::ReaderBer => r.reader_ber,
            Metric::TagBer => r.tag_ber,
            Metric::Etr => r.etr,
            Metric::Outage => r.outage_prob,
        };
        (e.mean, e.stderr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Rho,
    N,
    Beta,
    K,
    P,
    E0,
}

impl Param {
    const ALL: [Param; 6] = [Param::Rho, Param::N, Param::Beta, Param::K, Param::P, Param::E0];

    pub fn name(self) -> &'static str {
        match self {
            Param::Rho => "rho",
            Param::N => "N",
            Param::Beta => "beta",
            Param::K => "K",
            Param::P => "P",
            Param::E0 => "E0",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Param::N | Param::K)
    }

    /// `base` with this parameter set to `value`. `N` honours the power
    /// mode; `K` extends or truncates the geometry, new links copying link
    /// 0's own distance and link 1's distances towards link 0.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            Param::Rho => cfg.reflection = value,
            Param::Beta => cfg.delay_offset = value,
            Param::P => cfg.tx_power = value,
            Param::E0 => cfg.energy_requirement = value,
            Param::N => cfg = base.with_seq_len(value as usize),
            Param::K => {
                let k = value as usize;
                cfg.distances = resize_distances(&base.distances, k);
                cfg.links = k;
            }
        }
        cfg.validate().map_err(config_error)?;
        Ok(cfg)
    }
}

fn resize_distances(d: &Distances, k: usize) -> Distances {
    let old = d.reader_tag.dim();
    let resize = |m: &SquareMatrix<f64>, diag: f64, cross: f64| {
        let mut out = SquareMatrix::filled(k, cross);
        for r in 0..k {
            for c in 0..k {
                if r < old && c < old {
                    out[(r, c)] = m[(r, c)];
                } else if r == c {
                    out[(r, c)] = diag;
                }
            }
        }
        out
    };
    Distances {
        reader_tag: resize(&d.reader_tag, d.reader_tag[(0, 0)], d.reader_tag[(1, 0)]),
        tag_tag: resize(&d.tag_tag, 0.0, d.tag_tag[(1, 0)]),
        reader_reader: resize(&d.reader_reader, 0.0, d.reader_reader[(1, 0)]),
    }
}

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: Param,
    pub values: Vec<f64>,
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// `param=start:stop:steps` (inclusive grid) or `param=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rhs) = s
            .split_once('=')
            .ok_or_else(|| Error::Sweep(format!("`{s}` is not of the form param=values")))?;
        let name = name.trim();
        let param = Param::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| {
            Error::Sweep(format!(
                "unknown parameter `{name}`; valid parameters are {}",
                Param::ALL.map(Param::name).join(", ")
            ))
        })?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Sweep(format!("`{t}` is not a number")))
        };
        let mut values = if rhs.contains(':') {
            let parts: Vec<&str> = rhs.split(':').collect();
            let [start, stop, steps] = parts[..] else {
                return Err(Error::Sweep(format!("grid `{rhs}` must be start:stop:steps")));
            };
            let (start, stop) = (num(start)?, num(stop)?);
            let steps: usize = steps
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Sweep(format!("step count `{steps}` must be a positive integer")))?;
            if steps == 1 {
                vec![start]
            } else {
                let h = (stop - start) / (steps - 1) as f64;
                (0..steps).map(|i| if i + 1 == steps { stop } else { start + h * i as f64 }).collect()
            }
        } else {
            rhs.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        if param.integral() {
            for v in &mut values {
                let r = v.round();
                if (*v - r).abs() > 1e-9 * r.abs().max(1.0) || r < 0.0 {
                    return Err(Error::Sweep(format!("{name} takes integer values, got {v}")));
                }
                *v = r;
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Sweep("values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(SweepSpec { param, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub param: String,
    pub param_value: f64,
    pub metric: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub n_trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSettings {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub opts: SimOptions,
}

/// Every metric at every sweep point, ordered by metric then parameter
/// value. Without a sweep the single point is labelled `none = 0`.
/// All points share the seed.
pub fn run_scenario(
    scenario: Scenario,
    base: &SystemConfig,
    sweep: Option<&SweepSpec>,
    run: &RunSettings,
) -> Result<Vec<ResultRow>> {
    let points: Vec<(&str, f64, SystemConfig)> = match sweep {
        None => vec![("none", 0.0, base.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((s.param.name(), v, s.param.apply(base, v)?)))
            .collect::<Result<_>>()?,
    };
    let mut per_point = Vec::with_capacity(points.len());
    for (_, _, cfg) in &points {
        let report = run_parallel(cfg, run.trials, run.seed, scenario.timing(), run.opts, run.workers)?;
        per_point.push(report);
    }
    let mut rows = Vec::with_capacity(points.len() * Metric::ALL.len());
    for metric in Metric::ALL {
        for ((param, value, cfg), report) in points.iter().zip(&per_point) {
            let (mc_mean, mc_stderr) = metric.estimate(report);
            rows.push(ResultRow {
                scenario: scenario.name().to_string(),
                param: param.to_string(),
                param_value: *value,
                metric: metric.name().to_string(),
                analytic: scenario.analytic(metric, cfg)?,
                mc_mean,
                mc_stderr,
                n_trials: report.n_trials,
                seed: report.seed,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_list_sweeps() {
        let s: SweepSpec = "rho=0.1:0.9:9".parse().unwrap();
        assert_eq!(s.param, Param::Rho);
        assert_eq!(s.values.len(), 9);
        assert_eq!(s.values[0], 0.1);
        assert_eq!(s.values[8], 0.9);
        let s: SweepSpec = "N=4000,1000".parse().unwrap();
        assert_eq!(s.values, vec![1000.0, 4000.0]);
        assert!("N=10.5".parse::<SweepSpec>().is_err());
        assert!("gamma=1".parse::<SweepSpec>().is_err());
        assert!("rho=0:1".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn k_resize_keeps_existing_entries() {
        let mut base = SystemConfig::two_link_defaults();
        base.distances.reader_tag[(1, 0)] = 30.0;
        let cfg = Param::K.apply(&base, 4.0).unwrap();
        assert_eq!(cfg.distances.reader_tag[(1, 0)], 30.0);
        assert_eq!(cfg.distances.reader_tag[(3, 0)], 30.0);
        assert_eq!(cfg.distances.reader_tag[(3, 3)], 10.0);
        assert_eq!(cfg.distances.tag_tag[(2, 2)], 0.0);
        let back = Param::K.apply(&cfg, 2.0).unwrap();
        assert_eq!(back.distances, base.distances);
    }

    #[test]
    fn unknown_scenario_lists_valid_names() {
        let err = "three_link".parse::<Scenario>().unwrap_err().to_string();
        for s in Scenario::ALL {
            assert!(err.contains(s.name()), "{err}");
        }
    }
}
