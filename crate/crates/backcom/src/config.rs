//! TOML configuration files.
//!
//! ```toml
//! [system]
//! K = 2
//! N = 1000
//! P_dbm = 17            # or P = 0.05
//! sigma2_reader_dbm = -100
//! channel_model = "rayleigh"
//!
//! [distances]
//! d_reader_tag = [[10, 22], [22, 10]]
//!
//! [static_channels]     # only read when channel_model = "static"
//! f = [[[0.05, 0.0], [0.01, 0.0]], [[0.01, 0.0], [0.05, 0.0]]]
//! g = [[[0.0, 0.0], [0.003, 0.0]], [[0.003, 0.0], [0.0, 0.0]]]
//! ```
//!
//! Every key is optional; missing keys keep the symmetric defaults for `K`.

use std::path::Path;

use backcom_core::topology::{
    dbm_to_watts, ChannelModel, ChannelRealization, Distances, PowerMode, SquareMatrix, SystemConfig,
};
use backcom_core::Error as CoreError;
use num_complex::Complex64;
use toml::{Table, Value};

use crate::error::{Error, Result};

const SECTIONS: [&str; 3] = ["system", "distances", "static_channels"];
const SYSTEM_KEYS: [&str; 16] = [
    "K",
    "N",
    "T",
    "P",
    "P_dbm",
    "rho",
    "eta",
    "sigma2_reader",
    "sigma2_reader_dbm",
    "sigma2_tag",
    "sigma2_tag_dbm",
    "lambda",
    "E0",
    "beta",
    "channel_model",
    "power_mode",
];
const DISTANCE_KEYS: [&str; 3] = ["d_reader_tag", "d_tag_tag", "d_reader_reader"];
const CHANNEL_KEYS: [&str; 3] = ["f", "g", "h"];

/// Parse a configuration file and apply `key=value` overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<SystemConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    parse(&text, overrides)
}

/// Like [`load`] but from a string.
pub fn parse(text: &str, overrides: &[String]) -> Result<SystemConfig> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    build(&table)
}

/// `key=value` or `section.key=value`; bare keys go to `[system]`. The
/// value is read as a TOML value, falling back to a plain string.
fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("override `{spec}` is not of the form key=value")))?;
    let (section, key) = key.trim().split_once('.').unwrap_or(("system", key.trim()));
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    let sec = entry
        .as_table_mut()
        .ok_or_else(|| Error::config(section, "is not a section"))?;
    sec.insert(key.to_string(), value);
    Ok(())
}

fn section<'a>(table: &'a Table, name: &str, keys: &[&str]) -> Result<Option<&'a Table>> {
    let Some(v) = table.get(name) else {
        return Ok(None);
    };
    let t = v.as_table().ok_or_else(|| Error::config(name, "must be a section"))?;
    if let Some(k) = t.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(Error::config(format!("{name}.{k}"), "unknown key"));
    }
    Ok(Some(t))
}

fn number(t: &Table, sec: &str, key: &str) -> Result<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(Error::config(format!("{sec}.{key}"), "must be a number")),
    }
}

fn count(t: &Table, sec: &str, key: &str) -> Result<Option<usize>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
        Some(_) => Err(Error::config(format!("{sec}.{key}"), "must be a non-negative integer")),
    }
}

/// A power given either in watts under `key` or in dBm under `key_dbm`.
fn power(t: &Table, key: &str) -> Result<Option<f64>> {
    let dbm_key = format!("{key}_dbm");
    match (number(t, "system", key)?, number(t, "system", &dbm_key)?) {
        (Some(_), Some(_)) => Err(Error::config(
            format!("system.{dbm_key}"),
            format!("conflicts with system.{key}"),
        )),
        (Some(w), None) => Ok(Some(w)),
        (None, Some(dbm)) => Ok(Some(dbm_to_watts(dbm))),
        (None, None) => Ok(None),
    }
}

fn word<'a>(t: &'a Table, key: &str) -> Result<Option<&'a str>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(Error::config(format!("system.{key}"), "must be a string")),
    }
}

fn build(table: &Table) -> Result<SystemConfig> {
    if let Some(k) = table.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(Error::config(k.as_str(), "unknown section"));
    }
    let empty = Table::new();
    let sys = section(table, "system", &SYSTEM_KEYS)?.unwrap_or(&empty);
    let links = count(sys, "system", "K")?.unwrap_or(2);
    let mut cfg = SystemConfig::symmetric_defaults(links);

    if let Some(n) = count(sys, "system", "N")? {
        cfg.seq_len = n;
    }
    if let Some(t) = number(sys, "system", "T")? {
        // The default requirement is fixed per unit time.
        cfg.energy_requirement *= t / cfg.symbol_duration;
        cfg.symbol_duration = t;
    }
    if let Some(p) = power(sys, "P")? {
        cfg.tx_power = p;
    }
    if let Some(s) = power(sys, "sigma2_reader")? {
        cfg.noise_reader = s;
    }
    if let Some(s) = power(sys, "sigma2_tag")? {
        cfg.noise_tag = s;
    }
    for (key, field) in [
        ("rho", &mut cfg.reflection),
        ("eta", &mut cfg.harvest_efficiency),
        ("lambda", &mut cfg.path_loss_exp),
        ("E0", &mut cfg.energy_requirement),
        ("beta", &mut cfg.delay_offset),
    ] {
        if let Some(v) = number(sys, "system", key)? {
            *field = v;
        }
    }
    if let Some(m) = word(sys, "channel_model")? {
        cfg.channel_model = match m.to_ascii_lowercase().as_str() {
            "rayleigh" => ChannelModel::Rayleigh,
            "static" => ChannelModel::Static,
            _ => return Err(Error::config("system.channel_model", "must be \"rayleigh\" or \"static\"")),
        };
    }
    if let Some(m) = word(sys, "power_mode")? {
        cfg.power_mode = match m.to_ascii_uppercase().as_str() {
            "FCP" => PowerMode::Fcp,
            "FCE" => PowerMode::Fce,
            _ => return Err(Error::config("system.power_mode", "must be \"FCP\" or \"FCE\"")),
        };
    }

    if let Some(d) = section(table, "distances", &DISTANCE_KEYS)? {
        let Distances {
            reader_tag,
            tag_tag,
            reader_reader,
        } = &mut cfg.distances;
        for (key, dst) in [
            ("d_reader_tag", reader_tag),
            ("d_tag_tag", tag_tag),
            ("d_reader_reader", reader_reader),
        ] {
            if let Some(v) = d.get(key) {
                *dst = matrix(v, &format!("distances.{key}"), links, real)?;
            }
        }
    }

    if let Some(c) = section(table, "static_channels", &CHANNEL_KEYS)? {
        let mut ch = ChannelRealization::zeros(links);
        for (key, dst) in [
            ("f", &mut ch.forward),
            ("g", &mut ch.tag_tag),
            ("h", &mut ch.reader_reader),
        ] {
            match c.get(key) {
                Some(v) => *dst = matrix(v, &format!("static_channels.{key}"), links, complex)?,
                None if key == "h" => {}
                None => return Err(Error::config(format!("static_channels.{key}"), "missing")),
            }
        }
        cfg.static_coeffs = Some(ch);
    }

    cfg.validate().map_err(config_error)?;
    Ok(cfg)
}

/// Attach the file key to a validation failure.
pub(crate) fn config_error(e: CoreError) -> Error {
    match e {
        CoreError::InvalidConfig { field, reason } => {
            let sec = match field {
                f if f.starts_with("d_") => "distances",
                "static_coeffs" => "static_channels",
                _ => "system",
            };
            Error::config(format!("{sec}.{field}"), reason)
        }
        CoreError::MissingStaticCoefficients => Error::config(
            "static_channels",
            "required when system.channel_model = \"static\"",
        ),
        other => Error::Model(other),
    }
}

fn real(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn complex(v: &Value) -> Option<Complex64> {
    match v.as_array()?.as_slice() {
        [re, im] => Some(Complex64::new(real(re)?, real(im)?)),
        _ => None,
    }
}

fn matrix<T: Clone>(v: &Value, key: &str, dim: usize, entry: fn(&Value) -> Option<T>) -> Result<SquareMatrix<T>> {
    let shape = || Error::config(key, format!("must be a {dim} x {dim} array"));
    let rows = v.as_array().ok_or_else(shape)?;
    if rows.len() != dim {
        return Err(shape());
    }
    let mut out = Vec::with_capacity(dim);
    for row in rows {
        let row = row.as_array().filter(|r| r.len() == dim).ok_or_else(shape)?;
        let parsed: Option<Vec<T>> = row.iter().map(entry).collect();
        out.push(parsed.ok_or_else(|| Error::config(key, "has a malformed entry"))?);
    }
    SquareMatrix::from_rows(&out).ok_or_else(shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse("", &[]).unwrap(), SystemConfig::two_link_defaults());
    }

    #[test]
    fn dbm_keys_convert() {
        let cfg = parse("[system]\nP_dbm = 17\nsigma2_tag_dbm = -90\n", &[]).unwrap();
        assert!((cfg.tx_power - 0.0501187).abs() < 1e-6);
        assert!((cfg.noise_tag - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn offending_key_is_named() {
        let err = parse("[system]\nrho = 1.5\n", &[]).unwrap_err();
        assert!(err.to_string().contains("system.rho"), "{err}");
        let err = parse("[system]\nrhoo = 0.5\n", &[]).unwrap_err();
        assert!(err.to_string().contains("system.rhoo"), "{err}");
        let err = parse("[distances]\nd_reader_tag = [[10, 22]]\n", &[]).unwrap_err();
        assert!(err.to_string().contains("distances.d_reader_tag"), "{err}");
        let err = parse("[system]\nP = 1\nP_dbm = 30\n", &[]).unwrap_err();
        assert!(err.to_string().contains("system.P_dbm"), "{err}");
        let err = parse("[system]\nchannel_model = \"static\"\n", &[]).unwrap_err();
        assert!(err.to_string().contains("static_channels"), "{err}");
    }

    #[test]
    fn overrides_win() {
        let cfg = parse("[system]\nrho = 0.3\n", &["rho=0.7".into(), "N = 64".into()]).unwrap();
        assert_eq!(cfg.reflection, 0.7);
        assert_eq!(cfg.seq_len, 64);
        let cfg = parse("", &["channel_model=static".into(), "static_channels.f=[[[0.1,0],[0,0]],[[0,0],[0.1,0]]]".into(), "static_channels.g=[[[0,0],[0,0]],[[0,0],[0,0]]]".into()]).unwrap();
        assert_eq!(cfg.static_coeffs.unwrap().forward[(0, 0)], Complex64::new(0.1, 0.0));
    }
}
