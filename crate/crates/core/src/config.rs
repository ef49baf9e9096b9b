//! Flat `key = value` experiment descriptions.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//! protocol = p1            # p1 | p2 | p2-extracted | augmented
//! n_per_setting = 100000
//! settings = 0, pi/4, pi/8, 3pi/8
//! windows = 0.001, 0.01, 0.1, 1.0
//! ```
//!
//! Angles are radians; a bare number or a multiple of `pi` such as `3pi/8`
//! or `-pi/4` is accepted. Windows are fractions of the time scale `T`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelConfig};
use crate::postselect::CoincidenceWindow;
use crate::protocols::{SettingsQuadruple, SettingsSchedule};

pub const DEFAULT_WINDOWS: [f64; 7] = [0.00025, 0.001, 0.004, 0.016, 0.064, 0.25, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    P1,
    P2,
    P2Extracted,
    Augmented,
}

/// Response map used by the augmented protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    Local,
    Maximal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub protocol: Protocol,
    pub response: ResponseKind,
    pub n_per_setting: usize,
    pub settings: SettingsQuadruple,
    pub schedule: SettingsSchedule,
    pub time_scale: f64,
    pub delay_exponent: u32,
    pub r_min: f64,
    /// Ascending, in units of `time_scale`.
    pub windows: Vec<f64>,
    /// Where data files go. Not part of the echoed configuration.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            protocol: Protocol::P1,
            response: ResponseKind::Local,
            n_per_setting: 10_000,
            settings: SettingsQuadruple::default(),
            schedule: SettingsSchedule::Block,
            time_scale: 1000.0,
            delay_exponent: 2,
            r_min: 0.0,
            windows: DEFAULT_WINDOWS.to_vec(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            time_scale: self.time_scale,
            delay_exponent: self.delay_exponent,
            r_min: self.r_min,
        }
    }

    pub fn coincidence_windows(&self) -> Vec<CoincidenceWindow> {
        self.windows
            .iter()
            .map(|&w| CoincidenceWindow { width: w * self.time_scale })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_setting == 0 {
            return Err(Error::Config("n_per_setting must be at least 1".into()));
        }
        validate_windows(&self.windows)?;
        self.model().validate()
    }
}

fn validate_windows(windows: &[f64]) -> Result<()> {
    if windows.is_empty() {
        return Err(Error::Config("at least one window is required".into()));
    }
    if let Some(w) = windows.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::Config(format!("window {w} must be a nonnegative number")));
    }
    if windows.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Config("windows must be strictly ascending".into()));
    }
    Ok(())
}

/// Parses a config document; every key is optional.
pub fn parse_config(source: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                key: line.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let fail = |message: String| Error::Parse {
            line: line_no,
            key: key.to_string(),
            message,
        };
        if !seen.insert(key.to_string()) {
            return Err(fail("key given twice".into()));
        }
        apply(&mut cfg, key, value).map_err(|e| match e {
            Error::Config(m) | Error::Domain(m) => fail(m),
            other => other,
        })?;
        // range checks that belong to a single key
        let check = match key {
            "time_scale" => model::validate_time_scale(cfg.time_scale),
            "delay_exponent" => model::validate_delay_exponent(cfg.delay_exponent),
            "r_min" => model::validate_r_min(cfg.r_min),
            "windows" => validate_windows(&cfg.windows),
            "n_per_setting" if cfg.n_per_setting == 0 => {
                Err(Error::Config("must be at least 1".into()))
            }
            _ => Ok(()),
        };
        check.map_err(|e| match e {
            Error::Config(m) => fail(m),
            other => other,
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "seed" => cfg.seed = parse_num(value)?,
        "protocol" => {
            cfg.protocol = match value {
                "p1" => Protocol::P1,
                "p2" => Protocol::P2,
                "p2-extracted" => Protocol::P2Extracted,
                "augmented" => Protocol::Augmented,
                _ => return Err(Error::Config(format!("unknown protocol `{value}`"))),
            }
        }
        "response" => {
            cfg.response = match value {
                "local" => ResponseKind::Local,
                "maximal" => ResponseKind::Maximal,
                _ => return Err(Error::Config(format!("unknown response `{value}`"))),
            }
        }
        "schedule" => {
            cfg.schedule = match value {
                "block" => SettingsSchedule::Block,
                "random" => SettingsSchedule::Random,
                _ => return Err(Error::Config(format!("unknown schedule `{value}`"))),
            }
        }
        "n_per_setting" => cfg.n_per_setting = parse_num(value)?,
        "time_scale" => cfg.time_scale = parse_num(value)?,
        "delay_exponent" => cfg.delay_exponent = parse_num(value)?,
        "r_min" => cfg.r_min = parse_num(value)?,
        "windows" => {
            cfg.windows = split_list(value)
                .map(parse_num)
                .collect::<Result<Vec<f64>>>()?
        }
        "settings" => {
            let angles = split_list(value).map(parse_angle).collect::<Result<Vec<_>>>()?;
            let [a1, a1p, a2, a2p] = angles[..] else {
                return Err(Error::Config(format!("expected 4 angles, got {}", angles.len())));
            };
            cfg.settings = SettingsQuadruple { a1, a1p, a2, a2p };
        }
        "a1" => cfg.settings.a1 = parse_angle(value)?,
        "a1p" => cfg.settings.a1p = parse_angle(value)?,
        "a2" => cfg.settings.a2 = parse_angle(value)?,
        "a2p" => cfg.settings.a2p = parse_angle(value)?,
        "output_dir" => {
            if value.is_empty() {
                return Err(Error::Config("empty path".into()));
            }
            cfg.output_dir = PathBuf::from(value);
        }
        _ => return Err(Error::Config("unknown key".into())),
    }
    Ok(())
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim)
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("malformed value `{value}`")))
}

/// A radian value: a plain number or `[-][k][*]pi[/m]`.
pub fn parse_angle(value: &str) -> Result<f64> {
    let v = value.trim();
    let lower = v.to_ascii_lowercase();
    if lower.ends_with("deg") || lower.ends_with("degrees") || v.contains('°') {
        return Err(Error::Config(format!("`{v}`: angles are radians only")));
    }
    if let Ok(x) = v.parse::<f64>() {
        if x.is_finite() {
            return Ok(x);
        }
    }
    let Some(pos) = lower.find("pi") else {
        return Err(Error::Config(format!("malformed angle `{v}`")));
    };
    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let head = head.trim().trim_end_matches('*').trim();
    let factor = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("malformed angle `{v}`")))?,
    };
    let divisor = match tail.trim() {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .and_then(|d| d.trim().parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| Error::Config(format!("malformed angle `{v}`")))?,
    };
    Ok(factor * PI / divisor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), ExperimentConfig::default());
        let d = ExperimentConfig::default();
        assert_eq!(d.delay_exponent, 2);
        assert_eq!(d.r_min, 0.0);
        assert_eq!(d.time_scale, 1000.0);
        assert_eq!(d.windows, DEFAULT_WINDOWS);
        assert_eq!(d.schedule, SettingsSchedule::Block);
    }

    #[test]
    fn narrow_r_range_variant() {
        let c = parse_config("r_min = 0.99").unwrap();
        assert_eq!(c.r_min, 0.99);
        assert_eq!(c.model().r_min, 0.99);
    }

    #[test]
    fn windows_must_ascend() {
        match parse_config("seed = 3\nwindows = 1.0, 0.5\n") {
            Err(Error::Parse { line, key, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(key, "windows");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_config("windows = 0.5, 0.5").is_err());
    }

    #[test]
    fn errors_name_key_and_line() {
        for (doc, want_line, want_key) in [
            ("colour = red", 1, "colour"),
            ("\nseed = x", 2, "seed"),
            ("delay_exponent = 3", 1, "delay_exponent"),
            ("r_min = 1.0", 1, "r_min"),
            ("seed = 1\nseed = 2", 2, "seed"),
            ("settings = 0, 1, 2", 1, "settings"),
            ("a1 = 45deg", 1, "a1"),
            ("protocol = p3", 1, "protocol"),
            ("just words", 1, "just words"),
            ("n_per_setting = 0", 1, "n_per_setting"),
            ("time_scale = -1", 1, "time_scale"),
        ] {
            match parse_config(doc) {
                Err(Error::Parse { line, key, .. }) => {
                    assert_eq!((line, key.as_str()), (want_line, want_key), "{doc}");
                }
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn full_document() {
        let doc = "\
seed = 42
protocol = p2-extracted   # trailing comment
schedule = random
n_per_setting = 500
settings = 0, pi/4, pi/8, 3pi/8
time_scale = 10
delay_exponent = 4
windows = 0.01, 1
output_dir = /tmp/x
";
        let c = parse_config(doc).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.protocol, Protocol::P2Extracted);
        assert_eq!(c.schedule, SettingsSchedule::Random);
        assert_eq!(c.settings, SettingsQuadruple::default());
        assert_eq!(c.delay_exponent, 4);
        assert_eq!(c.coincidence_windows()[0].width, 0.1);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn angle_forms() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("-pi/8").unwrap(), -FRAC_PI_8);
        assert!((parse_angle("3*pi/8").unwrap() - 3.0 * FRAC_PI_8).abs() < 1e-15);
        for bad in ["90°", "1.2 degrees", "pie", "pi/0", "tau", "nan"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }
}
