//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use hyperband_core::discretization::MIN_RESOLUTION;

/// A validation failure, optionally pinned to a line of the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Fixed(f64),
    Auto,
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Fixed(e) => write!(f, "{e}"),
            Epsilon::Auto => write!(f, "auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub radius: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    pub cap: f64,
    pub n_t: usize,
    pub n_phi: usize,
    pub omega: f64,
    pub epsilon: Epsilon,
    pub k: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Spacings for `sweep`.
    pub sweep_eps: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            radius: 6.0,
            n_rho: 200,
            n_theta: 256,
            cap: 4.0,
            n_t: 128,
            n_phi: 256,
            omega: 1.0,
            epsilon: Epsilon::Auto,
            k: 2.0,
            max_iter: 25,
            tol: 1e-10,
            seed: 42,
            output_dir: PathBuf::from("out"),
            sweep_eps: Vec::new(),
        }
    }
}

const KEYS: &[&str] =
    &["R", "n_rho", "n_theta", "T", "n_t", "n_phi", "omega", "epsilon", "k", "max_iter", "tol", "seed", "output_dir", "sweep_eps"];

fn number<T: std::str::FromStr>(value: &str, key: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::at(line, format!("cannot parse `{value}` as a value for `{key}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<(&str, usize)> = Vec::new();
        let mut lines = std::collections::HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::at(line, format!("unknown key `{key}`")));
            };
            if let Some((_, first)) = seen.iter().find(|(k, _)| *k == known) {
                return Err(ConfigError::at(line, format!("duplicate key `{key}` (first set on line {first})")));
            }
            seen.push((known, line));
            lines.insert(known, line);
            match known {
                "R" => cfg.radius = number(value, key, line)?,
                "n_rho" => cfg.n_rho = number(value, key, line)?,
                "n_theta" => cfg.n_theta = number(value, key, line)?,
                "T" => cfg.cap = number(value, key, line)?,
                "n_t" => cfg.n_t = number(value, key, line)?,
                "n_phi" => cfg.n_phi = number(value, key, line)?,
                "omega" => cfg.omega = number(value, key, line)?,
                "epsilon" => {
                    cfg.epsilon = if value == "auto" { Epsilon::Auto } else { Epsilon::Fixed(number(value, key, line)?) }
                }
                "k" => cfg.k = number(value, key, line)?,
                "max_iter" => cfg.max_iter = number(value, key, line)?,
                "tol" => cfg.tol = number(value, key, line)?,
                "seed" => cfg.seed = number(value, key, line)?,
                "output_dir" => {
                    if value.is_empty() {
                        return Err(ConfigError::at(line, "output_dir is empty"));
                    }
                    cfg.output_dir = PathBuf::from(value)
                }
                "sweep_eps" => {
                    cfg.sweep_eps = value
                        .split(',')
                        .map(|v| number::<f64>(v.trim(), key, line))
                        .collect::<Result<_, _>>()?
                }
                _ => unreachable!(),
            }
        }
        let at = |key: &str| lines.get(key).copied();
        cfg.validate_with(&at)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, text))
    }

    fn validate_with(&self, at: &dyn Fn(&str) -> Option<usize>) -> Result<(), ConfigError> {
        let fail = |key: &str, msg: String| match at(key) {
            Some(l) => ConfigError::at(l, msg),
            None => ConfigError::global(msg),
        };
        for (key, v) in [("n_rho", self.n_rho), ("n_theta", self.n_theta), ("n_t", self.n_t), ("n_phi", self.n_phi)] {
            if v < MIN_RESOLUTION {
                return Err(fail(key, format!("{key} = {v} is below the minimum resolution {MIN_RESOLUTION}")));
            }
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(fail("R", format!("R = {} must be positive", self.radius)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(fail("omega", format!("omega = {} must be positive", self.omega)));
        }
        if !(self.cap >= 2.0 * self.omega) {
            return Err(fail("T", format!("T = {} must be at least 2 omega = {}", self.cap, 2.0 * self.omega)));
        }
        if let Epsilon::Fixed(e) = self.epsilon {
            if !(e > 0.0 && e <= 1.0) {
                return Err(fail("epsilon", format!("epsilon = {e} must lie in (0, 1]")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(fail("tol", format!("tol = {} must be positive", self.tol)));
        }
        if !(self.k > 1.0) {
            return Err(fail("k", format!("k = {} must exceed 1", self.k)));
        }
        if self.max_iter == 0 {
            return Err(fail("max_iter", "max_iter must be at least 1".into()));
        }
        if let Some(e) = self.sweep_eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(fail("sweep_eps", format!("sweep spacing {e} must lie in (0, 1]")));
        }
        Ok(())
    }

    /// `key = value` lines in a canonical order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let sweep: Vec<String> = self.sweep_eps.iter().map(|e| e.to_string()).collect();
        vec![
            ("R".into(), self.radius.to_string()),
            ("n_rho".into(), self.n_rho.to_string()),
            ("n_theta".into(), self.n_theta.to_string()),
            ("T".into(), self.cap.to_string()),
            ("n_t".into(), self.n_t.to_string()),
            ("n_phi".into(), self.n_phi.to_string()),
            ("omega".into(), self.omega.to_string()),
            ("epsilon".into(), self.epsilon.to_string()),
            ("k".into(), self.k.to_string()),
            ("max_iter".into(), self.max_iter.to_string()),
            ("tol".into(), self.tol.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("output_dir".into(), self.output_dir.display().to_string()),
            ("sweep_eps".into(), sweep.join(", ")),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_comments() {
        let cfg = ExperimentConfig::parse("# defaults\n\nomega = 1 # band\nepsilon = auto\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let cfg = ExperimentConfig::parse("epsilon = 0.4\nsweep_eps = 0.4, 0.2\nseed=7").unwrap();
        assert_eq!(cfg.epsilon, Epsilon::Fixed(0.4));
        assert_eq!(cfg.sweep_eps, vec![0.4, 0.2]);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn errors_name_the_line() {
        let e = ExperimentConfig::parse("R = 6\nfoo = 1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = ExperimentConfig::parse("n_rho = 12\nn_rho = 14\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("line 1"));
        let e = ExperimentConfig::parse("omega = 1\n\nT = 1.5\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = ExperimentConfig::parse("tol = x\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(ExperimentConfig::parse("just text\n").is_err());
    }

    #[test]
    fn validation_rules() {
        for bad in ["epsilon = 0", "epsilon = 1.5", "tol = 0", "n_phi = 4", "k = 1", "max_iter = 0", "R = -1"] {
            assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
        }
        assert!(ExperimentConfig::parse("epsilon = 1\nomega = 2\n").is_ok());
        // The cap may not be specified, so the default T = 4 is checked against omega.
        let e = ExperimentConfig::parse("omega = 3\n").unwrap_err();
        assert_eq!(e.line, None);
    }
}
