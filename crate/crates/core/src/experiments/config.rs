use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Which stopping rule the search uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Run until the element is maximal in its row and column.
    Converge,
    /// Stop after four steps.
    Fixed4,
    /// At least `k` steps, return the largest element viewed.
    MaxAmongViewed,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Converge => "converge",
            Variant::Fixed4 => "fixed4",
            Variant::MaxAmongViewed => "max-among-viewed",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converge" => Ok(Variant::Converge),
            "fixed4" => Ok(Variant::Fixed4),
            "max-among-viewed" => Ok(Variant::MaxAmongViewed),
            other => Err(Error::param(
                "variant",
                format!("expected converge, fixed4 or max-among-viewed, got `{other}`"),
            )),
        }
    }
}

/// How each trial picks its start column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartRule {
    RandomColumn,
    /// Uniform column, resampled until it is good. The fixed4 variant asks
    /// for `|v_j| > 4 eps ||v||_inf`, the others for `|v_j| > mu1 ||v||_inf`.
    VerifiedGood,
    /// Column of the largest element among `k` random columns.
    ScanK,
}

impl fmt::Display for StartRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StartRule::RandomColumn => "random-column",
            StartRule::VerifiedGood => "verified-good",
            StartRule::ScanK => "scan-k",
        })
    }
}

impl FromStr for StartRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-column" => Ok(StartRule::RandomColumn),
            "verified-good" => Ok(StartRule::VerifiedGood),
            "scan-k" => Ok(StartRule::ScanK),
            other => Err(Error::param(
                "start_policy",
                format!("expected random-column, verified-good or scan-k, got `{other}`"),
            )),
        }
    }
}

pub const DEFAULT_RATIOS: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ratios: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub variant: Variant,
    pub start_policy: StartRule,
    /// Columns scanned (scan-k) or minimum steps (max-among-viewed).
    pub k: usize,
    pub field: Field,
    pub master_seed: u64,
    /// Directory receiving `trials.csv` and `summary.csv`.
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ratios: DEFAULT_RATIOS.to_vec(),
            rows: 100,
            cols: 100,
            trials: 1000,
            variant: Variant::Converge,
            start_policy: StartRule::VerifiedGood,
            k: 4,
            field: Field::Real,
            master_seed: 0,
            output_path: PathBuf::from("."),
        }
    }
}

/// Keys accepted by [`ExperimentConfig::apply`] and in config files.
pub const CONFIG_KEYS: [&str; 10] = [
    "ratios",
    "m",
    "n",
    "trials",
    "variant",
    "start_policy",
    "k",
    "field",
    "master_seed",
    "output_path",
];

impl ExperimentConfig {
    /// Sets one field from its text form.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn count(name: &'static str, value: &str) -> Result<usize> {
            value
                .parse()
                .map_err(|_| Error::param(name, format!("expected a nonnegative integer, got `{value}`")))
        }
        match key {
            "ratios" => self.ratios = parse_ratios(value)?,
            "m" => self.rows = count("m", value)?,
            "n" => self.cols = count("n", value)?,
            "trials" => self.trials = count("trials", value)?,
            "variant" => self.variant = value.parse()?,
            "start_policy" => self.start_policy = value.parse()?,
            "k" => self.k = count("k", value)?,
            "field" => self.field = value.parse()?,
            "master_seed" => {
                self.master_seed = value
                    .parse()
                    .map_err(|_| Error::param("master_seed", format!("expected a 64-bit unsigned integer, got `{value}`")))?
            }
            "output_path" => self.output_path = PathBuf::from(value),
            other => {
                return Err(Error::param(
                    "key",
                    format!("unknown config key `{other}` (known: {})", CONFIG_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Checks the configuration; returns warnings for settings that are
    /// valid but not meaningful.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if self.ratios.is_empty() {
            return Err(Error::param("ratios", "at least one ratio is required"));
        }
        if let Some(x) = self.ratios.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::param("ratios", format!("ratios must be positive, got {x}")));
        }
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::InvalidDimension(format!(
                "experiments need m, n >= 2, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        if self.start_policy == StartRule::ScanK && self.k > self.cols {
            return Err(Error::param(
                "k",
                format!("scan-k needs k <= n = {}, got {}", self.cols, self.k),
            ));
        }
        let mut warnings = Vec::new();
        if self.start_policy == StartRule::VerifiedGood {
            let low: Vec<String> = self.ratios.iter().filter(|&&x| x < 8.0).map(|x| x.to_string()).collect();
            if !low.is_empty() {
                warnings.push(format!(
                    "verified-good start is undefined for ratios below 8 ({}); those points use a random column",
                    low.join(", ")
                ));
            }
        }
        Ok(warnings)
    }
}

fn parse_ratios(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::param("ratios", format!("`{s}` is not a number")))
        })
        .collect()
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::Parse {
                line: idx + 1,
                column: 1,
                message: "expected `key = value`".into(),
            });
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                column: 1,
                message: "missing key before `=`".into(),
            });
        }
        if !CONFIG_KEYS.contains(&key) {
            let column = line.find(key).map_or(1, |p| p + 1);
            return Err(Error::Parse {
                line: idx + 1,
                column,
                message: format!("unknown key `{key}`"),
            });
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_file() {
        let text = "# sweep\nratios = 8, 16\nm = 20\nn=30\nvariant = fixed4 # four steps\nmaster_seed = 11\n\n";
        let mut cfg = ExperimentConfig::default();
        for (k, v) in parse_config_text(text).unwrap() {
            cfg.apply(&k, &v).unwrap();
        }
        assert_eq!(cfg.ratios, vec![8.0, 16.0]);
        assert_eq!((cfg.rows, cfg.cols), (20, 30));
        assert_eq!(cfg.variant, Variant::Fixed4);
        assert_eq!(cfg.master_seed, 11);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(matches!(
            parse_config_text("ratio = 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config_text("m = 3\njunk\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply("variant", "fast").is_err());
        assert!(cfg.apply("ratios", "1,x").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        let warnings = cfg.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.ratios = vec![-1.0];
        assert!(cfg.validate().is_err());
        cfg.ratios = vec![8.0];
        cfg.start_policy = StartRule::ScanK;
        cfg.k = 101;
        assert!(cfg.validate().is_err());
    }
}
