//! Run configuration: defaults, then a `key = value` file, then flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use parabolic_core::render::MAX_RESOLUTION;

pub const CONFIG_ENV: &str = "PARABOLIC_LAB_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: u32,
    pub c: Option<Complex64>,
    pub max_period: usize,
    pub model: Option<String>,
    pub height: f64,
    pub samples: usize,
    pub tol_atlas: f64,
    pub tol_fatou: f64,
    pub tol_compare: f64,
    /// Distance within which a parameter given on the command line must
    /// match the located parabolic parameter.
    pub tol_param: f64,
    pub sep: f64,
    pub grid_density: usize,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub window: [f64; 4],
    pub res: usize,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 2,
            c: None,
            max_period: 3,
            model: None,
            height: parabolic_core::horn::DEFAULT_M,
            samples: parabolic_core::horn::DEFAULT_K,
            tol_atlas: parabolic_core::atlas::NEWTON_TOL,
            tol_fatou: parabolic_core::fatou::FATOU_TOL,
            tol_compare: parabolic_core::horn::TOL_COMPARE,
            tol_param: 1e-8,
            sep: parabolic_core::horn::SEPARATION,
            grid_density: 6,
            max_iter: parabolic_core::render::DEFAULT_MAX_ITER,
            out: None,
            window: [-2.0, -2.0, 2.0, 2.0],
            res: 256,
            jobs: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "d",
    "c",
    "max-period",
    "model",
    "M",
    "K",
    "tol-atlas",
    "tol-fatou",
    "tol-compare",
    "tol-param",
    "sep",
    "grid-density",
    "max-iter",
    "out",
    "window",
    "res",
    "jobs",
];

pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [re, im] = parts[..] else {
        return Err(format!("expected re,im, got {text:?}"));
    };
    let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let z = Complex64::new(parse(re)?, parse(im)?);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("{text:?} is not finite"));
    }
    Ok(z)
}

pub fn parse_window(text: &str) -> Result<[f64; 4], String> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let [x0, y0, x1, y1] = values[..] else {
        return Err(format!("expected x0,y0,x1,y1, got {text:?}"));
    };
    Ok([x0, y0, x1, y1])
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| format!("{key} = {value:?}: {e}"))
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "d" => self.d = number(key, value)?,
            "c" => self.c = Some(parse_complex(value)?),
            "max-period" => self.max_period = number(key, value)?,
            "model" => self.model = Some(value.trim().to_string()),
            "M" => self.height = number(key, value)?,
            "K" => self.samples = number(key, value)?,
            "tol-atlas" => self.tol_atlas = number(key, value)?,
            "tol-fatou" => self.tol_fatou = number(key, value)?,
            "tol-compare" => self.tol_compare = number(key, value)?,
            "tol-param" => self.tol_param = number(key, value)?,
            "sep" => self.sep = number(key, value)?,
            "grid-density" => self.grid_density = number(key, value)?,
            "max-iter" => self.max_iter = number(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "window" => self.window = parse_window(value)?,
            "res" => self.res = number(key, value)?,
            "jobs" => self.jobs = Some(number(key, value)?),
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (key, value) in parse_file(&text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.d < 2 {
            return Err(format!("degree must be at least 2, got {}", self.d));
        }
        if self.max_period == 0 || self.max_period > 6 {
            return Err(format!("max period must be in 1..=6, got {}", self.max_period));
        }
        let tolerances = [
            ("tol-atlas", self.tol_atlas),
            ("tol-fatou", self.tol_fatou),
            ("tol-compare", self.tol_compare),
            ("tol-param", self.tol_param),
            ("sep", self.sep),
        ];
        for (name, value) in tolerances {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("{name} must be positive, got {value}"));
            }
        }
        if self.sep < self.tol_compare {
            return Err("sep must not be below tol-compare".into());
        }
        if !self.samples.is_power_of_two() || self.samples < 64 {
            return Err(format!("K must be a power of two >= 64, got {}", self.samples));
        }
        if !(self.height >= parabolic_core::horn::M_MIN) {
            return Err(format!("M must be at least {}, got {}", parabolic_core::horn::M_MIN, self.height));
        }
        if self.res == 0 || self.res > MAX_RESOLUTION {
            return Err(format!("res must be in 1..={MAX_RESOLUTION}, got {}", self.res));
        }
        let [x0, y0, x1, y1] = self.window;
        if !(x0 < x1 && y0 < y1) {
            return Err(format!("window {:?} is empty", self.window));
        }
        if self.grid_density == 0 || self.max_iter == 0 || self.jobs == Some(0) {
            return Err("grid-density, max-iter and jobs must be positive".into());
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key = value", number + 1));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(format!("config line {}: unknown key {key:?}", number + 1));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_and_window_parsing() {
        assert_eq!(parse_complex("-0.75,0").unwrap(), Complex64::new(-0.75, 0.0));
        assert_eq!(parse_complex(" 1 , -2 ").unwrap(), Complex64::new(1.0, -2.0));
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("nan,0").is_err());
        assert_eq!(parse_window("-2,-1,2,1").unwrap(), [-2.0, -1.0, 2.0, 1.0]);
        assert!(parse_window("0,0,1").is_err());
    }

    #[test]
    fn file_parsing() {
        let map = parse_file("# comment\nd = 3\n\nM=2.5 # trailing\n").unwrap();
        assert_eq!(map["d"], "3");
        assert_eq!(map["M"], "2.5");
        assert!(parse_file("bogus = 1").is_err());
        assert!(parse_file("d 3").is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let mut config = RunConfig::default();
        config.set("d", "1").unwrap();
        assert!(config.validate().is_err());
        let mut config = RunConfig::default();
        config.set("K", "100").unwrap();
        assert!(config.validate().is_err());
        let mut config = RunConfig::default();
        config.set("tol-fatou", "0").unwrap();
        assert!(config.validate().is_err());
    }
}
