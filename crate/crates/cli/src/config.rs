//! Run configuration: command selection, parameters, sweep grids and output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Theta,
    Cs,
    Spectrum,
    Dynamics,
    Project,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CsQuantity {
    Norm,
    Overlap,
    ExpectJ,
    ExpectU,
    Distribution,
    Quantize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectKind {
    Projector,
    Overlap,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theta,
    States,
    Dynamics,
    Projection,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    Int,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Printed,
    Embedded,
}

/// Numeric and categorical parameters. Absent values fall back to
/// per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Sector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub j_max: Option<f64>,
    #[serde(rename = "L0", default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub l0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub l2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub phi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub phi_dot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub z0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub z0_dot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub nu_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub tau_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "number")]
    pub tau_im: Option<f64>,
}

/// Keys a grid may sweep over.
pub const GRID_KEYS: &[&str] = &[
    "l", "phi", "r", "j", "j_max", "L0", "l2", "phi2", "theta", "delta", "phi_dot", "z0", "z0_dot", "t_end", "dt",
    "nu", "nu_im", "tau_re", "tau_im",
];

impl Params {
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        let slot = match key {
            "l" => &mut self.l,
            "phi" => &mut self.phi,
            "r" => &mut self.r,
            "j" => &mut self.j,
            "j_max" => &mut self.j_max,
            "L0" => &mut self.l0,
            "l2" => &mut self.l2,
            "phi2" => &mut self.phi2,
            "theta" => &mut self.theta,
            "delta" => &mut self.delta,
            "phi_dot" => &mut self.phi_dot,
            "z0" => &mut self.z0,
            "z0_dot" => &mut self.z0_dot,
            "t_end" => &mut self.t_end,
            "dt" => &mut self.dt,
            "nu" => &mut self.nu,
            "nu_im" => &mut self.nu_im,
            "tau_re" => &mut self.tau_re,
            "tau_im" => &mut self.tau_im,
            other => return Err(format!("unknown parameter '{other}' (known: {})", GRID_KEYS.join(", "))),
        };
        *slot = Some(value);
        Ok(())
    }

    /// Overlay the values present in `other`.
    pub fn merge(&mut self, other: &Params) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(l, phi, r, s, sign, j, j_max, l0, l2, phi2, theta, delta, phi_dot, z0, z0_dot, t_end, dt, nu, nu_im, tau_re, tau_im);
    }
}

/// Half-open sweep `name = start + (stop - start) k / count`, `k < count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub name: String,
    #[serde(deserialize_with = "required_number")]
    pub start: f64,
    #[serde(deserialize_with = "required_number")]
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / self.count as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !GRID_KEYS.contains(&self.name.as_str()) {
            return Err(format!(
                "grid over unknown parameter '{}' (known: {})",
                self.name,
                GRID_KEYS.join(", ")
            ));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(format!("grid '{}' needs finite bounds", self.name));
        }
        Ok(())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.name, self.start, self.stop, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("grid '{s}' must look like name=start:stop:count"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid '{s}' must look like name=start:stop:count"));
        }
        let g = GridSpec {
            name: name.trim().to_string(),
            start: parse_number(parts[0])?,
            stop: parse_number(parts[1])?,
            count: parts[2]
                .trim()
                .parse()
                .map_err(|_| format!("grid count '{}' is not a non-negative integer", parts[2]))?,
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Destination file; not serialised, so re-running an output reproduces it byte for byte.
    #[serde(default, skip_serializing)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<CsQuantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridSpec>,
    #[serde(default)]
    pub output: Output,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Worker threads; affects scheduling only, never the output.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        match self.command {
            Command::Cs if self.quantity.is_none() => return Err("cs needs a quantity".into()),
            Command::Project if self.projection.is_none() => return Err("project needs a kind".into()),
            _ => {}
        }
        if self.quantity.is_some() && self.command != Command::Cs {
            return Err("'quantity' only applies to the cs command".into());
        }
        if self.projection.is_some() && self.command != Command::Project {
            return Err("'projection' only applies to the project command".into());
        }
        if self.suite.is_some() && self.command != Command::Verify {
            return Err("'suite' only applies to the verify command".into());
        }
        for g in &self.grid {
            g.validate()?;
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(format!("tolerance must be positive, got {t}"));
            }
        }
        if self.workers == Some(0) {
            return Err("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Parse a TOML config, or a JSON document that is either a config or a
    /// previous output carrying one under `"config"`.
    pub fn from_text(text: &str, json: bool) -> Result<Self, String> {
        let cfg: RunConfig = if json {
            let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
            let inner = match value.get("config") {
                Some(c) if value.get("rows").is_some() => c.clone(),
                _ => value,
            };
            serde_json::from_value(inner).map_err(|e| format!("invalid config: {e}"))?
        } else {
            toml::from_str(text).map_err(|e| format!("invalid config: {e}"))?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Number with optional π multiple: `1.5`, `pi`, `-pi`, `3pi`, `3*pi`,
/// `0.5pi`, `pi/2`, `3pi/2`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(format!("'{text}' is not finite")) };
    }
    let bad = || format!("cannot parse '{text}' as a number or multiple of pi");
    let (head, den) = match t.split_once('/') {
        Some((h, d)) => (h.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = head.strip_suffix("pi").ok_or_else(bad)?.trim();
    let coef = coef.strip_suffix('*').unwrap_or(coef).trim();
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(c * std::f64::consts::PI / den)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrText {
    Number(f64),
    Text(String),
}

fn to_number<E: serde::de::Error>(v: NumberOrText) -> Result<f64, E> {
    match v {
        NumberOrText::Number(x) => Ok(x),
        NumberOrText::Text(s) => parse_number(&s).map_err(E::custom),
    }
}

fn number<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    Ok(Some(to_number(NumberOrText::deserialize(d)?)?))
}

fn required_number<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    to_number(NumberOrText::deserialize(d)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number("3pi").unwrap(), 3.0 * PI);
        assert_eq!(parse_number("-pi").unwrap(), -PI);
        assert_eq!(parse_number("3*pi/2").unwrap(), 1.5 * PI);
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!(parse_number("tau").is_err());
        assert!(parse_number("pi/0").is_err());
        assert!(parse_number("nan").is_err());
    }

    #[test]
    fn grids() {
        let g: GridSpec = "phi=0:4pi:4".parse().unwrap();
        assert_eq!(g.values(), vec![0.0, PI, 2.0 * PI, 3.0 * PI]);
        assert!("bogus=0:1:3".parse::<GridSpec>().is_err());
        assert!("r=0:1".parse::<GridSpec>().is_err());
        assert!("r=0:1:0".parse::<GridSpec>().unwrap().values().is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_text("command = \"cs\"\nquantity = \"norm\"\nbogus = 1\n", false).is_err());
        assert!(RunConfig::from_text("command = \"cs\"\nquantity = \"norm\"\n[params]\nbogus = 1\n", false).is_err());
        let cfg = RunConfig::from_text("command = \"cs\"\nquantity = \"norm\"\n[params]\nphi = \"3pi\"\n", false).unwrap();
        assert_eq!(cfg.params.phi, Some(3.0 * PI));
    }
}
