use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use polyconfig_core::admissibility::PiMultiple;
use polyconfig_core::grid::GridSpec;
use polyconfig_core::ThetaChoice;
use serde::{Deserialize, Serialize};

/// A twist angle as typed by the user. Rational multiples of π keep their
/// exact form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub radians: f64,
    pub exact: Option<PiMultiple>,
}

impl Angle {
    pub fn radians(r: f64) -> Self {
        Self {
            radians: r,
            exact: None,
        }
    }

    /// Aligned for 0, staggered for π/N, as named choices or as angles.
    pub fn choice(&self, n: usize) -> Option<ThetaChoice> {
        if let Some(p) = self.exact {
            return match (p.numer(), p.denom()) {
                (0, _) => Some(ThetaChoice::Aligned),
                (1, q) if q == n as i64 => Some(ThetaChoice::Staggered),
                _ => None,
            };
        }
        ThetaChoice::from_angle(n, self.radians)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(p) => write!(f, "{p}"),
            None => write!(f, "{}", self.radians),
        }
    }
}

/// Parses `0`, `pi`, `pi/3`, `1/3pi`, `2pi/5`, `-1/4pi` or plain radians.
impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t: String = s.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.replace('π', "pi").replace('*', "");
        if !t.contains("pi") {
            let r: f64 = t.parse().map_err(|_| format!("cannot parse angle '{s}'"))?;
            if !r.is_finite() {
                return Err(format!("angle '{s}' is not finite"));
            }
            return Ok(Angle::radians(r));
        }
        let int = |x: &str, default: i64| -> Result<i64, String> {
            match x {
                "" => Ok(default),
                "-" => Ok(-default),
                "+" => Ok(default),
                _ => x.parse().map_err(|_| format!("cannot parse angle '{s}'")),
            }
        };
        // Forms: [p[/q]]pi[/q]
        let (before, after) = t.split_once("pi").expect("contains pi");
        let (p, q) = match (before.split_once('/'), after.strip_prefix('/')) {
            (Some((p, q)), None) if after.is_empty() => (int(p, 1)?, int(q, 0)?),
            (None, Some(q)) => (int(before, 1)?, int(q, 0)?),
            (None, None) if after.is_empty() => (int(before, 1)?, 1),
            _ => return Err(format!("cannot parse angle '{s}'")),
        };
        let exact = PiMultiple::new(p, q).map_err(|e| format!("angle '{s}': {e}"))?;
        Ok(Angle {
            radians: PI * p as f64 / q as f64,
            exact: Some(exact),
        })
    }
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.exact {
            Some(_) => s.serialize_str(&self.to_string()),
            None => s.serialize_f64(self.radians),
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(r) => Ok(Angle::radians(r)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    Build,
    SolvePlanar,
    SolveSpatial,
    Height,
    Scan,
    Lemma,
    Certify,
    Admissible,
}

/// Parameters given in a config file; every field may be missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialParams {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub h: Option<f64>,
    pub theta: Option<Angle>,
    pub m: Option<f64>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    #[serde(default)]
    pub params: PartialParams,
    /// Named grids: `b` for scans, `a_starts`/`h_starts` for the spatial
    /// multistart, `a`/`b`/`h` for certificates.
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
    /// Named overrides: `centrality` for check, `random_threshold` and
    /// `random_draws` for certificates.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub suite: Option<String>,
    pub output_path: Option<String>,
    pub format: Option<Format>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Angle {
        s.parse().unwrap()
    }

    #[test]
    fn angle_forms() {
        let third = parse("1/3pi");
        assert_eq!(third.exact, Some(PiMultiple::new(1, 3).unwrap()));
        assert!((third.radians - PI / 3.0).abs() < 1e-15);
        assert_eq!(parse("pi/3").exact, third.exact);
        assert_eq!(parse("pi").exact, Some(PiMultiple::new(1, 1).unwrap()));
        assert_eq!(parse("2pi/5").exact, Some(PiMultiple::new(2, 5).unwrap()));
        assert_eq!(parse("-1/4pi").exact, Some(PiMultiple::new(7, 4).unwrap()));
        assert_eq!(parse("0").radians, 0.0);
        assert_eq!(parse("0.25").exact, None);
        assert!("pi/0".parse::<Angle>().is_err());
        assert!("abc".parse::<Angle>().is_err());
        assert!("1/2pi/3".parse::<Angle>().is_err());
    }

    #[test]
    fn angle_choice() {
        assert_eq!(parse("pi/3").choice(3), Some(ThetaChoice::Staggered));
        assert_eq!(parse("0").choice(3), Some(ThetaChoice::Aligned));
        assert_eq!(parse("pi/4").choice(3), None);
        assert_eq!(Angle::radians(PI / 5.0).choice(5), Some(ThetaChoice::Staggered));
    }

    #[test]
    fn config_parses() {
        let c: RunConfig = serde_json::from_str(
            r#"{"command":"solve-planar","params":{"N":3,"b":1,"theta":"1/3pi"},
                "grids":{"b":{"spacing":"log","start":0.1,"end":10,"points":5}}}"#,
        )
        .unwrap();
        assert_eq!(c.command, Some(Command::SolvePlanar));
        assert_eq!(c.params.theta.unwrap().exact, Some(PiMultiple::new(1, 3).unwrap()));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
    }
}
