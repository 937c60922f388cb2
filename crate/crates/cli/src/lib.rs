//! Argument parsing and file helpers shared by the command-line tools.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use jnsc_core::netgen::NodeId;
use jnsc_core::pet::PetProfile;
use jnsc_core::rainbow::{DistortionModel, Drf};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON on standard output. A closed pipe is not an error.
pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// `gaussian`, or a path to a JSON distortion-rate document.
pub fn parse_drf(spec: &str) -> Result<Drf> {
    match spec {
        "gaussian" => Ok(Drf::unit_gaussian()),
        path => read_json(Path::new(path)),
    }
}

/// A PET profile from a JSON file holding either `{"levels": [...],
/// "rate": r}` or a bare array of levels (then `rate` is required).
pub fn load_profile(path: &Path, rate: Option<f64>) -> Result<PetProfile> {
    let value: serde_json::Value = read_json(path)?;
    let profile = match value {
        serde_json::Value::Array(_) => {
            let levels: Vec<f64> = serde_json::from_value(value)?;
            let Some(r) = rate else {
                bail!("{} lists only levels; pass --rate", path.display());
            };
            PetProfile::new(levels, r)?
        }
        other => {
            let p: PetProfile = serde_json::from_value(other)?;
            match rate {
                Some(r) if (r - p.rate()).abs() > 1e-12 => PetProfile::new(p.levels().to_vec(), r)?,
                _ => p,
            }
        }
    };
    Ok(profile)
}

/// δ(0..=K) from `cardinality`, a comma list `δ(0),…,δ(K)`, or
/// `pet:<profile.json>`.
pub fn parse_delta(spec: &str, k: usize, rate: f64, drf: &Drf) -> Result<DistortionModel> {
    if spec == "cardinality" {
        return Ok(DistortionModel::cardinality(k));
    }
    if let Some(path) = spec.strip_prefix("pet:") {
        let profile = load_profile(Path::new(path), Some(rate))?;
        if profile.descriptions() != k {
            bail!("profile has {} levels, expected {k}", profile.descriptions());
        }
        return Ok(profile.distortion_model(drf)?);
    }
    let levels = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("δ list {spec:?} is not comma-separated numbers"))?;
    if levels.len() != k + 1 {
        bail!("δ list has {} entries, expected K + 1 = {}", levels.len(), k + 1);
    }
    Ok(DistortionModel::new(levels, drf.clone())?)
}

/// Per-sink counts from a JSON array, or an object keyed by sink id.
pub fn load_counts(path: &Path) -> Result<Vec<usize>> {
    let value: serde_json::Value = read_json(path)?;
    Ok(match value {
        serde_json::Value::Array(_) => serde_json::from_value(value)?,
        other => {
            let map: BTreeMap<NodeId, usize> = serde_json::from_value(other)?;
            map.into_values().collect()
        }
    })
}

/// Per-sink weights in the same two shapes as [`load_counts`].
pub fn load_weights(path: &Path) -> Result<Vec<f64>> {
    let value: serde_json::Value = read_json(path)?;
    Ok(match value {
        serde_json::Value::Array(_) => serde_json::from_value(value)?,
        other => {
            let map: BTreeMap<NodeId, f64> = serde_json::from_value(other)?;
            map.into_values().collect()
        }
    })
}

/// Comma-separated list, e.g. `0,1,2`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().with_context(|| format!("bad list entry {p:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_specs() {
        let g = Drf::unit_gaussian();
        assert_eq!(parse_delta("cardinality", 2, 1.0, &g).unwrap().levels(), &[1.0, 0.5, 0.0]);
        assert_eq!(parse_delta("1, 0.4, 0.1", 2, 1.0, &g).unwrap().levels(), &[1.0, 0.4, 0.1]);
        assert!(parse_delta("1,0.4", 2, 1.0, &g).is_err());
        assert!(parse_delta("1,0.4,0.9", 2, 1.0, &g).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("0,1, 2").unwrap(), vec![0, 1, 2]);
        assert!(parse_list::<u64>("0,x").is_err());
    }
}
