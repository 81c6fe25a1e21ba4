//! Parsing of flag values and of profile files.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use quasiflow_core::flow::ProfileKind;
use quasiflow_core::stationary::StationaryProfile;
use quasiflow_core::{Field, RadialGrid};

use crate::error::CliError;
use crate::record::{self, RunRecord};

/// `gauss:σ`, `bump:σ` or `file:path`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Gauss(f64),
    Bump(f64),
    /// Two columns `r,value`, linearly interpolated onto the grid.
    File(PathBuf),
}

impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("profile `{s}` is not of the form kind:value"))?;
        let width = || {
            arg.parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w > 0.0)
                .ok_or_else(|| format!("profile width `{arg}` is not a positive number"))
        };
        match kind {
            "gauss" => Ok(ProfileSpec::Gauss(width()?)),
            "bump" => Ok(ProfileSpec::Bump(width()?)),
            "file" if !arg.is_empty() => Ok(ProfileSpec::File(PathBuf::from(arg))),
            _ => Err(format!("unknown profile `{s}`; expected gauss:σ, bump:σ or file:path")),
        }
    }
}

impl std::fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileSpec::Gauss(w) => write!(f, "gauss:{w}"),
            ProfileSpec::Bump(w) => write!(f, "bump:{w}"),
            ProfileSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl ProfileSpec {
    pub fn to_kind(&self, grid: &RadialGrid) -> Result<ProfileKind, CliError> {
        match self {
            ProfileSpec::Gauss(w) => Ok(ProfileKind::Gaussian { width: *w }),
            ProfileSpec::Bump(w) => Ok(ProfileKind::Bump { width: *w }),
            ProfileSpec::File(path) => {
                let bytes = std::fs::read(path).map_err(|e| {
                    CliError::Precondition(format!("reading {}: {e}", path.display()))
                })?;
                let cols = record::read_columns(&bytes, 2)
                    .map_err(|e| CliError::Precondition(format!("{}: {e}", path.display())))?;
                let values = interpolate(&cols[0], &cols[1], grid.nodes())
                    .map_err(|e| CliError::Precondition(format!("{}: {e}", path.display())))?;
                Ok(ProfileKind::Table(values))
            }
        }
    }
}

/// Piecewise-linear interpolation of `(r, v)` samples onto `nodes`; zero
/// beyond the last sample, which also pins the Dirichlet value.
pub fn interpolate(r: &[f64], v: &[f64], nodes: &[f64]) -> Result<Vec<f64>, String> {
    if r.len() < 2 {
        return Err("need at least two samples".into());
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err("radii must be strictly increasing".into());
    }
    if r[0] > 0.0 {
        return Err("samples must start at r = 0".into());
    }
    let last = nodes.len() - 1;
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == last || x > r[r.len() - 1] {
                return 0.0;
            }
            let k = r.partition_point(|&ri| ri <= x).clamp(1, r.len() - 1);
            let t = (x - r[k - 1]) / (r[k] - r[k - 1]);
            v[k - 1] + t * (v[k] - v[k - 1])
        })
        .collect())
}

/// `lo:hi`.
pub fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("bracket `{s}` is not of the form lo:hi"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad bracket end `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad bracket end `{b}`"))?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(format!("bracket `{s}` must satisfy 0 < lo < hi"));
    }
    Ok((lo, hi))
}

/// Comma-separated, ascending values of κ.
pub fn parse_kappas(s: &str) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad kappa `{v}`"))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("no kappa values".into());
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("kappa values must be strictly ascending".into());
    }
    Ok(values)
}

/// File name of the `r,w,dw` table written next to a `shoot` record.
pub const PROFILE_FILE: &str = "shoot_profile.csv";

/// Loads the profile stored by `shoot` from its record file.
pub fn load_stored_profile(record_path: &Path) -> Result<(RunRecord, StationaryProfile), CliError> {
    let bytes = std::fs::read(record_path).map_err(|e| {
        CliError::Precondition(format!("reading {}: {e}", record_path.display()))
    })?;
    let record = record::load_run(&bytes)?;
    let params = record.params.to_params()?;
    let file = record
        .series_files
        .iter()
        .find(|f| f.ends_with(PROFILE_FILE))
        .ok_or_else(|| {
            CliError::Precondition(format!("{} has no stored profile", record_path.display()))
        })?;
    let table_path = record_path.parent().unwrap_or(Path::new(".")).join(file);
    let table = std::fs::read(&table_path).map_err(|e| {
        CliError::Precondition(format!("reading {}: {e}", table_path.display()))
    })?;
    let cols = record::read_columns(&table, 3)
        .map_err(|e| CliError::Precondition(format!("{}: {e}", table_path.display())))?;
    let grid = Arc::new(RadialGrid::new(params.dim, record.grid.rmax, record.grid.nr)?);
    let w = Field::new(grid, cols[1].clone())?;
    let tol = record.scalars.get("shoot_tolerance").copied().unwrap_or(0.0);
    let r_m = record
        .scalars
        .get("matching_radius")
        .copied()
        .unwrap_or(record.grid.rmax);
    let profile = StationaryProfile::from_parts(params, w, cols[2].clone(), tol, r_m)?;
    Ok((record, profile))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_specs() {
        assert_eq!("gauss:4".parse(), Ok(ProfileSpec::Gauss(4.0)));
        assert_eq!("bump:2.5".parse(), Ok(ProfileSpec::Bump(2.5)));
        assert_eq!(
            "file:a/b.csv".parse(),
            Ok(ProfileSpec::File(PathBuf::from("a/b.csv")))
        );
        assert!("gauss:-1".parse::<ProfileSpec>().is_err());
        assert!("cone:1".parse::<ProfileSpec>().is_err());
        assert!("gauss".parse::<ProfileSpec>().is_err());
        assert_eq!(ProfileSpec::Gauss(4.0).to_string(), "gauss:4");
    }

    #[test]
    fn brackets_and_kappas() {
        assert_eq!(parse_bracket("0.05:10"), Ok((0.05, 10.0)));
        assert!(parse_bracket("10:0.05").is_err());
        assert!(parse_bracket("1").is_err());
        assert_eq!(parse_kappas("0, 0.5,1"), Ok(vec![0.0, 0.5, 1.0]));
        assert!(parse_kappas("1,0").is_err());
    }

    #[test]
    fn interpolation() {
        let nodes = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
        let v = interpolate(&[0.0, 1.0, 2.0], &[2.0, 1.0, 0.5], &nodes).unwrap();
        assert_eq!(v, vec![2.0, 1.5, 1.0, 0.75, 0.5, 0.0]);
        assert!(interpolate(&[0.5, 1.0], &[1.0, 0.0], &nodes).is_err());
    }
}
