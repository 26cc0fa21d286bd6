//! Plain-text profile files and JSON grid specs.
//!
//! A profile file holds one `r value` row per grid node. Lines starting
//! with `#` are comments; a `# grid {...}` comment carries the grid spec.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quadrature::{GridSpec, RadialGrid};

const GRID_TAG: &str = "# grid ";

pub fn format_profile(grid: &RadialGrid, u: &RadialProfile) -> Result<String> {
    grid.check(u)?;
    let mut out = String::with_capacity(48 * grid.len());
    writeln!(out, "{GRID_TAG}{}", serde_json::to_string(&grid.spec())?).unwrap();
    out.push_str("# r value\n");
    for (r, v) in grid.nodes().iter().zip(u.values()) {
        writeln!(out, "{r:.17e} {v:.17e}").unwrap();
    }
    Ok(out)
}

pub fn write_profile(mut w: impl Write, grid: &RadialGrid, u: &RadialProfile) -> Result<()> {
    w.write_all(format_profile(grid, u)?.as_bytes())?;
    Ok(())
}

/// Reads a profile file. The grid comes from the `# grid` header, or, when
/// absent, from the first and last radii and the row count with dimension
/// `dim`. Radii must match the grid nodes.
pub fn read_profile(r: impl BufRead, dim: Option<u32>) -> Result<(RadialGrid, RadialProfile)> {
    let mut spec: Option<GridSpec> = None;
    let (mut radii, mut values) = (Vec::new(), Vec::new());
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(json) = line.strip_prefix(GRID_TAG.trim_end()) {
            spec = Some(serde_json::from_str(json.trim())?);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let mut next = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing {name}", k + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))
        };
        radii.push(next("radius")?);
        values.push(next("value")?);
    }
    let spec = match spec {
        Some(s) => s,
        None => {
            let n = dim.ok_or_else(|| {
                Error::Parse("profile has no grid header and no dimension was given".into())
            })?;
            let (Some(&r_min), Some(&r_max)) = (radii.first(), radii.last()) else {
                return Err(Error::Parse("profile has no rows".into()));
            };
            GridSpec {
                r_min,
                r_max,
                m: radii.len(),
                n,
            }
        }
    };
    let grid = spec.build()?;
    if radii.len() != grid.len() {
        return Err(Error::Parse(format!(
            "expected {} rows, found {}",
            grid.len(),
            radii.len()
        )));
    }
    if let Some(i) = radii
        .iter()
        .zip(grid.nodes())
        .position(|(a, b)| (a - b).abs() > 1e-10 * b)
    {
        return Err(Error::Parse(format!(
            "row {} radius {} is not grid node {}",
            i + 1,
            radii[i],
            grid.nodes()[i]
        )));
    }
    let u = RadialProfile::new(&grid, values)?;
    Ok((grid, u))
}

pub fn grid_to_json(spec: &GridSpec) -> Result<String> {
    Ok(serde_json::to_string(spec)?)
}

pub fn grid_from_json(s: &str) -> Result<GridSpec> {
    Ok(serde_json::from_str(s)?)
}
