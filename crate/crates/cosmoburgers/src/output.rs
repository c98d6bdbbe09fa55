//! Snapshot CSVs, tables and the JSON run manifest.
//!
//! Snapshot layout: `#` comment lines carrying `key = value` metadata, one
//! header row (`y,v,w` or `x,y,v,w`), then one row per cell. Numbers are
//! written with 17 significant digits so they round-trip exactly; cells with
//! no rescaled value hold `nan`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use cosmoburgers_core::diagnostics::{
    self, DiagnosticsRecord, TotalVariation, DEFAULT_JUMP_THRESHOLD,
};
use cosmoburgers_core::run::StepStats;
use cosmoburgers_core::{Background, Grid1D, Grid2D, Regime};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ResolvedConfig, RunConfig};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Rescaled field w of a snapshot: τ^κ v expanding, sgn(v)(−τ)^κ/√(1−v²)
/// contracting (`NaN` where |v| ≥ 1), v itself on a flat background.
pub fn rescaled(values: &[f64], tau: f64, bg: &Background) -> Vec<f64> {
    match bg.regime() {
        Regime::Expanding => diagnostics::rescale_expanding(values, tau, bg)
            .unwrap_or_else(|_| vec![f64::NAN; values.len()]),
        Regime::Contracting => diagnostics::rescale_contracting(values, tau, bg)
            .map(|w| w.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
            .unwrap_or_else(|_| vec![f64::NAN; values.len()]),
        Regime::Flat => values.to_vec(),
    }
}

fn header(out: &mut String, config: &RunConfig, tau: f64) {
    let r = &config.resolved;
    let grid = if r.dimension == 1 {
        r.grid.jy.to_string()
    } else {
        format!("{}x{}", r.grid.jx, r.grid.jy)
    };
    let _ = writeln!(out, "# tau = {}", fmt_num(tau));
    let _ = writeln!(out, "# kappa = {}", r.background.kappa);
    let _ = writeln!(out, "# regime = {}", r.background.regime);
    let _ = writeln!(out, "# grid = {grid}");
    let _ = writeln!(out, "# scheme = {}", config.scheme_label());
    let _ = writeln!(out, "# boundary = {}", r.scheme.boundary);
}

pub fn snapshot_csv_1d(config: &RunConfig, grid: &Grid1D, tau: f64, values: &[f64]) -> String {
    let w = rescaled(values, tau, &config.background);
    let mut out = String::with_capacity(64 * values.len());
    header(&mut out, config, tau);
    out.push_str("y,v,w\n");
    for (j, (&v, &w)) in values.iter().zip(&w).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(grid.center(j)),
            fmt_num(v),
            fmt_num(w)
        );
    }
    out
}

pub fn snapshot_csv_2d(config: &RunConfig, grid: &Grid2D, tau: f64, values: &[f64]) -> String {
    let w = rescaled(values, tau, &config.background);
    let mut out = String::with_capacity(96 * values.len());
    header(&mut out, config, tau);
    out.push_str("x,y,v,w\n");
    let (jx, dx, dy) = (grid.jx(), grid.dx(), grid.dy());
    for (i, (&v, &w)) in values.iter().zip(&w).enumerate() {
        let (j, k) = (i % jx, i / jx);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num((j as f64 + 0.5) * dx),
            fmt_num((k as f64 + 0.5) * dy),
            fmt_num(v),
            fmt_num(w)
        );
    }
    out
}

/// A parsed snapshot or table file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table, OutputError> {
    let err = |line: usize, message: String| OutputError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut metadata = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                let row = line
                    .split(',')
                    .map(|f| {
                        f.trim()
                            .parse::<f64>()
                            .map_err(|_| err(lineno, format!("not a number: {f:?}")))
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                if row.len() != cols.len() {
                    return Err(err(
                        lineno,
                        format!("expected {} fields, found {}", cols.len(), row.len()),
                    ));
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| err(1, "missing column header".into()))?;
    Ok(Table {
        metadata,
        columns,
        rows,
    })
}

pub fn read_table(path: &Path) -> Result<Table, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_table(&text, path)
}

/// Reads the `v` column of a table as initial data of `cells` values.
pub fn read_initial_table(path: &Path, cells: usize) -> Result<Vec<f64>, OutputError> {
    let table = read_table(path)?;
    let values = table.column("v").ok_or_else(|| OutputError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: "table has no \"v\" column".into(),
    })?;
    if values.len() != cells {
        return Err(OutputError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "table has {} rows, the grid has {cells} cells",
                values.len()
            ),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(OutputError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("non-finite value in data row {}", i + 1),
        });
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// Manifest

/// Numerical choices that are not visible in the configuration itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Numerics {
    pub limiter: &'static str,
    pub godunov: &'static str,
    pub initial_sampling: &'static str,
    pub source_coupling: &'static str,
    pub clamping: bool,
    pub dt_rule: &'static str,
    pub cfl_applies_to: &'static str,
    pub checkpoint_landing: &'static str,
    pub jump_threshold: f64,
    pub jump_merge_adjacent: bool,
    pub rescaled_masking: &'static str,
    pub parallel_reduction: &'static str,
}

impl Numerics {
    pub fn for_config(config: &RunConfig) -> Self {
        let two_d = config.dimension() == 2;
        let dt_rule = match (two_d, config.background.regime()) {
            (false, Regime::Expanding) => "cfl*min(dy/max|phi'(v)|, min_j 2tau/(kappa(1-v_j^2)))",
            (false, Regime::Contracting) => match config.policy.extra_rule {
                cosmoburgers_core::ExtraRule::None => {
                    "cfl*min(dy/max|phi'(v)|, min(1,1/kappa)|tau|)"
                }
                cosmoburgers_core::ExtraRule::KappaScaled => {
                    "cfl*min(dy/max|phi'(v)|, |tau|/kappa if kappa>1 else min(1,1/kappa)|tau|)"
                }
            },
            (false, Regime::Flat) => "cfl*dy/max|phi'(v)|",
            (true, Regime::Expanding) => {
                "min(0.5*min(dx,dy)/max trace speed, (1/kappa) min tau/(1-v^2))"
            }
            (true, Regime::Contracting) => {
                "c*min(dy/max cell speed, 2|tau|), c=1/2 (kappa<=1) or 1/(2 kappa); \
                 capped by (tau_n/tau_{n-1})*previous proposal"
            }
            (true, Regime::Flat) => "0.5*min(dx,dy)/max trace speed",
        };
        Numerics {
            limiter: "sign(v+ - v-)*min(2|b|, 2|f|, |c|/2) if eta > 0 else 0",
            godunov: if config.flux.is_convex() {
                "closed form (convex)"
            } else {
                "min/max over endpoints and interior critical points"
            },
            initial_sampling: "point values at cell centers",
            source_coupling: "unsplit, evaluated at every stage time",
            clamping: false,
            dt_rule,
            cfl_applies_to: if two_d {
                "not used; the 2D rules carry their own constants"
            } else {
                "the min of all constraints"
            },
            checkpoint_landing: "last step shortened to hit the checkpoint",
            jump_threshold: DEFAULT_JUMP_THRESHOLD,
            jump_merge_adjacent: true,
            rescaled_masking: "cells with |v| >= 1 written as nan (contracting)",
            parallel_reduction: "row-parallel, exact max reductions, sequential sums",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtSummary {
    pub first: Option<f64>,
    pub last: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub landings: usize,
}

impl From<&StepStats> for DtSummary {
    fn from(s: &StepStats) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        let any = s.steps > 0;
        DtSummary {
            first: finite(s.dt_first),
            last: finite(s.dt_last),
            min: if any { finite(s.dt_min) } else { None },
            max: if any { finite(s.dt_max) } else { None },
            landings: s.landings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotEntry {
    pub tau: f64,
    pub file: String,
    pub max_abs_v: f64,
    pub overshoot: f64,
    pub l2_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_variation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_variation_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_variation_y: Option<f64>,
}

impl SnapshotEntry {
    pub fn new(file: String, d: &DiagnosticsRecord) -> Self {
        let (tv, tvx, tvy) = match d.total_variation {
            TotalVariation::Line(tv) => (Some(tv), None, None),
            TotalVariation::Plane { x, y } => (None, Some(x), Some(y)),
        };
        SnapshotEntry {
            tau: d.tau,
            file,
            max_abs_v: d.max_abs_v,
            overshoot: d.overshoot,
            l2_norm: d.l2_norm,
            jump_count: d.jump_count,
            total_variation: tv,
            total_variation_x: tvx,
            total_variation_y: tvy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub command: String,
    pub status: String,
    pub config: ResolvedConfig,
    pub numerics: Numerics,
    pub wall_time_s: f64,
    pub steps: usize,
    pub dt: DtSummary,
    pub snapshots: Vec<SnapshotEntry>,
    /// Command-specific output files (tables), relative to the output directory.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<String>,
}

/// `git describe`-style version baked in at build time.
pub const VERSION: &str = env!("COSMOBURGERS_VERSION");

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf, OutputError> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&path, &text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert!("nan".parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let config = parse_config("[grid]\ncells = 4\n").unwrap();
        let grid = config.grid_1d().unwrap();
        let values = [0.1, -0.25, 1.0 / 3.0, 0.0];
        let text = snapshot_csv_1d(&config, &grid, 2.0, &values);
        let table = parse_table(&text, Path::new("mem")).unwrap();
        assert_eq!(table.columns, ["y", "v", "w"]);
        assert_eq!(table.column("v").unwrap(), values);
        assert_eq!(table.meta("regime"), Some("expanding"));
        assert_eq!(table.meta("scheme"), Some("2S4T"));
        assert_eq!(table.meta("grid"), Some("4"));
        assert_eq!(table.meta("tau").unwrap().parse::<f64>().unwrap(), 2.0);
        let w = table.column("w").unwrap();
        assert_eq!(w[1], -0.25 * 4.0);
    }

    #[test]
    fn contracting_overshoot_is_nan() {
        let config =
            parse_config("[background]\nregime = \"contracting\"\n[grid]\ncells = 4\n").unwrap();
        let grid = config.grid_1d().unwrap();
        let text = snapshot_csv_1d(&config, &grid, -0.5, &[0.0, 0.5, 1.0, -1.00001]);
        let table = parse_table(&text, Path::new("mem")).unwrap();
        let w = table.column("w").unwrap();
        assert_eq!(w[0], 0.0);
        assert!(w[1] > 0.0);
        assert!(w[2].is_nan() && w[3].is_nan());
    }

    #[test]
    fn two_d_layout() {
        let config =
            parse_config("[initial]\npreset = \"paper2d\"\n[grid]\njx = 4\njy = 5\n").unwrap();
        let grid = config.grid_2d().unwrap();
        let values: Vec<f64> = (0..20).map(|i| i as f64 / 100.0).collect();
        let text = snapshot_csv_2d(&config, &grid, 1.0, &values);
        let table = parse_table(&text, Path::new("mem")).unwrap();
        assert_eq!(table.columns, ["x", "y", "v", "w"]);
        assert_eq!(table.rows.len(), 20);
        assert_eq!(table.meta("grid"), Some("4x5"));
        let x = table.column("x").unwrap();
        let y = table.column("y").unwrap();
        assert!(x[1] > x[0] && y[1] == y[0]);
        assert!(y[4] > y[3]);
    }

    #[test]
    fn malformed_tables_name_the_line() {
        let err = parse_table("# a = 1\ny,v\n0.1,0.2\n0.3,abc\n", Path::new("t.csv")).unwrap_err();
        assert!(err.to_string().starts_with("t.csv:4:"), "{err}");
        let err = parse_table("y,v\n0.1\n", Path::new("t.csv")).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }
}
