//! Run configuration: strict TOML input, command-line overrides and the fully
//! resolved form echoed into manifests.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use cosmoburgers_core::presets::{Preset1D, Preset2D, LINE_LENGTH, SQUARE_SIDE};
use cosmoburgers_core::run::{Schedule, DEFAULT_MAX_STEPS};
use cosmoburgers_core::solver2d::default_time_scheme;
use cosmoburgers_core::{
    Background, BoundaryRule, ExtraRule, FluxShape, Grid1D, Grid2D, Regime, SpaceOrder, StepPolicy,
    TimeScheme,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

pub const DEFAULT_KAPPA: f64 = 2.0;
pub const DEFAULT_CELLS_1D: usize = 400;
pub const DEFAULT_CELLS_2D: usize = 200;
pub const DEFAULT_TAU_END: f64 = 64.0;
pub const DEFAULT_TAU_END_CONTRACTING: f64 = -1e-4;

/// A configuration problem, located by line when it comes from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }

    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

// ---------------------------------------------------------------------------
// Raw document

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimension: Option<Spanned<u8>>,
    background: Option<RawBackground>,
    flux: Option<RawFlux>,
    grid: Option<RawGrid>,
    scheme: Option<RawScheme>,
    initial: Option<RawInitial>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackground {
    regime: Option<Spanned<String>>,
    kappa: Option<Spanned<f64>>,
    tau0: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlux {
    g: Option<Spanned<String>>,
    beta: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    length: Option<Spanned<f64>>,
    cells: Option<Spanned<usize>>,
    lx: Option<Spanned<f64>>,
    ly: Option<Spanned<f64>>,
    jx: Option<Spanned<usize>>,
    jy: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    cfl: Option<Spanned<f64>>,
    space: Option<Spanned<String>>,
    time: Option<Spanned<String>>,
    extra_rule: Option<Spanned<String>>,
    boundary: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    preset: Option<Spanned<String>>,
    value: Option<Spanned<f64>>,
    table: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    checkpoints: Option<Spanned<Vec<f64>>>,
    tau_end: Option<Spanned<f64>>,
    max_steps: Option<Spanned<usize>>,
}

/// Values set on the command line; they win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<String>,
    pub regime: Option<Regime>,
    pub kappa: Option<f64>,
    /// `[cells]` or `[jx, jy]`
    pub grid: Option<Vec<usize>>,
    pub cfl: Option<f64>,
    pub tau_end: Option<f64>,
}

/// Parses `N` or `NxM`.
pub fn parse_grid_arg(text: &str) -> Result<Vec<usize>, String> {
    text.split(['x', 'X'])
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid grid size {text:?}, expected N or NxM"))
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.len() <= 2 {
                Ok(v)
            } else {
                Err(format!("invalid grid size {text:?}, expected N or NxM"))
            }
        })
}

pub fn parse_regime(text: &str) -> Result<Regime, String> {
    match text {
        "expanding" => Ok(Regime::Expanding),
        "contracting" => Ok(Regime::Contracting),
        "flat" => Ok(Regime::Flat),
        other => Err(format!(
            "unknown regime {other:?} (expected expanding, contracting or flat)"
        )),
    }
}

fn parse_space(text: &str) -> Result<SpaceOrder, String> {
    match text {
        "first" => Ok(SpaceOrder::First),
        "second-minmod" => Ok(SpaceOrder::SecondMinmod),
        other => Err(format!(
            "unknown space order {other:?} (expected first or second-minmod)"
        )),
    }
}

fn parse_time(text: &str) -> Result<TimeScheme, String> {
    match text {
        "euler" => Ok(TimeScheme::Euler),
        "rk4" => Ok(TimeScheme::Rk4),
        "ssprk3" => Ok(TimeScheme::SspRk3),
        other => Err(format!(
            "unknown time scheme {other:?} (expected euler, rk4 or ssprk3)"
        )),
    }
}

fn parse_extra_rule(text: &str) -> Result<ExtraRule, String> {
    match text {
        "none" => Ok(ExtraRule::None),
        "kappa-scaled" => Ok(ExtraRule::KappaScaled),
        other => Err(format!(
            "unknown extra rule {other:?} (expected none or kappa-scaled)"
        )),
    }
}

fn parse_boundary(text: &str) -> Result<BoundaryRule, String> {
    match text {
        "outflow" => Ok(BoundaryRule::Outflow),
        "periodic" => Ok(BoundaryRule::Periodic),
        other => Err(format!(
            "unknown boundary rule {other:?} (expected outflow or periodic)"
        )),
    }
}

// ---------------------------------------------------------------------------
// Resolved configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxName {
    Quadratic,
    Cubic,
    Mixed,
}

/// Every setting with defaults filled in. This is what manifests echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub dimension: u8,
    pub background: BackgroundSection,
    pub flux: FluxSection,
    pub grid: GridSection,
    pub scheme: SchemeSection,
    pub initial: InitialSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSection {
    pub regime: String,
    pub kappa: f64,
    pub tau0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSection {
    pub g: FluxName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    pub lx: f64,
    pub ly: f64,
    pub jx: usize,
    pub jy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSection {
    pub cfl: f64,
    pub space: String,
    pub time: String,
    pub extra_rule: String,
    pub boundary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSection {
    pub preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub checkpoints: Vec<f64>,
    pub tau_end: f64,
    pub max_steps: usize,
}

/// Where the initial cell averages come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Line(Preset1D),
    Plane(Preset2D),
    Table(PathBuf),
}

/// Validated configuration together with the core objects it describes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub resolved: ResolvedConfig,
    pub background: Background,
    pub flux: FluxShape,
    pub policy: StepPolicy,
    pub boundary: BoundaryRule,
    pub initial: InitialData,
    pub schedule: Schedule,
}

impl RunConfig {
    pub fn dimension(&self) -> u8 {
        self.resolved.dimension
    }

    pub fn grid_1d(&self) -> Result<Grid1D, ConfigError> {
        let g = &self.resolved.grid;
        Grid1D::new(g.ly, g.jy).map_err(|e| ConfigError::new(format!("[grid] {e}")))
    }

    pub fn grid_2d(&self) -> Result<Grid2D, ConfigError> {
        let g = &self.resolved.grid;
        Grid2D::new(g.lx, g.ly, g.jx, g.jy).map_err(|e| ConfigError::new(format!("[grid] {e}")))
    }

    /// Short scheme label such as `2S4T`.
    pub fn scheme_label(&self) -> String {
        self.policy.label()
    }

    /// Relative paths in the table entry are resolved against `base`.
    pub fn rebase_table(&mut self, base: &Path) {
        if let InitialData::Table(path) = &mut self.initial {
            if path.is_relative() {
                *path = base.join(&*path);
                self.resolved.initial.table = Some(path.clone());
            }
        }
    }

    /// Copy with a different grid size (`[cells]` or `[jx, jy]`).
    pub fn with_cells(&self, cells: &[usize]) -> Result<RunConfig, ConfigError> {
        let mut out = self.clone();
        apply_cells(&mut out.resolved, cells)?;
        Ok(out)
    }

    /// Copy with a different space/time pairing.
    pub fn with_scheme(&self, space: SpaceOrder, time: TimeScheme) -> RunConfig {
        let mut out = self.clone();
        out.policy.space = space;
        out.policy.time = time;
        out.resolved.scheme.space = space.as_str().into();
        out.resolved.scheme.time = time.as_str().into();
        out
    }
}

fn apply_cells(resolved: &mut ResolvedConfig, cells: &[usize]) -> Result<(), ConfigError> {
    match (resolved.dimension, cells) {
        (1, [n]) => {
            resolved.grid.jx = 1;
            resolved.grid.jy = *n;
        }
        (2, [n]) => {
            resolved.grid.jx = *n;
            resolved.grid.jy = *n;
        }
        (2, [jx, jy]) => {
            resolved.grid.jx = *jx;
            resolved.grid.jy = *jy;
        }
        (d, _) => {
            return Err(ConfigError::new(format!(
                "grid {cells:?} does not fit a {d}D run"
            )))
        }
    }
    Ok(())
}

/// Parses a TOML document without overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        ConfigError::at(
            e.span().map(|s| line_of(text, s)),
            e.message().trim().to_string(),
        )
    })?;
    Resolver { text }.resolve(raw, overrides)
}

/// Configuration built from defaults and overrides only.
pub fn default_config(overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    Resolver { text: "" }.resolve(RawConfig::default(), overrides)
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn line<T>(&self, value: &Option<Spanned<T>>) -> Option<usize> {
        value.as_ref().map(|s| line_of(self.text, s.span()))
    }

    fn resolve(&self, raw: RawConfig, ov: &Overrides) -> Result<RunConfig, ConfigError> {
        let bg_raw = raw.background.unwrap_or_default();
        let flux_raw = raw.flux.unwrap_or_default();
        let grid_raw = raw.grid.unwrap_or_default();
        let scheme_raw = raw.scheme.unwrap_or_default();
        let init_raw = raw.initial.unwrap_or_default();
        let out_raw = raw.output.unwrap_or_default();

        // initial data first: it decides the default dimension
        let preset_name = ov
            .preset
            .clone()
            .or_else(|| init_raw.preset.as_ref().map(|s| s.get_ref().clone()));
        let preset_line = if ov.preset.is_some() {
            None
        } else {
            self.line(&init_raw.preset)
        };
        let table = init_raw.table.as_ref().map(|s| PathBuf::from(s.get_ref()));
        if table.is_some() && preset_name.is_some() {
            return Err(ConfigError::at(
                self.line(&init_raw.table),
                "[initial] set either preset or table, not both",
            ));
        }
        let preset_name = match (&table, preset_name) {
            (Some(_), _) => "table".to_string(),
            (None, Some(name)) => name,
            (None, None) => "sine1d_a".to_string(),
        };
        let value = init_raw.value.as_ref().map(|s| *s.get_ref());

        let dimension = match &raw.dimension {
            Some(d) => {
                let d = *d.get_ref();
                if d != 1 && d != 2 {
                    return Err(ConfigError::at(
                        self.line(&raw.dimension),
                        format!("dimension must be 1 or 2, got {d}"),
                    ));
                }
                d
            }
            None if preset_name == "paper2d" => 2,
            None => match &ov.grid {
                Some(g) if g.len() == 2 => 2,
                _ => 1,
            },
        };

        let initial = match (preset_name.as_str(), dimension) {
            ("table", _) => InitialData::Table(table.clone().unwrap_or_default()),
            ("step1d", 1) => InitialData::Line(Preset1D::Step),
            ("sine1d_a", 1) => InitialData::Line(Preset1D::SineA),
            ("sine1d_b", 1) => InitialData::Line(Preset1D::SineB),
            ("paper2d_diagonal", 1) => InitialData::Line(Preset1D::Diagonal),
            ("paper2d", 2) => InitialData::Plane(Preset2D::Paper),
            ("zero", 1) => InitialData::Line(Preset1D::Zero),
            ("zero", 2) => InitialData::Plane(Preset2D::Zero),
            ("constant", d) => {
                let v = value.ok_or_else(|| {
                    ConfigError::at(preset_line, "[initial] preset \"constant\" needs a value")
                })?;
                if !v.is_finite() {
                    return Err(ConfigError::at(
                        self.line(&init_raw.value),
                        format!("[initial] value must be finite, got {v}"),
                    ));
                }
                if d == 1 {
                    InitialData::Line(Preset1D::Constant(v))
                } else {
                    InitialData::Plane(Preset2D::Constant(v))
                }
            }
            (name @ ("step1d" | "sine1d_a" | "sine1d_b" | "paper2d_diagonal" | "paper2d"), d) => {
                return Err(ConfigError::at(
                    preset_line,
                    format!("[initial] preset {name:?} is not defined in {d}D"),
                ))
            }
            (name, _) => {
                return Err(ConfigError::at(
                    preset_line,
                    format!(
                        "[initial] unknown preset {name:?} (expected step1d, sine1d_a, sine1d_b, \
                         paper2d, paper2d_diagonal, constant or zero)"
                    ),
                ))
            }
        };
        if value.is_some() && preset_name != "constant" {
            return Err(ConfigError::at(
                self.line(&init_raw.value),
                "[initial] value only applies to the constant preset",
            ));
        }

        // background
        let regime = match (ov.regime, &bg_raw.regime) {
            (Some(r), _) => r,
            (None, Some(s)) => parse_regime(s.get_ref())
                .map_err(|m| ConfigError::at(self.line(&bg_raw.regime), m))?,
            (None, None) => Regime::Expanding,
        };
        let kappa_line = if ov.kappa.is_some() {
            None
        } else {
            self.line(&bg_raw.kappa)
        };
        let kappa = ov
            .kappa
            .or(bg_raw.kappa.as_ref().map(|s| *s.get_ref()))
            .unwrap_or(DEFAULT_KAPPA);
        let tau0_line = self.line(&bg_raw.tau0);
        let tau0 = bg_raw
            .tau0
            .as_ref()
            .map(|s| *s.get_ref())
            .unwrap_or(match regime {
                Regime::Contracting => -1.0,
                Regime::Expanding | Regime::Flat => 1.0,
            });
        let background = match regime {
            Regime::Expanding => Background::expanding(kappa, tau0),
            Regime::Contracting => Background::contracting(kappa, tau0),
            Regime::Flat => Background::flat(tau0),
        }
        .map_err(|e| {
            let line = match e {
                cosmoburgers_core::ModelError::InvalidKappa(_) => kappa_line,
                _ => tau0_line,
            };
            ConfigError::at(line, format!("[background] {e}"))
        })?;
        if regime == Regime::Flat && (ov.kappa.is_some() || bg_raw.kappa.is_some()) && kappa != 0.0
        {
            return Err(ConfigError::at(
                kappa_line,
                "[background] the flat regime has no kappa",
            ));
        }

        // flux
        let g_name = match &flux_raw.g {
            Some(s) => match s.get_ref().as_str() {
                "quadratic" => FluxName::Quadratic,
                "cubic" => FluxName::Cubic,
                "mixed" => FluxName::Mixed,
                other => {
                    return Err(ConfigError::at(
                        self.line(&flux_raw.g),
                        format!("[flux] unknown g {other:?} (expected quadratic, cubic or mixed)"),
                    ))
                }
            },
            None => FluxName::Quadratic,
        };
        let beta = flux_raw.beta.as_ref().map(|s| *s.get_ref());
        let flux = match g_name {
            FluxName::Quadratic => FluxShape::Quadratic,
            FluxName::Cubic => FluxShape::Cubic,
            FluxName::Mixed => FluxShape::mixed(beta.unwrap_or(FluxShape::DEFAULT_BETA))
                .map_err(|e| ConfigError::at(self.line(&flux_raw.beta), format!("[flux] {e}")))?,
        };
        if beta.is_some() && g_name != FluxName::Mixed {
            return Err(ConfigError::at(
                self.line(&flux_raw.beta),
                "[flux] beta only applies to g = \"mixed\"",
            ));
        }
        let beta = match flux {
            FluxShape::Mixed { beta } => Some(beta),
            _ => None,
        };

        // grid
        let grid = self.resolve_grid(dimension, &grid_raw)?;

        // scheme
        let cfl = ov
            .cfl
            .or(scheme_raw.cfl.as_ref().map(|s| *s.get_ref()))
            .unwrap_or(StepPolicy::default().cfl);
        let cfl_line = if ov.cfl.is_some() {
            None
        } else {
            self.line(&scheme_raw.cfl)
        };
        let space = match &scheme_raw.space {
            Some(s) => parse_space(s.get_ref()).map_err(|m| {
                ConfigError::at(self.line(&scheme_raw.space), format!("[scheme] {m}"))
            })?,
            None => SpaceOrder::SecondMinmod,
        };
        let time = match &scheme_raw.time {
            Some(s) => parse_time(s.get_ref()).map_err(|m| {
                ConfigError::at(self.line(&scheme_raw.time), format!("[scheme] {m}"))
            })?,
            None if dimension == 2 => default_time_scheme(regime),
            None => TimeScheme::Rk4,
        };
        let extra_rule = match &scheme_raw.extra_rule {
            Some(s) => parse_extra_rule(s.get_ref()).map_err(|m| {
                ConfigError::at(self.line(&scheme_raw.extra_rule), format!("[scheme] {m}"))
            })?,
            None => ExtraRule::None,
        };
        let boundary = match &scheme_raw.boundary {
            Some(s) => parse_boundary(s.get_ref()).map_err(|m| {
                ConfigError::at(self.line(&scheme_raw.boundary), format!("[scheme] {m}"))
            })?,
            None => BoundaryRule::Outflow,
        };
        let policy = StepPolicy {
            cfl,
            time,
            space,
            extra_rule,
        };
        policy
            .validate()
            .map_err(|e| ConfigError::at(cfl_line, format!("[scheme] {e}")))?;

        // output
        let tau_end_line = if ov.tau_end.is_some() {
            None
        } else {
            self.line(&out_raw.tau_end)
        };
        let tau_end = ov
            .tau_end
            .or(out_raw.tau_end.as_ref().map(|s| *s.get_ref()))
            .unwrap_or(match regime {
                Regime::Contracting => DEFAULT_TAU_END_CONTRACTING,
                Regime::Expanding | Regime::Flat => DEFAULT_TAU_END,
            });
        let checkpoints = out_raw
            .checkpoints
            .as_ref()
            .map(|s| s.get_ref().clone())
            .unwrap_or_default();
        let max_steps = out_raw
            .max_steps
            .as_ref()
            .map(|s| *s.get_ref())
            .unwrap_or(DEFAULT_MAX_STEPS);
        let schedule = Schedule {
            checkpoints: checkpoints.clone(),
            tau_end,
            max_steps,
        };
        if let Err(e) = schedule.validate(&background, tau0) {
            let line = if e.to_string().contains("checkpoint") {
                self.line(&out_raw.checkpoints)
            } else if e.to_string().contains("max_steps") {
                self.line(&out_raw.max_steps)
            } else {
                tau_end_line
            };
            return Err(ConfigError::at(line, format!("[output] {e}")));
        }

        let mut resolved = ResolvedConfig {
            dimension,
            background: BackgroundSection {
                regime: regime.as_str().into(),
                kappa: background.kappa(),
                tau0,
            },
            flux: FluxSection { g: g_name, beta },
            grid,
            scheme: SchemeSection {
                cfl,
                space: space.as_str().into(),
                time: time.as_str().into(),
                extra_rule: extra_rule.as_str().into(),
                boundary: boundary.as_str().into(),
            },
            initial: InitialSection {
                preset: preset_name,
                value,
                table,
            },
            output: OutputSection {
                checkpoints,
                tau_end,
                max_steps,
            },
        };
        if let Some(cells) = &ov.grid {
            apply_cells(&mut resolved, cells)?;
        }
        let config = RunConfig {
            resolved,
            background,
            flux,
            policy,
            boundary,
            initial,
            schedule,
        };
        // the grid constructors carry the remaining checks
        if dimension == 1 {
            config.grid_1d()?;
        } else {
            config.grid_2d()?;
        }
        Ok(config)
    }

    fn resolve_grid(&self, dimension: u8, raw: &RawGrid) -> Result<GridSection, ConfigError> {
        let positive = |v: &Option<Spanned<f64>>, name: &str, default: f64| match v {
            Some(s) if !(s.get_ref().is_finite() && *s.get_ref() > 0.0) => Err(ConfigError::at(
                self.line(v),
                format!("[grid] {name} must be positive, got {}", s.get_ref()),
            )),
            Some(s) => Ok(*s.get_ref()),
            None => Ok(default),
        };
        if dimension == 1 {
            for (present, name, line) in [
                (raw.lx.is_some(), "lx", self.line(&raw.lx)),
                (raw.ly.is_some(), "ly", self.line(&raw.ly)),
                (raw.jx.is_some(), "jx", self.line(&raw.jx)),
                (raw.jy.is_some(), "jy", self.line(&raw.jy)),
            ] {
                if present {
                    return Err(ConfigError::at(
                        line,
                        format!("[grid] {name} is a 2D key; 1D grids use length and cells"),
                    ));
                }
            }
            let length = positive(&raw.length, "length", LINE_LENGTH)?;
            let cells = raw
                .cells
                .as_ref()
                .map(|s| *s.get_ref())
                .unwrap_or(DEFAULT_CELLS_1D);
            Ok(GridSection {
                lx: length,
                ly: length,
                jx: 1,
                jy: cells,
            })
        } else {
            if raw.length.is_some() {
                return Err(ConfigError::at(
                    self.line(&raw.length),
                    "[grid] 2D grids use lx and ly",
                ));
            }
            let lx = positive(&raw.lx, "lx", SQUARE_SIDE)?;
            let ly = positive(&raw.ly, "ly", SQUARE_SIDE)?;
            let cells = raw
                .cells
                .as_ref()
                .map(|s| *s.get_ref())
                .unwrap_or(DEFAULT_CELLS_2D);
            let jx = raw.jx.as_ref().map(|s| *s.get_ref()).unwrap_or(cells);
            let jy = raw.jy.as_ref().map(|s| *s.get_ref()).unwrap_or(cells);
            Ok(GridSection { lx, ly, jx, jy })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_flat_defaults() {
        let c = parse_config("[background]\nregime = \"flat\"\n").unwrap();
        assert_eq!(c.policy, StepPolicy::default());
        assert_eq!(c.policy.label(), "2S4T");
        assert_eq!(c.boundary, BoundaryRule::Outflow);
        assert_eq!(c.resolved.scheme.cfl, 0.7);
        assert_eq!(c.dimension(), 1);
        assert_eq!(c.resolved.grid.jy, DEFAULT_CELLS_1D);
        assert_eq!(c.schedule.tau_end, DEFAULT_TAU_END);
    }

    #[test]
    fn contracting_tau_end_must_be_negative() {
        let err = parse_config(
            "[background]\nregime = \"contracting\"\nkappa = 2.0\n\n[output]\ntau_end = 1.0\n",
        )
        .unwrap_err();
        assert_eq!(err.line, Some(6));
        assert!(err.message.contains("tau_end"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let err =
            parse_config("dimension = 1\n[scheme]\ncfl = 0.5\nlimiter = \"mc\"\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("limiter"), "{err}");
    }

    #[test]
    fn invalid_values_report_their_line() {
        let err = parse_config("[scheme]\n\ncfl = 1.5\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = parse_config("[background]\nkappa = -1.0\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = parse_config("[initial]\npreset = \"bump\"\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = parse_config("[output]\ntau_end = 8.0\ncheckpoints = [4.0, 2.0]\n").unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn step_preset() {
        let c = parse_config("[initial]\npreset = \"step1d\"\n").unwrap();
        assert_eq!(c.initial, InitialData::Line(Preset1D::Step));
        assert!((c.resolved.grid.ly - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn paper2d_implies_two_dimensions() {
        let c = parse_config(
            "[initial]\npreset = \"paper2d\"\n[background]\nregime = \"contracting\"\n",
        )
        .unwrap();
        assert_eq!(c.dimension(), 2);
        assert_eq!(c.policy.time, TimeScheme::SspRk3);
        assert_eq!(c.resolved.grid.jx, DEFAULT_CELLS_2D);
        assert_eq!(c.schedule.tau_end, DEFAULT_TAU_END_CONTRACTING);
        assert!(parse_config("dimension = 1\n[initial]\npreset = \"paper2d\"\n").is_err());
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides {
            preset: Some("zero".into()),
            kappa: Some(4.0),
            grid: Some(vec![64]),
            cfl: Some(0.5),
            tau_end: Some(3.0),
            regime: None,
        };
        let c = parse_config_with("[background]\nkappa = 2.0\n", &ov).unwrap();
        assert_eq!(c.background.kappa(), 4.0);
        assert_eq!(c.resolved.grid.jy, 64);
        assert_eq!(c.policy.cfl, 0.5);
        assert_eq!(c.schedule.tau_end, 3.0);
        assert_eq!(c.initial, InitialData::Line(Preset1D::Zero));
        let two = default_config(&Overrides {
            grid: Some(vec![32, 16]),
            preset: Some("paper2d".into()),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!((two.resolved.grid.jx, two.resolved.grid.jy), (32, 16));
    }

    #[test]
    fn grid_arguments() {
        assert_eq!(parse_grid_arg("128").unwrap(), vec![128]);
        assert_eq!(parse_grid_arg("64x32").unwrap(), vec![64, 32]);
        assert!(parse_grid_arg("1x2x3").is_err());
        assert!(parse_grid_arg("abc").is_err());
    }

    #[test]
    fn resolved_round_trips_through_toml() {
        let c = parse_config("[flux]\ng = \"mixed\"\n").unwrap();
        assert_eq!(c.resolved.flux.beta, Some(0.5));
        let text = toml::to_string(&c.resolved).unwrap();
        let back: ResolvedConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c.resolved);
    }
}
