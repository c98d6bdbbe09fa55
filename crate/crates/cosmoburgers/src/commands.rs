//! Subcommands: single runs, convergence studies, scheme matrices, homogeneous
//! tables and the diagonal comparison.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use cosmoburgers_core::diagnostics::{self, DiagnosticsRecord};
use cosmoburgers_core::presets::{Preset1D, LINE_LENGTH};
use cosmoburgers_core::run::StepStats;
use cosmoburgers_core::solver1d::Solver1D;
use cosmoburgers_core::solver2d::Solver2D;
use cosmoburgers_core::{
    Background, FluxModel, Grid1D, Grid2D, ModelError, RunError, SpaceOrder, TimeScheme,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, InitialData, RunConfig};
use crate::output::{self, fmt_num, Manifest, Numerics, OutputError, SnapshotEntry, VERSION};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("numerical abort: {0}")]
    Aborted(String),
    #[error("step budget exceeded: {0}")]
    Budget(String),
}

impl CommandError {
    /// 2 configuration, 3 numerical abort, 4 step budget, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Aborted(_) => 3,
            CommandError::Budget(_) => 4,
            CommandError::Output(_) => 1,
        }
    }
}

/// Spatial layout of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    Line(Grid1D),
    Plane(Grid2D),
}

impl Layout {
    pub fn of(config: &RunConfig) -> Result<Self, ConfigError> {
        Ok(if config.dimension() == 1 {
            Layout::Line(config.grid_1d()?)
        } else {
            Layout::Plane(config.grid_2d()?)
        })
    }

    pub fn cells(&self) -> usize {
        match self {
            Layout::Line(g) => g.cells(),
            Layout::Plane(g) => g.len(),
        }
    }

    pub fn cell_measure(&self) -> f64 {
        match self {
            Layout::Line(g) => g.dy(),
            Layout::Plane(g) => g.dx() * g.dy(),
        }
    }

    /// `400` or `200x200`.
    pub fn label(&self) -> String {
        match self {
            Layout::Line(g) => g.cells().to_string(),
            Layout::Plane(g) => format!("{}x{}", g.jx(), g.jy()),
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Layout::Line(g) => (g.cells(), 1),
            Layout::Plane(g) => (g.jx(), g.jy()),
        }
    }
}

/// One recorded state of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub tau: f64,
    pub values: Vec<f64>,
    pub diagnostics: DiagnosticsRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub layout: Layout,
    pub states: Vec<State>,
    pub stats: StepStats,
}

/// A run that stopped early, with the last state that was still good.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub budget: bool,
    pub message: String,
    pub last_good: Option<(f64, Vec<f64>)>,
}

impl Failure {
    fn into_error(self) -> CommandError {
        if self.budget {
            CommandError::Budget(self.message)
        } else {
            CommandError::Aborted(self.message)
        }
    }
}

fn failure<F, T>(err: RunError<F>, unpack: T) -> Failure
where
    T: Fn(F) -> (f64, Vec<f64>),
{
    match err {
        RunError::Setup(e) => Failure {
            budget: false,
            message: e.to_string(),
            last_good: None,
        },
        RunError::Aborted {
            reason,
            steps,
            last_good,
        } => Failure {
            budget: false,
            message: format!("{reason} (after {steps} steps)"),
            last_good: Some(unpack(last_good)),
        },
        RunError::BudgetExceeded { steps, last_good } => Failure {
            budget: true,
            message: format!("{steps} steps taken"),
            last_good: Some(unpack(last_good)),
        },
    }
}

/// Initial cell averages of a configuration.
pub fn initial_values(config: &RunConfig, layout: &Layout) -> Result<Vec<f64>, CommandError> {
    Ok(match (&config.initial, layout) {
        (InitialData::Line(p), Layout::Line(g)) => p.sample(g),
        (InitialData::Plane(p), Layout::Plane(g)) => p.sample(g),
        (InitialData::Table(path), layout) => output::read_initial_table(path, layout.cells())?,
        _ => {
            return Err(ConfigError {
                line: None,
                message: "initial data does not match the run dimension".into(),
            }
            .into())
        }
    })
}

/// Runs a configuration to completion. The outer error is a setup problem,
/// the inner one a run that stopped early.
pub fn simulate(config: &RunConfig) -> Result<Result<Simulation, Failure>, CommandError> {
    let layout = Layout::of(config)?;
    let initial = initial_values(config, &layout)?;
    let setup_err = |e: cosmoburgers_core::SolverError| {
        CommandError::Config(ConfigError {
            line: None,
            message: e.to_string(),
        })
    };
    Ok(match layout {
        Layout::Line(grid) => {
            let solver = Solver1D::new(
                grid,
                config.background,
                config.flux,
                config.policy,
                config.boundary,
            )
            .map_err(setup_err)?;
            let field = solver.initial_field(initial).map_err(setup_err)?;
            solver
                .run(field, &config.schedule)
                .map(|series| Simulation {
                    layout,
                    stats: series.stats,
                    states: series
                        .snapshots
                        .into_iter()
                        .map(|s| State {
                            tau: s.tau,
                            values: s.field.values,
                            diagnostics: s.diagnostics,
                        })
                        .collect(),
                })
                .map_err(|e| failure(e, |f| (f.tau, f.values)))
        }
        Layout::Plane(grid) => {
            let solver = Solver2D::new(
                grid,
                config.background,
                FluxModel::new(config.flux),
                config.policy,
                config.boundary,
            )
            .map_err(setup_err)?;
            let field = solver.initial_field(initial).map_err(setup_err)?;
            solver
                .run(field, &config.schedule)
                .map(|series| Simulation {
                    layout,
                    stats: series.stats,
                    states: series
                        .snapshots
                        .into_iter()
                        .map(|s| State {
                            tau: s.tau,
                            values: s.field.values,
                            diagnostics: s.diagnostics,
                        })
                        .collect(),
                })
                .map_err(|e| failure(e, |f| (f.tau, f.values)))
        }
    })
}

fn snapshot_csv(config: &RunConfig, layout: &Layout, tau: f64, values: &[f64]) -> String {
    match layout {
        Layout::Line(g) => output::snapshot_csv_1d(config, g, tau, values),
        Layout::Plane(g) => output::snapshot_csv_2d(config, g, tau, values),
    }
}

fn manifest(config: &RunConfig, command: &str, started: Instant) -> Manifest {
    Manifest {
        version: VERSION,
        command: command.into(),
        status: "ok".into(),
        config: config.resolved.clone(),
        numerics: Numerics::for_config(config),
        wall_time_s: started.elapsed().as_secs_f64(),
        steps: 0,
        dt: (&StepStats::default()).into(),
        snapshots: Vec::new(),
        tables: Vec::new(),
    }
}

/// Summary returned by [`cmd_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<String>,
    pub steps: usize,
}

/// Runs `config`, writing one CSV per output time and `manifest.json`.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunReport, CommandError> {
    let started = Instant::now();
    let layout = Layout::of(config)?;
    let result = simulate(config)?;
    let mut m = manifest(config, "run", started);
    match result {
        Ok(sim) => {
            let mut files = Vec::new();
            for (i, state) in sim.states.iter().enumerate() {
                let name = format!("snapshot_{i:03}.csv");
                output::write_file(
                    &out.join(&name),
                    &snapshot_csv(config, &layout, state.tau, &state.values),
                )?;
                m.snapshots
                    .push(SnapshotEntry::new(name.clone(), &state.diagnostics));
                files.push(name);
            }
            m.steps = sim.stats.steps;
            m.dt = (&sim.stats).into();
            m.wall_time_s = started.elapsed().as_secs_f64();
            output::write_manifest(out, &m)?;
            Ok(RunReport {
                files,
                steps: sim.stats.steps,
            })
        }
        Err(fail) => {
            m.status = if fail.budget {
                "budget-exceeded"
            } else {
                "aborted"
            }
            .into();
            if let Some((tau, values)) = &fail.last_good {
                let name = "last_good.csv".to_string();
                output::write_file(
                    &out.join(&name),
                    &snapshot_csv(config, &layout, *tau, values),
                )?;
                m.tables.push(name);
            }
            m.wall_time_s = started.elapsed().as_secs_f64();
            output::write_manifest(out, &m)?;
            Err(fail.into_error())
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub grid: String,
    pub jx: usize,
    /// 1 for line runs.
    pub jy: usize,
    pub tau: f64,
    pub l1: f64,
    pub l2: f64,
    /// L¹ of the next coarser grid divided by this one (NaN for the coarsest).
    pub ratio: f64,
    /// Whether L¹ decreases strictly with refinement at this τ.
    pub monotone: bool,
}

/// Grid convergence against the largest grid. `grids` holds `[cells]` or
/// `[jx, jy]` entries; every coarser grid must divide the reference. The
/// reference may use a different space/time pairing.
pub fn convergence_table(
    config: &RunConfig,
    grids: &[Vec<usize>],
    reference_scheme: Option<(SpaceOrder, TimeScheme)>,
) -> Result<(Vec<ConvergenceRow>, usize), CommandError> {
    if grids.len() < 2 {
        return Err(ConfigError {
            line: None,
            message: "a convergence study needs at least two grids".into(),
        }
        .into());
    }
    let mut configs = grids
        .iter()
        .map(|g| config.with_cells(g))
        .collect::<Result<Vec<_>, _>>()?;
    configs.sort_by_key(|c| Layout::of(c).map(|l| l.cells()).unwrap_or(0));
    let reference_layout = Layout::of(configs.last().expect("two grids"))?;
    let (rjx, rjy) = reference_layout.shape();
    for c in &configs {
        let (jx, jy) = Layout::of(c)?.shape();
        if rjx % jx != 0 || rjy % jy != 0 {
            return Err(ConfigError {
                line: None,
                message: format!(
                    "grid {} does not nest in the reference grid {}",
                    Layout::of(c)?.label(),
                    reference_layout.label()
                ),
            }
            .into());
        }
    }
    if let (Some((space, time)), Some(last)) = (reference_scheme, configs.last_mut()) {
        *last = last.with_scheme(space, time);
    }

    let runs: Vec<Result<Result<Simulation, Failure>, CommandError>> =
        configs.par_iter().map(simulate).collect();
    let mut sims = Vec::with_capacity(runs.len());
    for run in runs {
        sims.push(run?.map_err(Failure::into_error)?);
    }
    let steps = sims.iter().map(|s| s.stats.steps).sum();
    let reference = sims.last().expect("two grids");

    let mut rows = Vec::new();
    for (t, ref_state) in reference.states.iter().enumerate() {
        let mut block: Vec<ConvergenceRow> = Vec::new();
        for sim in &sims {
            let state = &sim.states[t];
            let (jx, jy) = sim.layout.shape();
            let restricted = match sim.layout {
                Layout::Line(_) => diagnostics::restrict_1d(&ref_state.values, jx),
                Layout::Plane(_) => {
                    diagnostics::restrict_2d(&ref_state.values, (rjx, rjy), (jx, jy))
                }
            }
            .expect("nesting checked above");
            let measure = sim.layout.cell_measure();
            let l1 =
                diagnostics::norm_l1(&state.values, &restricted, measure).expect("same length");
            let l2 =
                diagnostics::norm_l2(&state.values, &restricted, measure).expect("same length");
            let ratio = block.last().map_or(f64::NAN, |prev| prev.l1 / l1);
            block.push(ConvergenceRow {
                grid: sim.layout.label(),
                jx,
                jy,
                tau: state.tau,
                l1,
                l2,
                ratio,
                monotone: false,
            });
        }
        if let Some(reference_row) = block.last_mut() {
            reference_row.ratio = f64::NAN;
        }
        let coarse = &block[..block.len() - 1];
        let monotone = coarse.windows(2).all(|w| w[1].l1 < w[0].l1);
        for row in &mut block {
            row.monotone = monotone;
        }
        rows.extend(block);
    }
    Ok((rows, steps))
}

/// All columns are numeric; `monotone` is 1 or 0.
pub fn convergence_csv(rows: &[ConvergenceRow], reference: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# reference = {reference}");
    out.push_str("jx,jy,tau,l1,l2,ratio,monotone\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.jx,
            r.jy,
            fmt_num(r.tau),
            fmt_num(r.l1),
            fmt_num(r.l2),
            fmt_num(r.ratio),
            u8::from(r.monotone)
        );
    }
    out
}

pub fn cmd_converge(
    config: &RunConfig,
    grids: &[Vec<usize>],
    reference_scheme: Option<(SpaceOrder, TimeScheme)>,
    out: &Path,
) -> Result<Vec<ConvergenceRow>, CommandError> {
    let started = Instant::now();
    let (rows, steps) = convergence_table(config, grids, reference_scheme)?;
    let reference_grid = rows.last().map(|r| r.grid.clone()).unwrap_or_default();
    let label = match reference_scheme {
        Some((space, time)) => format!(
            "{reference_grid} {}",
            config.with_scheme(space, time).scheme_label()
        ),
        None => format!("{reference_grid} {}", config.scheme_label()),
    };
    output::write_file(&out.join("converge.csv"), &convergence_csv(&rows, &label))?;
    let mut m = manifest(config, "converge", started);
    m.steps = steps;
    m.tables.push("converge.csv".into());
    output::write_manifest(out, &m)?;
    Ok(rows)
}

/// The four space/time pairings, best last.
pub const SCHEME_MATRIX: [(SpaceOrder, TimeScheme); 4] = [
    (SpaceOrder::First, TimeScheme::Euler),
    (SpaceOrder::First, TimeScheme::Rk4),
    (SpaceOrder::SecondMinmod, TimeScheme::Euler),
    (SpaceOrder::SecondMinmod, TimeScheme::Rk4),
];

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub scheme: String,
    pub space_order: u32,
    pub time_order: u32,
    pub tau: f64,
    /// L¹ against the 2S4T run; NaN when this run stopped early.
    pub l1: f64,
    pub status: String,
}

pub fn scheme_matrix(config: &RunConfig) -> Result<(Vec<MatrixRow>, usize), CommandError> {
    let configs: Vec<RunConfig> = SCHEME_MATRIX
        .iter()
        .map(|&(s, t)| config.with_scheme(s, t))
        .collect();
    let runs: Vec<Result<Result<Simulation, Failure>, CommandError>> =
        configs.par_iter().map(simulate).collect();
    let mut sims = Vec::with_capacity(runs.len());
    for run in runs {
        sims.push(run?);
    }
    let best = match sims.last().expect("four runs") {
        Ok(sim) => sim.clone(),
        Err(fail) => return Err(fail.clone().into_error()),
    };
    let measure = best.layout.cell_measure();
    let mut rows = Vec::new();
    let mut steps = 0;
    for (config, sim) in configs.iter().zip(&sims) {
        let scheme = config.scheme_label();
        let (space_order, time_order) = (config.policy.space.order(), config.policy.time.order());
        match sim {
            Ok(sim) => {
                steps += sim.stats.steps;
                for (state, best_state) in sim.states.iter().zip(&best.states) {
                    rows.push(MatrixRow {
                        scheme: scheme.clone(),
                        space_order,
                        time_order,
                        tau: state.tau,
                        l1: diagnostics::norm_l1(&state.values, &best_state.values, measure)
                            .expect("same grid"),
                        status: "ok".into(),
                    });
                }
            }
            Err(fail) => {
                for best_state in &best.states {
                    rows.push(MatrixRow {
                        scheme: scheme.clone(),
                        space_order,
                        time_order,
                        tau: best_state.tau,
                        l1: f64::NAN,
                        status: if fail.budget {
                            "budget-exceeded"
                        } else {
                            "aborted"
                        }
                        .into(),
                    });
                }
            }
        }
    }
    Ok((rows, steps))
}

pub fn cmd_scheme_matrix(config: &RunConfig, out: &Path) -> Result<Vec<MatrixRow>, CommandError> {
    let started = Instant::now();
    let (rows, steps) = scheme_matrix(config)?;
    let mut text = String::from("# reference = 2S4T\n");
    for r in rows.iter().filter(|r| r.status != "ok") {
        let _ = writeln!(
            text,
            "# status {} {} = {}",
            r.scheme,
            fmt_num(r.tau),
            r.status
        );
    }
    text.push_str("space_order,time_order,tau,l1,completed\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            r.space_order,
            r.time_order,
            fmt_num(r.tau),
            fmt_num(r.l1),
            u8::from(r.status == "ok")
        );
    }
    output::write_file(&out.join("scheme_matrix.csv"), &text)?;
    let mut m = manifest(config, "scheme-matrix", started);
    m.steps = steps;
    m.tables.push("scheme_matrix.csv".into());
    output::write_manifest(out, &m)?;
    Ok(rows)
}

/// Closed-form homogeneous solution at each τ.
pub fn homogeneous_table(
    v0: f64,
    background: &Background,
    taus: &[f64],
) -> Result<Vec<(f64, f64)>, ModelError> {
    taus.iter()
        .map(|&tau| {
            background
                .homogeneous_solution(v0, background.tau0(), tau)
                .map(|v| (tau, v))
        })
        .collect()
}

pub fn cmd_homogeneous(
    v0: f64,
    background: &Background,
    taus: &[f64],
    out: &Path,
) -> Result<Vec<(f64, f64)>, CommandError> {
    let rows = homogeneous_table(v0, background, taus).map_err(|e| ConfigError {
        line: None,
        message: e.to_string(),
    })?;
    let mut text = String::new();
    let _ = writeln!(text, "# v0 = {}", fmt_num(v0));
    let _ = writeln!(text, "# kappa = {}", background.kappa());
    let _ = writeln!(text, "# regime = {}", background.regime());
    let _ = writeln!(text, "# tau0 = {}", fmt_num(background.tau0()));
    text.push_str("tau,v\n");
    for (tau, v) in &rows {
        let _ = writeln!(text, "{},{}", fmt_num(*tau), fmt_num(*v));
    }
    output::write_file(&out.join("homogeneous.csv"), &text)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalRow {
    pub tau: f64,
    pub l1: f64,
    pub max_abs_diff: f64,
}

/// Output time and `[s, v2d, v1d]` samples along the diagonal.
pub type DiagonalProfile = (f64, Vec<[f64; 3]>);

/// Runs the 2D configuration and a 1D run on [0, π] whose initial data is
/// the 2D data restricted to the diagonal, then compares the diagonal cells
/// with the 1D cells at every output time.
pub fn compare_diagonal(
    config: &RunConfig,
) -> Result<(Vec<DiagonalRow>, Vec<DiagonalProfile>, usize), CommandError> {
    let grid = config.grid_2d()?;
    if config.dimension() != 2 || !grid.is_uniform() || grid.jx() != grid.jy() {
        return Err(ConfigError {
            line: None,
            message: "compare-diagonal needs a 2D run on a square grid with dx = dy".into(),
        }
        .into());
    }
    let mut line = config.clone();
    line.resolved.dimension = 1;
    line.resolved.grid.lx = LINE_LENGTH;
    line.resolved.grid.ly = LINE_LENGTH;
    line.resolved.grid.jx = 1;
    line.resolved.grid.jy = grid.jx();
    line.resolved.initial.preset = Preset1D::Diagonal.name().into();
    line.initial = InitialData::Line(Preset1D::Diagonal);

    let (plane, line) = rayon::join(|| simulate(config), || simulate(&line));
    let plane = plane?.map_err(Failure::into_error)?;
    let line = line?.map_err(Failure::into_error)?;
    let ds = LINE_LENGTH / grid.jx() as f64;
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    for (p, l) in plane.states.iter().zip(&line.states) {
        let diag = diagnostics::diagonal_extract(&p.values, &grid).expect("square grid");
        let l1 = diagnostics::norm_l1(&diag.values, &l.values, ds).expect("same length");
        let max_abs_diff = diag
            .values
            .iter()
            .zip(&l.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        rows.push(DiagonalRow {
            tau: p.tau,
            l1,
            max_abs_diff,
        });
        profiles.push((
            p.tau,
            diag.s
                .iter()
                .zip(&diag.values)
                .zip(&l.values)
                .map(|((&s, &a), &b)| [s, a, b])
                .collect(),
        ));
    }
    Ok((rows, profiles, plane.stats.steps + line.stats.steps))
}

pub fn cmd_compare_diagonal(
    config: &RunConfig,
    out: &Path,
) -> Result<Vec<DiagonalRow>, CommandError> {
    let started = Instant::now();
    let (rows, profiles, steps) = compare_diagonal(config)?;
    let mut m = manifest(config, "compare-diagonal", started);
    for (i, (tau, profile)) in profiles.iter().enumerate() {
        let mut text = String::new();
        let _ = writeln!(text, "# tau = {}", fmt_num(*tau));
        text.push_str("s,v2d,v1d\n");
        for [s, a, b] in profile {
            let _ = writeln!(text, "{},{},{}", fmt_num(*s), fmt_num(*a), fmt_num(*b));
        }
        let name = format!("diagonal_{i:03}.csv");
        output::write_file(&out.join(&name), &text)?;
        m.tables.push(name);
    }
    let mut text = String::from("tau,l1,max_abs_diff\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{}",
            fmt_num(r.tau),
            fmt_num(r.l1),
            fmt_num(r.max_abs_diff)
        );
    }
    output::write_file(&out.join("compare_diagonal.csv"), &text)?;
    m.tables.push("compare_diagonal.csv".into());
    m.steps = steps;
    output::write_manifest(out, &m)?;
    Ok(rows)
}
