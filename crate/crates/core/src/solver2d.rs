//! The (2+1) unsplit finite-volume scheme.
//!
//! Each direction uses the 1D limiter and Godunov flux; x-fluxes use
//! f(v) = v²/2 and y-fluxes the configured g. Rows are independent, so the
//! right-hand side is evaluated row-parallel under the `parallel` feature with
//! results bit-identical to the sequential path.

use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::grid::{BoundaryRule, Grid2D, GridError};
use crate::model::{source, Background, FluxModel, FluxShape, Regime};
use crate::run::{self, Evolution, RunError, Schedule, SnapshotSeries};
use crate::solver1d::{limited_increment, line_fluxes, SpaceOrder, StepPolicy};
use crate::time::{self, SolverError, TimeScheme};

/// CFL limit of the unsplit scheme: (Δτ/Δx) max|v±| ≤ 1/2.
pub const CFL_LIMIT_2D: f64 = 0.5;

/// Cell averages v̄_{j,k}, row-major with x fastest, stamped with τ.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub values: Vec<f64>,
    pub tau: f64,
}

impl Field2D {
    pub fn new(values: Vec<f64>, tau: f64) -> Self {
        Self { values, tau }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Interface traces of the piecewise-linear reconstruction, one entry per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction2D {
    /// δˣ Δx
    pub increments_x: Vec<f64>,
    /// δʸ Δy
    pub increments_y: Vec<f64>,
    /// v⁺_{j−1/2,k}: trace at the cell's left face
    pub west: Vec<f64>,
    /// v⁻_{j+1/2,k}: trace at the cell's right face
    pub east: Vec<f64>,
    /// v⁺_{j,k−1/2}
    pub south: Vec<f64>,
    /// v⁻_{j,k+1/2}
    pub north: Vec<f64>,
}

#[inline]
fn sample(values: &[f64], jx: usize, jy: usize, boundary: BoundaryRule, j: isize, k: isize) -> f64 {
    values[boundary.index(k, jy) * jx + boundary.index(j, jx)]
}

pub fn reconstruct_2d(values: &[f64], grid: &Grid2D, boundary: BoundaryRule) -> Reconstruction2D {
    let (jx, jy) = (grid.jx(), grid.jy());
    let at = |j: isize, k: isize| sample(values, jx, jy, boundary, j, k);
    let n = jx * jy;
    let mut rec = Reconstruction2D {
        increments_x: Vec::with_capacity(n),
        increments_y: Vec::with_capacity(n),
        west: Vec::with_capacity(n),
        east: Vec::with_capacity(n),
        south: Vec::with_capacity(n),
        north: Vec::with_capacity(n),
    };
    for k in 0..jy as isize {
        for j in 0..jx as isize {
            let v = at(j, k);
            let dx = limited_increment(at(j - 1, k), v, at(j + 1, k));
            let dy = limited_increment(at(j, k - 1), v, at(j, k + 1));
            rec.increments_x.push(dx);
            rec.increments_y.push(dy);
            rec.west.push(v - 0.5 * dx);
            rec.east.push(v + 0.5 * dx);
            rec.south.push(v - 0.5 * dy);
            rec.north.push(v + 0.5 * dy);
        }
    }
    rec
}

#[cfg(feature = "parallel")]
fn for_each_row<F>(data: &mut [f64], width: usize, op: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    use rayon::prelude::*;
    data.par_chunks_mut(width)
        .enumerate()
        .for_each(|(k, row)| op(k, row));
}

#[cfg(not(feature = "parallel"))]
fn for_each_row<F>(data: &mut [f64], width: usize, op: F)
where
    F: Fn(usize, &mut [f64]),
{
    data.chunks_mut(width)
        .enumerate()
        .for_each(|(k, row)| op(k, row));
}

#[cfg(feature = "parallel")]
fn max_over_rows<F>(rows: usize, op: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    // max is exact and order-independent, so the result does not depend on
    // the thread count
    (0..rows).into_par_iter().map(op).reduce(|| 0.0, f64::max)
}

#[cfg(not(feature = "parallel"))]
fn max_over_rows<F>(rows: usize, op: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..rows).map(op).fold(0.0, f64::max)
}

/// Geometric step shrinking on contracting backgrounds: the previous proposal
/// and the time at which it was made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreviousStep {
    pub tau: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver2D {
    pub grid: Grid2D,
    pub background: Background,
    pub flux: FluxModel,
    /// Only `time` and `space` are used; the 2D step rules carry their own
    /// constants instead of `cfl`.
    pub policy: StepPolicy,
    pub boundary: BoundaryRule,
}

impl Solver2D {
    pub fn new(
        grid: Grid2D,
        background: Background,
        flux: FluxModel,
        policy: StepPolicy,
        boundary: BoundaryRule,
    ) -> Result<Self, SolverError> {
        policy.validate()?;
        Ok(Self {
            grid,
            background,
            flux,
            policy,
            boundary,
        })
    }

    fn check_len(&self, len: usize) -> Result<(), SolverError> {
        if len != self.grid.len() {
            return Err(GridError::SizeMismatch {
                expected: self.grid.len(),
                found: len,
            }
            .into());
        }
        Ok(())
    }

    /// Semi-discrete right-hand side
    /// −(H_{j+1/2,k} − H_{j−1/2,k})/Δx − (H_{j,k+1/2} − H_{j,k−1/2})/Δy + m(τ) h(v̄_{j,k}).
    pub fn rhs_into(
        &self,
        tau: f64,
        values: &[f64],
        space: SpaceOrder,
        out: &mut [f64],
    ) -> Result<(), SolverError> {
        self.check_len(values.len())?;
        let m = self.background.geometry_coefficient(tau)?;
        let (jx, jy) = (self.grid.jx(), self.grid.jy());
        let (dx, dy) = (self.grid.dx(), self.grid.dy());
        let boundary = self.boundary;
        let g = self.flux.g;
        let at = |j: isize, k: isize| sample(values, jx, jy, boundary, j, k);

        // y-interface fluxes; row `k` holds the interface between rows k−1 and k
        let mut fluxes_y = vec![0.0; (jy + 1) * jx];
        for_each_row(&mut fluxes_y, jx, |k, row| {
            let k = k as isize;
            for (j, flux) in row.iter_mut().enumerate() {
                let j = j as isize;
                let below = at(j, k - 1);
                let above = at(j, k);
                *flux = match space {
                    SpaceOrder::First => g.godunov(below, above),
                    SpaceOrder::SecondMinmod => {
                        let north = below + 0.5 * limited_increment(at(j, k - 2), below, above);
                        let south = above - 0.5 * limited_increment(below, above, at(j, k + 1));
                        g.godunov(north, south)
                    }
                };
            }
        });

        for_each_row(out, jx, |k, row| {
            let mut fluxes_x = vec![0.0; jx + 1];
            line_fluxes(
                jx,
                |j| at(j, k as isize),
                space,
                FluxModel::F,
                &mut fluxes_x,
            );
            let lower = &fluxes_y[k * jx..(k + 1) * jx];
            let upper = &fluxes_y[(k + 1) * jx..(k + 2) * jx];
            let cells = &values[k * jx..(k + 1) * jx];
            for j in 0..jx {
                row[j] = -(fluxes_x[j + 1] - fluxes_x[j]) / dx - (upper[j] - lower[j]) / dy
                    + m * source(cells[j]);
            }
        });
        Ok(())
    }

    pub fn rhs(&self, field: &Field2D) -> Result<Vec<f64>, SolverError> {
        let mut out = vec![0.0; field.len()];
        self.rhs_into(field.tau, &field.values, self.policy.space, &mut out)?;
        Ok(out)
    }

    pub fn step_with(
        &self,
        scheme: TimeScheme,
        field: &Field2D,
        dt: f64,
    ) -> Result<Field2D, SolverError> {
        self.check_len(field.len())?;
        let space = self.policy.space;
        let values = time::advance(
            scheme,
            &self.background,
            field.tau,
            dt,
            &field.values,
            |tau, v, out| self.rhs_into(tau, v, space, out),
        )?;
        Ok(Field2D::new(values, field.tau + dt))
    }

    pub fn step_euler_2d(&self, field: &Field2D, dt: f64) -> Result<Field2D, SolverError> {
        self.step_with(TimeScheme::Euler, field, dt)
    }

    pub fn step_rk4_2d(&self, field: &Field2D, dt: f64) -> Result<Field2D, SolverError> {
        self.step_with(TimeScheme::Rk4, field, dt)
    }

    pub fn step_ssprk3_2d(&self, field: &Field2D, dt: f64) -> Result<Field2D, SolverError> {
        self.step_with(TimeScheme::SspRk3, field, dt)
    }

    pub fn step(&self, field: &Field2D, dt: f64) -> Result<Field2D, SolverError> {
        self.step_with(self.policy.time, field, dt)
    }

    fn speed(&self, v: f64) -> f64 {
        FluxModel::F
            .derivative(v)
            .abs()
            .max(self.flux.g.derivative(v).abs())
    }

    /// Largest characteristic speed over the interface traces (cell values at
    /// first order). For f = g = v²/2 this is max|v±|.
    pub fn max_trace_speed(&self, values: &[f64]) -> f64 {
        let (jx, jy) = (self.grid.jx(), self.grid.jy());
        let boundary = self.boundary;
        let space = self.policy.space;
        let at = |j: isize, k: isize| sample(values, jx, jy, boundary, j, k);
        max_over_rows(jy, |k| {
            let k = k as isize;
            let mut best = 0.0f64;
            for j in 0..jx as isize {
                let v = at(j, k);
                match space {
                    SpaceOrder::First => best = best.max(self.speed(v)),
                    SpaceOrder::SecondMinmod => {
                        let half_x = 0.5 * limited_increment(at(j - 1, k), v, at(j + 1, k));
                        let half_y = 0.5 * limited_increment(at(j, k - 1), v, at(j, k + 1));
                        for trace in [v - half_x, v + half_x, v - half_y, v + half_y] {
                            best = best.max(self.speed(trace));
                        }
                    }
                }
            }
            best
        })
    }

    fn max_cell_speed(&self, values: &[f64]) -> f64 {
        values.iter().fold(0.0, |m, &v| m.max(self.speed(v)))
    }

    /// (1/2) min(Δx, Δy) / max speed over traces; infinite for a zero field.
    pub fn cfl_bound(&self, field: &Field2D) -> f64 {
        let speed = self.max_trace_speed(&field.values);
        if speed > 0.0 {
            CFL_LIMIT_2D * self.grid.dx().min(self.grid.dy()) / speed
        } else {
            f64::INFINITY
        }
    }

    fn require_uniform(&self) -> Result<(), SolverError> {
        if !self.grid.is_uniform() {
            return Err(SolverError::InvalidPolicy(
                "the 2D regime step rules assume dx = dy".into(),
            ));
        }
        Ok(())
    }

    /// Step size of the 2D policies.
    ///
    /// * expanding: min(CFL bound, (1/κ) min τ/(1 − v²))
    /// * contracting: c · min(Δy / max|v|, 2|τ|) with c = 1/2 (κ ≤ 1) or
    ///   1/(2κ) (κ > 1), capped by (τ_n/τ_{n−1}) Δτ_{n−1} when `previous` is given
    /// * flat: the CFL bound
    pub fn dt_2d(
        &self,
        field: &Field2D,
        previous: Option<PreviousStep>,
    ) -> Result<f64, SolverError> {
        match self.background.regime() {
            Regime::Flat => Ok(self.cfl_bound(field)),
            Regime::Expanding => {
                self.require_uniform()?;
                let kappa = self.background.kappa();
                let source_bound = field
                    .values
                    .iter()
                    .map(|&v| 1.0 - v * v)
                    .filter(|&s| s > 0.0)
                    .map(|s| field.tau / s)
                    .fold(f64::INFINITY, f64::min)
                    / kappa;
                Ok(self.cfl_bound(field).min(source_bound))
            }
            Regime::Contracting => {
                self.require_uniform()?;
                let kappa = self.background.kappa();
                let factor = if kappa > 1.0 { 0.5 / kappa } else { 0.5 };
                let speed = self.max_cell_speed(&field.values);
                let transport = if speed > 0.0 {
                    self.grid.dy() / speed
                } else {
                    f64::INFINITY
                };
                let mut dt = factor * transport.min(2.0 * field.tau.abs());
                if let Some(prev) = previous {
                    dt = dt.min(field.tau / prev.tau * prev.dt);
                }
                Ok(dt)
            }
        }
    }

    pub fn initial_field(&self, values: Vec<f64>) -> Result<Field2D, SolverError> {
        self.check_len(values.len())?;
        Ok(Field2D::new(values, self.background.tau0()))
    }

    pub fn run(
        &self,
        initial: Field2D,
        schedule: &Schedule,
    ) -> Result<SnapshotSeries<Field2D>, RunError<Field2D>> {
        self.run_with(initial, schedule, StepSource::Policy)
    }

    /// Like [`Solver2D::run`] with an explicit step source.
    pub fn run_with(
        &self,
        initial: Field2D,
        schedule: &Schedule,
        steps: StepSource,
    ) -> Result<SnapshotSeries<Field2D>, RunError<Field2D>> {
        if let Err(e) = self.check_len(initial.len()) {
            return Err(RunError::Setup(e));
        }
        let mut evolution = Evolution2D {
            solver: self,
            previous: None,
            steps,
        };
        run::drive(&mut evolution, &self.background, initial, schedule)
    }
}

/// Where the run loop takes its step sizes from.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSource {
    Policy,
    /// A fixed step (still shortened to land on output times).
    Fixed(f64),
}

struct Evolution2D<'a> {
    solver: &'a Solver2D,
    previous: Option<PreviousStep>,
    steps: StepSource,
}

impl Evolution for Evolution2D<'_> {
    type Field = Field2D;

    fn tau(field: &Field2D) -> f64 {
        field.tau
    }

    fn set_tau(field: &mut Field2D, tau: f64) {
        field.tau = tau;
    }

    fn values(field: &Field2D) -> &[f64] {
        &field.values
    }

    fn propose_dt(&mut self, field: &Field2D) -> Result<f64, SolverError> {
        let dt = match self.steps {
            StepSource::Policy => self.solver.dt_2d(field, self.previous)?,
            StepSource::Fixed(dt) => dt,
        };
        if self.solver.background.regime() == Regime::Contracting {
            self.previous = Some(PreviousStep { tau: field.tau, dt });
        }
        Ok(dt)
    }

    fn advance(&self, field: &Field2D, dt: f64) -> Result<Field2D, SolverError> {
        self.solver.step(field, dt)
    }

    fn diagnose(&self, field: &Field2D) -> DiagnosticsRecord {
        diagnostics::record_2d(field, &self.solver.grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup2D {
    pub solver: Solver2D,
    pub initial: Vec<f64>,
    pub schedule: Schedule,
}

pub fn run_2d(setup: &RunSetup2D) -> Result<SnapshotSeries<Field2D>, RunError<Field2D>> {
    let initial = setup
        .solver
        .initial_field(setup.initial.clone())
        .map_err(RunError::Setup)?;
    setup.solver.run(initial, &setup.schedule)
}

/// 2D time integrator paired with a regime: RK4 when expanding or flat,
/// SSP-RK3 when contracting.
pub fn default_time_scheme(regime: Regime) -> TimeScheme {
    match regime {
        Regime::Contracting => TimeScheme::SspRk3,
        Regime::Expanding | Regime::Flat => TimeScheme::Rk4,
    }
}

impl FluxShape {
    /// Whether the Godunov flux of this shape is evaluated in closed form.
    pub fn uses_closed_form_godunov(&self) -> bool {
        self.is_convex()
    }
}
