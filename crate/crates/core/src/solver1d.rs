//! The (1+1) finite-volume scheme: limited piecewise-linear reconstruction,
//! Godunov interface fluxes, the semi-discrete right-hand side, and the
//! regime-specific time-step policies.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::grid::{BoundaryRule, Grid1D, GridError};
use crate::model::{source, Background, FluxShape, Regime};
use crate::run::{self, Evolution, RunError, Schedule, SnapshotSeries};
use crate::time::{self, SolverError, TimeScheme};

/// Spatial accuracy of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceOrder {
    /// Piecewise constant: interface states are the neighbouring averages.
    First,
    /// Piecewise linear with the limited slope of [`limited_increment`].
    SecondMinmod,
}

impl SpaceOrder {
    pub fn order(self) -> u32 {
        match self {
            SpaceOrder::First => 1,
            SpaceOrder::SecondMinmod => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpaceOrder::First => "first",
            SpaceOrder::SecondMinmod => "second-minmod",
        }
    }
}

/// Optional extra time-step rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExtraRule {
    #[default]
    None,
    /// Contracting runs with κ > 1 bound the step by |τ|/κ.
    KappaScaled,
}

impl ExtraRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtraRule::None => "none",
            ExtraRule::KappaScaled => "kappa-scaled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    /// Safety factor in (0, 1] multiplying the minimum of all step bounds.
    pub cfl: f64,
    pub time: TimeScheme,
    pub space: SpaceOrder,
    pub extra_rule: ExtraRule,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            cfl: 0.7,
            time: TimeScheme::Rk4,
            space: SpaceOrder::SecondMinmod,
            extra_rule: ExtraRule::None,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::InvalidPolicy(format!(
                "cfl number must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        Ok(())
    }

    /// Short scheme label such as `2S4T`.
    pub fn label(&self) -> alloc::string::String {
        format!("{}S{}T", self.space.order(), self.time.order())
    }
}

/// Cell averages on a 1D grid, stamped with the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub values: Vec<f64>,
    pub tau: f64,
}

impl Field1D {
    pub fn new(values: Vec<f64>, tau: f64) -> Self {
        Self { values, tau }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        diagnostics::max_abs(&self.values)
    }
}

/// Limited slope times cell width, δ_j Δ, from the neighbouring averages.
///
/// Zero unless the one-sided differences share a sign; otherwise
/// sign(v₊ − v₋) · min(2|v − v₋|, 2|v₊ − v|, |v₊ − v₋|/2).
#[inline]
pub fn limited_increment(left: f64, center: f64, right: f64) -> f64 {
    let backward = center - left;
    let forward = right - center;
    if forward * backward > 0.0 {
        let centered = right - left;
        let magnitude = (2.0 * backward.abs())
            .min(2.0 * forward.abs())
            .min(0.5 * centered.abs());
        magnitude.copysign(centered)
    } else {
        0.0
    }
}

/// Per-cell limited increments and interface traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction1D {
    /// δ_j Δy for every cell.
    pub increments: Vec<f64>,
    /// v_{j,L} = v_j − δ_j Δy / 2
    pub left: Vec<f64>,
    /// v_{j,R} = v_j + δ_j Δy / 2
    pub right: Vec<f64>,
}

pub fn reconstruct_minmod(values: &[f64], boundary: BoundaryRule) -> Reconstruction1D {
    let n = values.len();
    let at = |i: isize| values[boundary.index(i, n)];
    let increments: Vec<f64> = (0..n as isize)
        .map(|j| limited_increment(at(j - 1), at(j), at(j + 1)))
        .collect();
    let left = values
        .iter()
        .zip(&increments)
        .map(|(&v, &d)| v - 0.5 * d)
        .collect();
    let right = values
        .iter()
        .zip(&increments)
        .map(|(&v, &d)| v + 0.5 * d)
        .collect();
    Reconstruction1D {
        increments,
        left,
        right,
    }
}

/// Godunov fluxes at the `n + 1` interfaces of a line of `n` cells.
///
/// `value(i)` must accept ghost indices `-2..=n+1`. Interface `i` separates
/// cells `i - 1` and `i`.
#[inline]
pub(crate) fn line_fluxes<V>(
    n: usize,
    value: V,
    order: SpaceOrder,
    shape: FluxShape,
    fluxes: &mut [f64],
) where
    V: Fn(isize) -> f64,
{
    debug_assert_eq!(fluxes.len(), n + 1);
    match order {
        SpaceOrder::First => {
            let mut prev = value(-1);
            for (i, flux) in fluxes.iter_mut().enumerate() {
                let current = value(i as isize);
                *flux = shape.godunov(prev, current);
                prev = current;
            }
        }
        SpaceOrder::SecondMinmod => {
            let mut left = value(-2);
            let mut center = value(-1);
            let mut right = value(0);
            let mut prev_trace = center + 0.5 * limited_increment(left, center, right);
            for (i, flux) in fluxes.iter_mut().enumerate() {
                left = center;
                center = right;
                right = value(i as isize + 1);
                let inc = limited_increment(left, center, right);
                *flux = shape.godunov(prev_trace, center - 0.5 * inc);
                prev_trace = center + 0.5 * inc;
            }
        }
    }
}

/// Complete (1+1) discretization: grid, background, flux, policy and boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver1D {
    pub grid: Grid1D,
    pub background: Background,
    pub flux: FluxShape,
    pub policy: StepPolicy,
    pub boundary: BoundaryRule,
}

impl Solver1D {
    pub fn new(
        grid: Grid1D,
        background: Background,
        flux: FluxShape,
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
        if len != self.grid.cells() {
            return Err(GridError::SizeMismatch {
                expected: self.grid.cells(),
                found: len,
            }
            .into());
        }
        Ok(())
    }

    /// G(v, τ)_j = −(F_{j+1/2} − F_{j−1/2})/Δy + m(τ) h(v_j), written into `out`.
    pub fn rhs_into(
        &self,
        tau: f64,
        values: &[f64],
        space: SpaceOrder,
        out: &mut [f64],
    ) -> Result<(), SolverError> {
        self.check_len(values.len())?;
        let m = self.background.geometry_coefficient(tau)?;
        let n = values.len();
        let dy = self.grid.dy();
        let mut fluxes = vec![0.0; n + 1];
        let boundary = self.boundary;
        line_fluxes(
            n,
            |i| values[boundary.index(i, n)],
            space,
            self.flux,
            &mut fluxes,
        );
        for j in 0..n {
            out[j] = -(fluxes[j + 1] - fluxes[j]) / dy + m * source(values[j]);
        }
        Ok(())
    }

    pub fn rhs(&self, field: &Field1D) -> Result<Vec<f64>, SolverError> {
        let mut out = vec![0.0; field.len()];
        self.rhs_into(field.tau, &field.values, self.policy.space, &mut out)?;
        Ok(out)
    }

    /// One step of `scheme` with the policy's spatial order.
    pub fn step_with(
        &self,
        scheme: TimeScheme,
        field: &Field1D,
        dt: f64,
    ) -> Result<Field1D, SolverError> {
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
        Ok(Field1D::new(values, field.tau + dt))
    }

    pub fn step_euler(&self, field: &Field1D, dt: f64) -> Result<Field1D, SolverError> {
        self.step_with(TimeScheme::Euler, field, dt)
    }

    pub fn step_rk4(&self, field: &Field1D, dt: f64) -> Result<Field1D, SolverError> {
        self.step_with(TimeScheme::Rk4, field, dt)
    }

    /// One step with the policy's time scheme.
    pub fn step(&self, field: &Field1D, dt: f64) -> Result<Field1D, SolverError> {
        self.step_with(self.policy.time, field, dt)
    }

    /// Transport bound Δy / max|φ'(v)|, infinite for a zero field. For the
    /// quadratic flux the speed is max|v|.
    fn transport_bound(&self, field: &Field1D) -> f64 {
        let speed = field
            .values
            .iter()
            .fold(0.0f64, |m, &v| m.max(self.flux.derivative(v).abs()));
        if speed > 0.0 {
            self.grid.dy() / speed
        } else {
            f64::INFINITY
        }
    }

    /// Expanding step: cfl · min(Δy / max|v|, min_j 2τ / (κ (1 − v_j²))).
    ///
    /// Cells with |v| ≥ 1 do not constrain the source bound.
    pub fn dt_expanding(&self, field: &Field1D) -> Result<f64, SolverError> {
        if self.background.regime() != Regime::Expanding {
            return Err(SolverError::InvalidPolicy(
                "dt_expanding requires an expanding background".into(),
            ));
        }
        let kappa = self.background.kappa();
        let source_bound = field
            .values
            .iter()
            .map(|&v| 1.0 - v * v)
            .filter(|&s| s > 0.0)
            .map(|s| 2.0 * field.tau / (kappa * s))
            .fold(f64::INFINITY, f64::min);
        Ok(self.policy.cfl * self.transport_bound(field).min(source_bound))
    }

    /// Contracting step: cfl · min(Δy / max|v|, min(1, 1/κ) |τ|), or |τ|/κ
    /// under [`ExtraRule::KappaScaled`] when κ > 1.
    pub fn dt_contracting(&self, field: &Field1D) -> Result<f64, SolverError> {
        if self.background.regime() != Regime::Contracting {
            return Err(SolverError::InvalidPolicy(
                "dt_contracting requires a contracting background".into(),
            ));
        }
        let kappa = self.background.kappa();
        let geometric = if self.policy.extra_rule == ExtraRule::KappaScaled && kappa > 1.0 {
            field.tau.abs() / kappa
        } else {
            (1.0f64).min(1.0 / kappa) * field.tau.abs()
        };
        Ok(self.policy.cfl * self.transport_bound(field).min(geometric))
    }

    /// Flat step: cfl · Δy / max|v| (infinite for a zero field).
    pub fn dt_flat(&self, field: &Field1D) -> f64 {
        self.policy.cfl * self.transport_bound(field)
    }

    /// Step size from the policy of the background's regime.
    pub fn time_step(&self, field: &Field1D) -> Result<f64, SolverError> {
        match self.background.regime() {
            Regime::Expanding => self.dt_expanding(field),
            Regime::Contracting => self.dt_contracting(field),
            Regime::Flat => Ok(self.dt_flat(field)),
        }
    }

    pub fn initial_field(&self, values: Vec<f64>) -> Result<Field1D, SolverError> {
        self.check_len(values.len())?;
        Ok(Field1D::new(values, self.background.tau0()))
    }

    /// Integrates from `initial` through the schedule, recording a snapshot at
    /// every checkpoint.
    pub fn run(
        &self,
        initial: Field1D,
        schedule: &Schedule,
    ) -> Result<SnapshotSeries<Field1D>, RunError<Field1D>> {
        if let Err(e) = self.check_len(initial.len()) {
            return Err(RunError::Setup(e));
        }
        let mut evolution = Evolution1D { solver: self };
        run::drive(&mut evolution, &self.background, initial, schedule)
    }
}

struct Evolution1D<'a> {
    solver: &'a Solver1D,
}

impl Evolution for Evolution1D<'_> {
    type Field = Field1D;

    fn tau(field: &Field1D) -> f64 {
        field.tau
    }

    fn set_tau(field: &mut Field1D, tau: f64) {
        field.tau = tau;
    }

    fn values(field: &Field1D) -> &[f64] {
        &field.values
    }

    fn propose_dt(&mut self, field: &Field1D) -> Result<f64, SolverError> {
        self.solver.time_step(field)
    }

    fn advance(&self, field: &Field1D, dt: f64) -> Result<Field1D, SolverError> {
        self.solver.step(field, dt)
    }

    fn diagnose(&self, field: &Field1D) -> DiagnosticsRecord {
        diagnostics::record_1d(field, self.solver.grid.dy())
    }
}

/// Everything needed for one 1D run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup1D {
    pub solver: Solver1D,
    pub initial: Vec<f64>,
    pub schedule: Schedule,
}

pub fn run_1d(setup: &RunSetup1D) -> Result<SnapshotSeries<Field1D>, RunError<Field1D>> {
    let initial = setup
        .solver
        .initial_field(setup.initial.clone())
        .map_err(RunError::Setup)?;
    setup.solver.run(initial, &setup.schedule)
}
