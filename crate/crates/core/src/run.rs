//! Checkpointed run loop shared by the 1D and 2D solvers.

use alloc::format;
use alloc::vec::Vec;

use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;
use crate::model::{Background, Regime};
use crate::time::SolverError;

/// Default cap on the number of time steps in one run.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

/// Output times and termination of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Strictly increasing output times in (τ0, τ_end]. The final state at
    /// `tau_end` is always recorded as well.
    pub checkpoints: Vec<f64>,
    pub tau_end: f64,
    pub max_steps: usize,
}

impl Schedule {
    pub fn new(checkpoints: Vec<f64>, tau_end: f64) -> Self {
        Self {
            checkpoints,
            tau_end,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn validate(&self, bg: &Background, tau0: f64) -> Result<(), SolverError> {
        let invalid = |msg| Err(SolverError::InvalidRun(msg));
        if !(self.tau_end.is_finite() && self.tau_end > tau0) {
            return invalid(format!(
                "tau_end = {} must exceed the initial time {tau0}",
                self.tau_end
            ));
        }
        if bg.regime() == Regime::Contracting && self.tau_end >= 0.0 {
            return invalid(format!(
                "contracting runs must end before tau = 0, got tau_end = {}",
                self.tau_end
            ));
        }
        let mut previous = tau0;
        for &c in &self.checkpoints {
            if !(c > previous && c <= self.tau_end) {
                return invalid(format!(
                    "checkpoints must increase strictly within ({tau0}, {}], offending value {c}",
                    self.tau_end
                ));
            }
            previous = c;
        }
        if self.max_steps == 0 {
            return invalid("max_steps must be positive".into());
        }
        Ok(())
    }

    fn outputs(&self) -> Vec<f64> {
        self.checkpoints.clone()
    }
}

/// One recorded state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<F> {
    pub tau: f64,
    pub field: F,
    pub diagnostics: DiagnosticsRecord,
}

/// Summary of the accepted steps of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    /// Steps shortened to land exactly on an output time.
    pub landings: usize,
    pub dt_first: f64,
    pub dt_last: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for StepStats {
    fn default() -> Self {
        Self {
            steps: 0,
            landings: 0,
            dt_first: f64::NAN,
            dt_last: f64::NAN,
            dt_min: f64::INFINITY,
            dt_max: 0.0,
        }
    }
}

impl StepStats {
    fn record(&mut self, dt: f64, landed: bool) {
        if self.steps == 0 {
            self.dt_first = dt;
        }
        self.steps += 1;
        self.dt_last = dt;
        self.dt_min = self.dt_min.min(dt);
        self.dt_max = self.dt_max.max(dt);
        if landed {
            self.landings += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries<F> {
    pub snapshots: Vec<Snapshot<F>>,
    pub stats: StepStats,
}

impl<F> SnapshotSeries<F> {
    pub fn at(&self, tau: f64) -> Option<&Snapshot<F>> {
        self.snapshots.iter().find(|s| s.tau == tau)
    }

    pub fn last(&self) -> Option<&Snapshot<F>> {
        self.snapshots.last()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError<F> {
    #[error("invalid run setup: {0}")]
    Setup(SolverError),
    #[error("run aborted after {steps} steps: {reason}")]
    Aborted {
        reason: SolverError,
        steps: usize,
        last_good: F,
    },
    #[error("step budget of {steps} steps exhausted")]
    BudgetExceeded { steps: usize, last_good: F },
}

/// A discretization that can be marched in time by [`drive`].
pub trait Evolution {
    type Field: Clone;

    fn tau(field: &Self::Field) -> f64;
    fn set_tau(field: &mut Self::Field, tau: f64);
    fn values(field: &Self::Field) -> &[f64];
    /// Proposed step; may be infinite when no bound is active.
    fn propose_dt(&mut self, field: &Self::Field) -> Result<f64, SolverError>;
    fn advance(&self, field: &Self::Field, dt: f64) -> Result<Self::Field, SolverError>;
    fn diagnose(&self, field: &Self::Field) -> DiagnosticsRecord;
}

/// Marches `initial` to `schedule.tau_end`, shortening the step before each
/// output time so that it is hit exactly. Snapshots are recorded at every
/// checkpoint and at `tau_end`.
pub fn drive<E: Evolution>(
    evolution: &mut E,
    bg: &Background,
    initial: E::Field,
    schedule: &Schedule,
) -> Result<SnapshotSeries<E::Field>, RunError<E::Field>> {
    let tau0 = E::tau(&initial);
    schedule.validate(bg, tau0).map_err(RunError::Setup)?;
    if E::values(&initial).iter().any(|v| !v.is_finite()) {
        return Err(RunError::Setup(SolverError::NonFinite { tau: tau0 }));
    }

    let mut outputs = schedule.outputs();
    if outputs.last() != Some(&schedule.tau_end) {
        outputs.push(schedule.tau_end);
    }

    let mut field = initial;
    let mut stats = StepStats::default();
    let mut snapshots = Vec::with_capacity(outputs.len());

    for &target in &outputs {
        while E::tau(&field) < target {
            if stats.steps >= schedule.max_steps {
                return Err(RunError::BudgetExceeded {
                    steps: stats.steps,
                    last_good: field,
                });
            }
            let abort = |reason, field: &E::Field, steps| RunError::Aborted {
                reason,
                steps,
                last_good: field.clone(),
            };
            let proposed = match evolution.propose_dt(&field) {
                Ok(dt) => dt,
                Err(e) => return Err(abort(e, &field, stats.steps)),
            };
            if proposed.is_nan() || proposed <= 0.0 {
                return Err(abort(
                    SolverError::InvalidStep(proposed),
                    &field,
                    stats.steps,
                ));
            }
            let remaining = target - E::tau(&field);
            let landing = proposed >= remaining;
            let dt = if landing { remaining } else { proposed };
            let mut next = match evolution.advance(&field, dt) {
                Ok(next) => next,
                Err(e) => return Err(abort(e, &field, stats.steps)),
            };
            if E::values(&next).iter().any(|v| !v.is_finite()) {
                let tau = E::tau(&next);
                return Err(abort(SolverError::NonFinite { tau }, &field, stats.steps));
            }
            if landing {
                E::set_tau(&mut next, target);
            }
            stats.record(dt, landing);
            field = next;
        }
        snapshots.push(Snapshot {
            tau: target,
            diagnostics: evolution.diagnose(&field),
            field: field.clone(),
        });
    }

    Ok(SnapshotSeries { snapshots, stats })
}
