//! Explicit time integrators shared by the 1D and 2D solvers.
//!
//! The integrators act on flat slices of cell averages and call back into a
//! right-hand side `G(τ, v)`; the stage times follow the classical tables, with
//! the source re-evaluated at every stage (no operator splitting).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::GridError;
use crate::model::{Background, ModelError, Regime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("time step must be finite and non-negative, got {0}")]
    InvalidStep(f64),
    #[error("step of {dt} from tau = {tau} reaches or crosses the singular time tau = 0")]
    CrossesSingularity { tau: f64, dt: f64 },
    #[error("non-finite value produced at tau = {tau}")]
    NonFinite { tau: f64 },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid run setup: {0}")]
    InvalidRun(String),
}

/// Time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeScheme {
    /// Forward Euler (first order).
    Euler,
    /// Classical four-stage Runge-Kutta.
    Rk4,
    /// Three-stage strong-stability-preserving Runge-Kutta (Shu-Osher form).
    SspRk3,
}

impl TimeScheme {
    pub fn order(self) -> u32 {
        match self {
            TimeScheme::Euler => 1,
            TimeScheme::Rk4 => 4,
            TimeScheme::SspRk3 => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeScheme::Euler => "euler",
            TimeScheme::Rk4 => "rk4",
            TimeScheme::SspRk3 => "ssprk3",
        }
    }
}

/// Checks that a step of length `dt` from `tau` stays inside the regime's
/// time range (contracting runs must stay strictly below zero).
pub fn check_step(bg: &Background, tau: f64, dt: f64) -> Result<(), SolverError> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(SolverError::InvalidStep(dt));
    }
    if !bg.admits_tau(tau) {
        return Err(SolverError::Model(ModelError::OutOfDomain {
            regime: bg.regime(),
            value: tau,
            expected: match bg.regime() {
                Regime::Expanding => "tau > 0",
                Regime::Contracting => "tau < 0",
                Regime::Flat => "any tau",
            },
        }));
    }
    if bg.regime() == Regime::Contracting && tau + dt >= 0.0 {
        return Err(SolverError::CrossesSingularity { tau, dt });
    }
    Ok(())
}

/// Advances `u` by one step of `scheme`.
///
/// `rhs(τ, v, out)` must overwrite `out` with G(v, τ).
pub fn advance<R>(
    scheme: TimeScheme,
    bg: &Background,
    tau: f64,
    dt: f64,
    u: &[f64],
    mut rhs: R,
) -> Result<Vec<f64>, SolverError>
where
    R: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SolverError>,
{
    check_step(bg, tau, dt)?;
    if dt == 0.0 {
        return Ok(u.to_vec());
    }
    let n = u.len();
    match scheme {
        TimeScheme::Euler => {
            let mut k = vec![0.0; n];
            rhs(tau, u, &mut k)?;
            Ok(u.iter().zip(&k).map(|(&v, &g)| v + dt * g).collect())
        }
        TimeScheme::Rk4 => {
            let half = 0.5 * dt;
            let mut k1 = vec![0.0; n];
            let mut k2 = vec![0.0; n];
            let mut k3 = vec![0.0; n];
            let mut k4 = vec![0.0; n];
            let mut stage = vec![0.0; n];

            rhs(tau, u, &mut k1)?;
            for i in 0..n {
                stage[i] = u[i] + half * k1[i];
            }
            rhs(tau + half, &stage, &mut k2)?;
            for i in 0..n {
                stage[i] = u[i] + half * k2[i];
            }
            rhs(tau + half, &stage, &mut k3)?;
            for i in 0..n {
                stage[i] = u[i] + dt * k3[i];
            }
            rhs(tau + dt, &stage, &mut k4)?;
            let sixth = dt / 6.0;
            for i in 0..n {
                stage[i] = u[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            Ok(stage)
        }
        TimeScheme::SspRk3 => {
            let mut k = vec![0.0; n];
            rhs(tau, u, &mut k)?;
            let u1: Vec<f64> = (0..n).map(|i| u[i] + dt * k[i]).collect();
            rhs(tau + dt, &u1, &mut k)?;
            let u2: Vec<f64> = (0..n)
                .map(|i| 0.25 * (3.0 * u[i] + u1[i] + dt * k[i]))
                .collect();
            rhs(tau + 0.5 * dt, &u2, &mut k)?;
            Ok((0..n)
                .map(|i| (u[i] + 2.0 * u2[i] + 2.0 * dt * k[i]) / 3.0)
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(scheme: TimeScheme, steps: usize) -> f64 {
        // y' = -y on [0, 1] in flat time
        let bg = Background::flat(0.0).unwrap();
        let dt = 1.0 / steps as f64;
        let mut u = vec![1.0];
        let mut tau = 0.0;
        for _ in 0..steps {
            u = advance(scheme, &bg, tau, dt, &u, |_, v, out| {
                out[0] = -v[0];
                Ok(())
            })
            .unwrap();
            tau += dt;
        }
        (u[0] - libm::exp(-1.0)).abs()
    }

    #[test]
    fn observed_orders() {
        for (scheme, expected) in [
            (TimeScheme::Euler, 1.0),
            (TimeScheme::SspRk3, 3.0),
            (TimeScheme::Rk4, 4.0),
        ] {
            let rate = libm::log2(decay(scheme, 20) / decay(scheme, 40));
            assert!((rate - expected).abs() < 0.15, "{scheme:?}: {rate}");
        }
    }

    #[test]
    fn stage_times_follow_the_tables() {
        let bg = Background::expanding(1.0, 1.0).unwrap();
        let mut times = Vec::new();
        advance(TimeScheme::Rk4, &bg, 1.0, 0.5, &[0.0], |t, _, out| {
            times.push(t);
            out[0] = 0.0;
            Ok(())
        })
        .unwrap();
        assert_eq!(times, vec![1.0, 1.25, 1.25, 1.5]);
        times.clear();
        advance(TimeScheme::SspRk3, &bg, 1.0, 0.5, &[0.0], |t, _, out| {
            times.push(t);
            out[0] = 0.0;
            Ok(())
        })
        .unwrap();
        assert_eq!(times, vec![1.0, 1.5, 1.25]);
    }

    #[test]
    fn contracting_step_may_not_reach_zero() {
        let bg = Background::contracting(2.0, -1.0).unwrap();
        let err = advance(TimeScheme::Euler, &bg, -0.1, 0.1, &[0.5], |_, _, out| {
            out[0] = 0.0;
            Ok(())
        });
        assert_eq!(
            err,
            Err(SolverError::CrossesSingularity { tau: -0.1, dt: 0.1 })
        );
        assert!(check_step(&bg, -0.1, 0.05).is_ok());
        assert!(check_step(&bg, -0.1, -0.05).is_err());
    }
}
