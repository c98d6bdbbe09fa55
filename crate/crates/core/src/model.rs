//! Background geometry, flux and source functions, and the exact spatially
//! homogeneous solution.

use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("kappa must be a positive finite number, got {0}")]
    InvalidKappa(f64),
    #[error("initial time tau0 = {tau0} is not admissible for a {regime} background")]
    InvalidTau0 { regime: Regime, tau0: f64 },
    #[error("time {value} lies outside the {regime} domain ({expected})")]
    OutOfDomain {
        regime: Regime,
        value: f64,
        expected: &'static str,
    },
    #[error("the geometry coefficient is singular at tau = 0")]
    SingularTime,
    #[error("initial velocity must satisfy |v0| < 1, got {0}")]
    InvalidVelocity(f64),
    #[error("mixed-flux weight beta must lie in (0, 1), got {0}")]
    InvalidBeta(f64),
}

/// Geometry regime of the background spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// τ ∈ (0, ∞), scale factor grows without bound.
    Expanding,
    /// τ ∈ (−∞, 0), scale factor shrinks to zero.
    Contracting,
    /// a ≡ 1: the standard Burgers equation, no source.
    Flat,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Expanding => "expanding",
            Regime::Contracting => "contracting",
            Regime::Flat => "flat",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cosmological background: regime, geometry exponent κ and initial time τ0.
///
/// The scale factor is a(t) = |t|^α with α = κ/(1+κ); in the rescaled time τ
/// the geometry enters only through m(τ) = κ/τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    regime: Regime,
    kappa: f64,
    tau0: f64,
}

impl Background {
    pub fn new(regime: Regime, kappa: f64, tau0: f64) -> Result<Self, ModelError> {
        if !tau0.is_finite() {
            return Err(ModelError::InvalidTau0 { regime, tau0 });
        }
        match regime {
            Regime::Flat => Ok(Self {
                regime,
                kappa: 0.0,
                tau0,
            }),
            Regime::Expanding | Regime::Contracting => {
                if !(kappa.is_finite() && kappa > 0.0) {
                    return Err(ModelError::InvalidKappa(kappa));
                }
                let admissible = match regime {
                    Regime::Expanding => tau0 > 0.0,
                    _ => tau0 < 0.0,
                };
                if !admissible {
                    return Err(ModelError::InvalidTau0 { regime, tau0 });
                }
                Ok(Self {
                    regime,
                    kappa,
                    tau0,
                })
            }
        }
    }

    pub fn expanding(kappa: f64, tau0: f64) -> Result<Self, ModelError> {
        Self::new(Regime::Expanding, kappa, tau0)
    }

    pub fn contracting(kappa: f64, tau0: f64) -> Result<Self, ModelError> {
        Self::new(Regime::Contracting, kappa, tau0)
    }

    pub fn flat(tau0: f64) -> Result<Self, ModelError> {
        Self::new(Regime::Flat, 0.0, tau0)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Geometry exponent κ; zero for a flat background.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Expansion rate α = κ/(1+κ) of the scale factor.
    pub fn alpha(&self) -> f64 {
        self.kappa / (1.0 + self.kappa)
    }

    /// Scale factor a(t) = |t|^α.
    ///
    /// The admissible domain is t ≥ 1 (expanding) and −1 ≤ t < 0 (contracting).
    pub fn scale_factor(&self, t: f64) -> Result<f64, ModelError> {
        match self.regime {
            Regime::Flat => Ok(1.0),
            Regime::Expanding if t >= 1.0 && t.is_finite() => Ok(libm::pow(t, self.alpha())),
            Regime::Contracting if (-1.0..0.0).contains(&t) => Ok(libm::pow(-t, self.alpha())),
            regime => Err(ModelError::OutOfDomain {
                regime,
                value: t,
                expected: domain_of_t(regime),
            }),
        }
    }

    /// Rescaled time τ of a cosmic time t, with dτ = dt / a(t).
    pub fn tau_of_t(&self, t: f64) -> Result<f64, ModelError> {
        let exponent = 1.0 / (1.0 + self.kappa);
        match self.regime {
            Regime::Flat => Ok(t),
            Regime::Expanding if t > 0.0 && t.is_finite() => {
                Ok((1.0 + self.kappa) * libm::pow(t, exponent))
            }
            Regime::Contracting if t < 0.0 && t.is_finite() => {
                Ok(-(1.0 + self.kappa) * libm::pow(-t, exponent))
            }
            regime => Err(ModelError::OutOfDomain {
                regime,
                value: t,
                expected: domain_of_t(regime),
            }),
        }
    }

    /// Inverse of [`Background::tau_of_t`].
    pub fn t_of_tau(&self, tau: f64) -> Result<f64, ModelError> {
        let exponent = 1.0 + self.kappa;
        match self.regime {
            Regime::Flat => Ok(tau),
            Regime::Expanding if tau > 0.0 && tau.is_finite() => {
                Ok(libm::pow(tau / exponent, exponent))
            }
            Regime::Contracting if tau < 0.0 && tau.is_finite() => {
                Ok(-libm::pow(-tau / exponent, exponent))
            }
            regime => Err(ModelError::OutOfDomain {
                regime,
                value: tau,
                expected: domain_of_tau(regime),
            }),
        }
    }

    /// Geometry coefficient m(τ) = κ/τ (zero on a flat background).
    pub fn geometry_coefficient(&self, tau: f64) -> Result<f64, ModelError> {
        match self.regime {
            Regime::Flat => Ok(0.0),
            _ if tau == 0.0 => Err(ModelError::SingularTime),
            _ => Ok(self.kappa / tau),
        }
    }

    /// Whether `tau` lies in the open time range of the regime.
    pub fn admits_tau(&self, tau: f64) -> bool {
        tau.is_finite()
            && match self.regime {
                Regime::Expanding => tau > 0.0,
                Regime::Contracting => tau < 0.0,
                Regime::Flat => true,
            }
    }

    /// Exact spatially homogeneous solution of v' = −m(τ) v (1 − v²) with
    /// v(tau0) = v0.
    ///
    /// Uses the integrating-factor form with M(τ) − M(τ0) = κ ln|τ/τ0|, so any
    /// admissible `tau0` is accepted, not only ±1.
    pub fn homogeneous_solution(&self, v0: f64, tau0: f64, tau: f64) -> Result<f64, ModelError> {
        if !(v0.is_finite() && v0.abs() < 1.0) {
            return Err(ModelError::InvalidVelocity(v0));
        }
        for time in [tau0, tau] {
            if !self.admits_tau(time) {
                return Err(ModelError::OutOfDomain {
                    regime: self.regime,
                    value: time,
                    expected: domain_of_tau(self.regime),
                });
            }
        }
        if self.regime == Regime::Flat || v0 == 0.0 {
            return Ok(v0);
        }
        // e^{2(M(τ) − M(τ0))} = |τ/τ0|^{2κ}
        let growth = libm::pow((tau / tau0).abs(), 2.0 * self.kappa);
        Ok(v0 / libm::sqrt(v0 * v0 + (1.0 - v0 * v0) * growth))
    }
}

fn domain_of_t(regime: Regime) -> &'static str {
    match regime {
        Regime::Expanding => "t >= 1",
        Regime::Contracting => "-1 <= t < 0",
        Regime::Flat => "any t",
    }
}

fn domain_of_tau(regime: Regime) -> &'static str {
    match regime {
        Regime::Expanding => "tau > 0",
        Regime::Contracting => "tau < 0",
        Regime::Flat => "any tau",
    }
}

/// Source function h(v) = −v(1 − v²).
#[inline]
pub fn source(v: f64) -> f64 {
    -v * (1.0 - v * v)
}

/// Scalar flux shapes. All satisfy φ(0) = φ'(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxShape {
    /// v²/2
    Quadratic,
    /// v³/2
    Cubic,
    /// (1−β) v²/2 + β v³/3
    Mixed { beta: f64 },
}

/// Roots of a flux derivative, at most two for the supported shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints {
    points: [f64; 2],
    len: usize,
}

impl CriticalPoints {
    pub fn as_slice(&self) -> &[f64] {
        &self.points[..self.len]
    }
}

impl FluxShape {
    pub const DEFAULT_BETA: f64 = 0.5;

    pub fn mixed(beta: f64) -> Result<Self, ModelError> {
        if beta > 0.0 && beta < 1.0 {
            Ok(FluxShape::Mixed { beta })
        } else {
            Err(ModelError::InvalidBeta(beta))
        }
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            FluxShape::Quadratic => 0.5 * v * v,
            FluxShape::Cubic => 0.5 * v * v * v,
            FluxShape::Mixed { beta } => 0.5 * (1.0 - beta) * v * v + beta * v * v * v / 3.0,
        }
    }

    #[inline]
    pub fn derivative(&self, v: f64) -> f64 {
        match *self {
            FluxShape::Quadratic => v,
            FluxShape::Cubic => 1.5 * v * v,
            FluxShape::Mixed { beta } => (1.0 - beta) * v + beta * v * v,
        }
    }

    pub fn critical_points(&self) -> CriticalPoints {
        match *self {
            FluxShape::Quadratic | FluxShape::Cubic => CriticalPoints {
                points: [0.0, 0.0],
                len: 1,
            },
            FluxShape::Mixed { beta } => CriticalPoints {
                points: [0.0, -(1.0 - beta) / beta],
                len: 2,
            },
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, FluxShape::Quadratic)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FluxShape::Quadratic => "quadratic",
            FluxShape::Cubic => "cubic",
            FluxShape::Mixed { .. } => "mixed",
        }
    }
}

/// The pair (f, g) of directional fluxes; f is always v²/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxModel {
    pub g: FluxShape,
}

impl Default for FluxModel {
    fn default() -> Self {
        Self {
            g: FluxShape::Quadratic,
        }
    }
}

impl FluxModel {
    pub const F: FluxShape = FluxShape::Quadratic;

    pub fn new(g: FluxShape) -> Self {
        Self { g }
    }

    pub fn flux_eval(&self, v: f64) -> (f64, f64) {
        (Self::F.eval(v), self.g.eval(v))
    }

    pub fn flux_prime(&self, v: f64) -> (f64, f64) {
        (Self::F.derivative(v), self.g.derivative(v))
    }
}
