//! Godunov numerical fluxes at a cell interface.

use crate::model::FluxShape;

/// Left and right trace values adjacent to an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceStates {
    pub v_left: f64,
    pub v_right: f64,
}

/// Closed-form Godunov flux for a convex flux normalized by φ(0) = φ'(0) = 0.
///
/// Shock case (`v_left > v_right`): the larger of φ(v_l), φ(v_r). A tie takes
/// the first branch. Rarefaction case: φ(v_l) if φ'(v_l) > 0, φ(v_r) if
/// φ'(v_r) < 0, else the sonic value φ(0).
#[inline]
pub fn godunov_convex<F, D>(v_left: f64, v_right: f64, flux: F, derivative: D) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if v_left > v_right {
        let fl = flux(v_left);
        let fr = flux(v_right);
        if fr - fl <= 0.0 {
            fl
        } else if fr - fl >= 0.0 {
            fr
        } else {
            0.0
        }
    } else if derivative(v_left) > 0.0 {
        flux(v_left)
    } else if derivative(v_right) < 0.0 {
        flux(v_right)
    } else {
        flux(0.0)
    }
}

/// General scalar Godunov flux: the minimum of φ over [v_l, v_r] when
/// v_l ≤ v_r, the maximum over [v_r, v_l] otherwise.
///
/// Extrema are searched over the endpoints and those `critical_points` (roots
/// of φ') that fall inside the interval.
#[inline]
pub fn godunov_general<F>(v_left: f64, v_right: f64, flux: F, critical_points: &[f64]) -> f64
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = if v_left <= v_right {
        (v_left, v_right)
    } else {
        (v_right, v_left)
    };
    let minimize = v_left <= v_right;
    let mut best = flux(v_left);
    let mut consider = |value: f64| {
        if (minimize && value < best) || (!minimize && value > best) {
            best = value;
        }
    };
    consider(flux(v_right));
    for &c in critical_points {
        if c > lo && c < hi {
            consider(flux(c));
        }
    }
    best
}

impl FluxShape {
    /// Godunov flux of this shape: closed form when convex, candidate-set
    /// extremum otherwise.
    #[inline]
    pub fn godunov(&self, v_left: f64, v_right: f64) -> f64 {
        match self {
            FluxShape::Quadratic => godunov_convex(
                v_left,
                v_right,
                |v| FluxShape::Quadratic.eval(v),
                |v| FluxShape::Quadratic.derivative(v),
            ),
            shape => {
                let critical = shape.critical_points();
                godunov_general(v_left, v_right, |v| shape.eval(v), critical.as_slice())
            }
        }
    }

    pub fn godunov_states(&self, states: InterfaceStates) -> f64 {
        self.godunov(states.v_left, states.v_right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn burgers(v: f64) -> f64 {
        0.5 * v * v
    }

    fn burgers_prime(v: f64) -> f64 {
        v
    }

    #[test]
    fn convex_examples() {
        assert_eq!(
            godunov_convex(0.8, 0.0, burgers, burgers_prime),
            0.32000000000000006
        );
        assert_eq!(godunov_convex(-0.4, 0.6, burgers, burgers_prime), 0.0);
        assert_eq!(
            godunov_convex(0.6, -0.6, burgers, burgers_prime),
            0.5 * 0.6 * 0.6
        );
        // transonic shock toward the left
        assert_eq!(godunov_convex(0.2, -0.6, burgers, burgers_prime), 0.18);
        // supersonic rarefactions
        assert_eq!(
            godunov_convex(0.2, 0.6, burgers, burgers_prime),
            burgers(0.2)
        );
        assert_eq!(
            godunov_convex(-0.6, -0.2, burgers, burgers_prime),
            burgers(-0.2)
        );
    }

    #[test]
    fn general_examples() {
        let mixed = FluxShape::mixed(0.5).unwrap();
        assert_eq!(mixed.godunov(-0.5, 0.5), 0.0);
        assert!((mixed.godunov(0.5, -0.5) - 0.08333333333333333).abs() < 1e-16);
        let cubic = FluxShape::Cubic;
        assert!((cubic.godunov(-0.3, 0.7) - (-0.0135)).abs() < 1e-16);
    }

    #[test]
    fn general_examples_against_brute_force_grid() {
        // 10^6-point scan; the candidate-set answers are exact endpoint or
        // critical values, so the scan must reproduce them to rounding.
        let scan = |shape: FluxShape, a: f64, b: f64, minimize: bool| {
            let n = 1_000_000;
            let mut best = if minimize {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            for i in 0..=n {
                let v = a + (b - a) * i as f64 / n as f64;
                let value = shape.eval(v);
                best = if minimize {
                    best.min(value)
                } else {
                    best.max(value)
                };
            }
            best
        };
        let mixed = FluxShape::mixed(0.5).unwrap();
        assert!((scan(mixed, -0.5, 0.5, true) - mixed.godunov(-0.5, 0.5)).abs() < 1e-15);
        assert!((scan(mixed, -0.5, 0.5, false) - mixed.godunov(0.5, -0.5)).abs() < 1e-15);
        let cubic = FluxShape::Cubic;
        assert!((scan(cubic, -0.3, 0.7, true) - cubic.godunov(-0.3, 0.7)).abs() < 1e-15);
    }

    #[test]
    fn monotone_on_grid() {
        for shape in [
            FluxShape::Quadratic,
            FluxShape::Cubic,
            FluxShape::mixed(0.5).unwrap(),
        ] {
            let points: Vec<f64> = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect();
            for &vr in &points {
                for w in points.windows(2) {
                    assert!(shape.godunov(w[1], vr) >= shape.godunov(w[0], vr));
                }
            }
            for &vl in &points {
                for w in points.windows(2) {
                    assert!(shape.godunov(vl, w[1]) <= shape.godunov(vl, w[0]));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn general_matches_convex_for_burgers(vl in -1.0f64..=1.0, vr in -1.0f64..=1.0) {
            let general = godunov_general(vl, vr, burgers, &[0.0]);
            let convex = godunov_convex(vl, vr, burgers, burgers_prime);
            prop_assert!((general - convex).abs() <= 1e-15);
        }

        #[test]
        fn consistent_at_equal_states(v in -1.0f64..=1.0) {
            for shape in [FluxShape::Quadratic, FluxShape::Cubic, FluxShape::mixed(0.5).unwrap()] {
                prop_assert_eq!(shape.godunov(v, v), shape.eval(v));
            }
        }
    }
}
