//! Rescaled asymptotic fields, norms, restriction onto coarse grids, decay
//! fits, jump counting and the diagonal profile of 2D fields.

use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::Grid2D;
use crate::model::{Background, Regime};
use crate::solver1d::Field1D;
use crate::solver2d::Field2D;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("rescaling requires a {expected} background, got {found}")]
    WrongRegime { expected: Regime, found: Regime },
    #[error("time {0} is outside the regime's range")]
    WrongTime(f64),
    #[error("field lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{coarse} cells do not evenly divide {fine} cells")]
    NotNested { fine: usize, coarse: usize },
    #[error("diagonal extraction needs a square grid, got {jx}x{jy}")]
    NotSquare { jx: usize, jy: usize },
    #[error("decay fit needs at least 3 samples with positive amplitude")]
    DegenerateFit,
}

/// Default relative threshold of [`jump_count`].
pub const DEFAULT_JUMP_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TotalVariation {
    Line(f64),
    Plane { x: f64, y: f64 },
}

/// Per-snapshot summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub tau: f64,
    pub l1_vs_reference: Option<f64>,
    pub l2_norm: f64,
    pub max_abs_v: f64,
    /// max(0, max|v| − 1)
    pub overshoot: f64,
    /// Only defined for 1D fields.
    pub jump_count: Option<usize>,
    pub total_variation: TotalVariation,
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn overshoot(values: &[f64]) -> f64 {
    (max_abs(values) - 1.0).max(0.0)
}

/// Σ |v_{j+1} − v_j| over interior neighbours.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

pub fn record_1d(field: &Field1D, dy: f64) -> DiagnosticsRecord {
    let values = &field.values;
    DiagnosticsRecord {
        tau: field.tau,
        l1_vs_reference: None,
        l2_norm: libm::sqrt(values.iter().map(|v| v * v).sum::<f64>() * dy),
        max_abs_v: max_abs(values),
        overshoot: overshoot(values),
        jump_count: Some(jump_count(values, DEFAULT_JUMP_THRESHOLD)),
        total_variation: TotalVariation::Line(total_variation(values)),
    }
}

/// Directional total variations, each weighted by the transverse cell width.
pub fn total_variation_2d(values: &[f64], grid: &Grid2D) -> (f64, f64) {
    let (jx, jy) = (grid.jx(), grid.jy());
    let mut tv_x = 0.0;
    for row in values.chunks(jx) {
        tv_x += total_variation(row);
    }
    let mut tv_y = 0.0;
    for k in 0..jy.saturating_sub(1) {
        for j in 0..jx {
            tv_y += (values[(k + 1) * jx + j] - values[k * jx + j]).abs();
        }
    }
    (tv_x * grid.dy(), tv_y * grid.dx())
}

pub fn record_2d(field: &Field2D, grid: &Grid2D) -> DiagnosticsRecord {
    let values = &field.values;
    let (x, y) = total_variation_2d(values, grid);
    DiagnosticsRecord {
        tau: field.tau,
        l1_vs_reference: None,
        l2_norm: libm::sqrt(values.iter().map(|v| v * v).sum::<f64>() * grid.dx() * grid.dy()),
        max_abs_v: max_abs(values),
        overshoot: overshoot(values),
        jump_count: None,
        total_variation: TotalVariation::Plane { x, y },
    }
}

/// w = τ^κ v on an expanding background.
pub fn rescale_expanding(
    values: &[f64],
    tau: f64,
    bg: &Background,
) -> Result<Vec<f64>, DiagnosticsError> {
    if bg.regime() != Regime::Expanding {
        return Err(DiagnosticsError::WrongRegime {
            expected: Regime::Expanding,
            found: bg.regime(),
        });
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(DiagnosticsError::WrongTime(tau));
    }
    let scale = libm::pow(tau, bg.kappa());
    Ok(values.iter().map(|v| scale * v).collect())
}

/// w = sgn(v) (−τ)^κ / √(1 − v²) on a contracting background.
///
/// Cells with |v| ≥ 1 have no real rescaled value and map to `None`.
pub fn rescale_contracting(
    values: &[f64],
    tau: f64,
    bg: &Background,
) -> Result<Vec<Option<f64>>, DiagnosticsError> {
    if bg.regime() != Regime::Contracting {
        return Err(DiagnosticsError::WrongRegime {
            expected: Regime::Contracting,
            found: bg.regime(),
        });
    }
    if tau.is_nan() || tau >= 0.0 {
        return Err(DiagnosticsError::WrongTime(tau));
    }
    let scale = libm::pow(-tau, bg.kappa());
    Ok(values
        .iter()
        .map(|&v| {
            if v.abs() >= 1.0 {
                None
            } else if v == 0.0 {
                Some(0.0)
            } else {
                Some(scale.copysign(v) / libm::sqrt(1.0 - v * v))
            }
        })
        .collect())
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), DiagnosticsError> {
    if a.len() != b.len() {
        return Err(DiagnosticsError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Σ |a − b| · measure.
pub fn norm_l1(a: &[f64], b: &[f64], cell_measure: f64) -> Result<f64, DiagnosticsError> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * cell_measure)
}

/// (Σ |a − b|² · measure)^{1/2}.
pub fn norm_l2(a: &[f64], b: &[f64], cell_measure: f64) -> Result<f64, DiagnosticsError> {
    check_lengths(a, b)?;
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sum * cell_measure))
}

/// L¹ distance over the cells where both rescaled values exist.
pub fn norm_l1_masked(
    a: &[Option<f64>],
    b: &[Option<f64>],
    cell_measure: f64,
) -> Result<f64, DiagnosticsError> {
    if a.len() != b.len() {
        return Err(DiagnosticsError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter()
        .zip(b)
        .filter_map(|pair| match pair {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        })
        .sum::<f64>()
        * cell_measure)
}

/// Conservative block average of a fine 1D field onto `coarse` cells.
pub fn restrict_1d(fine: &[f64], coarse: usize) -> Result<Vec<f64>, DiagnosticsError> {
    if coarse == 0 || !fine.len().is_multiple_of(coarse) {
        return Err(DiagnosticsError::NotNested {
            fine: fine.len(),
            coarse,
        });
    }
    let ratio = fine.len() / coarse;
    Ok(fine
        .chunks(ratio)
        .map(|block| block.iter().sum::<f64>() / ratio as f64)
        .collect())
}

/// Conservative block average of a fine `fjx × fjy` field onto `cjx × cjy`.
pub fn restrict_2d(
    fine: &[f64],
    (fjx, fjy): (usize, usize),
    (cjx, cjy): (usize, usize),
) -> Result<Vec<f64>, DiagnosticsError> {
    if fine.len() != fjx * fjy {
        return Err(DiagnosticsError::LengthMismatch(fine.len(), fjx * fjy));
    }
    for (f, c) in [(fjx, cjx), (fjy, cjy)] {
        if c == 0 || f % c != 0 {
            return Err(DiagnosticsError::NotNested { fine: f, coarse: c });
        }
    }
    let (rx, ry) = (fjx / cjx, fjy / cjy);
    let weight = 1.0 / (rx * ry) as f64;
    let mut out = Vec::with_capacity(cjx * cjy);
    for k in 0..cjy {
        for j in 0..cjx {
            let mut sum = 0.0;
            for fk in k * ry..(k + 1) * ry {
                let row = &fine[fk * fjx..(fk + 1) * fjx];
                sum += row[j * rx..(j + 1) * rx].iter().sum::<f64>();
            }
            out.push(sum * weight);
        }
    }
    Ok(out)
}

/// Least-squares slope of log(amplitude) against log(τ).
pub fn decay_rate_fit(series: &[(f64, f64)]) -> Result<f64, DiagnosticsError> {
    if series.len() < 3 || series.iter().any(|&(t, a)| !(t > 0.0 && a > 0.0)) {
        return Err(DiagnosticsError::DegenerateFit);
    }
    let n = series.len() as f64;
    let points: Vec<(f64, f64)> = series
        .iter()
        .map(|&(t, a)| (libm::log(t), libm::log(a)))
        .collect();
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(DiagnosticsError::DegenerateFit);
    }
    Ok(sxy / sxx)
}

/// Indices `j` of the interfaces between cells `j` and `j+1` whose increment
/// exceeds `threshold_factor` times the mean increment TV/J.
pub fn jump_locations(values: &[f64], threshold_factor: f64) -> Vec<usize> {
    let tv = total_variation(values);
    if tv == 0.0 || values.is_empty() {
        return Vec::new();
    }
    let threshold = threshold_factor * tv / values.len() as f64;
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() > threshold)
        .map(|(j, _)| j)
        .collect()
}

/// Number of interfaces carrying a jump, see [`jump_locations`].
///
/// A captured shock spread over two adjacent interfaces counts once.
pub fn jump_count(values: &[f64], threshold_factor: f64) -> usize {
    let locations = jump_locations(values, threshold_factor);
    let mut count = 0;
    let mut previous: Option<usize> = None;
    for j in locations {
        let continues = previous.is_some_and(|p| j == p + 1);
        if !continues {
            count += 1;
        }
        previous = Some(j);
    }
    count
}

/// Linear-fit residual of one smooth segment between detected jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFit {
    pub start: usize,
    pub end: usize,
    pub slope: f64,
    pub rms_residual: f64,
}

/// Splits the profile at its jumps and fits a line to every segment of at
/// least three cells.
pub fn segment_fits(coords: &[f64], values: &[f64], threshold_factor: f64) -> Vec<SegmentFit> {
    let mut cuts: Vec<usize> = jump_locations(values, threshold_factor)
        .into_iter()
        .map(|j| j + 1)
        .collect();
    cuts.push(values.len());
    let mut fits = Vec::new();
    let mut start = 0;
    for end in cuts {
        if end >= start + 3 {
            let xs = &coords[start..end];
            let ys = &values[start..end];
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            let ss: f64 = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| {
                    let r = y - (my + slope * (x - mx));
                    r * r
                })
                .sum();
            fits.push(SegmentFit {
                start,
                end,
                slope,
                rms_residual: libm::sqrt(ss / n),
            });
        }
        start = end;
    }
    fits
}

/// Cell values along the diagonal x = y.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalProfile {
    /// Arc length of each diagonal cell centre, (j + 1/2) Δx √2.
    pub s: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn diagonal_extract(
    values: &[f64],
    grid: &Grid2D,
) -> Result<DiagonalProfile, DiagnosticsError> {
    let (jx, jy) = (grid.jx(), grid.jy());
    if jx != jy {
        return Err(DiagnosticsError::NotSquare { jx, jy });
    }
    if values.len() != jx * jy {
        return Err(DiagnosticsError::LengthMismatch(values.len(), jx * jy));
    }
    let step = grid.dx() * core::f64::consts::SQRT_2;
    Ok(DiagonalProfile {
        s: (0..jx).map(|j| (j as f64 + 0.5) * step).collect(),
        values: (0..jx).map(|j| values[j * jx + j]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn rescale_examples() {
        let exp = Background::expanding(2.0, 1.0).unwrap();
        let w = rescale_expanding(&[0.05], 4.0, &exp).unwrap();
        assert!((w[0] - 0.8).abs() < 1e-15);
        assert_eq!(
            rescale_expanding(&[0.3, -0.2], 1.0, &exp).unwrap(),
            vec![0.3, -0.2]
        );

        let con = Background::contracting(2.0, -1.0).unwrap();
        let w = rescale_contracting(&[0.6, 0.0, 1.0, -1.00001, -0.6], -0.5, &con).unwrap();
        assert!((w[0].unwrap() - 0.3125).abs() < 1e-15);
        assert_eq!(w[1], Some(0.0));
        assert_eq!(w[2], None);
        assert_eq!(w[3], None);
        assert!((w[4].unwrap() + 0.3125).abs() < 1e-15);

        assert!(rescale_expanding(&[0.1], -1.0, &con).is_err());
        assert!(rescale_contracting(&[0.1], 1.0, &exp).is_err());
    }

    #[test]
    fn rescaled_homogeneous_limits() {
        let exp = Background::expanding(2.0, 1.0).unwrap();
        let limit = 0.8 / libm::sqrt(1.0 - 0.64);
        let v = exp.homogeneous_solution(0.8, 1.0, 1e3).unwrap();
        let w = rescale_expanding(&[v], 1e3, &exp).unwrap()[0];
        assert!((w - limit).abs() < 1e-4);

        let con = Background::contracting(2.0, -1.0).unwrap();
        // closer to 0, 1 − v² cancels catastrophically in double precision
        let v = con.homogeneous_solution(0.8, -1.0, -1e-2).unwrap();
        let w = rescale_contracting(&[v], -1e-2, &con).unwrap()[0].unwrap();
        assert!((w - limit).abs() < 1e-4);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_l1(&[1.0, 2.0], &[0.0, 2.0], 0.5).unwrap(), 0.5);
        assert_eq!(norm_l1(&[1.0, 2.0], &[1.0, 2.0], 0.5).unwrap(), 0.0);
        assert!(norm_l1(&[1.0], &[1.0, 2.0], 0.5).is_err());
        assert_eq!(norm_l2(&[3.0, 0.0], &[0.0, 4.0], 1.0).unwrap(), 5.0);
        assert_eq!(
            norm_l1_masked(&[Some(1.0), None], &[Some(0.5), Some(3.0)], 2.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn restriction() {
        assert_eq!(restrict_1d(&[1.0; 4], 2).unwrap(), vec![1.0, 1.0]);
        assert_eq!(
            restrict_1d(&[1.0, 3.0, 5.0, 7.0], 2).unwrap(),
            vec![2.0, 6.0]
        );
        assert!(restrict_1d(&[1.0; 6], 4).is_err());
        let fine: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let coarse = restrict_2d(&fine, (4, 4), (2, 2)).unwrap();
        assert_eq!(coarse, vec![2.5, 4.5, 10.5, 12.5]);
        assert!(restrict_2d(&fine, (4, 4), (3, 2)).is_err());
    }

    #[test]
    fn decay_fits() {
        let exact: Vec<(f64, f64)> = [16.0, 64.0, 256.0]
            .iter()
            .map(|&t| (t, 3.0 / (t * t)))
            .collect();
        assert!((decay_rate_fit(&exact).unwrap() + 2.0).abs() < 1e-12);
        let constant = [(1.0, 0.5), (2.0, 0.5), (4.0, 0.5)];
        assert_eq!(decay_rate_fit(&constant).unwrap(), 0.0);

        let bg = Background::expanding(2.0, 1.0).unwrap();
        let homogeneous: Vec<(f64, f64)> = [16.0, 64.0, 256.0]
            .iter()
            .map(|&t| (t, bg.homogeneous_solution(0.8, 1.0, t).unwrap()))
            .collect();
        let slope = decay_rate_fit(&homogeneous).unwrap();
        assert!((-2.05..=-1.95).contains(&slope));

        assert!(decay_rate_fit(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).is_err());
        assert!(decay_rate_fit(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
    }

    #[test]
    fn jump_counting() {
        let mut step = vec![0.0; 100];
        step[..40].fill(0.8);
        assert_eq!(jump_count(&step, DEFAULT_JUMP_THRESHOLD), 1);

        let ramp: Vec<f64> = (0..100).map(|j| j as f64 * 0.01).collect();
        assert_eq!(jump_count(&ramp, DEFAULT_JUMP_THRESHOLD), 0);

        let mut two = vec![0.0; 100];
        two[20..60].fill(0.5);
        assert_eq!(jump_count(&two, DEFAULT_JUMP_THRESHOLD), 2);

        // a shock smeared over one intermediate cell is still one jump
        let mut smeared = vec![0.0; 100];
        smeared[..50].fill(0.8);
        smeared[50] = 0.4;
        assert_eq!(jump_count(&smeared, DEFAULT_JUMP_THRESHOLD), 1);
        assert_eq!(jump_count(&[0.0; 10], DEFAULT_JUMP_THRESHOLD), 0);
    }

    #[test]
    fn segment_fits_of_sawtooth() {
        let coords: Vec<f64> = (0..100).map(|j| j as f64 * 0.01).collect();
        let values: Vec<f64> = coords
            .iter()
            .map(|&x| if x < 0.5 { x } else { x - 1.0 })
            .collect();
        let fits = segment_fits(&coords, &values, DEFAULT_JUMP_THRESHOLD);
        assert_eq!(fits.len(), 2);
        for fit in fits {
            assert!((fit.slope - 1.0).abs() < 1e-12);
            assert!(fit.rms_residual < 1e-12);
        }
    }

    #[test]
    fn diagonal() {
        let grid = Grid2D::square(1.0, 4).unwrap();
        let values: Vec<f64> = (0..16).map(|i| (i % 4) as f64 * 0.25).collect();
        let profile = diagonal_extract(&values, &grid).unwrap();
        assert_eq!(profile.values, vec![0.0, 0.25, 0.5, 0.75]);

        // v(x, y) = x + y sampled at centres is linear in s
        let sum: Vec<f64> = (0..16)
            .map(|i| ((i % 4) as f64 + 0.5) * 0.25 + ((i / 4) as f64 + 0.5) * 0.25)
            .collect();
        let profile = diagonal_extract(&sum, &grid).unwrap();
        for (s, v) in profile.s.iter().zip(&profile.values) {
            assert!((v - s * core::f64::consts::SQRT_2).abs() < 1e-14);
        }
        let rect = Grid2D::new(1.0, 1.0, 4, 8).unwrap();
        assert!(diagonal_extract(&[0.0; 32], &rect).is_err());
    }

    proptest! {
        #[test]
        fn l1_is_a_metric(
            a in proptest::collection::vec(-1.0f64..1.0, 8),
            b in proptest::collection::vec(-1.0f64..1.0, 8),
            c in proptest::collection::vec(-1.0f64..1.0, 8),
        ) {
            let ab = norm_l1(&a, &b, 0.1).unwrap();
            prop_assert_eq!(ab, norm_l1(&b, &a, 0.1).unwrap());
            prop_assert_eq!(norm_l1(&a, &a, 0.1).unwrap(), 0.0);
            let ac = norm_l1(&a, &c, 0.1).unwrap();
            let cb = norm_l1(&c, &b, 0.1).unwrap();
            prop_assert!(ab <= ac + cb + 1e-15);
        }

        #[test]
        fn restriction_preserves_mean(fine in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let coarse = restrict_1d(&fine, 8).unwrap();
            let mean_fine = fine.iter().sum::<f64>() / 32.0;
            let mean_coarse = coarse.iter().sum::<f64>() / 8.0;
            prop_assert!((mean_fine - mean_coarse).abs() < 1e-14);
        }

        #[test]
        fn expanding_rescale_round_trip(v in -1.0f64..1.0, tau in 1.0f64..1000.0) {
            let bg = Background::expanding(2.0, 1.0).unwrap();
            let w = rescale_expanding(&[v], tau, &bg).unwrap()[0];
            let back = w / libm::pow(tau, 2.0);
            prop_assert!((back - v).abs() <= 1e-15);
        }
    }
}
