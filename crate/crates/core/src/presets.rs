//! Initial data used by the experiments. Cell averages are taken as point
//! values at cell centers.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use libm::{cos, sin};

use crate::grid::{Grid1D, Grid2D};

/// Domain length of the 1D experiments.
pub const LINE_LENGTH: f64 = PI;
/// Side of the square 2D domain; its diagonal has length π.
pub const SQUARE_SIDE: f64 = PI / SQRT_2;

/// Step: 0.8 on [0.666, 1.5), 0 elsewhere.
pub fn step1d(y: f64) -> f64 {
    if (0.666..1.5).contains(&y) {
        0.8
    } else {
        0.0
    }
}

/// A sin(5y) cos((πy³ − 3)/7).
pub fn modulated_sine(amplitude: f64, y: f64) -> f64 {
    amplitude * sin(5.0 * y) * cos((PI * y * y * y - 3.0) / 7.0)
}

pub fn sine1d_a(y: f64) -> f64 {
    modulated_sine(0.8, y)
}

pub fn sine1d_b(y: f64) -> f64 {
    modulated_sine(0.16, y)
}

/// The 2D initial field, a sum of five oblique plane waves with
/// wavenumbers that are multiples of √2π, amplitude 1/8.
pub fn paper2d(x: f64, y: f64) -> f64 {
    let r = PI * SQRT_2;
    let (a, b) = (r * x, r * y);
    (sin(4.0 * a - 3.0 * b) + cos(a + 3.0 * b) + sin(3.0 * a - 5.0 * b) + sin(5.0 * a + 3.0 * b)
        - cos(2.0 * a + 2.0 * b))
        / 8.0
}

/// [`paper2d`] restricted to the diagonal x = y = s/√2, s ∈ [0, π]:
/// (1/8)(sin πs − sin 2πs + sin 8πs).
pub fn paper2d_diagonal(s: f64) -> f64 {
    (sin(PI * s) - sin(2.0 * PI * s) + sin(8.0 * PI * s)) / 8.0
}

pub fn sample_1d<F: Fn(f64) -> f64>(grid: &Grid1D, f: F) -> Vec<f64> {
    (0..grid.cells()).map(|j| f(grid.center(j))).collect()
}

/// Row-major samples with x fastest.
pub fn sample_2d<F: Fn(f64, f64) -> f64>(grid: &Grid2D, f: F) -> Vec<f64> {
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.jy() {
        let y = (k as f64 + 0.5) * dy;
        for j in 0..grid.jx() {
            out.push(f((j as f64 + 0.5) * dx, y));
        }
    }
    out
}

/// Named 1D initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset1D {
    Step,
    SineA,
    SineB,
    Diagonal,
    Constant(f64),
    Zero,
}

impl Preset1D {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Preset1D::Step => step1d(y),
            Preset1D::SineA => sine1d_a(y),
            Preset1D::SineB => sine1d_b(y),
            Preset1D::Diagonal => paper2d_diagonal(y),
            Preset1D::Constant(v) => v,
            Preset1D::Zero => 0.0,
        }
    }

    pub fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        sample_1d(grid, |y| self.eval(y))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset1D::Step => "step1d",
            Preset1D::SineA => "sine1d_a",
            Preset1D::SineB => "sine1d_b",
            Preset1D::Diagonal => "paper2d_diagonal",
            Preset1D::Constant(_) => "constant",
            Preset1D::Zero => "zero",
        }
    }
}

/// Named 2D initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset2D {
    Paper,
    Constant(f64),
    Zero,
}

impl Preset2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Preset2D::Paper => paper2d(x, y),
            Preset2D::Constant(v) => v,
            Preset2D::Zero => 0.0,
        }
    }

    pub fn sample(&self, grid: &Grid2D) -> Vec<f64> {
        sample_2d(grid, |x, y| self.eval(x, y))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset2D::Paper => "paper2d",
            Preset2D::Constant(_) => "constant",
            Preset2D::Zero => "zero",
        }
    }
}
