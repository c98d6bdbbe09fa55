//! Uniform cell-centred grids and ghost-cell boundary rules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("domain length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("at least 4 cells are required per direction, got {0}")]
    TooFewCells(usize),
    #[error("field has {found} values but the grid has {expected} cells")]
    SizeMismatch { expected: usize, found: usize },
}

/// Minimum cell count per direction (the second-order stencil spans 5 cells).
pub const MIN_CELLS: usize = 4;

/// Ghost-cell treatment at the domain ends. Two ghost layers are implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    /// Zero-gradient ghost cells (copies of the edge cell).
    #[default]
    Outflow,
    Periodic,
}

impl BoundaryRule {
    /// Maps a possibly out-of-range cell index onto a stored cell.
    #[inline]
    pub fn index(self, i: isize, n: usize) -> usize {
        match self {
            BoundaryRule::Outflow => i.clamp(0, n as isize - 1) as usize,
            BoundaryRule::Periodic => i.rem_euclid(n as isize) as usize,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryRule::Outflow => "outflow",
            BoundaryRule::Periodic => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    cells: usize,
}

impl Grid1D {
    pub fn new(length: f64, cells: usize) -> Result<Self, GridError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(GridError::InvalidLength(length));
        }
        if cells < MIN_CELLS {
            return Err(GridError::TooFewCells(cells));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dy(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Centre of cell `j`, (j + 1/2) Δy.
    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(move |j| self.center(j))
    }
}

/// Uniform 2D grid; storage is row-major with x varying fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    x: Grid1D,
    y: Grid1D,
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, jx: usize, jy: usize) -> Result<Self, GridError> {
        Ok(Self {
            x: Grid1D::new(lx, jx)?,
            y: Grid1D::new(ly, jy)?,
        })
    }

    pub fn square(length: f64, cells: usize) -> Result<Self, GridError> {
        Self::new(length, length, cells, cells)
    }

    pub fn x(&self) -> Grid1D {
        self.x
    }

    pub fn y(&self) -> Grid1D {
        self.y
    }

    pub fn jx(&self) -> usize {
        self.x.cells
    }

    pub fn jy(&self) -> usize {
        self.y.cells
    }

    pub fn dx(&self) -> f64 {
        self.x.dy()
    }

    pub fn dy(&self) -> f64 {
        self.y.dy()
    }

    pub fn len(&self) -> usize {
        self.jx() * self.jy()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_uniform(&self) -> bool {
        (self.dx() - self.dy()).abs() <= 1e-12 * self.dx()
    }
}
