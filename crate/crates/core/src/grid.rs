//! Uniform cell-centered grids on intervals and rectangles.
//!
//! Cells are indexed `i + nx * j`. The homogeneous Neumann condition is realized by
//! reflecting ghost cells, which is the same as dropping the boundary faces from every
//! flux sum: only interior faces are ever visited by [`Grid::for_each_face`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of cells per axis.
pub const MIN_CELLS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    extent: [f64; 2],
}

impl Grid {
    pub fn new_1d(length: f64, cells: usize) -> Result<Self> {
        Self::build(1, [cells, 1], [length, 1.0])
    }

    pub fn new_2d(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::build(2, [nx, ny], [lx, ly])
    }

    fn build(dim: usize, cells: [usize; 2], extent: [f64; 2]) -> Result<Self> {
        for axis in 0..dim {
            if cells[axis] < MIN_CELLS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has {} cells, need at least {MIN_CELLS}",
                    cells[axis]
                )));
            }
            if !(extent[axis] > 0.0 && extent[axis].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} extent {} must be positive",
                    extent[axis]
                )));
            }
        }
        Ok(Self { dim, cells, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.cells[axis] as f64
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of one cell (`h` in 1D, `hx * hy` in 2D).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Measure of the whole domain.
    pub fn measure(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    /// Cell-center coordinates; the second entry is 0 in 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let i = idx % self.cells[0];
        let j = idx / self.cells[0];
        let x = (i as f64 + 0.5) * self.spacing(0);
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|idx| self.center(idx)).collect()
    }

    /// Largest eigenvalue bound of the discrete Neumann operator `-Δ_h`.
    pub fn laplacian_spectral_radius(&self) -> f64 {
        (0..self.dim).map(|a| 4.0 / self.spacing(a).powi(2)).sum()
    }

    /// Visits every interior face as `(left, right, inv_h)` where `right` is the
    /// neighbor of `left` in the positive axis direction and `inv_h = 1 / h_axis`.
    #[inline]
    pub fn for_each_face<F: FnMut(usize, usize, f64)>(&self, mut f: F) {
        let nx = self.cells[0];
        let inv_hx = 1.0 / self.spacing(0);
        if self.dim == 1 {
            for i in 0..nx - 1 {
                f(i, i + 1, inv_hx);
            }
            return;
        }
        let ny = self.cells[1];
        let inv_hy = 1.0 / self.spacing(1);
        for j in 0..ny {
            let row = j * nx;
            for i in 0..nx - 1 {
                f(row + i, row + i + 1, inv_hx);
            }
        }
        for j in 0..ny - 1 {
            let row = j * nx;
            for i in 0..nx {
                f(row + i, row + nx + i, inv_hy);
            }
        }
    }

    /// Same grid with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let mut cells = self.cells;
        for c in cells.iter_mut().take(self.dim) {
            *c *= factor;
        }
        Self::build(self.dim, cells, self.extent)
    }
}
