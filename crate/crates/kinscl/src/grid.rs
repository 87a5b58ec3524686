//! Periodic spatial meshes and the truncated velocity grid.
//!
//! The torus has side length 1 in every dimension, so `h * cells_per_dim == 1`
//! holds exactly in the index arithmetic. The velocity variable lives on a
//! symmetric truncated interval `(-R, R)` split into `M` cells.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic mesh of the unit torus in 1 or 2 dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub dim: usize,
    pub cells_per_dim: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, cells_per_dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::config(format!("grid dim must be 1 or 2, got {dim}")));
        }
        if cells_per_dim < 2 {
            return Err(Error::config(format!(
                "cells_per_dim must be >= 2, got {cells_per_dim}"
            )));
        }
        Ok(TorusGrid { dim, cells_per_dim })
    }

    /// Cell width; the torus side is 1 so `h = 1 / cells_per_dim`.
    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_dim as f64
    }

    /// Total number of cells (`cells_per_dim^dim`).
    pub fn n_cells(&self) -> usize {
        match self.dim {
            1 => self.cells_per_dim,
            _ => self.cells_per_dim * self.cells_per_dim,
        }
    }

    /// Cell volume `h^dim`, the quadrature weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        match self.dim {
            1 => self.h(),
            _ => self.h() * self.h(),
        }
    }

    /// Center coordinate of the 1-d index `i` along one axis: `(i + 1/2) h`.
    pub fn axis_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h()
    }

    /// Center of cell `idx` in flattened row-major order; y component is 0 in 1-d.
    pub fn center(&self, idx: usize) -> (f64, f64) {
        match self.dim {
            1 => (self.axis_center(idx), 0.0),
            _ => {
                let n = self.cells_per_dim;
                (self.axis_center(idx % n), self.axis_center(idx / n))
            }
        }
    }

    /// Periodic wrap of a (possibly negative) axis index.
    pub fn wrap(&self, i: isize) -> usize {
        let n = self.cells_per_dim as isize;
        (((i % n) + n) % n) as usize
    }

    /// Periodic distance between two points of the unit torus (per axis, then
    /// Euclidean over axes).
    pub fn torus_distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let dx = axis_distance(a.0, b.0);
        match self.dim {
            1 => dx,
            _ => {
                let dy = axis_distance(a.1, b.1);
                (dx * dx + dy * dy).sqrt()
            }
        }
    }
}

/// Distance on the unit circle.
pub fn axis_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Symmetric truncated velocity grid: `M` cells covering `(-R, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub r: f64,
    pub m: usize,
}

impl XiGrid {
    pub fn new(r: f64, m: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::config(format!("xi radius R must be positive, got {r}")));
        }
        if m < 8 {
            return Err(Error::config(format!("xi cell count M must be >= 8, got {m}")));
        }
        Ok(XiGrid { r, m })
    }

    pub fn dxi(&self) -> f64 {
        2.0 * self.r / self.m as f64
    }

    /// Cell center `xi_j = -R + (j + 1/2) dxi`, strictly inside `(-R, R)`.
    pub fn center(&self, j: usize) -> f64 {
        -self.r + (j as f64 + 0.5) * self.dxi()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.center(j))
    }

    /// True if the run's invariant-region bound fits strictly inside the grid.
    pub fn covers(&self, bound: f64) -> bool {
        bound < self.r
    }
}
