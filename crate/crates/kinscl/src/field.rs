//! Cell-averaged solution fields, kinetic densities, and scheme outputs.

use crate::error::{Error, Result};
use crate::grid::{TorusGrid, XiGrid};
use serde::{Deserialize, Serialize};

/// Cell averages of `u` on a torus grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::config(format!(
                "field length {} does not match {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("field values must be finite"));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Field { grid, values: vec![c; grid.n_cells()] }
    }

    /// Sample a function of the cell center.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.n_cells())
            .map(|i| {
                let (x, y) = grid.center(i);
                f(x, y)
            })
            .collect();
        Field { grid, values }
    }

    /// Spatial mean (the torus has measure one).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `L^p` norm with midpoint quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let vol = self.grid.cell_volume();
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * vol).powf(1.0 / p)
    }

    /// `(1/2) ||u||_{L^2}^2`.
    pub fn half_energy(&self) -> f64 {
        0.5 * self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Kinetic density `f(x_i, xi_j)` in `[0, 1]`, nonincreasing in `xi`,
/// saturated at the truncation boundaries (1 on the left, 0 on the right).
#[derive(Debug, Clone, PartialEq)]
pub struct KineticFieldState {
    pub grid: TorusGrid,
    pub xigrid: XiGrid,
    /// Row-major `[cell][xi]` values, flattened.
    pub values: Vec<f64>,
}

impl KineticFieldState {
    pub fn new(grid: TorusGrid, xigrid: XiGrid, values: Vec<f64>, tol: f64) -> Result<Self> {
        if values.len() != grid.n_cells() * xigrid.m {
            return Err(Error::config("kinetic state has wrong shape"));
        }
        let state = KineticFieldState { grid, xigrid, values };
        state.check_invariants(tol)?;
        Ok(state)
    }

    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let m = self.xigrid.m;
        for (i, row) in self.values.chunks(m).enumerate() {
            for pair in row.windows(2) {
                if pair[1] > pair[0] + tol {
                    return Err(Error::config(format!(
                        "kinetic state not nonincreasing in xi at cell {i}"
                    )));
                }
            }
            if row.iter().any(|v| *v < -tol || *v > 1.0 + tol) {
                return Err(Error::config(format!("kinetic state outside [0,1] at cell {i}")));
            }
            if (row[0] - 1.0).abs() > tol || row[m - 1].abs() > tol {
                return Err(Error::config(format!(
                    "truncation exceeded: kinetic state not saturated at cell {i}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, cell: usize, j: usize) -> f64 {
        self.values[cell * self.xigrid.m + j]
    }

    pub fn row(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.xigrid.m..(cell + 1) * self.xigrid.m]
    }

    /// Barycenter field via the chi-transform quadrature
    /// `u_i = sum_j (f_ij - 1_{0 > xi_j}) dxi`.
    pub fn barycenter_field(&self) -> Field {
        let dxi = self.xigrid.dxi();
        let values = (0..self.grid.n_cells())
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(self.xigrid.centers())
                    .map(|(f, xi)| (f - if xi < 0.0 { 1.0 } else { 0.0 }) * dxi)
                    .sum()
            })
            .collect();
        Field { grid: self.grid, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeTag {
    FiniteVolume,
    Parabolic,
    Bgk,
}

impl SchemeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::FiniteVolume => "fv",
            SchemeTag::Parabolic => "parabolic",
            SchemeTag::Bgk => "bgk",
        }
    }
}

/// Per-run record of the scheme's kinetic-measure proxy `m^n`.
///
/// Granularities: per-(step, cell) scalars (the mass each cell sheds in one
/// step), a mass histogram over the xi-grid accumulated over the whole run,
/// and, on request, the full per-step kinetic profiles used by the residual
/// diagnostics.
#[derive(Debug, Clone, Default)]
pub struct DissipationRecord {
    pub xigrid: Option<XiGrid>,
    /// `[step][cell]` mass contributions; entries >= -tol_m by construction.
    pub per_step_cell: Vec<Vec<f64>>,
    /// Mass attributed to each xi-cell, accumulated over cells and steps.
    pub xi_histogram: Vec<f64>,
    pub total_mass: f64,
    /// BGK only, behind a flag: `[step][cell][xi]` time-integrated density
    /// profiles of `m^n` (already multiplied by h dt).
    pub kinetic_profiles: Option<Vec<Vec<Vec<f64>>>>,
}

impl DissipationRecord {
    pub fn new(xigrid: Option<XiGrid>) -> Self {
        let hist = xigrid.map(|g| vec![0.0; g.m]).unwrap_or_default();
        DissipationRecord {
            xigrid,
            per_step_cell: Vec::new(),
            xi_histogram: hist,
            total_mass: 0.0,
            kinetic_profiles: None,
        }
    }

    /// Mass at `|xi| > r`, from the histogram.
    pub fn tail_mass(&self, r: f64) -> f64 {
        match self.xigrid {
            None => 0.0,
            Some(g) => self
                .xi_histogram
                .iter()
                .enumerate()
                .filter(|(j, _)| g.center(*j).abs() > r)
                .map(|(_, m)| m)
                .sum(),
        }
    }

    /// Attribute `mass` uniformly over the xi interval `[lo, hi]`
    /// (a point mass when the interval degenerates).
    pub fn deposit_interval(&mut self, lo: f64, hi: f64, mass: f64) {
        let Some(g) = self.xigrid else { return };
        if mass == 0.0 {
            return;
        }
        let dxi = g.dxi();
        if hi - lo < dxi * 1e-9 {
            let j = (((lo + g.r) / dxi).floor() as isize).clamp(0, g.m as isize - 1) as usize;
            self.xi_histogram[j] += mass;
            return;
        }
        let width = hi - lo;
        let j_lo = (((lo + g.r) / dxi).floor() as isize).clamp(0, g.m as isize - 1) as usize;
        let j_hi = (((hi + g.r) / dxi).floor() as isize).clamp(0, g.m as isize - 1) as usize;
        for j in j_lo..=j_hi {
            let cell_lo = -g.r + j as f64 * dxi;
            let cell_hi = cell_lo + dxi;
            let overlap = (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0);
            self.xi_histogram[j] += mass * overlap / width;
        }
    }
}

/// Output of one scheme run: snapshot fields plus the dissipation proxy and
/// the accumulators entering the mass identity.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scheme: SchemeTag,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    /// BGK snapshots of the kinetic density, aligned with `times`.
    pub kinetic: Option<Vec<KineticFieldState>>,
    pub dissipation: DissipationRecord,
    /// `sum_k int_0^T int g_k(x, u) u dx dbeta_k`, accumulated stepwise.
    pub noise_work: f64,
    /// `(1/2) int_0^T int G^2(x, u) dx dt`, accumulated stepwise.
    pub ito_energy: f64,
    pub dt: f64,
    /// Largest measured increase of `f` in xi after a full BGK step; zero for
    /// the other schemes.
    pub bgk_monotonicity_violation: f64,
}

impl Trajectory {
    pub fn first(&self) -> &Field {
        &self.fields[0]
    }

    pub fn last(&self) -> &Field {
        self.fields.last().expect("trajectory has at least one snapshot")
    }

    pub fn at_time(&self, t: f64) -> Option<&Field> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.max(1.0))
            .map(|i| &self.fields[i])
    }
}

/// Which data a run retains; everything off keeps runs cheap in ensembles.
#[derive(Debug, Clone, Copy)]
pub struct RecordOptions {
    pub dissipation: bool,
    pub every_step: bool,
    pub kinetic_profiles: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions { dissipation: true, every_step: false, kinetic_profiles: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn field_shape_checked() {
        let g = TorusGrid::new(1, 4).unwrap();
        assert!(Field::new(g, vec![0.0; 3]).is_err());
        assert!(Field::new(g, vec![f64::NAN; 4]).is_err());
        assert!(Field::new(g, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn mean_and_energy() {
        let g = TorusGrid::new(1, 8).unwrap();
        let f = Field::constant(g, 2.0);
        assert_abs_diff_eq!(f.mean(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.half_energy(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn interval_deposit_conserves_mass() {
        let xg = XiGrid::new(2.0, 16).unwrap();
        let mut rec = DissipationRecord::new(Some(xg));
        rec.deposit_interval(-0.3, 0.7, 1.25);
        let total: f64 = rec.xi_histogram.iter().sum();
        assert_abs_diff_eq!(total, 1.25, epsilon = 1e-12);
        // point deposit
        rec.deposit_interval(0.5, 0.5, 0.5);
        let total: f64 = rec.xi_histogram.iter().sum();
        assert_abs_diff_eq!(total, 1.75, epsilon = 1e-12);
    }

    #[test]
    fn tail_mass_respects_support() {
        let xg = XiGrid::new(2.0, 16).unwrap();
        let mut rec = DissipationRecord::new(Some(xg));
        rec.deposit_interval(-0.5, 0.5, 1.0);
        assert_eq!(rec.tail_mass(1.0), 0.0);
        assert!(rec.tail_mass(0.0) > 0.0);
    }
}
