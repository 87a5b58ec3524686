//! Time-stepping engines: monotone finite volume, parabolic (vanishing
//! viscosity), and stochastic BGK. Each run produces a `Trajectory` carrying
//! its snapshots, its kinetic-measure proxy, and the accumulators entering
//! the mass identity.

mod bgk;
mod fv;
mod parabolic;
mod riemann;

pub use bgk::run_bgk;
pub use fv::run_fv;
pub use parabolic::{epsilon_parabolic, run_parabolic};
pub use riemann::{box_profile_cell_averages, exact_burgers_riemann};

use crate::error::{Error, Result};
use crate::field::{DissipationRecord, Field, RecordOptions};
use crate::flux::FluxSpec;
use crate::grid::{TorusGrid, XiGrid};
use crate::noise::{NoiseModel, NoisePath};

/// Everything a scheme needs besides its own parameters.
pub struct RunContext<'a> {
    pub grid: TorusGrid,
    pub flux: &'a FluxSpec,
    pub model: &'a NoiseModel,
    pub path: &'a NoisePath,
    /// BGK solution grid; also the dissipation histogram grid when present.
    pub xigrid: Option<XiGrid>,
    pub snapshot_times: &'a [f64],
    pub record: RecordOptions,
    pub tol_m: f64,
    pub tol_f: f64,
}

impl<'a> RunContext<'a> {
    pub fn new(
        grid: TorusGrid,
        flux: &'a FluxSpec,
        model: &'a NoiseModel,
        path: &'a NoisePath,
    ) -> Self {
        RunContext {
            grid,
            flux,
            model,
            path,
            xigrid: None,
            snapshot_times: &[],
            record: RecordOptions::default(),
            tol_m: 1e-10,
            tol_f: 1e-10,
        }
    }

    /// The xi grid the dissipation histogram lives on.
    pub fn record_xigrid(&self, umax: f64) -> XiGrid {
        self.xigrid.unwrap_or_else(|| {
            XiGrid::new((1.5 * umax).max(1.0), 128).expect("default xi grid is valid")
        })
    }

    /// CFL precondition for the explicit flux sub-step: `dt <= cfl h / L_a`.
    pub fn check_cfl(&self, cfl: f64) -> Result<()> {
        if !(cfl > 0.0 && cfl < 1.0) {
            return Err(Error::config(format!("cfl must lie in (0,1), got {cfl}")));
        }
        let l_a = self.flux.lipschitz;
        if l_a > 0.0 {
            let dt_max = cfl * self.grid.h() / l_a;
            if self.path.dt() > dt_max * (1.0 + 1e-12) {
                return Err(Error::config(format!(
                    "CFL violation: dt = {} exceeds cfl h / L_a = {dt_max}",
                    self.path.dt()
                )));
            }
        }
        Ok(())
    }

    /// Steps whose start times must be kept as snapshots (the final time is
    /// always recorded). Rejects requested times off the step lattice.
    pub fn snapshot_steps(&self) -> Result<Vec<usize>> {
        let dt = self.path.dt();
        let n = self.path.n_steps();
        if self.record.every_step {
            return Ok((0..=n).collect());
        }
        let mut steps = Vec::new();
        for &t in self.snapshot_times {
            let k = (t / dt).round();
            if (t - k * dt).abs() > 1e-9 * (t.abs().max(1.0)) {
                return Err(Error::config(format!(
                    "snapshot time {t} is not a multiple of dt = {dt}"
                )));
            }
            let k = k as usize;
            if k > n {
                return Err(Error::config(format!("snapshot time {t} is beyond T")));
            }
            steps.push(k);
        }
        if steps.first() != Some(&0) {
            steps.insert(0, 0);
        }
        if steps.last() != Some(&n) {
            steps.push(n);
        }
        for w in steps.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::config("snapshot times must be strictly increasing"));
            }
        }
        Ok(steps)
    }
}

/// Euler-Maruyama noise increment, evaluated at the state of the step start.
pub(crate) fn apply_noise(
    grid: TorusGrid,
    model: &NoiseModel,
    path: &NoisePath,
    step: usize,
    u_ref: &[f64],
    u_out: &mut [f64],
) {
    if model.is_zero() {
        return;
    }
    let increments = path.increments_at(step);
    for i in 0..u_out.len() {
        let x = grid.center(i);
        let mut kick = 0.0;
        for (k, db) in increments.iter().enumerate() {
            kick += model.g(k, x, u_ref[i], grid.dim) * db;
        }
        u_out[i] += kick;
    }
}

/// Accumulate the two stochastic terms of the mass identity for one step:
/// `sum_k (int g_k(x,u) u dx) dbeta_k` and `(1/2) dt int G^2(x,u) dx`.
pub(crate) fn accumulate_mass_terms(
    grid: TorusGrid,
    model: &NoiseModel,
    path: &NoisePath,
    step: usize,
    u: &[f64],
    noise_work: &mut f64,
    ito_energy: &mut f64,
) {
    if model.is_zero() {
        return;
    }
    let vol = grid.cell_volume();
    let increments = path.increments_at(step);
    for (k, db) in increments.iter().enumerate() {
        let mut gk_u = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            gk_u += model.g(k, grid.center(i), ui, grid.dim) * ui;
        }
        *noise_work += gk_u * vol * db;
    }
    let mut g2 = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        g2 += model.g_squared(grid.center(i), ui, grid.dim);
    }
    *ito_energy += 0.5 * path.dt() * g2 * vol;
}

pub(crate) fn ensure_finite(step: usize, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(step, "non-finite state"));
    }
    Ok(())
}

/// Deterministic flux sub-steps must map `[min, max]` into itself; a few ulps
/// of slack absorb rounding.
pub(crate) fn check_invariant_region(step: usize, lo: f64, hi: f64, values: &[f64]) -> Result<()> {
    let slack = 1e-13 * (1.0 + lo.abs().max(hi.abs()));
    for &v in values {
        if v < lo - slack || v > hi + slack {
            return Err(Error::numerical(
                step,
                format!("flux sub-step left invariant region [{lo}, {hi}]: value {v}"),
            ));
        }
    }
    Ok(())
}

/// Kruzhkov entropy residual of one flux sweep, deposited into the record.
///
/// For each xi-cell in the stencil range the residual of the half-Kruzhkov
/// entropy `(u - xi)^+` with the Crandall-Majda numerical entropy flux is
/// nonnegative under the CFL condition; its xi integral is the square-entropy
/// dissipation of the cell, attributed xi-resolved.
#[allow(clippy::too_many_arguments)]
pub(crate) fn record_fv_dissipation(
    rec: &mut DissipationRecord,
    step_masses: &mut [f64],
    flux: &FluxSpec,
    dt: f64,
    h: f64,
    transverse: f64,
    tol_m: f64,
    step: usize,
    line_before: &[f64],
    line_after: &[f64],
    cell_of: impl Fn(usize) -> usize,
) -> Result<()> {
    let Some(xg) = rec.xigrid else { return Ok(()) };
    let n = line_before.len();
    let dxi = xg.dxi();
    for i in 0..n {
        let um = line_before[(i + n - 1) % n];
        let u0 = line_before[i];
        let up = line_before[(i + 1) % n];
        let u1 = line_after[i];
        let lo = um.min(u0).min(up).min(u1);
        let hi = um.max(u0).max(up).max(u1);
        let j_lo = (((lo + xg.r) / dxi).floor() as isize - 1).max(0) as usize;
        let j_hi = ((((hi + xg.r) / dxi).ceil() as isize) + 1).min(xg.m as isize - 1) as usize;
        let mut cell_mass = 0.0;
        for j in j_lo..=j_hi {
            let xi = xg.center(j);
            let d_eta = (u1 - xi).max(0.0) - (u0 - xi).max(0.0);
            let dq = flux.kruzhkov_entropy_flux(u0, up, xi)
                - flux.kruzhkov_entropy_flux(um, u0, xi);
            let r = -(h * transverse * d_eta + dt * transverse * dq);
            if r < -tol_m {
                return Err(Error::numerical(
                    step,
                    format!("entropy residual {r} below -tol_m at xi = {xi}"),
                ));
            }
            let r = r.max(0.0);
            rec.xi_histogram[j] += r * dxi;
            cell_mass += r * dxi;
        }
        step_masses[cell_of(i)] += cell_mass;
    }
    Ok(())
}

/// Scatter/gather sweep over every grid line along `axis`, for dimensional
/// splitting. The closure receives the line and writes the updated line.
pub(crate) fn sweep_lines(
    grid: TorusGrid,
    axis: usize,
    values: &mut [f64],
    mut body: impl FnMut(usize, &[f64], &mut [f64]) -> Result<()>,
) -> Result<()> {
    let n = grid.cells_per_dim;
    if grid.dim == 1 {
        let before = values.to_vec();
        let mut after = before.clone();
        body(0, &before, &mut after)?;
        values.copy_from_slice(&after);
        return Ok(());
    }
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    for l in 0..n {
        for i in 0..n {
            let idx = if axis == 0 { l * n + i } else { i * n + l };
            line[i] = values[idx];
        }
        body(l, &line, &mut out)?;
        for i in 0..n {
            let idx = if axis == 0 { l * n + i } else { i * n + l };
            values[idx] = out[i];
        }
    }
    Ok(())
}

/// One explicit monotone-flux update of a periodic line.
pub(crate) fn flux_line_update(flux: &FluxSpec, lambda: f64, line: &[f64], out: &mut [f64]) {
    let n = line.len();
    for i in 0..n {
        let um = line[(i + n - 1) % n];
        let u0 = line[i];
        let up = line[(i + 1) % n];
        out[i] = u0 - lambda * (flux.numerical_flux(u0, up) - flux.numerical_flux(um, u0));
    }
}

pub(crate) fn initial_field_check(grid: TorusGrid, u0: &Field) -> Result<()> {
    if u0.grid != grid {
        return Err(Error::config("initial datum grid does not match run grid"));
    }
    Ok(())
}
