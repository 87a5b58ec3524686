//! Stochastic BGK relaxation scheme on the kinetic grid.
//!
//! One step is an operator splitting: (i) upwind transport at speed `a(xi_j)`
//! per xi slice, (ii) exact exponential relaxation toward the equilibrium
//! `1_{u > xi}` with `u` from the xi quadrature of `f - 1_{0 > xi}`, and
//! (iii) the noise as an exact xi translation by `sum_k g_k(x) dbeta_k` with
//! conservative linear rebinning. The translation is the closed-form solution
//! of the kinetic noise operator when the modes do not depend on xi, which is
//! why the scheme requires a state-independent (additive or zero) noise model.

use super::{accumulate_mass_terms, RunContext};
use crate::error::{Error, Result};
use crate::field::{DissipationRecord, KineticFieldState, SchemeTag, Trajectory};
use crate::noise::NoiseMode;

/// Advance the kinetic density; `eta` is the relaxation time.
pub fn run_bgk(ctx: &RunContext, f0: &KineticFieldState, eta: f64) -> Result<Trajectory> {
    if !(eta > 0.0) {
        return Err(Error::config(format!("eta must be positive, got {eta}")));
    }
    if f0.grid != ctx.grid {
        return Err(Error::config("initial kinetic state grid does not match run grid"));
    }
    if !ctx.model.is_zero() && !matches!(ctx.model.mode, NoiseMode::Additive) {
        return Err(Error::config(
            "BGK requires xi-independent noise modes (additive mode)",
        ));
    }
    let xg = f0.xigrid;
    if let Some(cfg) = ctx.xigrid {
        if cfg != xg {
            return Err(Error::config("kinetic state xi grid does not match configuration"));
        }
    }
    let grid = ctx.grid;
    let dt = ctx.path.dt();
    let h = grid.h();
    // transport CFL over the xi grid
    let a_max = xg.centers().map(|xi| ctx.flux.a_prime(xi).abs()).fold(0.0, f64::max);
    if dt * a_max > h * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "transport CFL violation: dt max|a| = {} exceeds h = {h}",
            dt * a_max
        )));
    }
    let snapshot_steps = ctx.snapshot_steps()?;

    let m = xg.m;
    let dxi = xg.dxi();
    let n_cells = grid.n_cells();
    let n_steps = ctx.path.n_steps();
    let vol = grid.cell_volume();
    let relax = -(-dt / eta).exp_m1(); // 1 - e^{-dt/eta}

    let mut f = f0.values.clone();
    let mut dissipation = DissipationRecord::new(if ctx.record.dissipation { Some(xg) } else { None });
    if ctx.record.kinetic_profiles {
        dissipation.kinetic_profiles = Some(Vec::new());
    }

    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut kinetic = Vec::new();
    let mut noise_work = 0.0;
    let mut ito_energy = 0.0;
    let mut monotonicity_violation: f64 = 0.0;
    let mut snap_iter = snapshot_steps.iter().peekable();

    let speeds: Vec<f64> = xg.centers().map(|xi| ctx.flux.a_prime(xi)).collect();
    let mut scratch = vec![0.0; n_cells * m];

    for step in 0..=n_steps {
        if snap_iter.peek() == Some(&&step) {
            snap_iter.next();
            times.push(step as f64 * dt);
            let state = KineticFieldState { grid, xigrid: xg, values: f.clone() };
            fields.push(state.barycenter_field());
            kinetic.push(state);
        }
        if step == n_steps {
            break;
        }

        // (i) upwind transport per xi slice, dimensional splitting in 2-d
        for axis in 0..grid.dim {
            scratch.copy_from_slice(&f);
            for cell in 0..n_cells {
                let prev = neighbor(grid, cell, axis, -1);
                let next = neighbor(grid, cell, axis, 1);
                for j in 0..m {
                    let c = speeds[j] * dt / h;
                    let idx = cell * m + j;
                    let val = if c >= 0.0 {
                        scratch[idx] - c * (scratch[idx] - scratch[prev * m + j])
                    } else {
                        scratch[idx] - c * (scratch[next * m + j] - scratch[idx])
                    };
                    f[idx] = val;
                }
            }
        }

        // barycenters for the relaxation and for the mass accumulators
        let u: Vec<f64> = (0..n_cells)
            .map(|cell| {
                let mut acc = 0.0;
                for j in 0..m {
                    let xi = xg.center(j);
                    acc += (f[cell * m + j] - if xi < 0.0 { 1.0 } else { 0.0 }) * dxi;
                }
                acc
            })
            .collect();

        // (ii) exact relaxation toward the discrete equilibrium. The
        // equilibrium staircase carries one fractional cell so that its xi
        // quadrature reproduces u exactly; this keeps the dissipation profile
        // nonnegative, which a sharp indicator cannot do on a grid.
        let mut step_masses = vec![0.0; n_cells];
        let mut step_profiles = if ctx.record.kinetic_profiles {
            Some(vec![vec![0.0; m]; n_cells])
        } else {
            None
        };
        for cell in 0..n_cells {
            if u[cell].abs() >= xg.r {
                return Err(Error::numerical(step, "truncation exceeded: barycenter outside xi grid"));
            }
            let mut cum = 0.0;
            for j in 0..m {
                let xi = xg.center(j);
                let equil = ((u[cell] - xi) / dxi + 0.5).clamp(0.0, 1.0);
                let idx = cell * m + j;
                let delta = relax * (equil - f[idx]);
                f[idx] += delta;
                // time-integrated density of m^n: cumulative of (fhat - f)/eta
                cum += delta * dxi;
                if ctx.record.dissipation {
                    let mass = cum * dxi * vol;
                    if mass < -ctx.tol_m {
                        return Err(Error::numerical(
                            step,
                            format!("BGK dissipation profile {mass} below -tol_m"),
                        ));
                    }
                    let mass = mass.max(0.0);
                    dissipation.xi_histogram[j] += mass;
                    step_masses[cell] += mass;
                    if let Some(p) = step_profiles.as_mut() {
                        p[cell][j] = mass;
                    }
                }
            }
        }
        if ctx.record.dissipation {
            dissipation.per_step_cell.push(step_masses);
        }
        if let (Some(all), Some(p)) = (dissipation.kinetic_profiles.as_mut(), step_profiles) {
            all.push(p);
        }

        accumulate_mass_terms(grid, ctx.model, ctx.path, step, &u, &mut noise_work, &mut ito_energy);

        // (iii) noise as exact xi translation with conservative rebinning
        if !ctx.model.is_zero() {
            let increments = ctx.path.increments_at(step);
            scratch.copy_from_slice(&f);
            for cell in 0..n_cells {
                let x = grid.center(cell);
                let mut shift = 0.0;
                for (k, db) in increments.iter().enumerate() {
                    shift += ctx.model.g(k, x, 0.0, grid.dim) * db;
                }
                let s = shift / dxi;
                let q = s.floor();
                let w = s - q;
                let q = q as isize;
                let row = &scratch[cell * m..(cell + 1) * m];
                let sample = |j: isize| -> f64 {
                    if j < 0 {
                        1.0
                    } else if j >= m as isize {
                        0.0
                    } else {
                        row[j as usize]
                    }
                };
                for j in 0..m {
                    let jj = j as isize;
                    let v = (1.0 - w) * sample(jj - q) + w * sample(jj - q - 1);
                    f[cell * m + j] = v.clamp(0.0, 1.0);
                }
            }
        }

        // per-step structure checks
        let mut max_f: f64 = 0.0;
        let mut min_f: f64 = 1.0;
        for cell in 0..n_cells {
            let row = &f[cell * m..(cell + 1) * m];
            for pair in row.windows(2) {
                monotonicity_violation = monotonicity_violation.max(pair[1] - pair[0]);
            }
            if 1.0 - row[0] > ctx.tol_f || row[m - 1] > ctx.tol_f {
                return Err(Error::numerical(step, "truncation exceeded"));
            }
            for &v in row {
                max_f = max_f.max(v);
                min_f = min_f.min(v);
            }
        }
        if max_f > 1.0 + ctx.tol_f || min_f < -ctx.tol_f {
            return Err(Error::numerical(step, "kinetic density left [0,1]"));
        }
    }

    dissipation.total_mass = dissipation.xi_histogram.iter().sum();
    Ok(Trajectory {
        scheme: SchemeTag::Bgk,
        times,
        fields,
        kinetic: Some(kinetic),
        dissipation,
        noise_work,
        ito_energy,
        dt,
        bgk_monotonicity_violation: monotonicity_violation,
    })
}

fn neighbor(grid: crate::grid::TorusGrid, idx: usize, axis: usize, dir: isize) -> usize {
    let n = grid.cells_per_dim;
    let shift = |i: usize| -> usize { ((i as isize + dir + n as isize) % n as isize) as usize };
    if grid.dim == 1 {
        shift(idx)
    } else if axis == 0 {
        let (ix, iy) = (idx % n, idx / n);
        iy * n + shift(ix)
    } else {
        let (ix, iy) = (idx % n, idx / n);
        shift(iy) * n + ix
    }
}
