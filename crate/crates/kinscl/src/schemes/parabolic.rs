//! Vanishing-viscosity scheme: explicit monotone convection, implicit
//! periodic diffusion, explicit noise.

use super::{
    accumulate_mass_terms, apply_noise, ensure_finite, flux_line_update, initial_field_check,
    sweep_lines, RunContext,
};
use crate::error::{Error, Result};
use crate::field::{DissipationRecord, Field, SchemeTag, Trajectory};
use crate::kinetic::TestFunction;

/// Thomas solve of the periodic system `(I - rho D^2) x = d` on one line,
/// closed with the Sherman-Morrison correction.
fn solve_periodic_heat(rho: f64, d: &[f64], x: &mut [f64]) {
    let n = d.len();
    let b = 1.0 + 2.0 * rho; // diagonal
    let off = -rho;
    if rho == 0.0 {
        x.copy_from_slice(d);
        return;
    }
    // B = tridiag with modified corners, A = B + u v^T
    let gamma = -b;
    let b0 = b - gamma;
    let bn = b - off * off / gamma;

    let mut diag = vec![b; n];
    diag[0] = b0;
    diag[n - 1] = bn;

    let thomas = |diag: &[f64], rhs: &[f64], out: &mut [f64]| {
        let mut c_star = vec![0.0; n];
        let mut d_star = vec![0.0; n];
        c_star[0] = off / diag[0];
        d_star[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - off * c_star[i - 1];
            c_star[i] = off / m;
            d_star[i] = (rhs[i] - off * d_star[i - 1]) / m;
        }
        out[n - 1] = d_star[n - 1];
        for i in (0..n - 1).rev() {
            out[i] = d_star[i] - c_star[i] * out[i + 1];
        }
    };

    let mut y = vec![0.0; n];
    thomas(&diag, d, &mut y);
    let mut u_vec = vec![0.0; n];
    u_vec[0] = gamma;
    u_vec[n - 1] = off;
    let mut z = vec![0.0; n];
    thomas(&diag, &u_vec, &mut z);

    // v = (1, 0, ..., 0, off/gamma)
    let vy = y[0] + off / gamma * y[n - 1];
    let vz = z[0] + off / gamma * z[n - 1];
    let factor = vy / (1.0 + vz);
    for i in 0..n {
        x[i] = y[i] - factor * z[i];
    }
}

/// One IMEX step per time step: explicit flux, implicit diffusion (periodic,
/// unconditionally stable), explicit noise. The dissipation record stores
/// `eta |D_x u|^2` per cell-step from forward differences of the solved
/// state, which is a square and hence nonnegative exactly.
pub fn run_parabolic(ctx: &RunContext, u0: &Field, eta: f64, cfl: f64) -> Result<Trajectory> {
    initial_field_check(ctx.grid, u0)?;
    if !(eta > 0.0) {
        return Err(Error::config(format!("eta must be positive, got {eta}")));
    }
    ctx.check_cfl(cfl)?;
    let snapshot_steps = ctx.snapshot_steps()?;

    let grid = ctx.grid;
    let dt = ctx.path.dt();
    let h = grid.h();
    let lambda = dt / h;
    let rho = eta * dt / (h * h);
    let n_steps = ctx.path.n_steps();
    let vol = grid.cell_volume();

    let mut dissipation = DissipationRecord::new(if ctx.record.dissipation {
        Some(ctx.record_xigrid(ctx.flux.umax))
    } else {
        None
    });

    let mut u = u0.values.clone();
    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut noise_work = 0.0;
    let mut ito_energy = 0.0;
    let mut snap_iter = snapshot_steps.iter().peekable();

    for step in 0..=n_steps {
        if snap_iter.peek() == Some(&&step) {
            snap_iter.next();
            times.push(step as f64 * dt);
            fields.push(Field { grid, values: u.clone() });
        }
        if step == n_steps {
            break;
        }
        let u_before = u.clone();

        // explicit monotone convection
        for axis in 0..grid.dim {
            let flux = ctx.flux;
            sweep_lines(grid, axis, &mut u, |_, line, out| {
                flux_line_update(flux, lambda, line, out);
                Ok(())
            })?;
        }

        // implicit diffusion, one periodic solve per axis
        for axis in 0..grid.dim {
            sweep_lines(grid, axis, &mut u, |_, line, out| {
                solve_periodic_heat(rho, line, out);
                Ok(())
            })?;
        }

        if ctx.record.dissipation {
            let n = grid.n_cells();
            let mut masses = vec![0.0; n];
            for i in 0..n {
                let mut grad2 = 0.0;
                let mut lo = u[i];
                let mut hi = u[i];
                for axis in 0..grid.dim {
                    let nb = neighbor(grid, i, axis);
                    grad2 += ((u[nb] - u[i]) / h).powi(2);
                    let prev = neighbor_back(grid, i, axis);
                    lo = lo.min(u[nb]).min(u[prev]);
                    hi = hi.max(u[nb]).max(u[prev]);
                }
                let mass = eta * grad2 * vol * dt;
                masses[i] = mass;
                dissipation.deposit_interval(lo, hi, mass);
            }
            dissipation.per_step_cell.push(masses);
        }

        accumulate_mass_terms(grid, ctx.model, ctx.path, step, &u_before, &mut noise_work, &mut ito_energy);
        apply_noise(grid, ctx.model, ctx.path, step, &u_before, &mut u);
        ensure_finite(step, &u)?;
    }

    dissipation.total_mass = dissipation.xi_histogram.iter().sum();
    Ok(Trajectory {
        scheme: SchemeTag::Parabolic,
        times,
        fields,
        kinetic: None,
        dissipation,
        noise_work,
        ito_energy,
        dt,
        bgk_monotonicity_violation: 0.0,
    })
}

fn neighbor(grid: crate::grid::TorusGrid, idx: usize, axis: usize) -> usize {
    let n = grid.cells_per_dim;
    if grid.dim == 1 {
        (idx + 1) % n
    } else if axis == 0 {
        let (ix, iy) = (idx % n, idx / n);
        iy * n + (ix + 1) % n
    } else {
        let (ix, iy) = (idx % n, idx / n);
        ((iy + 1) % n) * n + ix
    }
}

fn neighbor_back(grid: crate::grid::TorusGrid, idx: usize, axis: usize) -> usize {
    let n = grid.cells_per_dim;
    if grid.dim == 1 {
        (idx + n - 1) % n
    } else if axis == 0 {
        let (ix, iy) = (idx % n, idx / n);
        iy * n + (ix + n - 1) % n
    } else {
        let (ix, iy) = (idx % n, idx / n);
        ((iy + n - 1) % n) * n + ix
    }
}

/// The parabolic error functional
/// `epsilon(t, phi) = eta int_0^t <1_{u(s) > xi}, Delta_x phi> ds`,
/// evaluated on the recorded snapshots by a left-endpoint rule in time and
/// the exact xi antiderivative of the test function's bump.
pub fn epsilon_parabolic(traj: &Trajectory, phi: &TestFunction, eta: f64) -> Vec<f64> {
    let grid = traj.fields[0].grid;
    let vol = grid.cell_volume();
    let mut out = Vec::with_capacity(traj.times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in 0..traj.times.len() - 1 {
        let dt = traj.times[w + 1] - traj.times[w];
        let field = &traj.fields[w];
        let mut inner = 0.0;
        for (i, &ui) in field.values.iter().enumerate() {
            let (x, _) = grid.center(i);
            inner += phi.theta.second_deriv(x) * phi.psi.antiderivative(ui);
        }
        acc += eta * inner * vol * dt;
        out.push(acc);
    }
    out
}
