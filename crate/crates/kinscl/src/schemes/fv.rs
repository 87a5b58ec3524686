//! Monotone finite-volume scheme with Euler-Maruyama noise at cell centers.

use super::{
    accumulate_mass_terms, apply_noise, check_invariant_region, ensure_finite, flux_line_update,
    initial_field_check, record_fv_dissipation, sweep_lines, RunContext,
};
use crate::error::Result;
use crate::field::{DissipationRecord, Field, SchemeTag, Trajectory};

/// Explicit update
/// `u_i^{n+1} = u_i^n - (dt/h)(F(u_i, u_{i+1}) - F(u_{i-1}, u_i))
///  + sum_k g_k(x_i, u_i^n) dbeta_k^n`,
/// by dimensional splitting in dimension 2.
pub fn run_fv(ctx: &RunContext, u0: &Field, cfl: f64) -> Result<Trajectory> {
    initial_field_check(ctx.grid, u0)?;
    ctx.check_cfl(cfl)?;
    let snapshot_steps = ctx.snapshot_steps()?;

    let grid = ctx.grid;
    let dt = ctx.path.dt();
    let h = grid.h();
    let lambda = dt / h;
    let n_steps = ctx.path.n_steps();
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
        let (lo, hi) = u_before
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));

        let mut step_masses = vec![0.0; grid.n_cells()];
        for axis in 0..grid.dim {
            let record = ctx.record.dissipation;
            let flux = ctx.flux;
            let tol_m = ctx.tol_m;
            let transverse = if grid.dim == 2 { h } else { 1.0 };
            let diss = &mut dissipation;
            let masses = &mut step_masses;
            let n = grid.cells_per_dim;
            sweep_lines(grid, axis, &mut u, |l, line, out| {
                flux_line_update(flux, lambda, line, out);
                if record {
                    record_fv_dissipation(
                        diss,
                        masses,
                        flux,
                        dt,
                        h,
                        transverse,
                        tol_m,
                        step,
                        line,
                        out,
                        |i| if grid.dim == 1 {
                            i
                        } else if axis == 0 {
                            l * n + i
                        } else {
                            i * n + l
                        },
                    )?;
                }
                Ok(())
            })?;
        }
        check_invariant_region(step, lo, hi, &u)?;
        if ctx.record.dissipation {
            dissipation.per_step_cell.push(step_masses);
        }

        accumulate_mass_terms(grid, ctx.model, ctx.path, step, &u_before, &mut noise_work, &mut ito_energy);
        apply_noise(grid, ctx.model, ctx.path, step, &u_before, &mut u);
        ensure_finite(step, &u)?;
    }

    dissipation.total_mass = dissipation.xi_histogram.iter().sum();
    Ok(Trajectory {
        scheme: SchemeTag::FiniteVolume,
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
