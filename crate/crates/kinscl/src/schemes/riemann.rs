//! Entropy solution of the Burgers Riemann problem, the zero-noise oracle.

use crate::field::Field;
use crate::grid::TorusGrid;

/// Value at `(x, t)` of the entropy solution of `u_t + (u^2/2)_x = 0` with a
/// single jump from `left` to `right` at the origin: a shock travelling at
/// the Rankine-Hugoniot speed `(left + right)/2` when `left > right`, the
/// rarefaction fan otherwise.
pub fn exact_burgers_riemann(left: f64, right: f64, x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t == 0.0 {
        return if x < 0.0 { left } else { right };
    }
    if left > right {
        let speed = 0.5 * (left + right);
        if x < speed * t {
            left
        } else {
            right
        }
    } else {
        let s = x / t;
        if s <= left {
            left
        } else if s >= right {
            right
        } else {
            s
        }
    }
}

/// Exact cell averages at time `t` of the periodic box datum `u0 = 1` on
/// `[1/4, 3/4)`, `0` elsewhere, valid while the rarefaction head has not met
/// the shock (`t < 1/2`). The fan part is integrated in closed form.
pub fn box_profile_cell_averages(grid: TorusGrid, t: f64) -> Field {
    assert!(grid.dim == 1, "box profile oracle is one-dimensional");
    assert!(t < 0.5, "oracle valid before wave interaction");
    let fan_lo = 0.25;
    let fan_hi = 0.25 + t;
    let shock = 0.75 + 0.5 * t;
    let h = grid.h();
    let cell_integral = |a: f64, b: f64| -> f64 {
        // pieces: 0 on [0, fan_lo), fan on [fan_lo, fan_hi), 1 on [fan_hi, shock), 0 after
        let mut acc = 0.0;
        if t > 0.0 {
            let lo = a.max(fan_lo);
            let hi = b.min(fan_hi);
            if hi > lo {
                acc += ((hi - 0.25).powi(2) - (lo - 0.25).powi(2)) / (2.0 * t);
            }
        }
        let lo = a.max(fan_hi);
        let hi = b.min(shock);
        if hi > lo {
            acc += hi - lo;
        }
        acc
    };
    let values = (0..grid.n_cells())
        .map(|i| {
            let a = i as f64 * h;
            cell_integral(a, a + h) / h
        })
        .collect();
    Field { grid, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shock_case() {
        // jump 1 -> 0 moves at speed 1/2
        assert_eq!(exact_burgers_riemann(1.0, 0.0, 0.2, 1.0), 1.0);
        assert_eq!(exact_burgers_riemann(1.0, 0.0, 0.7, 1.0), 0.0);
        assert_eq!(exact_burgers_riemann(1.0, 0.0, 0.49, 1.0), 1.0);
    }

    #[test]
    fn rarefaction_case() {
        assert_eq!(exact_burgers_riemann(0.0, 1.0, -0.1, 1.0), 0.0);
        assert_abs_diff_eq!(exact_burgers_riemann(0.0, 1.0, 0.3, 1.0), 0.3, epsilon = 1e-15);
        assert_eq!(exact_burgers_riemann(0.0, 1.0, 1.2, 1.0), 1.0);
    }

    #[test]
    fn constant_state() {
        for &t in &[0.0, 0.5, 2.0] {
            assert_eq!(exact_burgers_riemann(0.7, 0.7, -1.0, t), 0.7);
            assert_eq!(exact_burgers_riemann(0.7, 0.7, 1.0, t), 0.7);
        }
    }

    #[test]
    fn box_averages_conserve_mass() {
        let grid = TorusGrid::new(1, 256).unwrap();
        for &t in &[0.0, 0.1, 0.3] {
            let f = box_profile_cell_averages(grid, t);
            assert_abs_diff_eq!(f.mean(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn box_averages_match_pointwise_solution() {
        let grid = TorusGrid::new(1, 1024).unwrap();
        let t = 0.1;
        let f = box_profile_cell_averages(grid, t);
        // away from the waves, the average equals the pointwise value
        let probe = |x: f64| {
            let i = (x / grid.h()).floor() as usize;
            f.values[i]
        };
        assert_eq!(probe(0.1), 0.0);
        assert_eq!(probe(0.6), 1.0);
        assert_eq!(probe(0.95), 0.0);
        // inside the fan: (x - 1/4)/t
        let x = 0.3;
        assert_abs_diff_eq!(probe(x), (x + grid.h() / 2.0 - 0.25) / t, epsilon = 1e-2);
    }
}
