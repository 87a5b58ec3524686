//! Flux functions, their derivatives, and monotone two-point numerical fluxes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The physical flux `A(u)`, with a closed-form derivative `a = A'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FluxKind {
    /// `A(u) = u^2 / 2`
    Burgers,
    /// `A(u) = c u`
    Advection { speed: f64 },
    /// `A(u) = sum_i coeffs[i] u^i`
    Polynomial { coeffs: Vec<f64> },
}

/// Monotone two-point flux selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumericalFlux {
    Godunov,
    EngquistOsher,
    LaxFriedrichs,
}

/// Flux plus the data the schemes need: the numerical flux choice and a
/// Lipschitz certificate of `|A'|` over the invariant region `[-umax, umax]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSpec {
    pub kind: FluxKind,
    pub numerical: NumericalFlux,
    /// Stated invariant-region bound of the run.
    pub umax: f64,
    /// `max |A'|` over `[-umax, umax]`.
    pub lipschitz: f64,
    /// Roots of `A'` inside the certificate interval (sonic points).
    critical_points: Vec<f64>,
}

impl FluxSpec {
    pub fn new(kind: FluxKind, numerical: NumericalFlux, umax: f64) -> Result<Self> {
        if !(umax > 0.0) || !umax.is_finite() {
            return Err(Error::config(format!("flux umax must be positive, got {umax}")));
        }
        let mut spec = FluxSpec {
            kind,
            numerical,
            umax,
            lipschitz: 0.0,
            critical_points: Vec::new(),
        };
        spec.critical_points = spec.find_critical_points();
        spec.lipschitz = spec.compute_lipschitz();
        Ok(spec)
    }

    pub fn burgers(numerical: NumericalFlux, umax: f64) -> Result<Self> {
        FluxSpec::new(FluxKind::Burgers, numerical, umax)
    }

    /// `A(u)`.
    pub fn a(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::Advection { speed } => speed * u,
            FluxKind::Polynomial { coeffs } => {
                // Horner evaluation
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
            }
        }
    }

    /// `a(u) = A'(u)`.
    pub fn a_prime(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => u,
            FluxKind::Advection { speed } => *speed,
            FluxKind::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (i, &c) in coeffs.iter().enumerate().rev() {
                    if i >= 1 {
                        acc = acc * u + c * i as f64;
                    }
                }
                acc
            }
        }
    }

    /// Sonic points of `A` inside `[-umax, umax]`, found by sign changes of
    /// `A'` on a dense lattice refined by bisection.
    fn find_critical_points(&self) -> Vec<f64> {
        match &self.kind {
            FluxKind::Burgers => {
                if self.umax > 0.0 {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            FluxKind::Advection { .. } => vec![],
            FluxKind::Polynomial { .. } => {
                let mut roots = Vec::new();
                let n = 4096;
                let lo = -self.umax;
                let hi = self.umax;
                let mut prev_u = lo;
                let mut prev_v = self.a_prime(lo);
                for i in 1..=n {
                    let u = lo + (hi - lo) * i as f64 / n as f64;
                    let v = self.a_prime(u);
                    if prev_v == 0.0 {
                        roots.push(prev_u);
                    } else if prev_v * v < 0.0 {
                        let (mut a, mut b) = (prev_u, u);
                        let mut fa = prev_v;
                        for _ in 0..80 {
                            let mid = 0.5 * (a + b);
                            let fm = self.a_prime(mid);
                            if fa * fm <= 0.0 {
                                b = mid;
                            } else {
                                a = mid;
                                fa = fm;
                            }
                        }
                        roots.push(0.5 * (a + b));
                    }
                    prev_u = u;
                    prev_v = v;
                }
                roots
            }
        }
    }

    fn compute_lipschitz(&self) -> f64 {
        match &self.kind {
            FluxKind::Burgers => self.umax,
            FluxKind::Advection { speed } => speed.abs(),
            FluxKind::Polynomial { .. } => {
                // extrema of A' sit at roots of A'' or at the endpoints;
                // a dense lattice plus the critical points of A is enough at
                // the certificate's resolution
                let n = 8192;
                let mut m: f64 = 0.0;
                for i in 0..=n {
                    let u = -self.umax + 2.0 * self.umax * i as f64 / n as f64;
                    m = m.max(self.a_prime(u).abs());
                }
                m * (1.0 + 1e-6)
            }
        }
    }

    /// Minimum of `A` over `[lo, hi]` (endpoints plus interior sonic points).
    fn min_on(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.a(lo).min(self.a(hi));
        for &c in &self.critical_points {
            if c > lo && c < hi {
                m = m.min(self.a(c));
            }
        }
        m
    }

    fn max_on(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.a(lo).max(self.a(hi));
        for &c in &self.critical_points {
            if c > lo && c < hi {
                m = m.max(self.a(c));
            }
        }
        m
    }

    /// `int_0^w max(A'(s), 0) ds`, evaluated exactly from `A` at the sign
    /// breakpoints of `A'`.
    fn eo_positive_part(&self, w: f64) -> f64 {
        self.signed_part(w, true)
    }

    /// `int_0^w min(A'(s), 0) ds`.
    fn eo_negative_part(&self, w: f64) -> f64 {
        self.signed_part(w, false)
    }

    fn signed_part(&self, w: f64, positive: bool) -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        let (lo, hi, sign) = if w > 0.0 { (0.0, w, 1.0) } else { (w, 0.0, -1.0) };
        // between consecutive sonic points A' has one sign, so the integral of
        // its positive (negative) part telescopes through values of A
        let mut pts = vec![lo];
        for &c in &self.critical_points {
            if c > lo && c < hi {
                pts.push(c);
            }
        }
        pts.push(hi);
        let mut acc = 0.0;
        for pair in pts.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            let da = self.a(q) - self.a(p);
            acc += if positive { da.max(0.0) } else { da.min(0.0) };
        }
        sign * acc
    }

    /// Monotone two-point numerical flux `F(left, right)`.
    pub fn numerical_flux(&self, left: f64, right: f64) -> f64 {
        match self.numerical {
            NumericalFlux::Godunov => {
                if left <= right {
                    self.min_on(left, right)
                } else {
                    self.max_on(right, left)
                }
            }
            NumericalFlux::EngquistOsher => {
                self.a(0.0) + self.eo_positive_part(left) + self.eo_negative_part(right)
            }
            NumericalFlux::LaxFriedrichs => {
                0.5 * (self.a(left) + self.a(right)) - 0.5 * self.lipschitz * (right - left)
            }
        }
    }

    /// Crandall-Majda numerical entropy flux for the half-Kruzhkov entropy
    /// `(u - xi)^+`: `F(left v xi, right v xi) - A(xi)`.
    pub fn kruzhkov_entropy_flux(&self, left: f64, right: f64, xi: f64) -> f64 {
        self.numerical_flux(left.max(xi), right.max(xi)) - self.a(xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn consistency_f_cc_equals_a_c() {
        for nf in [NumericalFlux::Godunov, NumericalFlux::EngquistOsher, NumericalFlux::LaxFriedrichs] {
            let f = FluxSpec::burgers(nf, 2.0).unwrap();
            for &c in &[-1.5, -0.3, 0.0, 0.7, 2.0] {
                assert_abs_diff_eq!(f.numerical_flux(c, c), 0.5 * c * c, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn godunov_burgers_known_values() {
        let f = FluxSpec::burgers(NumericalFlux::Godunov, 2.0).unwrap();
        // transonic rarefaction: minimum at the sonic point 0
        assert_eq!(f.numerical_flux(-1.0, 1.0), 0.0);
        // shock case: max over [right, left]
        assert_eq!(f.numerical_flux(1.0, -1.0), 0.5);
        assert_eq!(f.numerical_flux(1.0, 0.0), 0.5);
        assert_eq!(f.numerical_flux(0.0, 1.0), 0.0);
    }

    #[test]
    fn engquist_osher_burgers_closed_form() {
        let f = FluxSpec::burgers(NumericalFlux::EngquistOsher, 2.0).unwrap();
        // F(a,b) = max(a,0)^2/2 + min(b,0)^2/2
        for &(a, b) in &[(-1.0f64, 1.0f64), (1.0, -1.0), (0.5, 0.25), (-0.7, -0.2), (1.5, 0.0)] {
            let expect = 0.5 * a.max(0.0).powi(2) + 0.5 * b.min(0.0).powi(2);
            assert_abs_diff_eq!(f.numerical_flux(a, b), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn monotone_in_both_arguments() {
        // monotonicity holds on the certificate interval
        for nf in [NumericalFlux::Godunov, NumericalFlux::EngquistOsher, NumericalFlux::LaxFriedrichs] {
            let f = FluxSpec::burgers(nf, 2.0).unwrap();
            let grid: Vec<f64> = (0..40).map(|i| -2.0 + 0.1 * i as f64).collect();
            for &a in &grid {
                for &b in &grid {
                    // nondecreasing in the left argument
                    assert!(f.numerical_flux(a + 0.1, b) >= f.numerical_flux(a, b) - 1e-12);
                    // nonincreasing in the right argument
                    assert!(f.numerical_flux(a, b + 0.1) <= f.numerical_flux(a, b) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn polynomial_matches_burgers() {
        let p = FluxSpec::new(
            FluxKind::Polynomial { coeffs: vec![0.0, 0.0, 0.5] },
            NumericalFlux::Godunov,
            2.0,
        )
        .unwrap();
        let b = FluxSpec::burgers(NumericalFlux::Godunov, 2.0).unwrap();
        assert_abs_diff_eq!(p.lipschitz, 2.0, epsilon = 1e-5);
        let grid: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * i as f64).collect();
        for &x in &grid {
            assert_abs_diff_eq!(p.a(x), b.a(x), epsilon = 1e-14);
            assert_abs_diff_eq!(p.a_prime(x), b.a_prime(x), epsilon = 1e-14);
            for &y in &grid {
                assert_abs_diff_eq!(p.numerical_flux(x, y), b.numerical_flux(x, y), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn eo_parts_match_quadrature() {
        // cubic flux with two sonic points in the interval
        let p = FluxSpec::new(
            FluxKind::Polynomial { coeffs: vec![0.0, -0.75, 0.0, 0.25] },
            NumericalFlux::EngquistOsher,
            3.0,
        )
        .unwrap();
        let quad = |w: f64, positive: bool| {
            let n = 200_000;
            let mut acc = 0.0;
            let (lo, hi, sign) = if w >= 0.0 { (0.0, w, 1.0) } else { (w, 0.0, -1.0) };
            let dw = (hi - lo) / n as f64;
            for i in 0..n {
                let s = lo + (i as f64 + 0.5) * dw;
                let v = p.a_prime(s);
                acc += if positive { v.max(0.0) } else { v.min(0.0) } * dw;
            }
            sign * acc
        };
        for &w in &[-2.5, -1.0, -0.2, 0.4, 1.7, 2.9] {
            assert_abs_diff_eq!(p.eo_positive_part(w), quad(w, true), epsilon = 1e-4);
            assert_abs_diff_eq!(p.eo_negative_part(w), quad(w, false), epsilon = 1e-4);
        }
    }

    #[test]
    fn lipschitz_certificate_holds_on_lattice() {
        let f = FluxSpec::new(
            FluxKind::Polynomial { coeffs: vec![1.0, 0.3, -0.4, 0.2] },
            NumericalFlux::LaxFriedrichs,
            1.5,
        )
        .unwrap();
        for i in 0..=1000 {
            let u = -1.5 + 3.0 * i as f64 / 1000.0;
            assert!(f.a_prime(u).abs() <= f.lipschitz + 1e-12);
        }
    }

    #[test]
    fn kruzhkov_flux_vanishes_above_stencil() {
        let f = FluxSpec::burgers(NumericalFlux::Godunov, 2.0).unwrap();
        // xi above both arguments: F(xi, xi) - A(xi) = 0
        assert_eq!(f.kruzhkov_entropy_flux(0.3, -0.4, 1.0), 0.0);
    }
}
