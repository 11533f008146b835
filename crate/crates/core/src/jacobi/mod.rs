//! The universal Jacobi group `G` in Iwasawa-Heisenberg coordinates
//! `(x + iy, phi; (xi1, xi2), zeta)`.
//!
//! The `SL(2,R)` part of an element is the matrix `n_x a_y k_phi`; `phi` is the
//! continuous angle at `i` and lives on the universal cover, so it is never
//! reduced mod `2 pi` by the group law.

mod reduce;
mod theta;

pub use reduce::{act, height_h, reduce, Gamma5Word, Generator, Reduction, REDUCE_ITERATION_CAP};
pub use theta::{
    gaussian_kappa, phi_transform, phi_transform_detailed, sigma_phi, theta2_direct, theta_chi_series, theta_indicator, theta_indicator_open,
    theta_regular, Branch, ChiSeries, RegularFunction, SupportBox, Transform, TransformStrategy, GAUSSIAN_ETAS, PHI_BOUNDARY_TOL, SIN_PHI_FLOOR,
};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Haar density `(3 / pi^2) y^-2` normalizes `mu` to a probability measure on
/// `Gamma \ G`; this is its constant.
pub const HAAR_CONSTANT: f64 = 3.0 / (PI * PI);

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn omega(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub zeta: f64,
}

impl GroupElement {
    pub fn new(x: f64, y: f64, phi: f64, xi1: f64, xi2: f64, zeta: f64) -> Self {
        debug_assert!(y > 0.0, "y must be positive");
        Self { x, y, phi, xi1, xi2, zeta }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// `(x + iy, 0; 0, 0)`.
    pub fn from_z(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0, 0.0, 0.0, 0.0)
    }

    /// Heisenberg element `(I; xi, zeta)`.
    pub fn heisenberg(xi1: f64, xi2: f64, zeta: f64) -> Self {
        Self::new(0.0, 1.0, 0.0, xi1, xi2, zeta)
    }

    /// Horocycle lift `(x + iy, 0; (xi1, 0), 0)`.
    pub fn horocycle_lift(x: f64, y: f64, xi1: f64) -> Self {
        Self::new(x, y, 0.0, xi1, 0.0, 0.0)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn xi(&self) -> Vector2<f64> {
        Vector2::new(self.xi1, self.xi2)
    }

    /// The matrix `n_x a_y k_phi`.
    pub fn matrix(&self) -> Matrix2<f64> {
        let r = self.y.sqrt();
        let (s, c) = self.phi.sin_cos();
        Matrix2::new(r * c + self.x * s / r, -r * s + self.x * c / r, s / r, c / r)
    }

    /// Continuous angle `beta_g(w)` of the universal-cover element, pinned by
    /// `beta_g(i) = phi`.
    pub fn beta_at(&self, w: Complex64) -> f64 {
        let (s, c) = self.phi.sin_cos();
        let v = s * w + c;
        self.phi + wrap_angle(v.arg() - self.phi)
    }

    /// Group law.
    pub fn mul(&self, h: &GroupElement) -> GroupElement {
        let g = self.matrix();
        let w = h.z();
        let num = g[(0, 0)] * w + g[(0, 1)];
        let den = g[(1, 0)] * w + g[(1, 1)];
        let z = num / den;
        let y = h.y / den.norm_sqr();
        let phi = self.beta_at(w) + h.phi;
        let gxi = g * h.xi();
        let xi = self.xi() + gxi;
        let zeta = self.zeta + h.zeta + 0.5 * omega(self.xi(), gxi);
        GroupElement::new(z.re, y, phi, xi[0], xi[1], zeta)
    }

    pub fn inverse(&self) -> GroupElement {
        let g = self.matrix();
        let inv = Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]);
        let i = Complex64::new(0.0, 1.0);
        let num = inv[(0, 0)] * i + inv[(0, 1)];
        let den = inv[(1, 0)] * i + inv[(1, 1)];
        let w = num / den;
        let y = 1.0 / den.norm_sqr();
        let phi = -self.beta_at(w);
        let xi = -(inv * self.xi());
        GroupElement::new(w.re, y, phi, xi[0], xi[1], -self.zeta)
    }

    /// Right multiplication by `Phi^s = (a_{e^{-s}}; 0, 0)`.
    pub fn geodesic(&self, s: f64) -> GroupElement {
        self.mul(&GroupElement::from_z(0.0, (-s).exp()))
    }

    /// Right multiplication by `Psi^x = (n_x; 0, 0)`.
    pub fn horocycle(&self, x: f64) -> GroupElement {
        self.mul(&GroupElement::from_z(x, 1.0))
    }

    /// `(x, y, phi, xi1, xi2, zeta) -> (-x, y, -phi, -xi1, xi2, -zeta)`.
    pub fn mirror(&self) -> GroupElement {
        GroupElement::new(-self.x, self.y, -self.phi, -self.xi1, self.xi2, -self.zeta)
    }

    pub fn coords(&self) -> [f64; 6] {
        [self.x, self.y, self.phi, self.xi1, self.xi2, self.zeta]
    }

    /// Largest coordinate-wise difference.
    pub fn max_diff(&self, o: &GroupElement) -> f64 {
        self.coords().iter().zip(o.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_neutral() {
        let g = GroupElement::new(0.3, 0.7, 1.1, -0.2, 0.45, 0.9);
        assert!(g.mul(&GroupElement::identity()).max_diff(&g) < 1e-15);
        assert!(GroupElement::identity().mul(&g).max_diff(&g) < 1e-15);
    }

    #[test]
    fn heisenberg_twist() {
        let a = GroupElement::heisenberg(1.0, 0.0, 0.0);
        let b = GroupElement::heisenberg(0.0, 1.0, 0.0);
        assert!((a.mul(&b).zeta - 0.5).abs() < 1e-15);
    }
}
