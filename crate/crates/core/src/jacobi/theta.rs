//! Theta functions on `G`: the phi-transform, `Theta_f` for regular `f`,
//! indicator thetas at `phi = 0`, the dyadic series for `Theta_chi`, and the
//! rank-2 function `Theta^(2)`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::GroupElement;
use crate::error::{invalid, Error, Result};
use crate::phase::{e, frac, frac_mul, half_square_phase};
use crate::quad;

/// How `f_phi` is obtained away from multiples of `pi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformStrategy {
    /// `f_phi(w) = e^{-i phi / 2} e^{-pi w^2}`.
    GaussianClosedForm,
    Quadrature,
}

/// A real function in `S_eta(R)` together with its decay constants
/// `kappa_eta = sup_{phi, w} |f_phi(w)| (1 + w^2)^{eta/2}`.
#[derive(Clone)]
pub struct RegularFunction {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    kappa: Vec<(f64, f64)>,
    support: Option<(f64, f64)>,
    strategy: TransformStrategy,
}

impl fmt::Debug for RegularFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("RegularFunction")
            .field("name", &self.name)
            .field("kappa", &self.kappa)
            .field("support", &self.support)
            .field("strategy", &self.strategy)
            .finish()
    }
}

/// Decay exponents tabulated for the Gaussian.
pub const GAUSSIAN_ETAS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// `sup_w e^{-pi w^2} (1 + w^2)^{eta/2}`.
pub fn gaussian_kappa(eta: f64) -> f64 {
    let u = (eta / (2.0 * PI) - 1.0).max(0.0);
    (-PI * u).exp() * (1.0 + u).powf(eta / 2.0)
}

impl RegularFunction {
    fn gaussian_with(strategy: TransformStrategy) -> Self {
        Self {
            name: "gaussian".into(),
            f: Arc::new(|w: f64| (-PI * w * w).exp()),
            kappa: GAUSSIAN_ETAS.iter().map(|&eta| (eta, gaussian_kappa(eta))).collect(),
            support: None,
            strategy,
        }
    }

    /// `e^{-pi w^2}` with its closed-form phi-transform.
    pub fn gaussian() -> Self {
        Self::gaussian_with(TransformStrategy::GaussianClosedForm)
    }

    /// `e^{-pi w^2}` with the phi-transform computed by quadrature; used to
    /// cross-check the quadrature path against the closed form.
    pub fn gaussian_quadrature() -> Self {
        Self::gaussian_with(TransformStrategy::Quadrature)
    }

    /// A user function with a declared `kappa_eta` table (`eta > 1`) and
    /// optional compact support `[a, b]`.
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static, kappa: Vec<(f64, f64)>, support: Option<(f64, f64)>) -> Result<Self> {
        if kappa.is_empty() && support.is_none() {
            return invalid("a regular function needs a kappa table or compact support");
        }
        if kappa.iter().any(|&(eta, k)| !(eta > 1.0) || !(k >= 0.0) || !k.is_finite()) {
            return invalid("kappa table entries need eta > 1 and finite kappa >= 0");
        }
        if let Some((a, b)) = support {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return invalid("support must be a finite interval [a, b] with a < b");
            }
        }
        Ok(Self { name: name.into(), f: Arc::new(f), kappa, support, strategy: TransformStrategy::Quadrature })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, w: f64) -> f64 {
        match self.support {
            Some((a, b)) if w < a || w > b => 0.0,
            _ => (self.f)(w),
        }
    }

    pub fn kappa(&self) -> &[(f64, f64)] {
        &self.kappa
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn strategy(&self) -> TransformStrategy {
        self.strategy
    }

    /// `w -> f(-w)`. The phi-transform commutes with parity, so the kappa
    /// table carries over.
    pub fn reflected(&self) -> Self {
        let f = self.f.clone();
        Self {
            name: format!("{}_-", self.name),
            f: Arc::new(move |w| f(-w)),
            kappa: self.kappa.clone(),
            support: self.support.map(|(a, b)| (-b, -a)),
            strategy: self.strategy,
        }
    }

    /// Replace the kappa table, e.g. after measuring one with
    /// [`RegularFunction::measure_kappa`].
    pub fn with_kappa(mut self, kappa: Vec<(f64, f64)>) -> Self {
        self.kappa = kappa;
        self
    }

    /// Sampled estimate of `kappa_eta`: the largest `|f_phi(w)| (1 + w^2)^{eta/2}`
    /// over the given grid, times `safety`.
    pub fn measure_kappa(&self, etas: &[f64], phis: &[f64], ws: &[f64], safety: f64) -> Result<Vec<(f64, f64)>> {
        let mut best = vec![0.0f64; etas.len()];
        for &phi in phis {
            for &w in ws {
                let v = phi_transform(self, phi, w)?.norm();
                for (b, &eta) in best.iter_mut().zip(etas) {
                    *b = b.max(v * (1.0 + w * w).powf(eta / 2.0));
                }
            }
        }
        Ok(etas.iter().zip(best).map(|(&eta, k)| (eta, k * safety)).collect())
    }
}

/// Width below which `|sin phi|` is routed to the nearest multiple of `pi`.
pub const SIN_PHI_FLOOR: f64 = 1e-3;
/// Distance from `nu pi` treated as lying on the case boundary.
pub const PHI_BOUNDARY_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 100_000;

/// `sigma_phi`: `2 nu` at `phi = nu pi`, `2 floor(phi / pi) + 1` otherwise.
pub fn sigma_phi(phi: f64) -> i64 {
    let nu = (phi / PI).round();
    if (phi - nu * PI).abs() <= PHI_BOUNDARY_TOL {
        2 * nu as i64
    } else {
        2 * (phi / PI).floor() as i64 + 1
    }
}

/// Which formula produced a transform value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `phi = nu pi` exactly (within tolerance).
    Lattice,
    /// `|sin phi| < SIN_PHI_FLOOR`: nearest lattice branch, first-order
    /// stationary-phase approximation.
    NearLattice,
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, Debug)]
pub struct Transform {
    pub value: Complex64,
    pub sigma: i64,
    pub branch: Branch,
}

fn lattice_value(f: &RegularFunction, nu: i64, w: f64) -> Complex64 {
    let v = if nu.rem_euclid(2) == 0 { f.eval(w) } else { f.eval(-w) };
    e(-(2 * nu) as f64 / 8.0) * v
}

/// Window `[-W, W]` outside of which `int |f|` is below `tol`, from the kappa
/// table.
fn integration_window(f: &RegularFunction, tol: f64) -> Result<(f64, f64)> {
    if let Some(s) = f.support {
        return Ok(s);
    }
    let mut best = f64::INFINITY;
    for &(eta, k) in &f.kappa {
        // 2 kappa W^{1-eta} / (eta - 1) <= tol
        let w = (2.0 * k / ((eta - 1.0) * tol)).powf(1.0 / (eta - 1.0)).max(1.0);
        best = best.min(w);
    }
    if !best.is_finite() {
        return Err(Error::TailNotCertified { eps: tol });
    }
    Ok((-best, best))
}

/// `f_phi(w) = e(-sigma_phi / 8) [F_phi f](w)` with its branch.
pub fn phi_transform_detailed(f: &RegularFunction, phi: f64, w: f64) -> Result<Transform> {
    let sigma = sigma_phi(phi);
    let nu = (phi / PI).round() as i64;
    if (phi - nu as f64 * PI).abs() <= PHI_BOUNDARY_TOL {
        return Ok(Transform { value: lattice_value(f, nu, w), sigma, branch: Branch::Lattice });
    }
    if f.strategy == TransformStrategy::GaussianClosedForm {
        let value = Complex64::from_polar((-PI * w * w).exp(), -phi / 2.0);
        return Ok(Transform { value, sigma, branch: Branch::ClosedForm });
    }
    let (s, c) = phi.sin_cos();
    if s.abs() < SIN_PHI_FLOOR {
        return Ok(Transform { value: lattice_value(f, nu, w), sigma, branch: Branch::NearLattice });
    }
    let cot = c / s;
    let inv_s = 1.0 / s;
    let (a, b) = integration_window(f, QUAD_TOL)?;
    let base = 0.5 * w * w * cot;
    let kernel = |v: f64| e(base + 0.5 * v * v * cot - w * v * inv_s) * f.eval(v);
    // about two periods of the kernel's phase per panel
    let reach = a.abs().max(b.abs());
    let slope = reach * cot.abs() + w.abs() * inv_s.abs();
    let panels = ((0.5 * slope * (b - a)).ceil() as usize).clamp(1, MAX_PANELS);
    // a phase of size P is reduced mod 1 with absolute error about P eps
    let max_phase = 0.5 * cot.abs() * (w * w + reach * reach) + w.abs() * reach * inv_s.abs();
    let noise = 16.0 * f64::EPSILON * (1.0 + 2.0 * PI * max_phase);
    let integral = quad::adaptive_panels(&kernel, a, b, QUAD_TOL, panels, noise)?;
    let value = e(-sigma as f64 / 8.0) * integral / s.abs().sqrt();
    Ok(Transform { value, sigma, branch: Branch::Quadrature })
}

pub fn phi_transform(f: &RegularFunction, phi: f64, w: f64) -> Result<Complex64> {
    phi_transform_detailed(f, phi, w).map(|t| t.value)
}

/// `e(1/2 (n - xi2)^2 x + n xi1)`, with the large products reduced exactly.
fn lattice_phase(n: i64, x: f64, xi1: f64, xi2: f64) -> f64 {
    frac(half_square_phase(n, x) - frac_mul(n, xi2 * x) + frac(0.5 * xi2 * xi2 * x) + frac_mul(n, xi1))
}

/// `1 / sqrt(y)`, the lattice spacing denominator. Values within `1e-12` of
/// an integer are snapped, so `y = N^-2` gives exactly `N`.
fn lattice_scale(y: f64) -> f64 {
    let q = (1.0 / y).sqrt();
    let r = q.round();
    if r >= 1.0 && (q - r).abs() <= 1e-12 * q {
        r
    } else {
        q
    }
}

const MAX_TERMS: f64 = 5e7;

/// Certified truncation radius: the smallest `W` with
/// `y^{1/4} 2 kappa [(1 + W^2)^{-eta/2} + W^{1-eta} / ((eta - 1) sqrt y)] < eps`
/// over the kappa table.
fn tail_radius(f: &RegularFunction, y: f64, eps: f64) -> Option<f64> {
    let sy = y.sqrt();
    let bound = |eta: f64, k: f64, w: f64| y.powf(0.25) * 2.0 * k * ((1.0 + w * w).powf(-eta / 2.0) + w.powf(1.0 - eta) / ((eta - 1.0) * sy));
    let mut best: Option<f64> = None;
    for &(eta, k) in &f.kappa {
        let mut hi = 1.0;
        while bound(eta, k, hi) >= eps {
            hi *= 2.0;
            if hi > 1e12 {
                break;
            }
        }
        if bound(eta, k, hi) >= eps {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid > 0.0 && bound(eta, k, mid) < eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = Some(best.map_or(hi, |b: f64| b.min(hi)));
    }
    best
}

/// `Theta_f(g) = y^{1/4} e(zeta - xi1 xi2 / 2) sum_n f_phi((n - xi2) sqrt y) e(...)`,
/// truncated where the kappa majorant certifies the tail below `tail_eps`.
pub fn theta_regular(f: &RegularFunction, g: &GroupElement, tail_eps: f64) -> Result<Complex64> {
    if !(tail_eps > 0.0) {
        return invalid("tail_eps must be positive");
    }
    let q = lattice_scale(g.y);
    let nu = (g.phi / PI).round() as i64;
    let on_lattice = (g.phi - nu as f64 * PI).abs() <= PHI_BOUNDARY_TOL;
    let (lo, hi) = match f.support {
        Some((a, b)) if on_lattice => {
            let (a, b) = if nu.rem_euclid(2) == 0 { (a, b) } else { (-b, -a) };
            (a, b)
        }
        _ => {
            let w = tail_radius(f, g.y, tail_eps).ok_or(Error::TailNotCertified { eps: tail_eps })?;
            (-w, w)
        }
    };
    let n_lo = (g.xi2 + lo * q).floor() as i64;
    let n_hi = (g.xi2 + hi * q).ceil() as i64;
    if ((n_hi - n_lo) as f64) > MAX_TERMS {
        return Err(Error::TailNotCertified { eps: tail_eps });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in n_lo..=n_hi {
        let w = (n as f64 - g.xi2) / q;
        let fv = phi_transform(f, g.phi, w)?;
        if fv == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc += fv * e(lattice_phase(n, g.x, g.xi1, g.xi2));
    }
    Ok(g.y.powf(0.25) * e(g.zeta - 0.5 * g.xi1 * g.xi2) * acc)
}

/// Lattice points `n` with `s < (n - xi2) sqrt(y) < t` (or `<= t`). Bounds
/// within `1e-9` of an integer are snapped so lattice-aligned windows are
/// exact.
fn window_range(s: f64, t: f64, closed_right: bool, xi2: f64, q: f64) -> (i64, i64) {
    let snap = |u: f64| {
        let r = u.round();
        if (u - r).abs() <= 1e-9 * u.abs().max(1.0) {
            r
        } else {
            u
        }
    };
    let a = snap(s * q + xi2);
    let b = snap(t * q + xi2);
    let lo = a.floor() as i64 + 1;
    let hi = if closed_right || b != b.floor() { b.floor() as i64 } else { b as i64 - 1 };
    (lo, hi)
}

fn theta_window(s: f64, t: f64, closed_right: bool, g: &GroupElement) -> Result<Complex64> {
    if g.phi != 0.0 {
        return invalid("indicator thetas are only evaluated at phi = 0");
    }
    if !(s.is_finite() && t.is_finite()) {
        return invalid("window endpoints must be finite");
    }
    let q = lattice_scale(g.y);
    let (lo, hi) = window_range(s, t, closed_right, g.xi2, q);
    if ((hi - lo) as f64) > MAX_TERMS {
        return invalid("window holds too many lattice points");
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in lo..=hi {
        acc += e(lattice_phase(n, g.x, g.xi1, g.xi2));
    }
    Ok(g.y.powf(0.25) * e(g.zeta - 0.5 * g.xi1 * g.xi2) * acc)
}

/// `Theta_{1_(s,t]}(g)` at `phi = 0`: a finite lattice sum.
pub fn theta_indicator(s: f64, t: f64, g: &GroupElement) -> Result<Complex64> {
    theta_window(s, t, true, g)
}

/// `Theta_{1_(s,t)}(g)` at `phi = 0`.
pub fn theta_indicator_open(s: f64, t: f64, g: &GroupElement) -> Result<Complex64> {
    theta_window(s, t, false, g)
}

/// Partial sums of the two dyadic series for `Theta_chi(g Phi^s)`.
#[derive(Clone, Debug)]
pub struct ChiSeries {
    pub value: Complex64,
    /// `2^{-J/2} (|Theta_Delta| + |Theta_Delta-|)` at `j = J`.
    pub last_term: f64,
    /// Partial sums after each `j`.
    pub partial: Vec<Complex64>,
}

/// `sum_{j <= J} 2^{-j/2} [Theta_Delta(g Phi^{s - j log 4})
/// + Theta_Delta-(g (I; (0,1), 0) Phi^{s - j log 4})]`.
pub fn theta_chi_series(delta: &RegularFunction, g: &GroupElement, s_flow: f64, j_max: u32, tail_eps: f64) -> Result<ChiSeries> {
    let delta_minus = delta.reflected();
    let shifted = g.mul(&GroupElement::heisenberg(0.0, 1.0, 0.0));
    let log4 = 4f64.ln();
    let mut value = Complex64::new(0.0, 0.0);
    let mut partial = Vec::with_capacity(j_max as usize + 1);
    let mut last_term = 0.0;
    for j in 0..=j_max {
        let t = s_flow - j as f64 * log4;
        let w = 2f64.powf(-(j as f64) / 2.0);
        let left = theta_regular(delta, &g.geodesic(t), tail_eps)?;
        let right = theta_regular(&delta_minus, &shifted.geodesic(t), tail_eps)?;
        value += w * (left + right);
        last_term = w * (left.norm() + right.norm());
        partial.push(value);
    }
    Ok(ChiSeries { value, last_term, partial })
}

/// Closed support box `[a1, b1] x [a2, b2]` of a rank-2 test function.
pub type SupportBox = [(f64, f64); 2];

/// `Theta^(2)_F(g1, g2)` at `phi1 = phi2 = 0`: a finite double lattice sum
/// over the support box. The Heisenberg prefactor is the tensor product of two
/// rank-1 prefactors, `e(zeta_j - xi_{j,1} xi_{j,2} / 2)`.
pub fn theta2_direct(f: &dyn Fn(f64, f64) -> f64, support: SupportBox, g1: &GroupElement, g2: &GroupElement) -> Result<Complex64> {
    if g1.phi != 0.0 || g2.phi != 0.0 {
        return invalid("theta2_direct needs phi1 = phi2 = 0");
    }
    if support.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
        return invalid("theta2_direct needs a bounded support box");
    }
    let range = |g: &GroupElement, (a, b): (f64, f64)| {
        let q = lattice_scale(g.y);
        ((g.xi2 + a * q).floor() as i64 - 1, (g.xi2 + b * q).ceil() as i64 + 1, q)
    };
    let (lo1, hi1, q1) = range(g1, support[0]);
    let (lo2, hi2, q2) = range(g2, support[1]);
    if ((hi1 - lo1) as f64) * ((hi2 - lo2) as f64) > MAX_TERMS {
        return invalid("support box holds too many lattice points");
    }
    let ph2: Vec<Complex64> = (lo2..=hi2).map(|n| e(lattice_phase(n, g2.x, g2.xi1, g2.xi2))).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for n1 in lo1..=hi1 {
        let w1 = (n1 as f64 - g1.xi2) / q1;
        let mut row = Complex64::new(0.0, 0.0);
        for (i2, n2) in (lo2..=hi2).enumerate() {
            let w2 = (n2 as f64 - g2.xi2) / q2;
            let v = f(w1, w2);
            if v != 0.0 {
                row += v * ph2[i2];
            }
        }
        if row != Complex64::new(0.0, 0.0) {
            acc += row * e(lattice_phase(n1, g1.x, g1.xi1, g1.xi2));
        }
    }
    let pre = (g1.y * g2.y).powf(0.25) * e(g1.zeta - 0.5 * g1.xi1 * g1.xi2) * e(g2.zeta - 0.5 * g2.xi1 * g2.xi2);
    Ok(pre * acc)
}
