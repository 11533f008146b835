//! Adaptive Gauss-Legendre quadrature for complex-valued integrands.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * x);
        }
        acc * half
    }
}

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

const MAX_DEPTH: u32 = 30;

/// Error estimates below this multiple of `int |f|` are rounding noise and
/// count as converged.
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Rule value on `[a, b]` together with the rule estimate of `int |f|`.
fn panel(gl: &GaussLegendre, f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
        let v = f(mid + half * x);
        acc += *w * v;
        mass += *w * v.norm();
    }
    (acc * half, mass * half.abs())
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`, by recursive
/// bisection comparing each panel with its two halves. Panels still
/// unresolved at the depth cap are summed; the call fails only when that sum
/// exceeds `tol`.
pub fn adaptive(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    adaptive_panels(f, a, b, tol, 1, 0.0)
}

/// [`adaptive`] over `panels` equal subintervals, each held to `tol / panels`.
/// Splitting first keeps strongly oscillating integrands from driving the
/// bisection deep from the top. `rel_noise` is the relative error of one
/// evaluation of `f`; error estimates below `rel_noise * int |f|` on a panel
/// are accepted, since no refinement can go below them.
pub fn adaptive_panels(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, panels: usize, rel_noise: f64) -> Result<Complex64> {
    let panels = panels.max(1);
    let floor = ROUNDING_FLOOR.max(rel_noise);
    let gl = rule();
    let h = (b - a) / panels as f64;
    let sub_tol = tol / panels as f64;
    let mut unresolved = 0.0f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == panels { b } else { lo + h };
        let (whole, _) = panel(gl, f, lo, hi);
        acc += recurse(gl, f, lo, hi, whole, sub_tol, floor, 0, &mut unresolved);
    }
    if unresolved > tol {
        Err(Error::Quadrature { residual: unresolved })
    } else {
        Ok(acc)
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    gl: &GaussLegendre,
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    whole: Complex64,
    tol: f64,
    floor: f64,
    depth: u32,
    unresolved: &mut f64,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let (left, lm) = panel(gl, f, a, m);
    let (right, rm) = panel(gl, f, m, b);
    let err = (left + right - whole).norm();
    if err <= tol.max(floor * (lm + rm)) {
        return left + right;
    }
    if depth >= MAX_DEPTH {
        *unresolved += err;
        return left + right;
    }
    recurse(gl, f, a, m, left, 0.5 * tol, floor, depth + 1, unresolved) + recurse(gl, f, m, b, right, 0.5 * tol, floor, depth + 1, unresolved)
}
