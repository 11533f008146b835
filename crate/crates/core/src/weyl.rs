//! Quadratic Weyl sums and the interpolated theta path.
//!
//! For parameters `(x, alpha, beta)` the increments are
//! `z_k = e((k^2/2 + beta k) x + alpha k)` and `S_n = z_1 + ... + z_n`.
//! The path `X_N(t)` joins the points `S_k / sqrt(N)` at times `k / N` by
//! straight segments. Every second-order quantity on a window `m < k <= n`
//! (the double sums `J`, `I`, the square sum `M`, the level-2 matrices) is
//! evaluated in `O(n - m)` from prefix sums.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::phase::{e, frac, frac_mul, half_square_phase};
use crate::roughpath::Increment2;

/// Steps between exact re-anchoring of the phase recurrence.
const ANCHOR: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylParams {
    pub x: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl WeylParams {
    pub fn new(x: f64, alpha: f64, beta: f64) -> Self {
        Self { x, alpha, beta }
    }

    /// Coefficient of the linear phase term, `alpha + beta x`.
    pub fn linear_coeff(&self) -> f64 {
        self.alpha + self.beta * self.x
    }

    /// Parameters `(2x, 2 alpha, beta)`, whose increments are `z_k^2`.
    pub fn doubled(&self) -> Self {
        Self::new(2.0 * self.x, 2.0 * self.alpha, self.beta)
    }

    fn check(&self) -> Result<()> {
        if self.x.is_finite() && self.alpha.is_finite() && self.beta.is_finite() {
            Ok(())
        } else {
            invalid("Weyl parameters must be finite")
        }
    }
}

/// `theta_k mod 1`, evaluated directly from the binary expansions of `x` and
/// `alpha + beta x`.
pub fn phase(k: u64, p: &WeylParams) -> f64 {
    let k = k as i64;
    frac(half_square_phase(k, p.x) + frac_mul(k, p.linear_coeff()))
}

/// `z_k = e(theta_k)`.
pub fn eval_increment(k: u64, p: &WeylParams) -> Complex64 {
    e(phase(k, p))
}

/// Phases `theta_1, theta_2, ...` by the second-difference recurrence.
///
/// `delta_k = theta_k - theta_{k-1} = (k - 1/2) x + c` advances by `x`; both
/// are kept in `[0, 1)`. Every [`ANCHOR`] steps the pair is recomputed
/// exactly so rounding cannot accumulate quadratically.
#[derive(Clone, Debug)]
pub struct PhaseIter {
    params: WeylParams,
    step: f64,
    k: u64,
    theta: f64,
    delta: f64,
}

impl PhaseIter {
    pub fn new(params: WeylParams) -> Self {
        Self { params, step: frac(params.x), k: 0, theta: 0.0, delta: 0.0 }
    }

    fn anchored_delta(&self, k: u64) -> f64 {
        frac(frac_mul(2 * k as i64 - 1, 0.5 * self.params.x) + frac(self.params.linear_coeff()))
    }
}

impl Iterator for PhaseIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.k += 1;
        let k = self.k;
        if k % ANCHOR == 1 {
            self.delta = self.anchored_delta(k);
            self.theta = if k == 1 { self.delta } else { phase(k, &self.params) };
        } else {
            self.delta = frac(self.delta + self.step);
            self.theta = frac(self.theta + self.delta);
        }
        Some(self.theta)
    }
}

/// `S_N` without storing the walk.
pub fn theta_sum(p: &WeylParams, n: usize) -> Complex64 {
    PhaseIter::new(*p).take(n).map(e).sum()
}

/// `S_k` for each `k` in `indices` (non-decreasing, each at most `n_max`).
pub fn partial_sums_at(p: &WeylParams, indices: &[usize]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(indices.len());
    let mut it = PhaseIter::new(*p);
    let mut k = 0usize;
    let mut s = Complex64::new(0.0, 0.0);
    for &target in indices {
        assert!(target >= k, "indices must be non-decreasing");
        while k < target {
            s += e(it.next().unwrap());
            k += 1;
        }
        out.push(s);
    }
    out
}

/// Second-order sums over the window `m < k <= n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSums {
    pub m: usize,
    pub n: usize,
    /// `(1/N) sum_{k<l} conj(z_k) z_l`
    pub j: Complex64,
    /// `(1/N) sum_{k<l} z_k z_l`
    pub i: Complex64,
    /// `(1/N) sum_k z_k^2`
    pub m_sum: Complex64,
    /// `(S_n - S_m) / sqrt(N)`
    pub l: Complex64,
    pub h_plus: Complex64,
    pub h_minus: Complex64,
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
}

impl WindowSums {
    /// `|L^2 - 2I - M|`, relative to `max(1, |L|^2)`.
    pub fn square_defect(&self) -> f64 {
        let scale = self.l.norm_sqr().max(1.0);
        (self.l * self.l - 2.0 * self.i - self.m_sum).norm() / scale
    }

    /// The grid level-2 matrix `A + B`.
    pub fn level2(&self) -> Matrix2<f64> {
        self.a + self.b
    }
}

#[derive(Clone, Debug)]
pub struct WeylWalk {
    params: WeylParams,
    n: usize,
    z: Vec<Complex64>,
    prefix: Vec<Complex64>,
}

impl WeylWalk {
    pub fn new(params: WeylParams, n: usize) -> Result<Self> {
        params.check()?;
        if n == 0 {
            return invalid("walk length N must be at least 1");
        }
        let z: Vec<Complex64> = PhaseIter::new(params).take(n).map(e).collect();
        let mut prefix = Vec::with_capacity(n + 1);
        let mut s = Complex64::new(0.0, 0.0);
        prefix.push(s);
        for &zk in &z {
            s += zk;
            prefix.push(s);
        }
        Ok(Self { params, n, z, prefix })
    }

    pub fn params(&self) -> &WeylParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `z_1, ..., z_N` (index `k - 1` holds `z_k`).
    pub fn increments(&self) -> &[Complex64] {
        &self.z
    }

    /// `S_0, ..., S_N`.
    pub fn prefix(&self) -> &[Complex64] {
        &self.prefix
    }

    /// `z_k` for `1 <= k <= N`.
    pub fn increment(&self, k: usize) -> Complex64 {
        self.z[k - 1]
    }

    fn scale(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }

    /// `X_N(k/N) = S_k / sqrt(N)`.
    pub fn grid_value(&self, k: usize) -> Vector2<f64> {
        let s = self.prefix[k] * self.scale();
        Vector2::new(s.re, s.im)
    }

    /// `X_N(t)` for `t` in `[0, 1]`.
    pub fn path_value(&self, t: f64) -> Result<Vector2<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return invalid(format!("time {t} outside [0, 1]"));
        }
        let tn = t * self.n as f64;
        let k = (tn.floor() as usize).min(self.n);
        if k == self.n {
            return Ok(self.grid_value(self.n));
        }
        let s = (self.prefix[k] + (tn - k as f64) * self.z[k]) * self.scale();
        Ok(Vector2::new(s.re, s.im))
    }

    fn check_window(&self, m: usize, n: usize) -> Result<()> {
        if m >= n || n > self.n {
            return invalid(format!("window requires 0 <= m < n <= N, got m={m}, n={n}, N={}", self.n));
        }
        Ok(())
    }

    /// All second-order window sums in `O(n - m)`.
    pub fn window_sums(&self, m: usize, n: usize) -> Result<WindowSums> {
        self.check_window(m, n)?;
        let inv_n = 1.0 / self.n as f64;
        let base = self.prefix[m];
        let mut j = Complex64::new(0.0, 0.0);
        let mut i = Complex64::new(0.0, 0.0);
        let mut msum = Complex64::new(0.0, 0.0);
        let (mut b11, mut b12, mut b22) = (0.0, 0.0, 0.0);
        for l in (m + 1)..=n {
            let zl = self.z[l - 1];
            let d = self.prefix[l - 1] - base;
            j += zl * d.conj();
            i += zl * d;
            msum += zl * zl;
            b11 += zl.re * zl.re;
            b12 += zl.re * zl.im;
            b22 += zl.im * zl.im;
        }
        let j = j * inv_n;
        let i = i * inv_n;
        let m_sum = msum * inv_n;
        let h_plus = i + j;
        let h_minus = i - j;
        let hp = h_plus * 0.5;
        let hm = h_minus / Complex64::new(0.0, 2.0);
        let a = Matrix2::new(hp.re, hp.im, hm.re, hm.im);
        let half = 0.5 * inv_n;
        let b = Matrix2::new(b11 * half, b12 * half, b12 * half, b22 * half);
        let l = (self.prefix[n] - base) * self.scale();
        Ok(WindowSums { m, n, j, i, m_sum, l, h_plus, h_minus, a, b })
    }

    /// `XX(m/N, n/N)` from the grid double-sum formula, accumulated in the
    /// real plane.
    pub fn iterated_integral_grid(&self, m: usize, n: usize) -> Result<Matrix2<f64>> {
        self.check_window(m, n)?;
        let base = self.prefix[m];
        let mut acc = Matrix2::zeros();
        for l in (m + 1)..=n {
            let d = self.prefix[l - 1] - base;
            let zl = self.z[l - 1];
            let dv = Vector2::new(d.re, d.im);
            let zv = Vector2::new(zl.re, zl.im);
            acc += dv * zv.transpose() + 0.5 * zv * zv.transpose();
        }
        Ok(acc / self.n as f64)
    }

    /// Exact Riemann-Stieltjes `XX(s, t)` for arbitrary `0 <= s < t <= 1`,
    /// including the partial end segments.
    pub fn iterated_integral_continuous(&self, s: f64, t: f64) -> Result<Matrix2<f64>> {
        if !(0.0 <= s && s < t && t <= 1.0) {
            return invalid(format!("need 0 <= s < t <= 1, got s={s}, t={t}"));
        }
        let nf = self.n as f64;
        let ks = ((s * nf).ceil() as usize).min(self.n);
        let kt = ((t * nf).floor() as usize).min(self.n);
        let xs = self.path_value(s)?;
        let xt = self.path_value(t)?;
        if ks > kt {
            return Ok(Increment2::segment(xt - xs).level2);
        }
        let head = Increment2::segment(self.grid_value(ks) - xs);
        let mid = if ks < kt {
            Increment2::new(self.grid_value(kt) - self.grid_value(ks), self.iterated_integral_grid(ks, kt)?)
        } else {
            Increment2::zero()
        };
        let tail = Increment2::segment(xt - self.grid_value(kt));
        Ok(head.concat(&mid).concat(&tail).level2)
    }

    /// Levy area `XX^{12} - XX^{21}` on the grid window `(m, n]`.
    pub fn levy_area(&self, m: usize, n: usize) -> Result<f64> {
        let xx = self.iterated_integral_grid(m, n)?;
        Ok(xx[(0, 1)] - xx[(1, 0)])
    }

    /// Largest defect among the double-angle identities linking the
    /// `B`-sums at `(x, alpha, beta)` to first-order sums at `(2x, 2 alpha, beta)`.
    pub fn double_angle_checks(&self, m: usize, n: usize) -> Result<f64> {
        self.check_window(m, n)?;
        let doubled = self.params.doubled();
        let inv_n = 1.0 / self.n as f64;
        let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
        let (mut a2, mut b2) = (0.0, 0.0);
        for k in (m + 1)..=n {
            let zk = self.z[k - 1];
            aa += zk.re * zk.re;
            ab += zk.re * zk.im;
            bb += zk.im * zk.im;
            let w = eval_increment(k as u64, &doubled);
            a2 += w.re;
            b2 += w.im;
        }
        let count = (n - m) as f64;
        let d1 = (aa * inv_n - (0.5 * count * inv_n + 0.5 * inv_n * a2)).abs();
        let d2 = (ab * inv_n - 0.5 * inv_n * b2).abs();
        let d3 = (bb * inv_n - (0.5 * count * inv_n - 0.5 * inv_n * a2)).abs();
        Ok(d1.max(d2).max(d3))
    }

    /// Uniform-partition quadratic variation `sum_{k <= floor(tN)} |Delta X_k|^2`.
    pub fn quadratic_variation(&self, t: f64) -> f64 {
        let kmax = ((t.clamp(0.0, 1.0) * self.n as f64).floor() as usize).min(self.n);
        let inv_n = 1.0 / self.n as f64;
        self.z[..kmax].iter().map(|z| z.norm_sqr() * inv_n).sum()
    }

    /// Uniform-partition `p`-variation `(sum_k |Delta X_k|^p)^{1/p}`.
    pub fn p_variation_uniform(&self, p: f64) -> f64 {
        let sc = self.scale();
        let s: f64 = self.z.iter().map(|z| (z.norm() * sc).powf(p)).sum();
        s.powf(1.0 / p)
    }
}
