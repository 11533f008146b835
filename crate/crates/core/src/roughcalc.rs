//! Young integration, rough integration of controlled paths, and a Davie
//! scheme for rough differential equations driven by a [`RoughLift`].

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::roughpath::{rough_distance, scan_pairs, RoughLift};

/// Extrapolated Riemann-Stieltjes sums over dyadic refinements.
#[derive(Clone, Debug, Serialize)]
pub struct YoungIntegral {
    /// Extrapolated limit (equal to `finest` when no order can be estimated).
    pub value: f64,
    pub finest: f64,
    /// `|S_K - S_{K-1}|` between the two finest levels.
    pub error: f64,
    /// Estimated convergence order of the sums, if any.
    pub order: Option<f64>,
    /// Sums from coarsest to finest.
    pub levels: Vec<f64>,
}

/// `int f dg` from samples on a common grid of `2^K + 1` points, by left-point
/// sums at strides `2^K, ..., 2, 1`.
pub fn young_integral(f: &[f64], g: &[f64]) -> Result<YoungIntegral> {
    if f.len() != g.len() {
        return invalid("young_integral needs f and g on a common grid");
    }
    let n = f.len().saturating_sub(1);
    if n == 0 || !n.is_power_of_two() {
        return invalid("young_integral needs 2^K + 1 samples");
    }
    let mut levels = Vec::new();
    let mut stride = n;
    while stride >= 1 {
        let s: f64 = (0..n).step_by(stride).map(|i| f[i] * (g[i + stride] - g[i])).sum();
        levels.push(s);
        stride /= 2;
    }
    let k = levels.len();
    let finest = levels[k - 1];
    let error = if k >= 2 { (levels[k - 1] - levels[k - 2]).abs() } else { f64::NAN };
    let mut value = finest;
    let mut order = None;
    if k >= 3 {
        let d1 = levels[k - 2] - levels[k - 3];
        let d2 = levels[k - 1] - levels[k - 2];
        if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() {
            let r = (d1 / d2).log2();
            if r.is_finite() && r > 0.0 {
                order = Some(r);
                value = finest + d2 / (2f64.powf(r) - 1.0);
            }
        }
    }
    Ok(YoungIntegral { value, finest, error, order, levels })
}

/// A path `Y` in `R^m` with Gubinelli derivative `Y'` in `R^{m x 2}`, sampled
/// on the grid of a lift.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledPath {
    pub times: Vec<f64>,
    pub y: Vec<DVector<f64>>,
    pub yprime: Vec<DMatrix<f64>>,
}

impl ControlledPath {
    pub fn new(times: Vec<f64>, y: Vec<DVector<f64>>, yprime: Vec<DMatrix<f64>>) -> Result<Self> {
        if times.len() != y.len() || times.len() != yprime.len() || times.is_empty() {
            return invalid("controlled path needs equally long, nonempty times, Y and Y'");
        }
        let m = y[0].len();
        if y.iter().any(|v| v.len() != m) || yprime.iter().any(|d| d.shape() != (m, 2)) {
            return invalid("controlled path needs Y in R^m and Y' in R^{m x 2}");
        }
        Ok(Self { times, y, yprime })
    }

    /// `Y = X` (absolute positions of the lift), `Y' = I`.
    pub fn identity(lift: &RoughLift) -> Self {
        let n = lift.len();
        Self { times: lift.times().to_vec(), y: (0..n).map(|i| to_dvec(lift.position(i))).collect(), yprime: vec![DMatrix::identity(2, 2); n] }
    }

    /// `Y = 0`, `Y' = 0` in dimension `m`.
    pub fn zero(lift: &RoughLift, m: usize) -> Self {
        let n = lift.len();
        Self { times: lift.times().to_vec(), y: vec![DVector::zeros(m); n], yprime: vec![DMatrix::zeros(m, 2); n] }
    }

    pub fn dim(&self) -> usize {
        self.y[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sup |R_{s,t}| / |t-s|^{2 gamma}` with `R_{s,t} = Y_{s,t} - Y'_s X_{s,t}`.
    pub fn remainder_seminorm(&self, lift: &RoughLift, gamma: f64) -> Result<f64> {
        check_grid(&self.times, lift)?;
        let t = &self.times;
        let mut sup = 0.0f64;
        scan_pairs(self.len(), |i, j| {
            let x = to_dvec(lift.increment_idx(i, j).level1);
            let r = &self.y[j] - &self.y[i] - &self.yprime[i] * x;
            sup = sup.max(r.norm() / (t[j] - t[i]).powf(2.0 * gamma));
        });
        Ok(sup)
    }

    /// `sup |Y_{s,t}| / |t-s|^gamma`.
    pub fn holder_seminorm(&self, gamma: f64) -> f64 {
        let t = &self.times;
        let mut sup = 0.0f64;
        scan_pairs(self.len(), |i, j| {
            sup = sup.max((&self.y[j] - &self.y[i]).norm() / (t[j] - t[i]).powf(gamma));
        });
        sup
    }
}

fn to_dvec(v: Vector2<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn to_dmat(m: Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

fn check_grid(times: &[f64], lift: &RoughLift) -> Result<()> {
    if times.len() != lift.len() || times.iter().zip(lift.times()).any(|(a, b)| (a - b).abs() > 1e-12) {
        return invalid("controlled path and lift must share a grid");
    }
    Ok(())
}

/// Compensated Riemann sums `sum Y_u X_{u,v}^T + Y'_u XX_{u,v}` over refining
/// grid partitions.
#[derive(Clone, Debug)]
pub struct RoughIntegral {
    /// Value on the finest (full grid) partition, in `R^{m x 2}`.
    pub value: DMatrix<f64>,
    /// Frobenius distance between the two finest partitions.
    pub cauchy: f64,
    /// Values from the finest partition (stride 1) to coarser strides.
    pub levels: Vec<DMatrix<f64>>,
}

fn grid_index(times: &[f64], t: f64) -> Result<usize> {
    let tol = 1e-12 * (1.0 + t.abs());
    let i = times.partition_point(|&u| u < t - tol);
    if i < times.len() && (times[i] - t).abs() <= tol {
        Ok(i)
    } else {
        invalid(format!("time {t} is not a grid point"))
    }
}

/// `int_s^t Y dX` for a controlled path `Y`.
pub fn rough_integral(z: &ControlledPath, lift: &RoughLift, s: f64, t: f64) -> Result<RoughIntegral> {
    check_grid(&z.times, lift)?;
    let (i0, i1) = (grid_index(&z.times, s)?, grid_index(&z.times, t)?);
    if i0 > i1 {
        return invalid("rough_integral needs s <= t");
    }
    let m = z.dim();
    let sum_at = |stride: usize| {
        let mut acc = DMatrix::zeros(m, 2);
        let mut u = i0;
        while u < i1 {
            let v = (u + stride).min(i1);
            let inc = lift.increment_idx(u, v);
            acc += &z.y[u] * to_dvec(inc.level1).transpose() + &z.yprime[u] * to_dmat(inc.level2);
            u = v;
        }
        acc
    };
    let mut levels = vec![sum_at(1)];
    let mut stride = 2;
    while stride <= (i1 - i0).max(1) {
        levels.push(sum_at(stride));
        stride *= 2;
    }
    let cauchy = if levels.len() >= 2 { (&levels[0] - &levels[1]).norm() } else { 0.0 };
    Ok(RoughIntegral { value: levels[0].clone(), cauchy, levels })
}

/// Vector fields `f: R^m -> R^{m x 2}` (column `i` drives `dX^i`) with their
/// directional derivative `Df(y)[v]`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn f(&self, y: &DVector<f64>) -> DMatrix<f64>;
    fn df(&self, y: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64>;
}

/// `f_i(y) = A_i y`.
#[derive(Clone, Debug)]
pub struct LinearField {
    pub a: [DMatrix<f64>; 2],
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.a[0].nrows()
    }

    fn f(&self, y: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_columns(&[&self.a[0] * y, &self.a[1] * y])
    }

    fn df(&self, _y: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
        self.f(v)
    }
}

/// A bounded field on `R^2` with bounded derivatives of all orders:
/// `f_1(y) = (tanh y2, tanh y1)`, `f_2(y) = (tanh(y1 - y2), tanh(y1 + y2) / 2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TanhField;

fn sech2(u: f64) -> f64 {
    1.0 - u.tanh().powi(2)
}

impl VectorField for TanhField {
    fn dim(&self) -> usize {
        2
    }

    fn f(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let (a, b) = (y[0], y[1]);
        DMatrix::from_row_slice(2, 2, &[b.tanh(), (a - b).tanh(), a.tanh(), 0.5 * (a + b).tanh()])
    }

    fn df(&self, y: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
        let (a, b) = (y[0], y[1]);
        let (va, vb) = (v[0], v[1]);
        DMatrix::from_row_slice(2, 2, &[sech2(b) * vb, sech2(a - b) * (va - vb), sech2(a) * va, 0.5 * sech2(a + b) * (va + vb)])
    }
}

/// Largest relative mismatch between `df` and central differences of `f` at
/// the given points, in random-free coordinate directions.
pub fn derivative_check(vf: &dyn VectorField, points: &[DVector<f64>], h: f64) -> f64 {
    let m = vf.dim();
    let mut worst = 0.0f64;
    for y in points {
        for k in 0..m {
            let mut e = DVector::zeros(m);
            e[k] = 1.0;
            let fd = (vf.f(&(y + h * &e)) - vf.f(&(y - h * &e))) / (2.0 * h);
            let an = vf.df(y, &e);
            worst = worst.max((fd - &an).norm() / (1.0 + an.norm()));
        }
    }
    worst
}

/// Solution of an RDE with step-halving diagnostic.
#[derive(Clone, Debug)]
pub struct RdeSolution {
    /// `Y` with Gubinelli derivative `f(Y)`.
    pub path: ControlledPath,
    /// `max |Y^h - Y^{2h}|` over the common grid points, when the grid allows
    /// halving.
    pub halving_diff: Option<f64>,
}

fn davie(vf: &dyn VectorField, xi0: &DVector<f64>, lift: &RoughLift) -> Result<ControlledPath> {
    let n = lift.len();
    let mut y = Vec::with_capacity(n);
    let mut yp = Vec::with_capacity(n);
    let mut cur = xi0.clone();
    for k in 0..n {
        let fy = vf.f(&cur);
        if !cur.iter().all(|v| v.is_finite()) || !fy.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { step: k, steps: n - 1 });
        }
        y.push(cur.clone());
        yp.push(fy.clone());
        if k + 1 == n {
            break;
        }
        let inc = lift.increment_idx(k, k + 1);
        let mut next = &cur + &fy * to_dvec(inc.level1);
        for i in 0..2 {
            let dfi = vf.df(&cur, &fy.column(i).into_owned());
            for j in 0..2 {
                next += inc.level2[(i, j)] * dfi.column(j);
            }
        }
        cur = next;
    }
    ControlledPath::new(lift.times().to_vec(), y, yp)
}

/// `dY = f(Y) dX`, `Y_0 = xi0`, by the second-order step
/// `Y_{k+1} = Y_k + f(Y_k) X_{k,k+1} + sum_{ij} Df_j(Y_k)[f_i(Y_k)] XX^{ij}_{k,k+1}`.
pub fn rde_solve(vf: &dyn VectorField, xi0: &DVector<f64>, lift: &RoughLift) -> Result<RdeSolution> {
    if xi0.len() != vf.dim() {
        return invalid("initial value has the wrong dimension");
    }
    if lift.len() < 2 {
        return invalid("rde_solve needs at least two grid points");
    }
    let path = davie(vf, xi0, lift)?;
    let halving_diff = if (lift.len() - 1).is_multiple_of(2) {
        let coarse = davie(vf, xi0, &lift.subsample(2)?)?;
        Some(coarse.y.iter().enumerate().map(|(i, v)| (v - &path.y[2 * i]).norm()).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(RdeSolution { path, halving_diff })
}

/// Self-convergence at the final time over successive halvings of the grid:
/// differences `d_k = |Y^{h_k}_T - Y^{h_{k+1}}_T|` from finest pair to
/// coarsest, and the empirical order as the least-squares slope of
/// `log2 d_k` against `k`. Single ratios are noisy for oscillating drivers.
pub fn rde_self_convergence(vf: &dyn VectorField, xi0: &DVector<f64>, lift: &RoughLift, levels: usize) -> Result<(Vec<f64>, f64)> {
    let mut ends = Vec::new();
    let mut cur = lift.clone();
    for _ in 0..levels {
        ends.push(davie(vf, xi0, &cur)?.y.last().expect("nonempty").clone());
        if !(cur.len() - 1).is_multiple_of(2) {
            break;
        }
        cur = cur.subsample(2)?;
    }
    if ends.len() < 3 {
        return invalid("self-convergence needs three dyadic levels");
    }
    let diffs: Vec<f64> = ends.windows(2).map(|w| (&w[0] - &w[1]).norm()).collect();
    let pts: Vec<(f64, f64)> = diffs.iter().enumerate().filter(|(_, d)| **d > 0.0).map(|(k, d)| (k as f64, d.log2())).collect();
    if pts.len() < 2 {
        return Ok((diffs, f64::INFINITY));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok((diffs, sxy / sxx))
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub initial_distance: f64,
    pub rough_distance: f64,
    /// `|Y1_0 - Y2_0| + sup |(Y1 - Y2)_{s,t}| / |t-s|^gamma`.
    pub solution_distance: f64,
    /// `solution_distance / (initial_distance + rough_distance)`; zero when
    /// both sides vanish.
    pub ratio: f64,
}

/// Solve with two initial values and two lifts on a common grid and compare
/// the solution distance with the input distance.
pub fn continuity_experiment(
    vf: &dyn VectorField,
    xi1: &DVector<f64>,
    xi2: &DVector<f64>,
    l1: &RoughLift,
    l2: &RoughLift,
    gamma: f64,
) -> Result<ContinuityReport> {
    let rho = rough_distance(l1, l2, gamma)?;
    let y1 = rde_solve(vf, xi1, l1)?.path;
    let y2 = rde_solve(vf, xi2, l2)?.path;
    let diff = ControlledPath::new(
        y1.times.clone(),
        y1.y.iter().zip(&y2.y).map(|(a, b)| a - b).collect(),
        y1.yprime.iter().zip(&y2.yprime).map(|(a, b)| a - b).collect(),
    )?;
    let initial_distance = (xi1 - xi2).norm();
    let solution_distance = diff.y[0].norm() + diff.holder_seminorm(gamma);
    let denom = initial_distance + rho;
    let ratio = if denom == 0.0 {
        if solution_distance == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        solution_distance / denom
    };
    Ok(ContinuityReport { initial_distance, rough_distance: rho, solution_distance, ratio })
}
