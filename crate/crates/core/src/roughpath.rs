//! Level-2 rough paths over `R^2` and the truncated tensor algebra `T^(2)(R^2)`.

use std::io::{self, Write};

use nalgebra::{Matrix2, Vector2};

use crate::error::{invalid, Result};
use crate::weyl::WeylWalk;

/// A level-1 increment `X_{s,t}` together with its level-2 value `XX_{s,t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Increment2 {
    pub level1: Vector2<f64>,
    pub level2: Matrix2<f64>,
}

impl Increment2 {
    pub fn new(level1: Vector2<f64>, level2: Matrix2<f64>) -> Self {
        Self { level1, level2 }
    }

    pub fn zero() -> Self {
        Self::new(Vector2::zeros(), Matrix2::zeros())
    }

    /// Lift of a straight segment with displacement `v`: `(v, v v^T / 2)`.
    pub fn segment(v: Vector2<f64>) -> Self {
        Self::new(v, 0.5 * v * v.transpose())
    }

    /// Chen concatenation: `(s,u)` followed by `(u,t)`.
    pub fn concat(&self, next: &Increment2) -> Self {
        Self::new(self.level1 + next.level1, self.level2 + next.level2 + self.level1 * next.level1.transpose())
    }
}

/// `XX_{s,t} - XX_{s,u} - XX_{u,t} - X_{s,u} X_{u,t}^T`.
pub fn chen_defect(su: &Increment2, ut: &Increment2, st: &Increment2) -> Matrix2<f64> {
    st.level2 - su.level2 - ut.level2 - su.level1 * ut.level1.transpose()
}

/// `Sym(XX) - X X^T / 2`; zero for weakly geometric increments.
pub fn geometric_defect(inc: &Increment2) -> Matrix2<f64> {
    0.5 * (inc.level2 + inc.level2.transpose()) - 0.5 * inc.level1 * inc.level1.transpose()
}

/// A rough path sampled on a grid and stored in base-point form
/// `(X_{0,t_i}, XX_{0,t_i})`; increments are recovered through Chen's relation.
#[derive(Clone, Debug, PartialEq)]
pub struct RoughLift {
    times: Vec<f64>,
    level1: Vec<Vector2<f64>>,
    level2: Vec<Matrix2<f64>>,
}

impl RoughLift {
    pub fn from_parts(times: Vec<f64>, level1: Vec<Vector2<f64>>, level2: Vec<Matrix2<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != level1.len() || times.len() != level2.len() {
            return invalid("rough lift needs equally many times, level-1 and level-2 values");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("rough lift times must be strictly increasing");
        }
        Ok(Self { times, level1, level2 })
    }

    /// Canonical lift of the piecewise-linear path through `points`.
    pub fn from_points(times: Vec<f64>, points: &[Vector2<f64>]) -> Result<Self> {
        if points.len() != times.len() || points.is_empty() {
            return invalid("need one point per time");
        }
        let x0 = points[0];
        let mut acc = Increment2::zero();
        let mut level1 = Vec::with_capacity(points.len());
        let mut level2 = Vec::with_capacity(points.len());
        level1.push(Vector2::zeros());
        level2.push(Matrix2::zeros());
        for w in points.windows(2) {
            acc = acc.concat(&Increment2::segment(w[1] - w[0]));
            level1.push(acc.level1);
            level2.push(acc.level2);
        }
        // keep absolute positions in level 1; increments only use differences
        for v in level1.iter_mut() {
            *v += x0;
        }
        Self::from_parts(times, level1, level2)
    }

    /// The lift of a theta walk on the grid `k / N`.
    pub fn from_walk(walk: &WeylWalk) -> Self {
        let n = walk.len();
        let times = (0..=n).map(|k| k as f64 / n as f64).collect();
        let mut level1 = Vec::with_capacity(n + 1);
        let mut level2 = Vec::with_capacity(n + 1);
        let mut acc = Increment2::zero();
        level1.push(Vector2::zeros());
        level2.push(Matrix2::zeros());
        for k in 1..=n {
            acc = acc.concat(&Increment2::segment(walk.grid_value(k) - walk.grid_value(k - 1)));
            level1.push(walk.grid_value(k));
            level2.push(acc.level2);
        }
        Self { times, level1, level2 }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `X_{t_i}` (absolute position).
    pub fn position(&self, i: usize) -> Vector2<f64> {
        self.level1[i]
    }

    /// Level-2 base-point value `XX_{0,t_i}`.
    pub fn base_level2(&self, i: usize) -> Matrix2<f64> {
        self.level2[i]
    }

    /// Increment between grid indices `i <= j`.
    pub fn increment_idx(&self, i: usize, j: usize) -> Increment2 {
        let xs = self.level1[i] - self.level1[0];
        let xt = self.level1[j] - self.level1[0];
        let d = xt - xs;
        Increment2::new(d, self.level2[j] - self.level2[i] - xs * d.transpose())
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * (1.0 + t.abs());
        let i = self.times.partition_point(|&u| u < t - tol);
        if i < self.times.len() && (self.times[i] - t).abs() <= tol {
            Ok(i)
        } else {
            invalid(format!("time {t} is not a grid point of the lift"))
        }
    }

    /// Increment `(X_{s,t}, XX_{s,t})` for grid times `s <= t`.
    pub fn increment(&self, s: f64, t: f64) -> Result<Increment2> {
        if s > t {
            return invalid(format!("increment needs s <= t, got s={s}, t={t}"));
        }
        Ok(self.increment_idx(self.index_of(s)?, self.index_of(t)?))
    }

    /// Every `stride`-th grid point; the last point must be kept.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !(self.len() - 1).is_multiple_of(stride) {
            return invalid(format!("stride {stride} does not divide the grid of {} intervals", self.len() - 1));
        }
        let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        Ok(Self {
            times: pick(&self.times),
            level1: self.level1.iter().step_by(stride).copied().collect(),
            level2: self.level2.iter().step_by(stride).copied().collect(),
        })
    }

    /// CSV in base-point form with header `t,x1,x2,X11,X12,X21,X22`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x1,x2,X11,X12,X21,X22")?;
        for i in 0..self.len() {
            let x = self.level1[i];
            let m = self.level2[i];
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                crate::fmt_f64(self.times[i]),
                crate::fmt_f64(x[0]),
                crate::fmt_f64(x[1]),
                crate::fmt_f64(m[(0, 0)]),
                crate::fmt_f64(m[(0, 1)]),
                crate::fmt_f64(m[(1, 0)]),
                crate::fmt_f64(m[(1, 1)]),
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HolderNorms {
    /// `sup |X_{s,t}| / |t-s|^gamma`
    pub level1: f64,
    /// `sup |XX_{s,t}| / |t-s|^{2 gamma}` (Frobenius norm)
    pub level2: f64,
    /// `level1 + sqrt(level2)`
    pub homogeneous: f64,
    /// False when pairs were subsampled; the values are then lower bounds.
    pub exact: bool,
}

/// Largest grid size scanned over all pairs.
pub const EXACT_SCAN_LIMIT: usize = 4097;

fn grid_pairs(len: usize) -> (Vec<(usize, usize)>, bool) {
    if len <= EXACT_SCAN_LIMIT {
        return (Vec::new(), true);
    }
    // short lags everywhere, long lags on a coarse sub-grid
    let mut pairs = Vec::new();
    for i in 0..len {
        for lag in 1..=64 {
            if i + lag < len {
                pairs.push((i, i + lag));
            }
        }
    }
    let stride = len.div_ceil(2048);
    let coarse: Vec<usize> = (0..len).step_by(stride).chain(std::iter::once(len - 1)).collect();
    for a in 0..coarse.len() {
        for b in (a + 1)..coarse.len() {
            if coarse[b] > coarse[a] {
                pairs.push((coarse[a], coarse[b]));
            }
        }
    }
    (pairs, false)
}

pub(crate) fn scan_pairs(len: usize, mut visit: impl FnMut(usize, usize)) -> bool {
    let (pairs, exact) = grid_pairs(len);
    if exact {
        for i in 0..len {
            for j in (i + 1)..len {
                visit(i, j);
            }
        }
    } else {
        for (i, j) in pairs {
            visit(i, j);
        }
    }
    exact
}

/// Grid Holder seminorms of a lift. Exact over all pairs up to
/// [`EXACT_SCAN_LIMIT`] points, a stratified lower bound above.
pub fn holder_seminorms(lift: &RoughLift, gamma: f64) -> Result<HolderNorms> {
    if !(gamma > 1.0 / 3.0 && gamma <= 1.0) {
        return invalid(format!("Holder exponent {gamma} outside (1/3, 1]"));
    }
    if lift.len() < 2 {
        return invalid("Holder seminorms need at least two grid points");
    }
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    let t = lift.times();
    let exact = scan_pairs(lift.len(), |i, j| {
        let inc = lift.increment_idx(i, j);
        let h = t[j] - t[i];
        s1 = s1.max(inc.level1.norm() / h.powf(gamma));
        s2 = s2.max(inc.level2.norm() / h.powf(2.0 * gamma));
    });
    Ok(HolderNorms { level1: s1, level2: s2, homogeneous: s1 + s2.sqrt(), exact })
}

/// Inhomogeneous rough distance
/// `sup |X1_{s,t} - X2_{s,t}| / |t-s|^gamma + sup |XX1_{s,t} - XX2_{s,t}| / |t-s|^{2 gamma}`.
pub fn rough_distance(a: &RoughLift, b: &RoughLift, gamma: f64) -> Result<f64> {
    if a.len() != b.len() || a.times().iter().zip(b.times()).any(|(x, y)| (x - y).abs() > 1e-12) {
        return invalid("rough distance needs lifts on a common grid");
    }
    if a.len() < 2 {
        return invalid("rough distance needs at least two grid points");
    }
    let t = a.times();
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    scan_pairs(a.len(), |i, j| {
        let ia = a.increment_idx(i, j);
        let ib = b.increment_idx(i, j);
        let h = t[j] - t[i];
        d1 = d1.max((ia.level1 - ib.level1).norm() / h.powf(gamma));
        d2 = d2.max((ia.level2 - ib.level2).norm() / h.powf(2.0 * gamma));
    });
    Ok(d1 + d2)
}

/// Element `(a, b, c)` of `T^(2)(R^2) = R + R^2 + R^{2x2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorElement {
    pub a: f64,
    pub b: Vector2<f64>,
    pub c: Matrix2<f64>,
}

impl TensorElement {
    pub fn new(a: f64, b: Vector2<f64>, c: Matrix2<f64>) -> Self {
        Self { a, b, c }
    }

    pub fn unit() -> Self {
        Self::new(1.0, Vector2::zeros(), Matrix2::zeros())
    }

    /// Truncated tensor product.
    pub fn mul(&self, o: &TensorElement) -> Self {
        Self::new(self.a * o.a, self.a * o.b + o.a * self.b, self.a * o.c + o.a * self.c + self.b * o.b.transpose())
    }

    /// Inverse of a group element `(1, b, c)`: `(1, -b, -c + b b^T)`.
    pub fn inverse(&self) -> Result<Self> {
        if self.a != 1.0 {
            return invalid("only group elements (leading scalar 1) are inverted");
        }
        Ok(Self::new(1.0, -self.b, -self.c + self.b * self.b.transpose()))
    }

    /// `exp(0, b, c) = (1, b, c + b b^T / 2)`.
    pub fn exp(&self) -> Result<Self> {
        if self.a != 0.0 {
            return invalid("exp is defined on elements with leading scalar 0");
        }
        Ok(Self::new(1.0, self.b, self.c + 0.5 * self.b * self.b.transpose()))
    }

    /// `log(1, b, c) = (0, b, c - b b^T / 2)`.
    pub fn log(&self) -> Result<Self> {
        if self.a != 1.0 {
            return invalid("log is defined on elements with leading scalar 1");
        }
        Ok(Self::new(0.0, self.b, self.c - 0.5 * self.b * self.b.transpose()))
    }

    /// Homogeneous norm surrogate `|b| + sqrt(|c|)` of `log` of a group element,
    /// Lipschitz-equivalent to the Carnot-Caratheodory norm.
    pub fn homogeneous_norm(&self) -> Result<f64> {
        let l = self.log()?;
        Ok(l.b.norm() + l.c.norm().sqrt())
    }

    pub fn distance(&self, o: &TensorElement) -> f64 {
        (self.a - o.a).abs() + (self.b - o.b).norm() + (self.c - o.c).norm()
    }
}

impl From<Increment2> for TensorElement {
    fn from(i: Increment2) -> Self {
        Self::new(1.0, i.level1, i.level2)
    }
}

/// Level-2 signature of the piecewise-linear path through `samples`.
pub fn signature(samples: &[Vector2<f64>]) -> Result<TensorElement> {
    if samples.len() < 2 {
        return invalid("signature needs at least two samples");
    }
    let mut acc = Increment2::zero();
    for w in samples.windows(2) {
        acc = acc.concat(&Increment2::segment(w[1] - w[0]));
    }
    Ok(acc.into())
}
