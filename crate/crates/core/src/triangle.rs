//! Dyadic decomposition of the triangle indicator `T_(0,1]` into three corner
//! pieces, three line pieces, four segment pieces and a smooth remainder.

use serde::Serialize;
use std::sync::OnceLock;

use crate::error::{invalid, Result};
use crate::jacobi::RegularFunction;

/// `f0(x) = h(x) / (h(x) + h(1 - x))` with `h(x) = e^{-1/x}` for `x > 0`.
pub fn f0_default(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / x - 1.0 / (1.0 - x)).exp())
    }
}

/// Parameters `c1 < c2 < c3` of `f_{c1,c2,c3}` and `F_{c1,c2,c3}`.
#[derive(Clone, Copy, Debug)]
pub struct BumpSpec {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub f0: fn(f64) -> f64,
}

/// Corner template triple.
pub const CORNER: BumpSpec = BumpSpec { c1: 1.0 / 12.0, c2: 1.0 / 6.0, c3: 1.0 / 3.0, f0: f0_default };
/// Transverse triple of the line template.
pub const LINE: BumpSpec = BumpSpec { c1: 1.0 / 24.0, c2: 1.0 / 12.0, c3: 1.0 / 6.0, f0: f0_default };
/// Triple of `Delta` in the dyadic series for `Theta_chi`.
pub const DELTA: BumpSpec = BumpSpec { c1: 1.0 / 6.0, c2: 1.0 / 3.0, c3: 2.0 / 3.0, f0: f0_default };

impl BumpSpec {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let s = Self { c1, c2, c3, f0: f0_default };
        if !(0.0 < c1 && c1 < c2 && c2 < c3 && c3 < 1.0) {
            return invalid("need 0 < c1 < c2 < c3 < 1");
        }
        if !(s.p() > 1.0) {
            return invalid("need p = (c3 - c2) / (c2 - c1) > 1");
        }
        Ok(s)
    }

    pub fn p(&self) -> f64 {
        (self.c3 - self.c2) / (self.c2 - self.c1)
    }

    /// `f_{c1,c2,c3}(x)`.
    pub fn bump(&self, x: f64) -> f64 {
        let f0 = self.f0;
        if x <= self.c1 || x >= self.c3 {
            0.0
        } else if x <= self.c2 {
            f0((x - self.c1) / (self.c2 - self.c1))
        } else {
            f0((self.c3 - x) / (self.c3 - self.c2))
        }
    }

    /// True when `c2 = p c1` and `c3 = p c2`, so consecutive terms of the
    /// stacked series have matching ramps. All default triples are geometric.
    pub fn is_geometric(&self) -> bool {
        let p = self.p();
        (p * self.c1 - self.c2).abs() <= 1e-12 * self.c2 && (p * self.c2 - self.c3).abs() <= 1e-12 * self.c3
    }

    /// `F_{c1,c2,c3}(x) = sum_j f(p^j x)`. For geometric triples this is the
    /// closed form `1` on `(0, c2]`, the bump on `(c2, c3)`, `0` elsewhere;
    /// otherwise the finitely many nonzero terms with `p^j x` in `(c1, c3)`.
    pub fn stacked(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.c3 {
            return 0.0;
        }
        if self.is_geometric() {
            return if x <= self.c2 { 1.0 } else { self.bump(x) };
        }
        let p = self.p();
        let j0 = ((self.c1 / x).ln() / p.ln()).floor().max(0.0) as i32;
        let j1 = ((self.c3 / x).ln() / p.ln()).ceil() as i32;
        (j0..=j1).map(|j| self.bump(p.powi(j) * x)).sum()
    }

    /// The series `sum_{j <= j_max} f(p^j x)` summed term by term.
    pub fn stacked_series(&self, x: f64, j_max: u32) -> f64 {
        let p = self.p();
        (0..=j_max).map(|j| self.bump(p.powi(j as i32) * x)).sum()
    }
}

/// `T_Cor(x, y) = F(x) F(y)` with the corner triple.
pub fn t_cor(x: f64, y: f64) -> f64 {
    CORNER.stacked(x) * CORNER.stacked(y)
}

/// `T_Line` without its segment term: `(F(1/2 - x) + F(x - 1/2)) G(y)`.
pub fn t_line_rect(x: f64, y: f64) -> f64 {
    let g = LINE.stacked(y);
    if g == 0.0 {
        return 0.0;
    }
    (CORNER.stacked(0.5 - x) + CORNER.stacked(x - 0.5)) * g
}

/// `T_Segm(x, y) = 1_{1/2}(x) G(y)`.
pub fn t_segm(x: f64, y: f64) -> f64 {
    if x == 0.5 {
        LINE.stacked(y)
    } else {
        0.0
    }
}

/// Full template line function `T_Line = t_line_rect + t_segm`.
pub fn t_line(x: f64, y: f64) -> f64 {
    t_line_rect(x, y) + t_segm(x, y)
}

/// `T_(s,t](w1, w2) = 1{s < w1 < w2 <= t}`.
pub fn triangle_indicator(s: f64, t: f64, w1: f64, w2: f64) -> f64 {
    if s < w1 && w1 < w2 && w2 <= t {
        1.0
    } else {
        0.0
    }
}

fn open_triangle(w1: f64, w2: f64) -> bool {
    0.0 < w1 && w1 < w2 && w2 < 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Tag {
    C00,
    C01,
    C11,
    Lh,
    Lv,
    Ld,
    Smooth,
    SegH,
    SegV,
    SegD,
    SegTop,
}

impl Tag {
    pub const ALL: [Tag; 11] = [Tag::C00, Tag::C01, Tag::C11, Tag::Lh, Tag::Lv, Tag::Ld, Tag::Smooth, Tag::SegH, Tag::SegV, Tag::SegD, Tag::SegTop];

    /// The six pieces the smooth remainder is complementary to; the line
    /// pieces carry their segment terms, as in `T_Line`.
    pub const SIX: [Tag; 9] = [Tag::C00, Tag::C01, Tag::C11, Tag::Lh, Tag::Lv, Tag::Ld, Tag::SegH, Tag::SegV, Tag::SegD];

    pub fn name(self) -> &'static str {
        match self {
            Tag::C00 => "C00",
            Tag::C01 => "C01",
            Tag::C11 => "C11",
            Tag::Lh => "Lh",
            Tag::Lv => "Lv",
            Tag::Ld => "Ld",
            Tag::Smooth => "Smooth",
            Tag::SegH => "Seg_h",
            Tag::SegV => "Seg_v",
            Tag::SegD => "Seg_d",
            Tag::SegTop => "Seg_top",
        }
    }

    pub fn parse(s: &str) -> Result<Tag> {
        Tag::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s)).map_or_else(|| invalid(format!("unknown piece tag {s}")), Ok)
    }
}

/// Sum of the corner, line and segment pieces (`T_Line` includes its segment).
pub fn six_piece_sum(w1: f64, w2: f64) -> f64 {
    Tag::SIX.iter().map(|&t| piece_raw(t, w1, w2)).sum()
}

fn piece_raw(tag: Tag, w1: f64, w2: f64) -> f64 {
    match tag {
        Tag::C00 => t_cor(w1, w2 - w1),
        Tag::C01 => t_cor(w1, 1.0 - w2),
        Tag::C11 => t_cor(1.0 - w2, w2 - w1),
        Tag::Lh => t_line_rect(w1, 1.0 - w2),
        Tag::Lv => t_line_rect(w2, w1),
        Tag::Ld => t_line_rect(w1, w2 - w1),
        Tag::SegH => t_segm(w1, 1.0 - w2),
        Tag::SegV => t_segm(w2, w1),
        Tag::SegD => t_segm(w1, w2 - w1),
        Tag::SegTop => {
            if w2 == 1.0 && 0.0 < w1 && w1 < 1.0 {
                1.0
            } else {
                0.0
            }
        }
        Tag::Smooth => {
            if open_triangle(w1, w2) {
                1.0 - six_piece_sum(w1, w2)
            } else {
                0.0
            }
        }
    }
}

/// Value of one piece at `(w1, w2)`.
pub fn piece_eval(tag: Tag, w1: f64, w2: f64) -> f64 {
    piece_raw(tag, w1, w2)
}

/// Sum of all eleven pieces.
pub fn total(w1: f64, w2: f64) -> f64 {
    Tag::ALL.iter().map(|&t| piece_raw(t, w1, w2)).sum()
}

/// `sum of all pieces - T_(0,1]`.
pub fn partition_defect(w1: f64, w2: f64) -> f64 {
    total(w1, w2) - triangle_indicator(0.0, 1.0, w1, w2)
}

/// Distance from `(w1, w2)` to the perimeter of the triangle with vertices
/// `(0,0)`, `(0,1)`, `(1,1)`, for interior points.
pub fn distance_to_perimeter(w1: f64, w2: f64) -> f64 {
    w1.min(1.0 - w2).min((w2 - w1) / std::f64::consts::SQRT_2)
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub points: usize,
    pub max_abs: f64,
    pub max_gradient: f64,
    pub max_hessian: f64,
    pub non_finite: usize,
    /// Largest `|Smooth|` on collar points of the same grid.
    pub collar_max: f64,
    pub collar_points: usize,
}

/// Finite-difference gradient and Hessian bounds of `Smooth` on an `n x n`
/// grid, restricted to points at least `margin` inside the triangle.
pub fn smooth_remainder_regularity(n: usize, margin: f64, h: f64) -> RegularityReport {
    let s = |a: f64, b: f64| piece_eval(Tag::Smooth, a, b);
    let mut r = RegularityReport { points: 0, max_abs: 0.0, max_gradient: 0.0, max_hessian: 0.0, non_finite: 0, collar_max: 0.0, collar_points: 0 };
    for i in 0..=n {
        for j in 0..=n {
            let (w1, w2) = (i as f64 / n as f64, j as f64 / n as f64);
            if !open_triangle(w1, w2) {
                continue;
            }
            let d = distance_to_perimeter(w1, w2);
            if d < margin {
                r.collar_points += 1;
                r.collar_max = r.collar_max.max(s(w1, w2).abs());
                continue;
            }
            if d < margin + 2.0 * h {
                continue;
            }
            r.points += 1;
            let v = s(w1, w2);
            let gx = (s(w1 + h, w2) - s(w1 - h, w2)) / (2.0 * h);
            let gy = (s(w1, w2 + h) - s(w1, w2 - h)) / (2.0 * h);
            let hxx = (s(w1 + h, w2) - 2.0 * v + s(w1 - h, w2)) / (h * h);
            let hyy = (s(w1, w2 + h) - 2.0 * v + s(w1, w2 - h)) / (h * h);
            let hxy = (s(w1 + h, w2 + h) - s(w1 + h, w2 - h) - s(w1 - h, w2 + h) + s(w1 - h, w2 - h)) / (4.0 * h * h);
            let vals = [v, gx, gy, hxx, hyy, hxy];
            if vals.iter().any(|x| !x.is_finite()) {
                r.non_finite += 1;
                continue;
            }
            r.max_abs = r.max_abs.max(v.abs());
            r.max_gradient = r.max_gradient.max(gx.hypot(gy));
            r.max_hessian = r.max_hessian.max(hxx.abs().max(hyy.abs()).max(hxy.abs()));
        }
    }
    r
}

/// Rows `(w1, w2, tag, value)` over the `n x n` grid of `[lo, hi]^2`.
pub fn dump_grid(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64, Tag, f64)> {
    let mut out = Vec::with_capacity((n + 1) * (n + 1) * Tag::ALL.len());
    for i in 0..=n {
        for j in 0..=n {
            let w1 = lo + (hi - lo) * i as f64 / n as f64;
            let w2 = lo + (hi - lo) * j as f64 / n as f64;
            for t in Tag::ALL {
                out.push((w1, w2, t, piece_eval(t, w1, w2)));
            }
        }
    }
    out
}

fn delta_fn(w: f64) -> f64 {
    DELTA.bump(w)
}

/// `Delta = f_{1/6,1/3,2/3}` as a regular function supported on `[1/6, 2/3]`,
/// without a kappa table; enough for `Theta_Delta` at multiples of `pi`.
pub fn delta_regular() -> RegularFunction {
    RegularFunction::custom("delta", delta_fn, Vec::new(), Some((DELTA.c1, DELTA.c3))).expect("valid delta")
}

/// `Delta` with a kappa table for `eta = 2, 4` measured on a grid of angles in
/// `(0, pi)` and `|w| <= 8`, inflated by a factor 2. Computed once.
pub fn delta_regular_measured() -> Result<RegularFunction> {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let base = delta_regular();
    if let Some(k) = CELL.get() {
        return Ok(base.with_kappa(k.clone()));
    }
    let phis: Vec<f64> = (1..32).map(|i| std::f64::consts::PI * i as f64 / 32.0).collect();
    let ws: Vec<f64> = (-160..=160).map(|i| i as f64 / 20.0).collect();
    let k = base.measure_kappa(&[2.0, 4.0], &phis, &ws, 2.0)?;
    Ok(base.with_kappa(CELL.get_or_init(|| k).clone()))
}
