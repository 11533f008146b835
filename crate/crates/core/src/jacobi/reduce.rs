//! Reduction of group elements into the fundamental domain of `Gamma`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::GroupElement;
use crate::error::{Error, Result};

/// Cap on z-reduction rounds (translate, then invert).
pub const REDUCE_ITERATION_CAP: usize = 10_000;

/// Generators of `Gamma`, as left multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    G1,
    G2,
    G3,
    G4,
    G5,
}

impl Generator {
    /// The group element `gamma^k`.
    pub fn power(self, k: i64) -> GroupElement {
        let kf = k as f64;
        match self {
            Generator::G1 => GroupElement::new(0.0, 1.0, kf * PI / 2.0, 0.0, 0.0, kf / 8.0),
            Generator::G2 => GroupElement::new(kf, 1.0, 0.0, kf / 2.0, 0.0, 0.0),
            Generator::G3 => GroupElement::heisenberg(kf, 0.0, 0.0),
            Generator::G4 => GroupElement::heisenberg(0.0, kf, 0.0),
            Generator::G5 => GroupElement::heisenberg(0.0, 0.0, kf),
        }
    }
}

/// `gamma^k g` via closed-form coordinate actions. `G1` is supported for
/// `k = +-1` and even `k`; other odd powers are split into those.
pub fn act(gen: Generator, k: i64, g: &GroupElement) -> GroupElement {
    let mut h = *g;
    let kf = k as f64;
    match gen {
        Generator::G1 => {
            if k % 2 != 0 {
                let even = act(Generator::G1, k - k.signum(), g);
                return act_g1_unit(k.signum(), &even);
            }
            let j = k / 2;
            h.phi += j as f64 * PI;
            if j % 2 != 0 {
                h.xi1 = -h.xi1;
                h.xi2 = -h.xi2;
            }
            h.zeta += j as f64 / 4.0;
        }
        Generator::G2 => {
            h.x += kf;
            h.xi1 = kf / 2.0 + g.xi1 + kf * g.xi2;
            h.zeta += kf * g.xi2 / 4.0;
        }
        Generator::G3 => {
            h.xi1 += kf;
            h.zeta += 0.5 * kf * g.xi2;
        }
        Generator::G4 => {
            h.xi2 += kf;
            h.zeta -= 0.5 * kf * g.xi1;
        }
        Generator::G5 => h.zeta += kf,
    }
    h
}

fn act_g1_unit(sign: i64, g: &GroupElement) -> GroupElement {
    let r2 = g.x * g.x + g.y * g.y;
    let arg = g.y.atan2(g.x);
    let (xi1, xi2, phi, zeta) =
        if sign > 0 { (-g.xi2, g.xi1, g.phi + arg, g.zeta + 0.125) } else { (g.xi2, -g.xi1, g.phi + arg - PI, g.zeta - 0.125) };
    GroupElement::new(-g.x / r2, g.y / r2, phi, xi1, xi2, zeta)
}

/// Run-length word of generator powers, in the order they were applied on the
/// left during reduction: `reduced = w_n ... w_1 g`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Gamma5Word {
    pub steps: Vec<(Generator, i64)>,
}

impl Gamma5Word {
    fn push(&mut self, gen: Generator, k: i64) {
        if k == 0 {
            return;
        }
        if let Some(last) = self.steps.last_mut() {
            if last.0 == gen && gen != Generator::G1 {
                last.1 += k;
                if last.1 == 0 {
                    self.steps.pop();
                }
                return;
            }
        }
        self.steps.push((gen, k));
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Total number of generator letters.
    pub fn letters(&self) -> u64 {
        self.steps.iter().map(|s| s.1.unsigned_abs()).sum()
    }

    /// `w_n ... w_1 g`.
    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        self.steps.iter().fold(*g, |h, &(gen, k)| act(gen, k, &h))
    }

    /// `w_1^{-1} ... w_n^{-1} r`; maps the reduced element back to the input.
    pub fn apply_inverse(&self, r: &GroupElement) -> GroupElement {
        self.steps.iter().rev().fold(*r, |h, &(gen, k)| act(gen, -k, &h))
    }

    /// Same as [`Gamma5Word::apply_inverse`] but through the general group law.
    pub fn apply_inverse_by_mul(&self, r: &GroupElement) -> GroupElement {
        self.steps.iter().rev().fold(*r, |h, &(gen, k)| gen.power(-k).mul(&h))
    }
}

/// Outcome of [`reduce`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reduction {
    pub word: Gamma5Word,
    pub reduced: GroupElement,
    /// Number of inversions used in the z-reduction.
    pub iterations: usize,
}

fn floor_shift(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Reduce `g` into `F_SL2Z x [-pi/2, pi/2) x [-1/2, 1/2)^2 x [-1/2, 1/2)`.
pub fn reduce(g: &GroupElement) -> Result<Reduction> {
    if !(g.y > 0.0) || !g.coords().iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidArgument(format!("cannot reduce {g:?}")));
    }
    let mut word = Gamma5Word::default();
    let mut h = *g;
    let mut iterations = 0;
    loop {
        let k = floor_shift(h.x);
        if k != 0 {
            h = act(Generator::G2, -k, &h);
            word.push(Generator::G2, -k);
            h = reduce_heisenberg(h, &mut word);
        }
        if h.x * h.x + h.y * h.y < 1.0 {
            if iterations >= REDUCE_ITERATION_CAP {
                return Err(Error::ReductionCap { iterations, last_y: h.y });
            }
            h = act(Generator::G1, 1, &h);
            word.push(Generator::G1, 1);
            h = reduce_heisenberg(h, &mut word);
            iterations += 1;
        } else {
            break;
        }
    }
    let j = ((h.phi + PI / 2.0) / PI).floor() as i64;
    if j != 0 {
        h = act(Generator::G1, -2 * j, &h);
        word.push(Generator::G1, -2 * j);
    }
    h = reduce_heisenberg(h, &mut word);
    Ok(Reduction { word, reduced: h, iterations })
}

/// Bring `xi` and `zeta` into `[-1/2, 1/2)` with `gamma_4`, `gamma_3`,
/// `gamma_5`. Also applied between z-steps so the Heisenberg coordinates stay
/// small and rounding does not accumulate.
fn reduce_heisenberg(mut h: GroupElement, word: &mut Gamma5Word) -> GroupElement {
    let k4 = floor_shift(h.xi2);
    if k4 != 0 {
        h = act(Generator::G4, -k4, &h);
        word.push(Generator::G4, -k4);
    }
    let k3 = floor_shift(h.xi1);
    if k3 != 0 {
        h = act(Generator::G3, -k3, &h);
        word.push(Generator::G3, -k3);
    }
    let k5 = floor_shift(h.zeta);
    if k5 != 0 {
        h = act(Generator::G5, -k5, &h);
        word.push(Generator::G5, -k5);
    }
    h
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Height `H(z)`: sum of `sqrt(y_gamma)` over cosets `Gamma_inf gamma` with
/// `y_gamma >= 1/4`.
pub fn height_h(x: f64, y: f64) -> f64 {
    assert!(y > 0.0, "height needs y > 0");
    let mut h = if y >= 0.25 { y.sqrt() } else { 0.0 };
    // y / |cz + d|^2 >= 1/4  <=>  (cx + d)^2 + c^2 y^2 <= 4y
    let cmax = (2.0 / y.sqrt()).floor() as i64;
    for c in 1..=cmax {
        let cf = c as f64;
        let rest = 4.0 * y - cf * cf * y * y;
        if rest < 0.0 {
            continue;
        }
        let r = rest.sqrt();
        let lo = (-cf * x - r).ceil() as i64;
        let hi = (-cf * x + r).floor() as i64;
        for d in lo..=hi {
            if gcd(c, d) != 1 {
                continue;
            }
            let df = d as f64;
            let q = (cf * x + df).powi(2) + cf * cf * y * y;
            if q <= 4.0 * y {
                h += (y / q).sqrt();
            }
        }
    }
    h
}
