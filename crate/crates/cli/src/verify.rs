//! The exact-identity suite behind `theta-rough verify`.

use anyhow::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use theta_rough::jacobi::{reduce, theta2_direct, GroupElement};
use theta_rough::roughpath::{chen_defect, geometric_defect, RoughLift};
use theta_rough::triangle::{partition_defect, triangle_indicator};
use theta_rough::weyl::{eval_increment, WeylParams, WeylWalk};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub max_defect: f64,
    pub tolerance: f64,
    /// Unchecked rows are reported for comparison and never fail the suite.
    pub checked: bool,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, tolerance: f64, checked: bool) -> Self {
        Self { name, max_defect: 0.0, tolerance, checked, pass: true }
    }

    fn see(&mut self, d: f64) {
        // NaN counts as a failure
        if !(d <= self.max_defect) {
            self.max_defect = if d.is_nan() { f64::INFINITY } else { d };
        }
    }

    fn finish(mut self) -> Self {
        self.pass = !self.checked || self.max_defect <= self.tolerance;
        self
    }
}

/// Largest grid size for the exhaustive Chen scan and the quadratic oracle.
const EXHAUSTIVE_CHEN: usize = 64;
const QUADRATIC_ORACLE: usize = 256;

fn naive_window(p: &WeylParams, big_n: usize, m: usize, n: usize) -> [Complex64; 4] {
    let z: Vec<Complex64> = (1..=big_n as u64).map(|k| eval_increment(k, p)).collect();
    let nf = big_n as f64;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for k in m..n {
        out[2] += z[k] * z[k];
        out[3] += z[k];
        for l in (k + 1)..n {
            out[0] += z[k].conj() * z[l];
            out[1] += z[k] * z[l];
        }
    }
    [out[0] / nf, out[1] / nf, out[2] / nf, out[3] / nf.sqrt()]
}

pub fn run(seed: u64, n: usize, samples: usize) -> Result<Vec<Check>> {
    anyhow::ensure!(n >= 2, "verify needs N >= 2");
    anyhow::ensure!(samples >= 1, "verify needs at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chen = Check::new("chen", 1e-10, true);
    let mut geometric = Check::new("geometric", 1e-10, true);
    let mut square = Check::new("L^2=2I+M", 1e-10, true);
    let mut oracle = Check::new("window_oracle", 1e-10, n <= QUADRATIC_ORACLE);
    let mut j_theta = Check::new("J=Theta2", 1e-10, true);
    let mut area = Check::new("levy_area", 1e-10, true);
    let mut levy_re = Check::new("levy_re", 1e-10, true);
    let mut levy_re_literal = Check::new("levy_re_literal", 1e-10, false);
    let mut partition = Check::new("partition", 1e-12, true);
    let mut mirror = Check::new("mirror", 1e-9, true);

    for _ in 0..samples {
        let p = WeylParams::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let walk = WeylWalk::new(p, n)?;
        let lift = RoughLift::from_walk(&walk);

        if n <= EXHAUSTIVE_CHEN {
            for i in 0..=n {
                for j in i..=n {
                    let ij = lift.increment_idx(i, j);
                    geometric.see(geometric_defect(&ij).norm());
                    for k in j..=n {
                        chen.see(chen_defect(&ij, &lift.increment_idx(j, k), &lift.increment_idx(i, k)).norm());
                    }
                }
            }
        } else {
            for _ in 0..20_000 {
                let mut t = [rng.gen_range(0..=n), rng.gen_range(0..=n), rng.gen_range(0..=n)];
                t.sort_unstable();
                let ij = lift.increment_idx(t[0], t[1]);
                chen.see(chen_defect(&ij, &lift.increment_idx(t[1], t[2]), &lift.increment_idx(t[0], t[2])).norm());
                geometric.see(geometric_defect(&lift.increment_idx(t[0], t[2])).norm());
            }
        }

        let m0 = rng.gen_range(0..n);
        let m1 = rng.gen_range(m0 + 1..=n);
        for (a, b) in [(0, n), (m0, m1)] {
            let w = walk.window_sums(a, b)?;
            square.see(w.square_defect());
            let lev = walk.levy_area(a, b)?;
            area.see((lev - (w.a[(0, 1)] - w.a[(1, 0)])).abs());
            area.see((lev - w.j.im).abs());
            if n <= QUADRATIC_ORACLE {
                let o = naive_window(&p, n, a, b);
                for (u, v) in [w.j, w.i, w.m_sum, w.l].iter().zip(o) {
                    oracle.see((u - v).norm());
                }
            }
        }

        let full = walk.window_sums(0, n)?;
        let x2 = walk.grid_value(n).norm_squared();
        levy_re.see((full.j.re - (0.5 * x2 - 0.5)).abs());
        levy_re_literal.see((full.j.re - (x2 - 0.5)).abs());

        let y = 1.0 / (n * n) as f64;
        let c = p.linear_coeff();
        let g1 = GroupElement::horocycle_lift(-p.x, y, -c);
        let g2 = GroupElement::horocycle_lift(p.x, y, c);
        let (s, t) = (m0 as f64 / n as f64, m1 as f64 / n as f64);
        let th = theta2_direct(&|a, b| triangle_indicator(s, t, a, b), [(s, t), (s, t)], &g1, &g2)?;
        j_theta.see((th - walk.window_sums(m0, m1)?.j).norm());

        let r = reduce(&g2)?.reduced;
        let rm = reduce(&g1)?.reduced;
        mirror.see(rm.max_diff(&r.mirror()));
    }

    for _ in 0..10_000 {
        let (w1, w2) = (rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
        partition.see(partition_defect(w1, w2).abs());
    }

    Ok([chen, geometric, square, oracle, j_theta, area, levy_re, levy_re_literal, partition, mirror].into_iter().map(Check::finish).collect())
}
