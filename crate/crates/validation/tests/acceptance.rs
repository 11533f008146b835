//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! line fails. Tolerances are the published ones; nothing here is loosened to
//! make a line pass.

// seeds such as 0.3183 are sample points, not stand-ins for constants
#![allow(clippy::approx_constant)]

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use theta_rough::harness::{self, SampleSpec};
use theta_rough::jacobi::{act, height_h, reduce, theta2_direct, theta_regular, Generator, GroupElement, RegularFunction};
use theta_rough::roughcalc::{continuity_experiment, rde_solve, rough_integral, ControlledPath, LinearField, TanhField};
use theta_rough::roughpath::{chen_defect, geometric_defect, Increment2, RoughLift};
use theta_rough::triangle::{distance_to_perimeter, partition_defect, piece_eval, six_piece_sum, triangle_indicator, Tag};
use theta_rough::weyl::{theta_sum, WeylParams, WeylWalk};

struct Ledger {
    pass: usize,
    fail: usize,
}

impl Ledger {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
        println!("{} {id:<8} {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn max_abs(m: &Matrix2<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn random_params(rng: &mut ChaCha8Rng) -> WeylParams {
    WeylParams::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `(hi, lo)` with `hi + lo = a * b` exactly.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Phase `(k^2 / 2) x + k beta x + k alpha mod 1` in double-double arithmetic.
fn dd_phase(k: u64, p: &WeylParams) -> f64 {
    let kf = k as f64;
    let (h1, l1) = two_prod(0.5 * kf * kf, p.x);
    let (bx, bxl) = two_prod(p.beta, p.x);
    let (h2, l2) = two_prod(kf, bx);
    let l2 = l2 + kf * bxl;
    let (h3, l3) = two_prod(kf, p.alpha);
    let mut acc = 0.0;
    let mut tail = 0.0;
    for (h, l) in [(h1, l1), (h2, l2), (h3, l3)] {
        acc += h - h.floor();
        tail += l;
    }
    let v = acc + tail;
    v - v.floor()
}

/// Quadratic double sums `(J, I, M, L)` over the window `(m, n]`.
fn naive_window(z: &[Complex64], m: usize, n: usize) -> [Complex64; 4] {
    let nf = z.len() as f64;
    let zero = Complex64::new(0.0, 0.0);
    let (mut j, mut i, mut msum, mut l) = (zero, zero, zero, zero);
    for k in m..n {
        l += z[k];
        msum += z[k] * z[k];
        for q in (k + 1)..n {
            j += z[k].conj() * z[q];
            i += z[k] * z[q];
        }
    }
    [j / nf, i / nf, msum / nf, l / nf.sqrt()]
}

fn lifts(p: &WeylParams, n: usize) -> (GroupElement, GroupElement) {
    let y = 1.0 / (n * n) as f64;
    let c = p.linear_coeff();
    (GroupElement::horocycle_lift(-p.x, y, -c), GroupElement::horocycle_lift(p.x, y, c))
}

fn triangle_theta(g1: &GroupElement, g2: &GroupElement, s: f64, t: f64) -> Complex64 {
    theta2_direct(&|a, b| triangle_indicator(s, t, a, b), [(s, t), (s, t)], g1, g2).unwrap()
}

fn criterion_1(out: &mut Ledger) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut sq, mut chen, mut geo, mut jt, mut re_lit, mut re_half, mut levy, mut oracle) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut triples, mut pairs) = (0usize, 0usize);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        for n in [16usize, 64, 256] {
            let walk = WeylWalk::new(p, n).unwrap();
            let lift = RoughLift::from_walk(&walk);
            let m0 = rng.gen_range(0..n);
            let m1 = rng.gen_range(m0 + 1..=n);
            let windows = [(0, n), (m0, m1)];

            for &(a, b) in &windows {
                sq = sq.max(walk.window_sums(a, b).unwrap().square_defect());
            }

            if n <= 64 {
                // increments rebuilt from the window sums, independent of the lift's storage
                let from_sums = |a: usize, b: usize| {
                    if a >= b {
                        return Increment2::zero();
                    }
                    let ws = walk.window_sums(a, b).unwrap();
                    Increment2::new(Vector2::new(ws.l.re, ws.l.im), ws.level2())
                };
                let inc: Vec<Vec<Increment2>> = (0..=n).map(|a| (0..=n).map(|b| from_sums(a, b)).collect()).collect();
                for a in 0..n {
                    for u in (a + 1)..n {
                        for b in (u + 1)..=n {
                            chen = chen.max(max_abs(&chen_defect(&inc[a][u], &inc[u][b], &inc[a][b])));
                            chen = chen.max(max_abs(&chen_defect(&lift.increment_idx(a, u), &lift.increment_idx(u, b), &lift.increment_idx(a, b))));
                            triples += 1;
                        }
                    }
                }
            }
            for a in 0..n {
                for b in (a + 1)..=n {
                    geo = geo.max(max_abs(&geometric_defect(&lift.increment_idx(a, b))));
                    pairs += 1;
                }
            }

            let (g1, g2) = lifts(&p, n);
            for &(a, b) in &windows {
                let ws = walk.window_sums(a, b).unwrap();
                let th = triangle_theta(&g1, &g2, a as f64 / n as f64, b as f64 / n as f64);
                jt = jt.max((th - ws.j).norm());
            }
            let full = triangle_theta(&g1, &g2, 0.0, 1.0);
            let x1 = walk.grid_value(n).norm_squared();
            re_lit = re_lit.max((full.re - (x1 - 0.5)).abs());
            re_half = re_half.max((full.re - (0.5 * x1 - 0.5)).abs());

            for &(a, b) in &windows {
                let xx = lift.increment_idx(a, b).level2;
                let ws = walk.window_sums(a, b).unwrap();
                levy = levy.max(((xx[(0, 1)] - xx[(1, 0)]) - (ws.a[(0, 1)] - ws.a[(1, 0)])).abs());
            }

            let z: Vec<Complex64> = (1..=n as u64).map(|k| Complex64::from_polar(1.0, 2.0 * PI * dd_phase(k, &p))).collect();
            for &(a, b) in &windows {
                let ws = walk.window_sums(a, b).unwrap();
                let [j, i, msum, l] = naive_window(&z, a, b);
                for (u, v) in [(ws.j, j), (ws.i, i), (ws.m_sum, msum), (ws.l, l)] {
                    oracle = oracle.max((u - v).norm());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let tol = 1e-10;
    out.line("1(a)", sq < tol, format!("L^2 = 2I + M: max defect {sq:.2e} (tol 1e-10)"));
    out.line("1(b)", chen < tol, format!("Chen relation on {triples} grid triples, N <= 64: max defect {chen:.2e} (tol 1e-10)"));
    out.line("1(c)", geo < tol, format!("geometric defect on {pairs} grid pairs: max {geo:.2e} (tol 1e-10)"));
    out.line("1(d)", jt < tol, format!("J_N = rank-2 theta of the triangle: max defect {jt:.2e} (tol 1e-10)"));
    out.line(
        "1(e)",
        re_lit < tol,
        format!("Re Theta2 = |X_N(1)|^2 - 1/2: max defect {re_lit:.2e} (tol 1e-10); Re Theta2 = |X_N(1)|^2/2 - 1/2 holds to {re_half:.2e}"),
    );
    out.line("1(f)", levy < tol, format!("Levy area XX12 - XX21 = A12 - A21: max defect {levy:.2e} (tol 1e-10)"));
    out.line("1(g)", oracle < tol, format!("prefix-sum windows vs O(N^2) oracle: max defect {oracle:.2e} (tol 1e-10)"));
    out.line("1(time)", secs < 10.0, format!("identity suite runtime {secs:.2} s (limit 10 s)"));
}

/// The rescaling as printed: `y -> y / (t - s)^2` and `xi_2 -> xi_2 + s`.
fn rescaled_literal(g: &GroupElement, s: f64, t: f64) -> GroupElement {
    GroupElement::new(g.x, g.y / (t - s).powi(2), 0.0, g.xi1, g.xi2 + s, g.zeta)
}

/// The rescaling that makes the lattice points line up: the shift of `xi_2` is
/// `s / sqrt(y)`, and `xi_1`, `zeta` pick up the matching corrections.
fn rescaled_corrected(g: &GroupElement, s: f64, t: f64) -> GroupElement {
    let delta = s / g.y.sqrt();
    let xi2 = g.xi2 + delta;
    let xi1 = g.xi1 + delta * g.x;
    let zeta = g.zeta - 0.5 * g.xi1 * g.xi2 - xi2 * delta * g.x + 0.5 * delta * delta * g.x + 0.5 * xi1 * xi2;
    GroupElement::new(g.x, g.y / (t - s).powi(2), 0.0, xi1, xi2, zeta)
}

fn criterion_2(out: &mut Ledger) {
    let s5 = theta_sum(&WeylParams::new(0.4, 0.0, 0.0), 5);
    let d = (s5 - Complex64::new(5f64.sqrt(), 0.0)).norm();
    out.line("2(a)", d < 1e-12, format!("S_5(2/5; 0, 0) = sqrt 5: defect {d:.2e} (tol 1e-12)"));

    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut qv, mut pv) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let p = random_params(&mut rng);
        for n in [16usize, 100, 1024] {
            let walk = WeylWalk::new(p, n).unwrap();
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                let want = (t * n as f64).floor() / n as f64;
                qv = qv.max((walk.quadratic_variation(t) - want).abs());
            }
            for pp in [1.5, 2.0, 3.0] {
                let want = (n as f64).powf(1.0 / pp - 0.5);
                pv = pv.max((walk.p_variation_uniform(pp) - want).abs() / want.max(1.0));
            }
        }
    }
    // |z_k|^2 = 1 exactly in real arithmetic; the float sum carries rounding only
    out.line("2(b)", qv < 1e-12, format!("uniform-partition QV = floor(tN)/N: max defect {qv:.2e} (rounding level, tol 1e-12)"));
    out.line("2(c)", pv < 1e-12, format!("uniform-partition p-variation = N^(1/p - 1/2), p in {{1.5, 2, 3}}: max defect {pv:.2e} (tol 1e-12)"));

    let n = 256usize;
    let (mut lit, mut cor) = (0.0f64, 0.0f64);
    for _ in 0..30 {
        let p = random_params(&mut rng);
        let m0 = rng.gen_range(1..n - 1);
        let m1 = rng.gen_range(m0 + 1..=n);
        let (s, t) = (m0 as f64 / n as f64, m1 as f64 / n as f64);
        let y = 1.0 / (n * n) as f64;
        let c = p.linear_coeff();
        let g1 = GroupElement::new(-p.x, y, 0.0, -c, 0.0, 0.3);
        let g2 = GroupElement::new(p.x, y, 0.0, c, 0.0, -0.1);
        let lhs = triangle_theta(&g1, &g2, s, t);
        let unit = |h1: &GroupElement, h2: &GroupElement| (t - s) * triangle_theta(h1, h2, 0.0, 1.0);
        lit = lit.max((lhs - unit(&rescaled_literal(&g1, s, t), &rescaled_literal(&g2, s, t))).norm());
        cor = cor.max((lhs - unit(&rescaled_corrected(&g1, s, t), &rescaled_corrected(&g2, s, t))).norm());
    }
    out.line("2(d)", lit < 1e-10, format!("general-triangle scaling, xi_2 shifted by s: max defect {lit:.2e} (tol 1e-10)"));
    out.line(
        "2(d')",
        cor < 1e-10,
        format!("general-triangle scaling, xi_2 shifted by s/sqrt(y) with xi_1, zeta corrections: max defect {cor:.2e} (tol 1e-10)"),
    );
}

fn on_convention_set(w1: f64, w2: f64) -> bool {
    w1 == 0.5 || w2 == 0.5 || w2 - w1 == 0.5 || w2 == 1.0
}

fn criterion_3(out: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 10_000 {
        let (w1, w2) = (rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
        if on_convention_set(w1, w2) {
            continue;
        }
        n += 1;
        worst = worst.max(partition_defect(w1, w2).abs());
    }
    out.line("3(a)", worst < 1e-12, format!("partition of the triangle indicator on 10^4 points: max defect {worst:.2e} (tol 1e-12)"));

    let mut worst = 0.0f64;
    let mut ratio = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let (w1, w2) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        if !(0.0 < w1 && w1 < w2 && w2 < 1.0) || on_convention_set(w1, w2) {
            continue;
        }
        let d = distance_to_perimeter(w1, w2);
        if d >= 1e-3 {
            continue;
        }
        n += 1;
        let v = (six_piece_sum(w1, w2) - 1.0).abs();
        worst = worst.max(v);
        ratio = ratio.max(v / d);
    }
    out.line(
        "3(b)",
        worst < 1e-12,
        format!("six-piece sum = 1 on 10^3 points of the 1e-3 collar: max |sum - 1| {worst:.2e} (tol 1e-12); max |sum - 1| / distance {ratio:.1}"),
    );

    let n = 256usize;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let p = random_params(&mut rng);
        let (g1, g2) = lifts(&p, n);
        let bbox = [(0.0, 1.0), (0.0, 1.0)];
        let whole = triangle_theta(&g1, &g2, 0.0, 1.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for t in Tag::ALL {
            sum += theta2_direct(&move |a, b| piece_eval(t, a, b), bbox, &g1, &g2).unwrap();
        }
        worst = worst.max((sum - whole).norm());
    }
    out.line("3(c)", worst < 1e-10, format!("sum of piece thetas = triangle theta at N = 256: max defect {worst:.2e} (tol 1e-10)"));
}

fn random_element(rng: &mut ChaCha8Rng) -> GroupElement {
    GroupElement::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(0.05..3.0),
        rng.gen_range(-7.0..7.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    )
}

/// `H(x + iy) = sum over coprime (c, d) with Im >= 1/4 of sqrt(Im)`, enumerated.
fn brute_height(x: f64, y: f64) -> f64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut h = if y >= 0.25 { y.sqrt() } else { 0.0 };
    for c in 1..=300i64 {
        for d in -2000..=2000i64 {
            if gcd(c, d) != 1 {
                continue;
            }
            let yy = y / ((c as f64 * x + d as f64).powi(2) + (c as f64 * y).powi(2));
            if yy >= 0.25 {
                h += yy.sqrt();
            }
        }
    }
    h
}

const GENERATORS: [Generator; 5] = [Generator::G1, Generator::G2, Generator::G3, Generator::G4, Generator::G5];

fn invariance_defect(f: &RegularFunction, gen: Generator, g: &GroupElement) -> f64 {
    let a = theta_regular(f, g, 1e-13).unwrap();
    let b = theta_regular(f, &act(gen, 1, g), 1e-13).unwrap();
    (a - b).norm() / a.norm().max(1e-300)
}

fn criterion_4(out: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let element = |rng: &mut ChaCha8Rng| {
        GroupElement::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.3..2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    };
    let closed = RegularFunction::gaussian();
    let quad = RegularFunction::gaussian_quadrature();
    let (mut heis, mut modular) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let g = element(&mut rng);
        for gen in GENERATORS {
            let d = invariance_defect(&closed, gen, &g);
            match gen {
                Generator::G1 | Generator::G2 => modular = modular.max(d),
                _ => heis = heis.max(d),
            }
        }
    }
    let mut q = 0.0f64;
    for _ in 0..4 {
        let g = element(&mut rng);
        for gen in GENERATORS {
            q = q.max(invariance_defect(&quad, gen, &g));
        }
    }
    out.line(
        "4(a)",
        q < 1e-6 && modular < 1e-6,
        format!(
            "Gaussian theta invariant under gamma_1..gamma_5: quadrature transform {q:.2e}, closed-form gamma_1, gamma_2 {modular:.2e} (tol 1e-6)"
        ),
    );
    out.line("4(b)", heis < 1e-10, format!("Gaussian theta invariant under gamma_3, gamma_4, gamma_5: max relative defect {heis:.2e} (tol 1e-10)"));

    let (mut rt, mut mirror) = (0.0f64, 0.0f64);
    let mut violations = 0;
    for _ in 0..10_000 {
        let g = random_element(&mut rng);
        let r = reduce(&g).unwrap();
        rt = rt.max(r.word.apply_inverse(&r.reduced).max_diff(&g));
        let m = reduce(&g.mirror()).unwrap().reduced.max_diff(&r.reduced.mirror());
        mirror = mirror.max(m);
        if m > 1e-9 {
            violations += 1;
        }
    }
    out.line("4(c)", rt < 1e-9, format!("reduce round-trips through its word on 10^4 elements: max defect {rt:.2e} (tol 1e-9)"));
    out.line("4(d)", violations == 0, format!("mirror commutes with reduce on 10^4 elements: {violations} violations, max defect {mirror:.2e}"));

    let (h, b) = (height_h(0.0, 2.0), brute_height(0.0, 2.0));
    out.line("4(e)", h == b, format!("H(2i) = {h:.17} vs coprime enumeration {b:.17}"));
}

fn criterion_5(out: &mut Ledger) {
    let start = Instant::now();
    let spec = SampleSpec::uniform(20_240_501, 200_000, 4096, 2f64.sqrt(), 0.0);
    let moduli = harness::endpoint_moduli(&spec).unwrap();
    let tails = harness::tails_from_moduli(&moduli, &[1.5, 2.0, 2.5]);
    for (k, row) in tails.rows.iter().enumerate() {
        let rel = row.frequency / row.theory - 1.0;
        out.line(
            &format!("5(a{})", k + 1),
            rel.abs() <= 0.2,
            format!(
                "P(|X_N(1)| > {}) = {:.4e} [{:.3e}, {:.3e}] vs 6/pi^2 R^-6 = {:.4e}: relative error {rel:+.3} (tol 0.2)",
                row.r, row.frequency, row.ci_low, row.ci_high, row.theory
            ),
        );
    }
    let m2: Vec<f64> = moduli.iter().map(|r| r * r).collect();
    let m4: Vec<f64> = m2.iter().map(|v| v * v).collect();
    let (m2, m2_se) = harness::mean_se(&m2);
    let (m4, m4_se) = harness::mean_se(&m4);
    out.line("5(b)", (0.98..=1.02).contains(&m2), format!("E|X_N(1)|^2 = {m2:.4} +- {m2_se:.4} (range [0.98, 1.02])"));
    out.line("5(c)", (1.9..=2.1).contains(&m4), format!("E|X_N(1)|^4 = {m4:.4} +- {m4_se:.4} (range [1.9, 2.1])"));

    let inc = harness::mc_increment_correlations(&spec, [(0.0, 0.25), (0.5, 1.0)]).unwrap();
    let z_re = inc.corr_re / inc.corr_re_se;
    let z_im = inc.corr_im / inc.corr_im_se;
    let z_pr = (inc.product - inc.product_target) / inc.product_se;
    out.line(
        "5(d)",
        z_re.abs() <= 3.0 && z_im.abs() <= 3.0,
        format!("E[D1 conj D2] over (0, 1/4], (1/2, 1] = {:.2e} {:+.2e}i: {z_re:+.2} SE, {z_im:+.2} SE (tol 3 SE)", inc.corr_re, inc.corr_im),
    );
    out.line(
        "5(e)",
        z_pr.abs() <= 3.0,
        format!("E|D1|^2 |D2|^2 = {:.4} vs product law {:.4}: {z_pr:+.2} SE (tol 3 SE)", inc.product, inc.product_target),
    );
    let secs = start.elapsed().as_secs_f64();
    out.line("5(time)", secs <= 300.0, format!("Monte Carlo runtime {secs:.1} s (limit about 300 s)"));
}

fn criterion_6(out: &mut Ledger) {
    let spec = SampleSpec::uniform(606, 10_000, 1, 2f64.sqrt(), 0.0);
    let r = harness::equidistribution_experiment(&spec, 16.0, &[1.0, 2.0]).unwrap();
    out.line(
        "6(a)",
        r.mirror_violations == 0 && r.reduction_failures == 0,
        format!(
            "mirror constraint on {} samples: {} violations, {} failed reductions, max defect {:.2e}",
            r.samples, r.mirror_violations, r.reduction_failures, r.max_mirror_defect
        ),
    );
    for (row, (id, tol)) in r.rows.iter().zip([("6(b)", 0.05), ("6(c)", 0.10)]) {
        let rel = row.frequency / row.target - 1.0;
        out.line(
            id,
            rel.abs() <= tol,
            format!("P(Im z' > {}) = {:.4} vs hyperbolic-area law {:.4}: relative error {rel:+.4} (tol {tol})", row.a, row.frequency, row.target),
        );
    }
}

/// Smooth driver `X(t) = (sin 2 pi t, t^2)` on a dyadic grid.
fn smooth_lift(k: u32) -> RoughLift {
    let n = 1usize << k;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let pts: Vec<_> = t.iter().map(|&s| Vector2::new((2.0 * PI * s).sin(), s * s)).collect();
    RoughLift::from_points(t, &pts).unwrap()
}

fn criterion_7(out: &mut Ledger) {
    let n = 1024usize;
    let lift = RoughLift::from_walk(&WeylWalk::new(WeylParams::new(0.3183, 0.21, -0.4), n).unwrap());
    let id = ControlledPath::identity(&lift);
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(i..=n);
        let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
        let got = rough_integral(&id, &lift, s, t).unwrap().value;
        let inc = lift.increment_idx(i, j);
        let want = lift.position(i) * inc.level1.transpose() + inc.level2;
        for a in 0..2 {
            for b in 0..2 {
                worst = worst.max((got[(a, b)] - want[(a, b)]).abs());
            }
        }
    }
    out.line("7(a)", worst < 1e-8, format!("rough integral of (X, I) = X_s (x) X_st + XX_st: max defect {worst:.2e} (tol 1e-8)"));

    // dY = Y (dX^1 + dX^2 / 2) has Y_t = Y_0 exp(X^1_t + X^2_t / 2 - ...) along a smooth driver
    let lift = smooth_lift(12);
    let f = LinearField { a: [DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 0.5)] };
    let xi = DVector::from_element(1, 0.8);
    let sol = rde_solve(&f, &xi, &lift).unwrap();
    let mut worst = 0.0f64;
    for (i, y) in sol.path.y.iter().enumerate() {
        let p = lift.position(i) - lift.position(0);
        worst = worst.max((y[0] - 0.8 * (p[0] + 0.5 * p[1]).exp()).abs());
    }
    out.line("7(b)", worst < 1e-6, format!("linear RDE with smooth driver vs exact solution at mesh 2^-12: max error {worst:.2e} (tol 1e-6)"));

    let lift = RoughLift::from_walk(&WeylWalk::new(WeylParams::new(0.4142, 0.3, 0.7), 512).unwrap());
    let xi = DVector::from_vec(vec![0.2, 0.1]);
    let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&eps| {
            let xi2 = &xi + DVector::from_vec(vec![eps, 0.0]);
            continuity_experiment(&TanhField, &xi, &xi2, &lift, &lift, 0.4).unwrap().ratio
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    out.line(
        "7(c)",
        ratios.iter().all(|r| r.is_finite()) && hi / lo < 1.5,
        format!("continuity ratio over eps = 1e-2..1e-6: [{}], spread {:.3} (bounded: finite, spread < 1.5)", shown.join(", "), hi / lo),
    );
}

fn cli_binary() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let bin = dir.join(format!("theta-rough{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-p", "theta-rough-cli", "--bin", "theta-rough"])
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .status()
            .unwrap();
        assert!(status.success(), "building the command-line binary failed");
    }
    bin
}

fn criterion_8(out: &mut Ledger) {
    let bin = cli_binary();
    let tmp = std::env::temp_dir().join(format!("theta-rough-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let cases: [&[&str]; 5] = [
        &["mc-tails", "--seed", "8", "--count", "4000", "--N", "512", "--R", "1.5,2,2.5"],
        &["mc-moments", "--seed", "8", "--count", "4000", "--N", "512"],
        &["equidist", "--seed", "8", "--count", "2000"],
        &["levy", "--seed", "8", "--count", "2000", "--N", "128"],
        &["verify", "--seed", "8"],
    ];
    let mut mismatched = Vec::new();
    let mut runs = 0;
    for (k, args) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for (threads, via_env) in [("1", false), ("2", false), ("4", false), ("3", true)] {
            let path = tmp.join(format!("{k}-{threads}.json"));
            let mut cmd = Command::new(&bin);
            cmd.args(*args).arg("-o").arg(&path).env_remove("THETA_ROUGH_THREADS");
            if via_env {
                cmd.env("THETA_ROUGH_THREADS", threads);
            } else {
                cmd.args(["--threads", threads]);
            }
            let status = cmd.output().unwrap().status;
            assert!(matches!(status.code(), Some(0 | 1)), "{args:?} --threads {threads}: {status}");
            outputs.push(std::fs::read(&path).unwrap());
            runs += 1;
        }
        if outputs.iter().any(|o| o != &outputs[0] || o.is_empty()) {
            mismatched.push(args[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    out.line(
        "8",
        mismatched.is_empty(),
        format!("{runs} runs with 1, 2, 4 threads and THETA_ROUGH_THREADS=3: byte-identical outputs, mismatches {mismatched:?}"),
    );
}

fn main() {
    let mut out = Ledger { pass: 0, fail: 0 };
    let criteria: [fn(&mut Ledger); 8] = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8];
    for run in criteria {
        run(&mut out);
    }
    println!("acceptance: {} passed, {} failed", out.pass, out.fail);
    if out.fail > 0 {
        std::process::exit(1);
    }
}
