use anyhow::{bail, Result};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};
use std::io::Write;

use theta_rough::fmt_f64;
use theta_rough::harness::{self, Claim, SampleSpec};
use theta_rough::jacobi::{height_h, reduce, theta2_direct, theta_regular, GroupElement, RegularFunction};
use theta_rough::roughcalc::{continuity_experiment, rde_self_convergence, rde_solve, LinearField, TanhField, VectorField};
use theta_rough::roughpath::{holder_seminorms, RoughLift};
use theta_rough::triangle::{self, Tag};
use theta_rough::weyl::{WeylParams, WeylWalk};

use crate::args::{Cli, Command, ElementArgs, Field, Format, SampleArgs, ThetaFn, TriangleAction, WalkArgs};
use crate::output::{c, m2, report, sink, write_json};
use crate::verify;

/// A usage error detected after argument parsing (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn walk_params(w: &WalkArgs) -> Result<WeylParams> {
    let x = match w.x {
        Some(x) => x,
        None => SampleSpec::uniform(w.seed.unwrap_or(1), 1, w.n.max(1), w.alpha, w.beta).sample_x(0)?,
    };
    Ok(WeylParams::new(x, w.alpha, w.beta))
}

fn walk_echo(w: &WalkArgs, p: &WeylParams) -> Value {
    json!({ "x": p.x, "seed": w.seed, "alpha": w.alpha, "beta": w.beta, "N": w.n })
}

fn sample_spec(s: &SampleArgs, default_count: usize) -> SampleSpec {
    SampleSpec::uniform(s.seed, s.count.unwrap_or(default_count), s.n, s.alpha, s.beta)
}

fn sample_echo(spec: &SampleSpec) -> Value {
    json!({ "seed": spec.seed, "count": spec.count, "N": spec.n, "alpha": spec.alpha, "beta": spec.beta, "distribution": "uniform[0,1)" })
}

fn element(e: &ElementArgs) -> Result<GroupElement> {
    if !(e.y > 0.0) {
        return usage("--y must be positive");
    }
    Ok(GroupElement::new(e.x, e.y, e.phi, e.xi1, e.xi2, e.zeta))
}

fn element_json(g: &GroupElement) -> Value {
    json!({ "x": g.x, "y": g.y, "phi": g.phi, "xi1": g.xi1, "xi2": g.xi2, "zeta": g.zeta })
}

/// Grid index of `s` on the grid `k / n`.
fn grid_index(s: f64, n: usize) -> Result<usize> {
    let v = s * n as f64;
    let k = v.round();
    if !(0.0..=n as f64).contains(&k) || (v - k).abs() > 1e-9 {
        return usage(format!("{s} is not a grid point k/N with N = {n}"));
    }
    Ok(k as usize)
}

fn window(s: f64, t: f64, n: usize) -> Result<(usize, usize)> {
    let (m, k) = (grid_index(s, n)?, grid_index(t, n)?);
    if m >= k {
        return usage("need s < t");
    }
    Ok((m, k))
}

fn claims_pass(claims: &[Claim]) -> bool {
    claims.iter().all(|c| c.pass)
}

pub fn run(cli: Cli) -> Result<bool> {
    let threads = cli.threads;
    if threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    let mut out = sink(cli.output.as_deref())?;
    let ok = harness::run_with_threads(threads, || dispatch(cli.command, &mut *out))??;
    out.flush()?;
    Ok(ok)
}

fn dispatch(cmd: Command, out: &mut (dyn Write + Send)) -> Result<bool> {
    match cmd {
        Command::Path { walk, points } => {
            let p = walk_params(&walk)?;
            let w = WeylWalk::new(p, walk.n)?;
            writeln!(out, "t,x1,x2")?;
            let m = points.unwrap_or(walk.n);
            if m == 0 {
                return usage("--points must be at least 1");
            }
            for k in 0..=m {
                let (t, v) = match points {
                    None => (k as f64 / walk.n as f64, w.grid_value(k)),
                    Some(_) => {
                        let t = k as f64 / m as f64;
                        (t, w.path_value(t)?)
                    }
                };
                writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(v[0]), fmt_f64(v[1]))?;
            }
            Ok(true)
        }
        Command::Lift { walk, format, gamma } => {
            let p = walk_params(&walk)?;
            let lift = RoughLift::from_walk(&WeylWalk::new(p, walk.n)?);
            match format {
                Format::Csv => lift.write_csv(&mut *out)?,
                Format::Json => {
                    let h = holder_seminorms(&lift, gamma)?;
                    let mut echo = walk_echo(&walk, &p);
                    echo["gamma"] = json!(gamma);
                    write_json(out, report("lift", echo, json!({ "holder": h })))?;
                }
            }
            Ok(true)
        }
        Command::Verify { seed, n, samples } => {
            let checks = verify::run(seed, n, samples)?;
            let pass = checks.iter().all(|c| c.pass);
            let body = json!({ "checks": checks, "pass": pass });
            write_json(out, report("verify", json!({ "seed": seed, "N": n, "samples": samples }), body))?;
            Ok(pass)
        }
        Command::Window { walk, s, t } => {
            let p = walk_params(&walk)?;
            let w = WeylWalk::new(p, walk.n)?;
            let (m, k) = window(s, t, walk.n)?;
            let ws = w.window_sums(m, k)?;
            let body = json!({
                "m": m, "n": k,
                "J": c(ws.j), "I": c(ws.i), "M": c(ws.m_sum), "L": c(ws.l),
                "H_plus": c(ws.h_plus), "H_minus": c(ws.h_minus),
                "A": m2(&ws.a), "B": m2(&ws.b),
                "level2_grid": m2(&w.iterated_integral_grid(m, k)?),
                "level2_continuous": m2(&w.iterated_integral_continuous(s, t)?),
                "levy_area": w.levy_area(m, k)?,
                "square_defect": ws.square_defect(),
            });
            let mut echo = walk_echo(&walk, &p);
            echo["s"] = json!(s);
            echo["t"] = json!(t);
            write_json(out, report("window", echo, body))?;
            Ok(true)
        }
        Command::Levy { sample, bins, format } => {
            let spec = sample_spec(&sample, 10_000);
            let r = harness::levy_histograms(&spec, bins)?;
            let pass = r.re_identity_defect < 1e-10 && (r.im_positive - 0.5).abs() < 3.0 * r.im_positive_se;
            match format {
                Format::Csv => {
                    writeln!(out, "part,bin_left,bin_right,count")?;
                    for (part, h) in [("im", &r.im_hist), ("re", &r.re_hist)] {
                        for (lo, hi, n) in &h.bins {
                            writeln!(out, "{part},{},{},{n}", fmt_f64(*lo), fmt_f64(*hi))?;
                        }
                    }
                }
                Format::Json => {
                    let mut echo = sample_echo(&spec);
                    echo["bins"] = json!(bins);
                    write_json(out, report("levy", echo, json!({ "report": r, "pass": pass })))?;
                }
            }
            Ok(pass)
        }
        Command::Theta { element: e, f, tail_eps } => {
            let g = element(&e)?;
            let func = match f {
                ThetaFn::Gaussian => RegularFunction::gaussian(),
                ThetaFn::GaussianQuadrature => RegularFunction::gaussian_quadrature(),
                ThetaFn::Delta => triangle::delta_regular_measured()?,
            };
            let v = theta_regular(&func, &g, tail_eps)?;
            let red = reduce(&g)?;
            let vr = theta_regular(&func, &red.reduced, tail_eps)?;
            let body = json!({
                "value": c(v),
                "reduced": element_json(&red.reduced),
                "value_at_reduced": c(vr),
                "invariance_defect": (v - vr).norm() / v.norm().max(1.0),
            });
            let mut echo = element_json(&g);
            echo["f"] = json!(func.name());
            echo["tail_eps"] = json!(tail_eps);
            write_json(out, report("theta", echo, body))?;
            Ok(true)
        }
        Command::Theta2 { walk, s, t } => {
            let p = walk_params(&walk)?;
            let w = WeylWalk::new(p, walk.n)?;
            let (m, k) = window(s, t, walk.n)?;
            let y = 1.0 / (walk.n as f64).powi(2);
            let cf = p.linear_coeff();
            let g1 = GroupElement::horocycle_lift(-p.x, y, -cf);
            let g2 = GroupElement::horocycle_lift(p.x, y, cf);
            let th = theta2_direct(&|a, b| triangle::triangle_indicator(s, t, a, b), [(s, t), (s, t)], &g1, &g2)?;
            let j = w.window_sums(m, k)?.j;
            let mut echo = walk_echo(&walk, &p);
            echo["s"] = json!(s);
            echo["t"] = json!(t);
            let body = json!({ "theta2": c(th), "J": c(j), "defect": (th - j).norm(), "g1": element_json(&g1), "g2": element_json(&g2) });
            write_json(out, report("theta2", echo, body))?;
            Ok(true)
        }
        Command::Reduce { element: e } => {
            let g = element(&e)?;
            let r = reduce(&g)?;
            let back = r.word.apply_inverse(&r.reduced);
            let body = json!({
                "reduced": element_json(&r.reduced),
                "word": r.word.steps.iter().map(|(g, k)| json!([format!("{g:?}"), k])).collect::<Vec<_>>(),
                "letters": r.word.letters(),
                "iterations": r.iterations,
                "roundtrip_defect": back.max_diff(&g),
                "height": height_h(g.x, g.y),
                "height_reduced": height_h(r.reduced.x, r.reduced.y),
            });
            write_json(out, report("reduce", element_json(&g), body))?;
            Ok(true)
        }
        Command::Triangle { action } => triangle_cmd(action, out),
        Command::McTails { sample, r, rel_tol } => {
            let spec = sample_spec(&sample, 200_000);
            if r.is_empty() {
                return usage("--R needs at least one value");
            }
            let rep = harness::mc_tails(&spec, &r)?;
            let claims = rep.claims(&spec, rel_tol);
            let pass = claims_pass(&claims);
            let mut echo = sample_echo(&spec);
            echo["R"] = json!(r);
            echo["rel_tol"] = json!(rel_tol);
            write_json(out, report("mc-tails", echo, json!({ "report": rep, "claims": claims, "pass": pass })))?;
            Ok(pass)
        }
        Command::McMoments { sample, tol2, tol4, windows } => {
            let spec = sample_spec(&sample, 200_000);
            let [s1, t1, s2, t2] = windows[..] else {
                return usage("--windows takes four values s1,t1,s2,t2");
            };
            let mom = harness::mc_moments(&spec)?;
            let inc = harness::mc_increment_correlations(&spec, [(s1, t1), (s2, t2)])?;
            let mut claims = mom.claims(&spec, tol2, tol4);
            claims.extend(increment_claims(&spec, &inc));
            let pass = claims_pass(&claims);
            let mut echo = sample_echo(&spec);
            echo["tol2"] = json!(tol2);
            echo["tol4"] = json!(tol4);
            echo["windows"] = json!(windows);
            write_json(out, report("mc-moments", echo, json!({ "moments": mom, "increments": inc, "claims": claims, "pass": pass })))?;
            Ok(pass)
        }
        Command::Equidist { sample, tau, a, rel_tol } => {
            let spec = sample_spec(&sample, 10_000);
            if a.len() != rel_tol.len() {
                return usage("--a and --rel-tol need the same number of values");
            }
            let rep = harness::equidistribution_experiment(&spec, tau, &a)?;
            let mut params = std::collections::BTreeMap::new();
            params.insert("tau".to_string(), tau);
            params.insert("seed".to_string(), spec.seed as f64);
            params.insert("count".to_string(), spec.count as f64);
            let mut claims = vec![Claim {
                claim: "mirror constraint holds for every sample".into(),
                parameters: params.clone(),
                estimate: (rep.mirror_violations + rep.reduction_failures) as f64,
                stderr: 0.0,
                target: 0.0,
                pass: rep.mirror_violations == 0 && rep.reduction_failures == 0,
            }];
            for (row, tol) in rep.rows.iter().zip(&rel_tol) {
                let mut p = params.clone();
                p.insert("a".into(), row.a);
                p.insert("rel_tol".into(), *tol);
                claims.push(Claim {
                    claim: "P(Im z' > a) = 3 / (pi a)".into(),
                    parameters: p,
                    estimate: row.frequency,
                    stderr: (row.frequency * (1.0 - row.frequency) / rep.samples as f64).sqrt(),
                    target: row.target,
                    pass: ((row.frequency - row.target) / row.target).abs() <= *tol,
                });
            }
            let pass = claims_pass(&claims);
            let mut echo = sample_echo(&spec);
            echo["tau"] = json!(tau);
            echo["a"] = json!(a);
            echo["rel_tol"] = json!(rel_tol);
            write_json(out, report("equidist", echo, json!({ "report": rep, "claims": claims, "pass": pass })))?;
            Ok(pass)
        }
        Command::Rde { walk, field, xi0, gamma, levels, format } => rde_cmd(walk, field, xi0, gamma, levels, format, out),
    }
}

fn increment_claims(spec: &SampleSpec, inc: &harness::IncrementReport) -> Vec<Claim> {
    let mut p = std::collections::BTreeMap::new();
    p.insert("seed".to_string(), spec.seed as f64);
    p.insert("count".to_string(), spec.count as f64);
    p.insert("N".to_string(), spec.n as f64);
    for (k, (s, t)) in inc.windows.iter().enumerate() {
        p.insert(format!("s{}", k + 1), *s);
        p.insert(format!("t{}", k + 1), *t);
    }
    let within = |est: f64, se: f64, target: f64| (est - target).abs() <= 3.0 * se;
    vec![
        Claim {
            claim: "Re E[D1 conj(D2)] = 0".into(),
            parameters: p.clone(),
            estimate: inc.corr_re,
            stderr: inc.corr_re_se,
            target: 0.0,
            pass: within(inc.corr_re, inc.corr_re_se, 0.0),
        },
        Claim {
            claim: "Im E[D1 conj(D2)] = 0".into(),
            parameters: p.clone(),
            estimate: inc.corr_im,
            stderr: inc.corr_im_se,
            target: 0.0,
            pass: within(inc.corr_im, inc.corr_im_se, 0.0),
        },
        Claim {
            claim: "E|D1|^2 |D2|^2 = (t1 - s1)(t2 - s2)".into(),
            parameters: p,
            estimate: inc.product,
            stderr: inc.product_se,
            target: inc.product_target,
            pass: within(inc.product, inc.product_se, inc.product_target),
        },
    ]
}

fn triangle_cmd(action: TriangleAction, out: &mut dyn Write) -> Result<bool> {
    match action {
        TriangleAction::Dump { n, lo, hi } => {
            if n == 0 || !(lo < hi) {
                return usage("need n >= 1 and lo < hi");
            }
            writeln!(out, "w1,w2,piece_tag,value")?;
            for (w1, w2, tag, v) in triangle::dump_grid(n, lo, hi) {
                writeln!(out, "{},{},{},{}", fmt_f64(w1), fmt_f64(w2), tag.name(), fmt_f64(v))?;
            }
            Ok(true)
        }
        TriangleAction::Check { seed, count } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut partition = 0.0f64;
            for _ in 0..count {
                let (w1, w2) = (rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
                partition = partition.max(triangle::partition_defect(w1, w2).abs());
            }
            let collar: Vec<Value> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
                .iter()
                .map(|&d| {
                    let mut worst = 0.0f64;
                    for _ in 0..count {
                        let u: f64 = rng.gen_range(0.02..0.98);
                        let r: f64 = rng.gen_range(0.0..d);
                        let (w1, w2) = match rng.gen_range(0..3) {
                            0 => (r, u),
                            1 => (u, 1.0 - r),
                            _ => (u - r / std::f64::consts::SQRT_2, u + r / std::f64::consts::SQRT_2),
                        };
                        if 0.0 < w1 && w1 < w2 && w2 < 1.0 && w1 != 0.5 && w2 != 0.5 && w2 - w1 != 0.5 {
                            worst = worst.max((triangle::six_piece_sum(w1, w2) - 1.0).abs());
                        }
                    }
                    json!({ "width": d, "max_six_piece_defect": worst })
                })
                .collect();
            let reg = triangle::smooth_remainder_regularity(200, 1e-3, 1e-4);
            let pass = partition <= 1e-12 && reg.non_finite == 0;
            let tags: Vec<&str> = Tag::ALL.iter().map(|t| t.name()).collect();
            let body = json!({ "pieces": tags, "partition_max_defect": partition, "collar": collar, "regularity": reg, "pass": pass });
            write_json(out, report("triangle check", json!({ "seed": seed, "count": count }), body))?;
            Ok(pass)
        }
    }
}

fn rde_cmd(walk: WalkArgs, field: Field, xi0: Vec<f64>, gamma: f64, levels: usize, format: Format, out: &mut dyn Write) -> Result<bool> {
    let p = walk_params(&walk)?;
    let lift = RoughLift::from_walk(&WeylWalk::new(p, walk.n)?);
    let vf: Box<dyn VectorField> = match field {
        Field::Tanh => Box::new(TanhField),
        Field::Linear => Box::new(LinearField {
            a: [DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]), DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, -0.2])],
        }),
    };
    if xi0.len() != vf.dim() {
        bail!(Usage(format!("--xi0 needs {} values", vf.dim())));
    }
    let xi = DVector::from_vec(xi0.clone());
    let sol = rde_solve(vf.as_ref(), &xi, &lift)?;
    match format {
        Format::Csv => {
            writeln!(out, "t,y1,y2")?;
            for (t, y) in sol.path.times.iter().zip(&sol.path.y) {
                writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(y[0]), fmt_f64(y[1]))?;
            }
            Ok(true)
        }
        Format::Json => {
            let conv = rde_self_convergence(vf.as_ref(), &xi, &lift, levels).ok();
            let sweep: Vec<Value> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
                .iter()
                .map(|&eps| {
                    let xi2 = &xi + DVector::from_element(xi.len(), eps);
                    continuity_experiment(vf.as_ref(), &xi, &xi2, &lift, &lift, gamma).map(|r| json!({ "eps": eps, "report": r }))
                })
                .collect::<theta_rough::Result<_>>()?;
            let ratios: Vec<f64> = sweep.iter().filter_map(|v| v["report"]["ratio"].as_f64()).collect();
            let bounded = ratios.len() == 5 && ratios.iter().all(|r| r.is_finite());
            let last = sol.path.y.last().expect("nonempty");
            let body = json!({
                "final": last.iter().copied().collect::<Vec<f64>>(),
                "halving_diff": sol.halving_diff,
                "remainder_seminorm": sol.path.remainder_seminorm(&lift, gamma)?,
                "self_convergence": conv.map(|(d, o)| json!({ "diffs": d, "order": o })),
                "continuity": sweep,
                "pass": bounded,
            });
            let mut echo = walk_echo(&walk, &p);
            echo["field"] = json!(format!("{field:?}").to_lowercase());
            echo["xi0"] = json!(xi0);
            echo["gamma"] = json!(gamma);
            echo["levels"] = json!(levels);
            write_json(out, report("rde", echo, body))?;
            Ok(bounded)
        }
    }
}
