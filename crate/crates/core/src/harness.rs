//! Monte Carlo harness: seeded sampling of the seed `x`, estimators for the
//! moment, tail and increment laws of `X_N`, the equidistribution experiment
//! and the Levy-area histograms.
//!
//! Every sample draws from its own ChaCha8 stream keyed by `(seed, index)`;
//! samples are computed in parallel and reduced sequentially in index order,
//! so results do not depend on the thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::jacobi::{reduce, GroupElement};
use crate::weyl::{theta_sum, WeylParams, WeylWalk};

/// Distribution of the seed `x`.
#[derive(Clone)]
pub enum Distribution {
    Uniform {
        a: f64,
        b: f64,
    },
    /// Rejection sampling from `[a, b] x [0, bound]`; `bound` must dominate
    /// the density.
    Density {
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        a: f64,
        b: f64,
        bound: f64,
    },
    /// Midpoints of `count` equal cells of `[a, b]` (exhaustive mode).
    Grid {
        a: f64,
        b: f64,
    },
}

impl std::fmt::Debug for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distribution::Uniform { a, b } => write!(f, "Uniform[{a}, {b}]"),
            Distribution::Density { a, b, bound, .. } => write!(f, "Density[{a}, {b}] (bound {bound})"),
            Distribution::Grid { a, b } => write!(f, "Grid[{a}, {b}]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub distribution: Distribution,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Rejection attempts per sample before giving up.
pub const MAX_REJECTIONS: usize = 1_000_000;

impl SampleSpec {
    pub fn uniform(seed: u64, count: usize, n: usize, alpha: f64, beta: f64) -> Self {
        Self { seed, count, distribution: Distribution::Uniform { a: 0.0, b: 1.0 }, n, alpha, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return invalid("sample count must be at least 1");
        }
        if self.n == 0 {
            return invalid("walk length N must be at least 1");
        }
        let (a, b) = match &self.distribution {
            Distribution::Uniform { a, b } | Distribution::Grid { a, b } => (*a, *b),
            Distribution::Density { a, b, bound, .. } => {
                if !(*bound > 0.0 && bound.is_finite()) {
                    return invalid("density bound must be positive and finite");
                }
                (*a, *b)
            }
        };
        if !(a < b && a.is_finite() && b.is_finite()) {
            return invalid("sampling interval must be finite with a < b");
        }
        Ok(())
    }

    /// The `i`-th seed value.
    pub fn sample_x(&self, i: usize) -> Result<f64> {
        match &self.distribution {
            Distribution::Grid { a, b } => Ok(a + (b - a) * (i as f64 + 0.5) / self.count as f64),
            Distribution::Uniform { a, b } => {
                let mut rng = stream(self.seed, i);
                Ok(a + (b - a) * rng.gen::<f64>())
            }
            Distribution::Density { density, a, b, bound } => {
                let mut rng = stream(self.seed, i);
                for _ in 0..MAX_REJECTIONS {
                    let x = a + (b - a) * rng.gen::<f64>();
                    let u = bound * rng.gen::<f64>();
                    let d = density(x);
                    if d < 0.0 || d > *bound {
                        return invalid(format!("density value {d} at {x} outside [0, bound]"));
                    }
                    if u < d {
                        return Ok(x);
                    }
                }
                invalid("rejection sampler exhausted its attempts")
            }
        }
    }

    pub fn params(&self, x: f64) -> WeylParams {
        WeylParams::new(x, self.alpha, self.beta)
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        p.insert("seed".into(), self.seed as f64);
        p.insert("count".into(), self.count as f64);
        p.insert("N".into(), self.n as f64);
        p.insert("alpha".into(), self.alpha);
        p.insert("beta".into(), self.beta);
        p
    }
}

fn stream(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Map every sample index in parallel, collecting in index order.
pub fn map_samples<T: Send>(spec: &SampleSpec, f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    spec.validate()?;
    (0..spec.count).into_par_iter().map(|i| f(spec.sample_x(i)?)).collect()
}

/// Run `f` on a dedicated pool of `threads` workers (or the global pool).
pub fn run_with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => invalid("thread count must be at least 1"),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// One checked claim, in the common report schema.
#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub claim: String,
    pub parameters: BTreeMap<String, f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub pass: bool,
}

/// Wilson score interval at `z` standard errors.
pub fn wilson(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let den = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `(mean, standard error)` of a sample.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `(6 / pi^2) R^-6`.
pub fn tail_law(r: f64) -> f64 {
    6.0 / (PI * PI) * r.powi(-6)
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub r: f64,
    pub exceed: usize,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub theory: f64,
    /// `frequency / theory - 1`
    pub relative_error: f64,
    /// No sample exceeded `R`.
    pub zero_count: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub samples: usize,
    pub rows: Vec<TailRow>,
}

/// `|X_N(1)| = |S_N| / sqrt(N)` for every sample.
pub fn endpoint_moduli(spec: &SampleSpec) -> Result<Vec<f64>> {
    let n = spec.n;
    let scale = 1.0 / (n as f64).sqrt();
    map_samples(spec, |x| Ok(theta_sum(&spec.params(x), n).norm() * scale))
}

/// Empirical `P(|X_N(1)| > R)` against `(6 / pi^2) R^-6`, with 95% Wilson
/// intervals.
pub fn mc_tails(spec: &SampleSpec, rs: &[f64]) -> Result<TailReport> {
    let moduli = endpoint_moduli(spec)?;
    Ok(tails_from_moduli(&moduli, rs))
}

pub fn tails_from_moduli(moduli: &[f64], rs: &[f64]) -> TailReport {
    let n = moduli.len();
    let rows = rs
        .iter()
        .map(|&r| {
            let exceed = moduli.iter().filter(|&&m| m > r).count();
            let frequency = exceed as f64 / n as f64;
            let (ci_low, ci_high) = wilson(exceed, n, 1.96);
            let theory = tail_law(r);
            TailRow { r, exceed, frequency, ci_low, ci_high, theory, relative_error: frequency / theory - 1.0, zero_count: exceed == 0 }
        })
        .collect();
    TailReport { samples: n, rows }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentsReport {
    pub samples: usize,
    pub m2: f64,
    pub m2_se: f64,
    pub m4: f64,
    pub m4_se: f64,
    /// `E[X^1 X^2]`
    pub cross: f64,
    pub cross_se: f64,
}

/// Second and fourth moments of `|X_N(1)|` and the component covariance.
pub fn mc_moments(spec: &SampleSpec) -> Result<MomentsReport> {
    let n = spec.n;
    let scale = 1.0 / (n as f64).sqrt();
    let ends = map_samples(spec, |x| Ok(theta_sum(&spec.params(x), n) * scale))?;
    let m2: Vec<f64> = ends.iter().map(|z| z.norm_sqr()).collect();
    let m4: Vec<f64> = m2.iter().map(|v| v * v).collect();
    let cross: Vec<f64> = ends.iter().map(|z| z.re * z.im).collect();
    let (m2, m2_se) = mean_se(&m2);
    let (m4, m4_se) = mean_se(&m4);
    let (cross, cross_se) = mean_se(&cross);
    Ok(MomentsReport { samples: ends.len(), m2, m2_se, m4, m4_se, cross, cross_se })
}

#[derive(Clone, Debug, Serialize)]
pub struct IncrementReport {
    pub samples: usize,
    pub windows: [(f64, f64); 2],
    /// `E[D1 conj(D2)]`, real and imaginary parts.
    pub corr_re: f64,
    pub corr_re_se: f64,
    pub corr_im: f64,
    pub corr_im_se: f64,
    /// `E[|D1|^2 |D2|^2]` and its target `(t1 - s1)(t2 - s2)`.
    pub product: f64,
    pub product_se: f64,
    pub product_target: f64,
    /// `E|D1|^2` and its target `t1 - s1`.
    pub first_second_moment: f64,
    pub first_second_moment_se: f64,
}

/// Increments `D_i = X_N(t_i) - X_N(s_i)` over two windows.
pub fn mc_increment_correlations(spec: &SampleSpec, windows: [(f64, f64); 2]) -> Result<IncrementReport> {
    for &(s, t) in &windows {
        if !(0.0 <= s && s < t && t <= 1.0) {
            return invalid(format!("window ({s}, {t}) must satisfy 0 <= s < t <= 1"));
        }
    }
    let n = spec.n;
    let incs = map_samples(spec, |x| {
        let walk = WeylWalk::new(spec.params(x), n)?;
        let d = |(s, t): (f64, f64)| -> Result<Complex64> {
            let v = walk.path_value(t)? - walk.path_value(s)?;
            Ok(Complex64::new(v[0], v[1]))
        };
        Ok((d(windows[0])?, d(windows[1])?))
    })?;
    let c: Vec<Complex64> = incs.iter().map(|(a, b)| a * b.conj()).collect();
    let (corr_re, corr_re_se) = mean_se(&c.iter().map(|z| z.re).collect::<Vec<_>>());
    let (corr_im, corr_im_se) = mean_se(&c.iter().map(|z| z.im).collect::<Vec<_>>());
    let (product, product_se) = mean_se(&incs.iter().map(|(a, b)| a.norm_sqr() * b.norm_sqr()).collect::<Vec<_>>());
    let (first_second_moment, first_second_moment_se) = mean_se(&incs.iter().map(|(a, _)| a.norm_sqr()).collect::<Vec<_>>());
    Ok(IncrementReport {
        samples: incs.len(),
        windows,
        corr_re,
        corr_re_se,
        corr_im,
        corr_im_se,
        product,
        product_se,
        product_target: (windows[0].1 - windows[0].0) * (windows[1].1 - windows[1].0),
        first_second_moment,
        first_second_moment_se,
    })
}

/// `P(Im z > a)` for `z` uniform in the modular surface: `3 / (pi a)`, `a >= 1`.
pub fn hyperbolic_tail(a: f64) -> f64 {
    3.0 / (PI * a)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistRow {
    pub a: f64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub target: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistReport {
    pub samples: usize,
    pub tau: f64,
    pub reduction_failures: usize,
    pub mirror_violations: usize,
    pub max_mirror_defect: f64,
    pub max_iterations: usize,
    pub rows: Vec<EquidistRow>,
}

/// Tolerance of the mirror constraint between the two reduced lifts.
pub const MIRROR_TOL: f64 = 1e-9;

/// Reduce the horocycle lifts `(+-x + i e^{-tau}, 0; (+-(alpha + beta x), 0), 0)`
/// of every sample, check the mirror constraint, and tabulate `P(Im z' > a)`.
pub fn equidistribution_experiment(spec: &SampleSpec, tau: f64, a_list: &[f64]) -> Result<EquidistReport> {
    if !(tau > 0.0) {
        return invalid("tau must be positive");
    }
    let y = (-tau).exp();
    let outcomes = map_samples(spec, |x| {
        let c = spec.alpha + spec.beta * x;
        let g = GroupElement::horocycle_lift(x, y, c);
        let m = GroupElement::horocycle_lift(-x, y, -c);
        Ok(match (reduce(&g), reduce(&m)) {
            (Ok(r), Ok(rm)) => Some((r.reduced.y, rm.reduced.max_diff(&r.reduced.mirror()), r.iterations)),
            _ => None,
        })
    })?;
    let mut ys = Vec::with_capacity(outcomes.len());
    let (mut failures, mut violations, mut max_defect, mut max_it) = (0, 0, 0.0f64, 0);
    for o in &outcomes {
        match o {
            None => failures += 1,
            Some((yr, d, it)) => {
                ys.push(*yr);
                max_defect = max_defect.max(*d);
                max_it = max_it.max(*it);
                if *d > MIRROR_TOL {
                    violations += 1;
                }
            }
        }
    }
    let rows = a_list
        .iter()
        .map(|&a| {
            let k = ys.iter().filter(|&&v| v > a).count();
            let (ci_low, ci_high) = wilson(k, ys.len().max(1), 1.96);
            EquidistRow { a, frequency: k as f64 / ys.len().max(1) as f64, ci_low, ci_high, target: hyperbolic_tail(a) }
        })
        .collect();
    Ok(EquidistReport {
        samples: outcomes.len(),
        tau,
        reduction_failures: failures,
        mirror_violations: violations,
        max_mirror_defect: max_defect,
        max_iterations: max_it,
        rows,
    })
}

/// `bin_left, bin_right, count` rows.
#[derive(Clone, Debug, Serialize)]
pub struct Histogram {
    pub bins: Vec<(f64, f64, usize)>,
}

impl Histogram {
    pub fn build(values: &[f64], lo: f64, hi: f64, nbins: usize) -> Self {
        let w = (hi - lo) / nbins as f64;
        let mut counts = vec![0usize; nbins];
        for &v in values {
            let k = (((v - lo) / w).floor() as isize).clamp(0, nbins as isize - 1) as usize;
            counts[k] += 1;
        }
        Self { bins: counts.into_iter().enumerate().map(|(k, c)| (lo + w * k as f64, lo + w * (k + 1) as f64, c)).collect() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevyReport {
    pub samples: usize,
    /// Histogram of `Im J_N = XX^{12} - XX^{21}` over `[0, 1]`.
    pub im_hist: Histogram,
    /// Histogram of `Re J_N`.
    pub re_hist: Histogram,
    pub re_min: f64,
    pub re_max: f64,
    /// Largest `|Re J_N + 1/2 - |X_N(1)|^2|` (the identity as literally stated).
    pub re_literal_defect: f64,
    /// Largest `|Re J_N + 1/2 - |X_N(1)|^2 / 2|`.
    pub re_identity_defect: f64,
    /// Sample skewness of `Im J_N` with the normal-theory error `sqrt(6 / n)`.
    /// The area tail decays like `a^-3`, so this statistic is dominated by a
    /// few extreme samples and is reported, not tested.
    pub im_skewness: f64,
    pub im_skewness_se: f64,
    /// Fraction of samples with `Im J_N > 0` and its binomial standard error;
    /// the symmetry check of the imaginary-part histogram.
    pub im_positive: f64,
    pub im_positive_se: f64,
}

/// Per-sample `J_N = (1/N) sum_{k<l} conj(z_k) z_l` over `(0, 1]` and the
/// histograms of its real and imaginary parts.
pub fn levy_histograms(spec: &SampleSpec, nbins: usize) -> Result<LevyReport> {
    if nbins == 0 {
        return invalid("need at least one bin");
    }
    let n = spec.n;
    let vals = map_samples(spec, |x| {
        let w = WeylWalk::new(spec.params(x), n)?;
        let s = w.window_sums(0, n)?;
        Ok((s.j, s.l.norm_sqr()))
    })?;
    let re: Vec<f64> = vals.iter().map(|v| v.0.re).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.0.im).collect();
    let lit = vals.iter().map(|(j, x2)| (j.re + 0.5 - x2).abs()).fold(0.0, f64::max);
    let cor = vals.iter().map(|(j, x2)| (j.re + 0.5 - 0.5 * x2).abs()).fold(0.0, f64::max);
    let re_min = re.iter().copied().fold(f64::INFINITY, f64::min);
    let re_max = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let im_abs = im.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let (skew, skew_se) = skewness(&im);
    let im_positive = im.iter().filter(|&&v| v > 0.0).count() as f64 / im.len() as f64;
    Ok(LevyReport {
        samples: vals.len(),
        im_hist: Histogram::build(&im, -im_abs, im_abs, nbins),
        re_hist: Histogram::build(&re, -0.5, (n as f64 - 1.0) / 2.0, nbins),
        re_min,
        re_max,
        re_literal_defect: lit,
        re_identity_defect: cor,
        im_skewness: skew,
        im_skewness_se: skew_se,
        im_positive,
        im_positive_se: (0.25 / im.len() as f64).sqrt(),
    })
}

/// Sample skewness and its large-sample standard error `sqrt(6 / n)`.
pub fn skewness(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), (6.0 / n).sqrt())
}

impl TailReport {
    /// Claims "frequency within `rel_tol` of the tail law" per row.
    pub fn claims(&self, spec: &SampleSpec, rel_tol: f64) -> Vec<Claim> {
        self.rows
            .iter()
            .map(|row| {
                let mut p = spec.parameters();
                p.insert("R".into(), row.r);
                p.insert("rel_tol".into(), rel_tol);
                Claim {
                    claim: "tail P(|X_N(1)| > R) = (6/pi^2) R^-6".into(),
                    parameters: p,
                    estimate: row.frequency,
                    stderr: (row.frequency * (1.0 - row.frequency) / self.samples as f64).sqrt(),
                    target: row.theory,
                    pass: !row.zero_count && row.relative_error.abs() <= rel_tol,
                }
            })
            .collect()
    }
}

impl MomentsReport {
    /// Claims `E|X|^2` within `tol2` of 1, `E|X|^4` within `tol4` of 2, and the
    /// cross moment within 3 standard errors of 0.
    pub fn claims(&self, spec: &SampleSpec, tol2: f64, tol4: f64) -> Vec<Claim> {
        let p = spec.parameters();
        vec![
            Claim {
                claim: "E|X_N(1)|^2 = 1".into(),
                parameters: p.clone(),
                estimate: self.m2,
                stderr: self.m2_se,
                target: 1.0,
                pass: (self.m2 - 1.0).abs() <= tol2,
            },
            Claim {
                claim: "E|X_N(1)|^4 = 2".into(),
                parameters: p.clone(),
                estimate: self.m4,
                stderr: self.m4_se,
                target: 2.0,
                pass: (self.m4 - 2.0).abs() <= tol4,
            },
            Claim {
                claim: "E[X^1 X^2] = 0".into(),
                parameters: p,
                estimate: self.cross,
                stderr: self.cross_se,
                target: 0.0,
                pass: self.cross.abs() <= 3.0 * self.cross_se,
            },
        ]
    }
}
