use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::SQRT_2;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "theta-rough", version, about = "Rough path lift of quadratic Weyl sums")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true, env = "THETA_ROUGH_THREADS")]
    pub threads: Option<usize>,
    /// Write output to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One walk: a fixed seed value `x`, or `x` drawn from `--seed`.
#[derive(Args, Debug, Clone)]
pub struct WalkArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Draw `x` uniformly from [0, 1) with this seed (exclusive with --x).
    #[arg(long, conflicts_with = "x")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = SQRT_2, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long = "N", default_value_t = 4096)]
    pub n: usize,
}

/// Monte Carlo over `x` uniform on [0, 1).
#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = SQRT_2, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long = "N", default_value_t = 4096)]
    pub n: usize,
}

/// A group element in Iwasawa-Heisenberg coordinates.
#[derive(Args, Debug, Clone)]
pub struct ElementArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub xi1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub xi2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub zeta: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ThetaFn {
    Gaussian,
    GaussianQuadrature,
    Delta,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Field {
    Tanh,
    Linear,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Piecewise-linear path X_N as CSV `t,x1,x2`.
    Path {
        #[command(flatten)]
        walk: WalkArgs,
        /// Sample at M+1 uniform times instead of the grid k/N.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Rough lift (X, XX) on the grid, or its Holder seminorms as JSON.
    Lift {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = 0.45)]
        gamma: f64,
    },
    /// Exact-identity suite; exits 1 if any defect exceeds its tolerance.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
        /// Random (x, alpha, beta) triples.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Second-order window sums J, I, M, L, H, A, B over (s, t].
    Window {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Histograms of Im J_N (Levy area) and Re J_N over sampled x.
    Levy {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Theta function of a regular f at a group element, and at its reduction.
    Theta {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long, value_enum, default_value_t = ThetaFn::Gaussian)]
        f: ThetaFn,
        #[arg(long, default_value_t = 1e-12)]
        tail_eps: f64,
    },
    /// Rank-2 theta function of the triangle (s, t] against the window sum J.
    Theta2 {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Reduce a group element into the fundamental domain.
    Reduce {
        #[command(flatten)]
        element: ElementArgs,
    },
    /// Triangle decomposition: grid dumps and checks.
    Triangle {
        #[command(subcommand)]
        action: TriangleAction,
    },
    /// Tail frequencies of |X_N(1)| against (6/pi^2) R^-6.
    McTails {
        #[command(flatten)]
        sample: SampleArgs,
        /// Comma-separated thresholds.
        #[arg(long = "R", value_delimiter = ',', default_value = "2")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        rel_tol: f64,
    },
    /// Second and fourth moments and disjoint-increment statistics.
    McMoments {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 0.02)]
        tol2: f64,
        #[arg(long, default_value_t = 0.1)]
        tol4: f64,
        /// Two windows as s1,t1,s2,t2.
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1")]
        windows: Vec<f64>,
    },
    /// Reduce horocycle lifts pushed by the geodesic flow; mirror and tail checks.
    Equidist {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 16.0)]
        tau: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        a: Vec<f64>,
        /// Relative tolerances matching --a.
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
        rel_tol: Vec<f64>,
    },
    /// Solve dY = f(Y) dX driven by the theta lift.
    Rde {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, value_enum, default_value_t = Field::Tanh)]
        field: Field,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.1,-0.3")]
        xi0: Vec<f64>,
        #[arg(long, default_value_t = 0.45)]
        gamma: f64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
pub enum TriangleAction {
    /// CSV `w1,w2,piece_tag,value` over an (n+1)^2 grid of [lo, hi]^2.
    Dump {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        hi: f64,
    },
    /// Partition identity, perimeter collar and smooth-remainder regularity.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
}
