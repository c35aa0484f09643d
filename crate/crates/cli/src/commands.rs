//! The five subcommands. Every report is JSON with a schema version field;
//! for the same inputs and seed the bytes are identical across runs, so
//! anything non-deterministic (timing) goes to stderr.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use sigkit::sample;
use sigkit::{
    group_like_report, h_map, iterated_integral_oracle, j_signature, rel_residual, signature,
    tensor_pushforward, Error, Grid, HeightedPoset, MetricScan, PiecewiseLinearPath, Result,
    SignaturePath, TruncatedTensor, Violation,
};

pub const SCHEMA_VERSION: u32 = 1;

fn read_path(input: &PathBuf) -> Result<PiecewiseLinearPath> {
    let file = File::open(input)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", input.display())))?;
    PiecewiseLinearPath::read_csv(file)
}

fn write_output(out: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => {
            let mut file = File::create(path)
                .map_err(|e| Error::Input(format!("cannot create {}: {e}", path.display())))?;
            file.write_all(text.as_bytes())
                .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
        }
        None => {
            print!("{text}");
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CheckRow {
    check: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

impl CheckRow {
    fn new(check: &str, residual: f64, tolerance: f64) -> Self {
        CheckRow {
            check: check.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Args)]
pub struct SigArgs {
    /// CSV path file (header t,x1,...,xd)
    pub input: PathBuf,
    /// Truncation level N
    #[arg(long, default_value_t = 4)]
    pub level: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_sig(args: &SigArgs) -> Result<bool> {
    let path = read_path(&args.input)?;
    let sig = signature(&path, args.level)?;
    write_output(&args.out, sig.tensor())?;
    Ok(true)
}

#[derive(Args)]
pub struct CheckArgs {
    /// CSV path file (header t,x1,...,xd)
    pub input: PathBuf,
    /// Truncation level N
    #[arg(long, default_value_t = 4)]
    pub level: usize,
    /// Residual tolerance
    #[arg(long, default_value_t = sigkit::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Seed for the random time change and linear map
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interior points per segment for the subsignature check
    #[arg(long, default_value_t = 8)]
    pub refine: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CheckReport {
    schema_version: u32,
    command: String,
    level: usize,
    tolerance: f64,
    seed: u64,
    checks: Vec<CheckRow>,
    pass: bool,
}

pub fn run_check(args: &CheckArgs) -> Result<bool> {
    let path = read_path(&args.input)?;
    let level = args.level;
    let tol = args.tol;
    let mut rng = sample::seeded(args.seed);
    let g = signature(&path, level)?;
    let unit = TruncatedTensor::unit(path.dim(), level)?;
    let mut checks = Vec::new();

    // shuffle identity
    let report = group_like_report(g.tensor());
    checks.push(CheckRow::new("group_like", report.worst_residual, tol));

    // homogeneous norm is symmetric under inversion
    let inv = g.inverse();
    let norm = g.homogeneous_norm();
    let sym = if norm > 0.0 {
        (norm - inv.homogeneous_norm()).abs() / norm
    } else {
        0.0
    };
    checks.push(CheckRow::new("norm_symmetry", sym, tol));

    // the antipode inverts level by level
    checks.push(CheckRow::new(
        "antipode_inverse",
        rel_residual(&g.tensor().antipode(), inv.tensor())?,
        tol,
    ));

    // reversal gives the group inverse
    let rev = signature(&path.reverse(), level)?;
    checks.push(CheckRow::new(
        "reversal_inverse",
        rel_residual(g.mul(&rev)?.tensor(), &unit)?,
        tol,
    ));

    // reparametrization leaves the signature unchanged
    let sigma = sample::random_time_map(&mut rng, path.start_time(), path.end_time());
    let reparam = signature(&path.reparametrize(&sigma)?, level)?;
    checks.push(CheckRow::new(
        "reparametrization_invariance",
        rel_residual(reparam.tensor(), g.tensor())?,
        tol,
    ));

    // pushing forward the path and the signature commute
    let out_dim = path.dim().saturating_sub(1).max(1);
    let phi = sample::random_linear_map(&mut rng, out_dim, path.dim());
    let lhs = signature(&path.pushforward(&phi)?, level)?;
    let rhs = tensor_pushforward(g.tensor(), &phi)?;
    checks.push(CheckRow::new(
        "linear_pushforward",
        rel_residual(lhs.tensor(), &rhs)?,
        tol,
    ));

    // subsignatures multiply over interior grid points
    let sp = SignaturePath::new(path.clone(), level)?;
    let grid = Grid::refine(&path, args.refine.max(1))?;
    let mut worst = 0.0f64;
    let times = grid.times();
    for w in times.windows(3).step_by(2.max(times.len() / 16)) {
        let lhs = sp
            .subsignature(w[0], w[1])?
            .mul(&sp.subsignature(w[1], w[2])?)?;
        let rhs = sp.subsignature(w[0], w[2])?;
        worst = worst.max(rel_residual(lhs.tensor(), rhs.tensor())?);
    }
    checks.push(CheckRow::new("subsignature_chen", worst, tol));

    let pass = checks.iter().all(|c| c.pass);
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        command: "check".to_string(),
        level,
        tolerance: tol,
        seed: args.seed,
        checks,
        pass,
    };
    write_output(&args.out, &report)?;
    Ok(pass)
}

#[derive(Args)]
pub struct HmapArgs {
    /// CSV path file (header t,x1,...,xd)
    pub input: PathBuf,
    /// Inner truncation level N (levels of the signature entering W)
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    /// Outer level n (depth of iterated integrals of the signature path)
    #[arg(long, default_value_t = 2)]
    pub outer: usize,
    /// Quadrature double-panels per path segment per axis
    #[arg(long, default_value_t = 64)]
    pub quad: usize,
    /// Oracle agreement tolerance
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct HmapRow {
    profile: Vec<usize>,
    oracle_residual: Option<f64>,
    chen_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_residual: Option<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct HmapReport {
    schema_version: u32,
    command: String,
    dim: usize,
    inner_level: usize,
    outer_level: usize,
    quad: usize,
    tolerance: f64,
    rows: Vec<HmapRow>,
    group_like_residual: f64,
    assembled: sigkit::WTensor,
    pass: bool,
}

pub fn run_hmap(args: &HmapArgs) -> Result<bool> {
    let started = Instant::now();
    let path = read_path(&args.input)?;
    let (inner, outer) = (args.level, args.outer);
    if inner == 0 || outer == 0 {
        return Err(Error::Input("levels must be at least 1".to_string()));
    }
    if inner > 3 || outer > 3 || path.dim() > 3 {
        return Err(Error::Capacity(format!(
            "desk-scale caps are N ≤ 3, n ≤ 3, d ≤ 3 (got N={inner}, n={outer}, d={})",
            path.dim()
        )));
    }
    let t0 = path.start_time();
    let t1 = path.end_time();
    let (s, u, t) = (t0 + (t1 - t0) / 3.0, t0 + (t1 - t0) * 2.0 / 3.0, t1);
    let trunc = inner * outer;
    let sp = SignaturePath::new(path.clone(), trunc)?;
    let x_s = sp.at(s)?;
    let x_u = sp.at(u)?;
    let y_su = sp.increment(s, u)?;
    let y_ut = sp.increment(u, t)?;
    let y_st = sp.increment(s, t)?;
    let xy = x_s.mul(&y_st)?;

    let mut rows = Vec::new();
    for len in 1..=outer {
        for profile in sigkit::profiles(inner, len) {
            let h = h_map(&profile, &x_s, &y_st)?;
            let oracle_residual = if len <= 3 {
                let oracle = iterated_integral_oracle(&path, &profile, s, t, args.quad)?;
                Some(h.max_abs_diff(&oracle)?)
            } else {
                None
            };
            // Chen splitting of the profile at every cut point
            let mut chen = vec![0.0; h.block().len()];
            for j in 0..=len {
                let left = h_map(&profile[..j], &x_s, &y_su)?;
                let right = h_map(&profile[j..], &x_u, &y_ut)?;
                for (acc, v) in chen
                    .iter_mut()
                    .zip(sigkit::outer_block(left.block(), right.block()))
                {
                    *acc += v;
                }
            }
            let chen_residual = chen
                .iter()
                .zip(h.block())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let closed_form_residual = if len == 1 {
                let i = profile[0];
                let want: Vec<f64> = xy
                    .block(i)?
                    .iter()
                    .zip(x_s.block(i)?)
                    .map(|(a, b)| a - b)
                    .collect();
                Some(
                    h.block()
                        .iter()
                        .zip(&want)
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
                )
            } else {
                None
            };
            let pass = oracle_residual.is_none_or(|r| r <= args.tol)
                && chen_residual <= args.tol
                && closed_form_residual.is_none_or(|r| r <= 1e-12);
            rows.push(HmapRow {
                profile,
                oracle_residual,
                chen_residual,
                closed_form_residual,
                pass,
            });
        }
    }

    let assembled = j_signature(&path, outer, inner, t0, t1)?;
    let packed = assembled.as_truncated()?;
    let group_like_residual = group_like_report(&packed).worst_residual;
    let pass = rows.iter().all(|r| r.pass) && group_like_residual <= args.tol;
    let report = HmapReport {
        schema_version: SCHEMA_VERSION,
        command: "hmap".to_string(),
        dim: path.dim(),
        inner_level: inner,
        outer_level: outer,
        quad: args.quad,
        tolerance: args.tol,
        rows,
        group_like_residual,
        assembled,
        pass,
    };
    eprintln!(
        "hmap completed in {:.1} ms",
        started.elapsed().as_secs_f64() * 1e3
    );
    write_output(&args.out, &report)?;
    Ok(pass)
}

#[derive(Args)]
pub struct TreeArgs {
    /// Poset JSON file
    pub input: PathBuf,
    /// Scan tolerance (relative; integer heights certify exactly)
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TreeReport {
    schema_version: u32,
    command: String,
    nodes: usize,
    conditions_ok: bool,
    violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangle: Option<MetricScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_hyperbolic: Option<MetricScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gromov_product: Option<MetricScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    four_point: Option<MetricScan>,
    pass: bool,
}

pub fn run_tree_check(args: &TreeArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let poset = HeightedPoset::from_json_str(&text)?;
    let validation = poset.validate();
    let mut report = TreeReport {
        schema_version: SCHEMA_VERSION,
        command: "tree-check".to_string(),
        nodes: poset.len(),
        conditions_ok: validation.ok,
        violations: validation.violations,
        triangle: None,
        zero_hyperbolic: None,
        gromov_product: None,
        four_point: None,
        pass: false,
    };
    if validation.ok {
        let certified = poset.certify()?;
        let triangle = certified.check_triangle(args.tol);
        let (hyperbolic, gromov) = certified.check_zero_hyperbolic(args.tol);
        let four_point = certified.check_four_point(args.tol)?;
        report.pass = triangle.ok && hyperbolic.ok && gromov.ok && four_point.ok;
        report.triangle = Some(triangle);
        report.zero_hyperbolic = Some(hyperbolic);
        report.gromov_product = Some(gromov);
        report.four_point = Some(four_point);
    }
    let pass = report.pass;
    write_output(&args.out, &report)?;
    Ok(pass)
}

#[derive(Args)]
pub struct FuzzArgs {
    /// Seed for the whole corpus
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random paths
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Path dimension
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Truncation level N
    #[arg(long, default_value_t = 4)]
    pub level: usize,
    /// Residual tolerance
    #[arg(long, default_value_t = sigkit::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FuzzRow {
    case: usize,
    segments: usize,
    group_like: f64,
    reversal: f64,
    chen: f64,
    reparametrization: f64,
    pass: bool,
}

#[derive(Serialize)]
struct FuzzReport {
    schema_version: u32,
    command: String,
    seed: u64,
    dim: usize,
    level: usize,
    tolerance: f64,
    cases: Vec<FuzzRow>,
    worst_residual: f64,
    pass: bool,
}

pub fn run_fuzz(args: &FuzzArgs) -> Result<bool> {
    let mut rng = sample::seeded(args.seed);
    let level = args.level;
    let unit = TruncatedTensor::unit(args.dim, level)?;
    let mut cases = Vec::with_capacity(args.count);
    let mut worst = 0.0f64;
    for case in 0..args.count {
        let x = sample::random_path(&mut rng, args.dim, 8);
        let g = signature(&x, level)?;

        let group_like = group_like_report(g.tensor()).worst_residual;
        let reversal = rel_residual(g.mul(&signature(&x.reverse(), level)?)?.tensor(), &unit)?;
        let y = sample::random_path(&mut rng, args.dim, 8);
        let chen = rel_residual(
            signature(&x.concat(&y)?, level)?.tensor(),
            signature(&x, level)?.mul(&signature(&y, level)?)?.tensor(),
        )?;
        let sigma = sample::random_time_map(&mut rng, x.start_time(), x.end_time());
        let reparametrization = rel_residual(
            signature(&x.reparametrize(&sigma)?, level)?.tensor(),
            g.tensor(),
        )?;

        let case_worst = group_like.max(reversal).max(chen).max(reparametrization);
        worst = worst.max(case_worst);
        cases.push(FuzzRow {
            case,
            segments: x.num_segments(),
            group_like,
            reversal,
            chen,
            reparametrization,
            pass: case_worst <= args.tol,
        });
    }
    let pass = cases.iter().all(|c| c.pass);
    let report = FuzzReport {
        schema_version: SCHEMA_VERSION,
        command: "fuzz".to_string(),
        seed: args.seed,
        dim: args.dim,
        level,
        tolerance: args.tol,
        cases,
        worst_residual: worst,
        pass,
    };
    write_output(&args.out, &report)?;
    Ok(pass)
}
