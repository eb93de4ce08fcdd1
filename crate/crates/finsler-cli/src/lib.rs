//! `finsler`: command-line front end for the holonomy engine.
//!
//! Subcommands: `certify` (JSON certification report), `curvature`
//! (flag-curvature residual sweep, CSV), `transport` (square-loop holonomy
//! map, CSV), `geodesic` (integrated trace, CSV), `profile` (polar profile
//! sweep, CSV). All outputs are deterministic for a fixed config and seed:
//! the JSON report embeds the tool version, a hash of the effective config
//! (including the metric file bytes) and the tolerance set.
//!
//! Exit codes for `certify`: 0 certified, 2 hypotheses violated or rank
//! definitively below 4, 3 inconclusive margin, 1 I/O or spec errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use finsler_core::curvature::flag_curvature_residual;
use finsler_core::holonomy::{
    circle_directions, loop_holonomy, nonlinearity_defect, CertVerdict, CertifyParams,
    ConditionTag, Curve, PolarProfile,
};
use finsler_core::metrics::{MetricSpec, MetricSpecFile};
use finsler_core::ode::OdeOptions;
use finsler_core::spray::geodesic_integrate;
use finsler_core::submanifold;

#[derive(Parser)]
#[command(name = "finsler", version, about = "Finsler geometry engine: sprays, transport, holonomy certification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify infinite-dimensional holonomy from origin data (JSON report).
    #[command(after_help = "Exit codes: 0 certified; 2 hypothesis violation or rank \
        definitively below 4; 3 inconclusive margin; 1 I/O or parse errors.")]
    Certify(CertifyArgs),
    /// Sweep the constant-flag-curvature residual at seeded random points (CSV).
    Curvature(CurvatureArgs),
    /// Transport the indicatrix around a square loop and report the map (CSV).
    Transport(TransportArgs),
    /// Integrate a geodesic and emit its trace (CSV).
    Geodesic(GeodesicArgs),
    /// Sweep a polar profile: t, r, dr, ddr, kappa (CSV).
    Profile(ProfileArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Metric specification file (JSON).
    #[arg(long)]
    metric: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Angular grid size for indicatrix sampling.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Relative singular-value tolerance for rank decisions.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for random sampling; identical seeds give identical bytes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sufficient condition to check: A, B or C.
    #[arg(long)]
    condition: String,
    /// Coordinate plane "i,j" for families with n >= 3.
    #[arg(long, value_parser = parse_plane)]
    plane: Option<(usize, usize)>,
    /// Override the family's flag-curvature constant.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of sampled chart points.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Flag-curvature constant; defaults to the family's known value.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct TransportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Side of the square loop cornered at the origin.
    #[arg(long, default_value_t = 0.3)]
    side: f64,
    /// Number of indicatrix samples.
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Start point, comma-separated.
    #[arg(long, default_value = "0,0")]
    x0: String,
    /// Initial velocity, comma-separated.
    #[arg(long, default_value = "1,0")]
    y0: String,
    /// Parameter span to integrate over.
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
    /// Number of equally spaced output rows.
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which origin function to profile: "f" or "p".
    #[arg(long, default_value = "p")]
    which: String,
}

fn parse_plane(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated indices, e.g. 1,2".into());
    }
    let a: usize = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let b: usize = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    if a == 0 || b == 0 {
        return Err("plane axes are 1-based".into());
    }
    Ok((a - 1, b - 1))
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect()
}

/// 17-significant-digit decimal form for CSV cells.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

/// FNV-1a over the canonical config string; stable across runs and
/// platforms, enough to tie a report to its inputs.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn write_bytes(&self, bytes: &[u8]) -> std::io::Result<()> {
        match &self.path {
            Some(p) => fs::write(p, bytes),
            None => std::io::stdout().write_all(bytes),
        }
    }
}

fn load_spec(path: &Path) -> Result<(MetricSpecFile, MetricSpec, Vec<u8>), String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: MetricSpecFile = serde_json::from_slice(&bytes)
        .map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    let spec = MetricSpec::try_from(&file).map_err(|e| format!("{e}"))?;
    Ok((file, spec, bytes))
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Tolerances {
    rank_tol: f64,
    certification_gap: f64,
    hypothesis_tol: f64,
}

#[derive(Serialize)]
struct CertifyOutput {
    tool: ToolInfo,
    config_hash: String,
    seed: u64,
    tolerances: Tolerances,
    metric: MetricSpecFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    plane: Option<[usize; 2]>,
    report: finsler_core::holonomy::CertificationReport,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Certify(args) => cmd_certify(args),
        Cmd::Curvature(args) => cmd_curvature(args),
        Cmd::Transport(args) => cmd_transport(args),
        Cmd::Geodesic(args) => cmd_geodesic(args),
        Cmd::Profile(args) => cmd_profile(args),
    };
    match code {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn config_hash_for(parts: &[&[u8]]) -> String {
    let mut all = Vec::new();
    for p in parts {
        all.extend_from_slice(p);
        all.push(0);
    }
    format!("{:016x}", fnv1a(&all))
}

fn cmd_certify(args: CertifyArgs) -> Result<i32, String> {
    let (file, spec, bytes) = load_spec(&args.common.metric)?;
    let condition: ConditionTag = args.condition.parse().map_err(|e| format!("{e}"))?;
    let mut params = CertifyParams::new(condition);
    params.grid = args.common.grid;
    params.tolerance = args.common.tol;
    params.lambda = args.lambda;

    let report = match (spec.dim(), args.plane) {
        (2, None) => finsler_core::holonomy::certify_spec(&spec, &params),
        (2, Some(_)) => {
            return Err("--plane applies to families with n >= 3".into());
        }
        (_, Some(plane)) => submanifold::certify_via_plane(&spec, plane, &params),
        (n, None) => {
            return Err(format!(
                "family has dimension {n}; choose a totally geodesic plane with --plane i,j"
            ));
        }
    }
    .map_err(|e| format!("{e}"))?;

    let cfg = format!(
        "certify;condition={};plane={:?};grid={};tol={};lambda={:?};seed={}",
        args.condition, args.plane, args.common.grid, args.common.tol, args.lambda,
        args.common.seed
    );
    let out = CertifyOutput {
        tool: ToolInfo {
            name: "finsler",
            version: env!("CARGO_PKG_VERSION"),
        },
        config_hash: config_hash_for(&[cfg.as_bytes(), &bytes]),
        seed: args.common.seed,
        tolerances: Tolerances {
            rank_tol: args.common.tol,
            certification_gap: finsler_core::holonomy::rank::CERTIFICATION_GAP,
            hypothesis_tol: 1e-8,
        },
        metric: file,
        plane: args.plane.map(|(a, b)| [a + 1, b + 1]),
        report,
    };
    let mut text = serde_json::to_string_pretty(&out).map_err(|e| format!("{e}"))?;
    text.push('\n');
    Output {
        path: args.common.out,
    }
    .write_bytes(text.as_bytes())
    .map_err(|e| format!("{e}"))?;

    Ok(match out.report.verdict {
        CertVerdict::Certified => 0,
        CertVerdict::HypothesisViolation | CertVerdict::Degenerate => 2,
        CertVerdict::Inconclusive => 3,
    })
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(buf)
}

fn sample_chart_point(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-rmax..rmax)).collect();
        if x.iter().map(|a| a * a).sum::<f64>().sqrt() < rmax {
            return x;
        }
    }
}

fn sample_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        if y.iter().map(|a| a * a).sum::<f64>().sqrt() > 0.2 {
            return y;
        }
    }
}

fn cmd_curvature(args: CurvatureArgs) -> Result<i32, String> {
    let (_, spec, _) = load_spec(&args.common.metric)?;
    let lambda = args
        .lambda
        .or_else(|| spec.lambda())
        .ok_or("family has no known flag curvature; pass --lambda")?;
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);

    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend((1..=n).map(|i| format!("y{i}")));
        header.push("residual".into());
        header.push("matched_sign".into());
        w.write_record(&header).map_err(|e| format!("{e}"))?;
        for _ in 0..args.samples {
            let x = sample_chart_point(&mut rng, n, 0.6);
            let y = sample_direction(&mut rng, n);
            let fr = flag_curvature_residual(&spec, &x, &y, lambda).map_err(|e| format!("{e}"))?;
            let mut row: Vec<String> = x.iter().map(|v| full(*v)).collect();
            row.extend(y.iter().map(|v| full(*v)));
            row.push(full(fr.residual));
            row.push(format!("{}", fr.matched_sign));
            w.write_record(&row).map_err(|e| format!("{e}"))?;
        }
        w.flush().map_err(|e| format!("{e}"))?;
    }
    Output {
        path: args.common.out,
    }
    .write_bytes(&buf)
    .map_err(|e| format!("{e}"))?;
    Ok(0)
}

fn cmd_transport(args: TransportArgs) -> Result<i32, String> {
    let (_, spec, _) = load_spec(&args.common.metric)?;
    if spec.dim() != 2 {
        return Err("transport sweeps are defined for surface charts (n = 2)".into());
    }
    let curve = Curve::square_loop(&[0.0, 0.0], args.side);
    let dirs = circle_directions(args.samples);
    let map = loop_holonomy(&spec, &curve, &dirs, &OdeOptions::default())
        .map_err(|e| format!("{e}"))?;
    let defect = nonlinearity_defect(&map).map_err(|e| format!("{e}"))?;

    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record([
            "angle", "y_in_1", "y_in_2", "y_out_1", "y_out_2", "correction", "defect",
        ])
        .map_err(|e| format!("{e}"))?;
        for (k, (src, img)) in map.sources.iter().zip(&map.images).enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / map.sources.len() as f64;
            w.write_record([
                full(t),
                full(src[0]),
                full(src[1]),
                full(img[0]),
                full(img[1]),
                full(map.corrections[k]),
                full(defect),
            ])
            .map_err(|e| format!("{e}"))?;
        }
        w.flush().map_err(|e| format!("{e}"))?;
    }
    Output {
        path: args.common.out,
    }
    .write_bytes(&buf)
    .map_err(|e| format!("{e}"))?;
    Ok(0)
}

fn cmd_geodesic(args: GeodesicArgs) -> Result<i32, String> {
    let (_, spec, _) = load_spec(&args.common.metric)?;
    let n = spec.dim();
    let x0 = parse_vector(&args.x0)?;
    let y0 = parse_vector(&args.y0)?;
    if x0.len() != n || y0.len() != n {
        return Err(format!("--x0/--y0 must have {n} components"));
    }
    let trace = geodesic_integrate(&spec, &x0, &y0, args.tmax, &OdeOptions::default())
        .map_err(|e| format!("{e}"))?;
    let t_end = trace.end_time();
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("v{i}")));
        w.write_record(&header).map_err(|e| format!("{e}"))?;
        for k in 0..args.points {
            let t = t_end * k as f64 / (args.points - 1).max(1) as f64;
            let (x, v) = trace.sample(t);
            let mut row = vec![full(t)];
            row.extend(x.iter().map(|a| full(*a)));
            row.extend(v.iter().map(|a| full(*a)));
            w.write_record(&row).map_err(|e| format!("{e}"))?;
        }
        w.flush().map_err(|e| format!("{e}"))?;
    }
    Output {
        path: args.common.out,
    }
    .write_bytes(&buf)
    .map_err(|e| format!("{e}"))?;
    Ok(0)
}

fn cmd_profile(args: ProfileArgs) -> Result<i32, String> {
    let (_, spec, _) = load_spec(&args.common.metric)?;
    let data = spec.pointwise_at_origin().map_err(|e| format!("{e}"))?;
    if data.n != 2 {
        return Err("profiles are defined on surface charts (n = 2)".into());
    }
    let prog = match args.which.as_str() {
        "f" | "F" => data.f0.clone(),
        "p" | "P" => data.p0.clone(),
        other => return Err(format!("--which must be 'f' or 'p', got '{other}'")),
    };
    let profile = PolarProfile::from_program(prog).map_err(|e| format!("{e}"))?;
    let grid = args.common.grid.max(16);
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["t", "r", "dr", "ddr", "kappa"])
            .map_err(|e| format!("{e}"))?;
        for k in 0..grid {
            let t = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
            let (r, dr, ddr) = profile.eval(t);
            w.write_record([full(t), full(r), full(dr), full(ddr), full(profile.curvature(t))])
                .map_err(|e| format!("{e}"))?;
        }
        w.flush().map_err(|e| format!("{e}"))?;
    }
    Output {
        path: args.common.out,
    }
    .write_bytes(&buf)
    .map_err(|e| format!("{e}"))?;
    Ok(0)
}
