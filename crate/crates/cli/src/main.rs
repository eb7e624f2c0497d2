//! Command-line front end for the rate-region toolkit.
//!
//! One process, batch commands only.  Artifacts are deterministic for a
//! fixed configuration and seed: CSV numerics are printed with fixed
//! 12-significant-digit formatting and every random quantity derives from
//! the `--seed` argument.  Human-readable progress goes to standard output;
//! failures are reported as structured JSON on standard error with a
//! nonzero exit status.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use macdisp_core::channel::joint_type_project;
use macdisp_core::channel::{load_channel, Channel, JointInput};
use macdisp_core::fbl_sim::{
    build_codebook, gaussian_approx_rates, message_counts, simulate_error, verdu_han_bound,
    CodebookSpec, DecoderMode, SimOptions,
};
use macdisp_core::infogeom::{dispersion_matrix, mean_vector, DispersionMatrix};
use macdisp_core::mvnorm::psi_inverse;
use macdisp_core::secondorder::{theorem1_region, PieceShape, Theorem1Config};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "macdisp", version, about = "Rate regions and dispersion for two-sender multiple-access channels with degraded message sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the mutual-information vector and dispersion matrix as JSON.
    Info {
        #[arg(long)]
        channel: PathBuf,
        /// Input distribution JSON; uniform when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Emit the boundary polyline of a Gaussian quantile region as CSV.
    PsiRegion {
        /// Row-major 2x2 covariance: v1 v1_12 v1_12 v12.
        #[arg(long, num_args = 4, value_names = ["V1", "C", "C", "V12"])]
        v: Vec<f64>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 6.0)]
        extent: f64,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the capacity region boundary: CSV plus achiever sidecar.
    Boundary {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Assemble the second-order region at a boundary point.
    Region {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 257)]
        resolution: usize,
    },
    /// Monte Carlo error probability of a constant-composition
    /// superposition code.
    Simulate {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Operating distribution JSON; uniform when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Time-sharing alternative distribution; `--input` when omitted.
        #[arg(long)]
        input2: Option<PathBuf>,
        /// Threshold slack; `ln(n) / (2 sqrt(n))` when omitted.
        #[arg(long)]
        gamma_a: Option<f64>,
        /// Decode by maximum likelihood instead of thresholds.
        #[arg(long)]
        ml: bool,
    },
    /// Sample the information-spectrum converse bound.
    Converse {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        /// Slack parameter; `ln(n) / n` when omitted.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Input distribution JSON (projected to an n-type); uniform when
        /// omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// One-shot pipeline: boundary, achieving set, second-order region,
    /// Gaussian-approximation rates, and a simulation overlay.
    Report {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Fixed 12-significant-digit formatting for CSV numerics.
fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_channel(path: &Path) -> Result<Channel> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(load_channel(file).with_context(|| format!("parsing {}", path.display()))?)
}

fn read_input(path: &Option<PathBuf>, ch: &Channel) -> Result<JointInput> {
    match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("opening {}", p.display()))?;
            let input = JointInput::from_json(&text)
                .with_context(|| format!("parsing {}", p.display()))?;
            if input.x1_size() != ch.x1_size() || input.x2_size() != ch.x2_size() {
                bail!(
                    "input distribution is {}x{} but the channel is {}x{}",
                    input.x1_size(),
                    input.x2_size(),
                    ch.x1_size(),
                    ch.x2_size()
                );
            }
            Ok(input)
        }
        None => Ok(JointInput::uniform(ch.x1_size(), ch.x2_size())),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        bail!("eps must lie strictly inside (0, 1), got {eps}");
    }
    Ok(())
}

fn input_json(p: &JointInput) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..p.x1_size())
        .map(|a| (0..p.x2_size()).map(|b| p.p(a, b)).collect())
        .collect();
    json!({ "x1_size": p.x1_size(), "x2_size": p.x2_size(), "p": rows })
}

fn write_artifact(path: &Path, bytes: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn boundary_artifacts(
    boundary: &macdisp_core::capacity::RegionBoundary,
    out: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let mut csv = String::from("r1_nats,r2_nats,achiever_id\n");
    for (k, pt) in boundary.points.iter().enumerate() {
        csv.push_str(&format!("{},{},{k}\n", sig(pt.r1), sig(pt.r2)));
    }
    let csv_path = out.join("boundary.csv");
    write_artifact(&csv_path, &csv)?;

    let achievers: Vec<serde_json::Value> = boundary
        .achievers
        .iter()
        .enumerate()
        .map(|(k, p)| json!({ "id": k, "distribution": input_json(p) }))
        .collect();
    let sidecar = json!({
        "sum_capacity_nats": boundary.sum_capacity,
        "r1_capacity_nats": boundary.r1_capacity,
        "achievers": achievers,
    });
    let json_path = out.join("boundary_achievers.json");
    write_artifact(&json_path, &serde_json::to_string_pretty(&sidecar)?)?;
    Ok((csv_path, json_path))
}

fn region_artifacts(
    out_dir: &Path,
    region_out: &macdisp_core::secondorder::Theorem1Region,
    resolution: usize,
) -> Result<(PathBuf, PathBuf)> {
    let region = &region_out.region;
    // Window scale from the piece payloads.
    let mut scale = 0.1f64;
    for piece in &region.pieces {
        match &piece.shape {
            PieceShape::HalfPlaneL1 { bound } | PieceShape::HalfPlaneSum { bound } => {
                scale = scale.max(bound.abs())
            }
            PieceShape::ShiftedPsi { quantile, .. } => {
                scale = scale.max(quantile.covariance.trace().sqrt())
            }
        }
    }
    let polyline = region.boundary_polyline(
        (-4.0 * scale, 2.0 * scale),
        (-6.0 * scale, 6.0 * scale),
        resolution,
    );
    let mut csv = String::from("l1_nats,l2_nats\n");
    for (l1, l2) in &polyline {
        csv.push_str(&format!("{},{}\n", sig(*l1), sig(*l2)));
    }
    let csv_path = out_dir.join("region.csv");
    write_artifact(&csv_path, &csv)?;

    let pieces: Vec<serde_json::Value> = region
        .pieces
        .iter()
        .map(|piece| {
            let (kind, payload) = match &piece.shape {
                PieceShape::HalfPlaneL1 { bound } => ("halfplane_l1", json!({ "bound": bound })),
                PieceShape::HalfPlaneSum { bound } => ("halfplane_sum", json!({ "bound": bound })),
                PieceShape::ShiftedPsi { tangent, quantile, beta_grid } => (
                    "shifted_psi",
                    json!({
                        "tangent_transformed": tangent,
                        "covariance": quantile.covariance,
                        "beta_max": beta_grid.last().copied().unwrap_or(0.0),
                    }),
                ),
            };
            json!({
                "kind": kind,
                "payload": payload,
                "case": { "kind": format!("{:?}", piece.case.kind),
                          "slack1": piece.case.slack1,
                          "slack2": piece.case.slack2 },
                "achiever": input_json(&piece.achiever),
            })
        })
        .collect();
    let tangents = region.tangents.as_ref().map(|t| {
        json!({
            "t_minus": t.t_minus,
            "t_plus": t.t_plus,
            "t_minus_transformed": t.t_minus_transformed,
            "t_plus_transformed": t.t_plus_transformed,
            "corner": t.corner,
        })
    });
    let meta = json!({
        "r1_star": region.r1_star,
        "r2_star": region.r2_star,
        "epsilon": region.epsilon,
        "tangents": tangents,
        "pieces": pieces,
        "pi_representatives": region_out.pi.representatives.iter().map(input_json).collect::<Vec<_>>(),
    });
    let meta_path = out_dir.join("region_meta.json");
    write_artifact(&meta_path, &serde_json::to_string_pretty(&meta)?)?;
    Ok((csv_path, meta_path))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Info { channel, input } => {
            let ch = read_channel(&channel)?;
            let p = read_input(&input, &ch)?;
            let iv = mean_vector(&p, &ch)?;
            let v = dispersion_matrix(&p, &ch)?;
            let doc = json!({
                "i": { "i1_nats": iv.i1, "i12_nats": iv.i12 },
                "v": { "v1": v.v1, "v12": v.v12, "v1_12": v.v1_12 },
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::PsiRegion { v, eps, extent, resolution, out } => {
            check_eps(eps)?;
            if (v[1] - v[2]).abs() > 1e-12 {
                bail!("covariance must be symmetric: off-diagonal entries {} and {}", v[1], v[2]);
            }
            let cov = DispersionMatrix::new(v[0], v[3], v[1]);
            let region = psi_inverse(&cov, eps, extent, resolution)?;
            let mut csv = String::from("z1,z2\n");
            for (z1, z2) in &region.boundary {
                csv.push_str(&format!("{},{}\n", sig(*z1), sig(*z2)));
            }
            match out {
                Some(path) => write_artifact(&path, &csv)?,
                None => print!("{csv}"),
            }
            if region.boundary.is_empty() {
                println!(
                    "note: degenerate region ({:?}); no boundary points in window",
                    region.shape
                );
            }
        }
        Command::Boundary { channel, resolution, out } => {
            let ch = read_channel(&channel)?;
            let b = macdisp_core::capacity::boundary(&ch, resolution)?;
            boundary_artifacts(&b, &out)?;
            println!(
                "sum capacity {} nats, r1 capacity {} nats, {} vertices",
                sig(b.sum_capacity),
                sig(b.r1_capacity),
                b.points.len()
            );
        }
        Command::Region { channel, r1, r2, eps, out, resolution } => {
            check_eps(eps)?;
            let ch = read_channel(&channel)?;
            let cfg = Theorem1Config::default();
            let region_out = theorem1_region(&ch, r1, r2, eps, &cfg)?;
            region_artifacts(&out, &region_out, resolution)?;
            println!(
                "{} region pieces from {} achieving distributions",
                region_out.region.pieces.len(),
                region_out.pi.representatives.len()
            );
        }
        Command::Simulate {
            channel,
            n,
            m1,
            m2,
            beta,
            trials,
            seed,
            input,
            input2,
            gamma_a,
            ml,
        } => {
            let ch = read_channel(&channel)?;
            let p = read_input(&input, &ch)?;
            let p2 = match input2 {
                Some(_) => read_input(&input2, &ch)?,
                None => p.clone(),
            };
            let spec = CodebookSpec::with_time_sharing(n, m1, m2, &p, &p2, beta, seed)?;
            let cb = build_codebook(&spec, &ch)?;
            let opts = SimOptions {
                gamma_a,
                decoder: if ml { DecoderMode::MaxLikelihood } else { DecoderMode::Threshold },
                collect_trials: false,
            };
            let report = simulate_error(&cb, &ch, trials, &opts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Converse { channel, n, r1, r2, gamma, samples, seed, input } => {
            let ch = read_channel(&channel)?;
            let p = read_input(&input, &ch)?;
            let p_n = joint_type_project(&p, n as u64)?;
            let bound = verdu_han_bound(&p_n, &ch, n, r1, r2, gamma, samples, seed)?;
            println!("{}", serde_json::to_string_pretty(&bound)?);
        }
        Command::Report { channel, r1, r2, eps, n, beta, trials, seed, out } => {
            check_eps(eps)?;
            let ch = read_channel(&channel)?;
            let cfg = Theorem1Config::default();

            let region_out = theorem1_region(&ch, r1, r2, eps, &cfg)?;
            let (boundary_csv, boundary_json) = boundary_artifacts(&region_out.boundary, &out)?;
            let (region_csv, region_meta) = region_artifacts(&out, &region_out, 257)?;

            let p_star = region_out.pi.representatives[0].clone();
            let rates = gaussian_approx_rates(&ch, &p_star, n, eps, beta, &p_star)?;
            let rates_path = out.join("rates.json");
            write_artifact(&rates_path, &serde_json::to_string_pretty(&rates)?)?;

            let (m1, m2) = message_counts(n, rates.achievable);
            let spec = CodebookSpec::with_time_sharing(n, m1, m2, &p_star, &p_star, beta, seed)?;
            let cb = build_codebook(&spec, &ch)?;
            let mut report = simulate_error(&cb, &ch, trials, &SimOptions::default())?;
            // Timing is not part of the deterministic artifact contract.
            report.wall_clock_secs = 0.0;
            let sim_path = out.join("simulation.json");
            write_artifact(&sim_path, &serde_json::to_string_pretty(&report)?)?;

            let manifest = json!({
                "channel": channel.display().to_string(),
                "parameters": {
                    "r1_star": r1, "r2_star": r2, "epsilon": eps,
                    "n": n, "beta": beta, "trials": trials, "seed": seed,
                },
                "artifacts": {
                    "boundary_csv": boundary_csv.file_name().unwrap().to_str(),
                    "boundary_achievers": boundary_json.file_name().unwrap().to_str(),
                    "region_csv": region_csv.file_name().unwrap().to_str(),
                    "region_meta": region_meta.file_name().unwrap().to_str(),
                    "rates": rates_path.file_name().unwrap().to_str(),
                    "simulation": sim_path.file_name().unwrap().to_str(),
                },
                "summary": {
                    "sum_capacity_nats": region_out.boundary.sum_capacity,
                    "r1_capacity_nats": region_out.boundary.r1_capacity,
                    "pi_representatives": region_out.pi.representatives.len(),
                    "m1": m1, "m2": m2,
                    "error_rate": report.error_rate,
                    "wilson_low": report.wilson_low,
                    "wilson_high": report.wilson_high,
                },
            });
            write_artifact(&out.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
        }
    }
    Ok(())
}

fn init_threads() {
    if let Ok(raw) = std::env::var("MACDISP_THREADS") {
        if let Ok(k) = raw.trim().parse::<usize>() {
            if k > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    init_threads();
    if let Err(err) = run(cli) {
        println!("error: {err:#}");
        let doc = json!({ "error": format!("{err:#}") });
        eprintln!("{doc}");
        std::process::exit(1);
    }
}
