//! Command-line interface. Exit codes: 0 success, 2 usage (from clap),
//! 3 configuration/domain/IO errors, 4 numeric failures or failed audits.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use schottky::audit::run_all_audits;
use schottky::error::Error;
use schottky::gaps::{estimate_delta_counting, estimate_delta_eigenvalue, gap_cdf, gap_table};
use schottky::orbit::{
    count_profile, enumerate_orbit, enumerate_orbit_serial, enumerate_to_depth, AngularInterval,
    OrbitPoint,
};
use schottky::output::{
    cdf_csv, format_float, gaps_csv, histogram_csv, json_report, orbit_csv, render_svg,
    write_text, OutputMeta,
};
use schottky::process::{bonferroni_check, tail_exponent, zn_compare, TangencySource};
use schottky::runconfig::{parse_angle, DeltaMethod, RunConfig};

#[derive(Parser)]
#[command(
    name = "schottky",
    version,
    about = "Orbit tangencies of three-reflection Schottky groups: enumeration, \
             gap statistics, critical exponent, structural audits, point process"
)]
struct Cli {
    /// Configuration file (`key = value`, see README)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files
    #[arg(long, global = true, env = "SCHOTTKY_OUTPUT_DIR", default_value = "out")]
    out_dir: PathBuf,

    /// Override the configured seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Single-threaded enumeration (output is byte-identical)
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate all tangencies with squared norm below T²
    Enumerate {
        /// Curvature-norm threshold (defaults to the configured one)
        #[arg(long)]
        t: Option<f64>,
        /// Enumerate by word length instead of by threshold
        #[arg(long, conflicts_with = "t")]
        depth: Option<usize>,
        /// Angular window: start and end (floats or multiples of pi)
        #[arg(long, num_args = 2, value_names = ["START", "END"])]
        interval: Option<Vec<String>>,
    },
    /// Gap table, CDF, and histogram of the T²-scaled gaps
    Gaps {
        #[arg(long)]
        t: Option<f64>,
    },
    /// Estimate the critical exponent
    Delta {
        /// eigenvalue | slope-fit (defaults to the configured method)
        #[arg(long)]
        method: Option<String>,
        /// Refinement depth for the eigenvalue method
        #[arg(long)]
        depth: Option<usize>,
        /// Comma-separated threshold grid for the slope fit
        #[arg(long)]
        grid: Option<String>,
    },
    /// Run every structural audit
    Audit,
    /// Nearest-neighbor statistics of the limiting point process
    PointProcess {
        /// Sample size per trial
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Number of sampling trials
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Render the configuration and orbit as SVG
    Render,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Numeric(_) => 4,
                _ => 3,
            };
            std::process::exit(code);
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn enumerate(
    cfg: &RunConfig,
    t: f64,
    interval: Option<AngularInterval>,
    serial: bool,
) -> Result<Vec<OrbitPoint>, Error> {
    if serial {
        enumerate_orbit_serial(&cfg.group, t, interval)
    } else {
        enumerate_orbit(&cfg.group, t, interval)
    }
}

/// Log-spaced grid used for CDF output: the scaled-gap law is heavy-tailed,
/// so the grid runs from 10⁻² out to 10⁶ (20 points per decade).
fn cdf_grid() -> Vec<f64> {
    (0..=160)
        .map(|k| 1e-2 * 10f64.powf(k as f64 / 20.0))
        .collect()
}

fn run(cli: Cli) -> Result<i32, Error> {
    let cfg = load_config(&cli)?;
    let meta = OutputMeta::new(&cfg);
    let out = &cli.out_dir;

    match &cli.cmd {
        Cmd::Enumerate { t, depth, interval } => {
            let interval = match interval {
                None => cfg.interval,
                Some(pair) => {
                    let start = parse_angle(&pair[0]).map_err(Error::Config)?;
                    let end = parse_angle(&pair[1]).map_err(Error::Config)?;
                    Some(AngularInterval::new(start, end)?)
                }
            };
            let points = match depth {
                Some(d) => enumerate_to_depth(&cfg.group, *d)?,
                None => enumerate(&cfg, t.unwrap_or(cfg.t), interval, cli.serial)?,
            };
            let path = out.join("orbit.csv");
            write_text(&path, &orbit_csv(&points, &meta))?;
            let kappa_max = points.iter().map(|p| p.circle.kappa).fold(0.0, f64::max);
            println!("{} tangencies (max curvature {})", points.len(), format_float(kappa_max));
            println!("wrote {}", path.display());
        }

        Cmd::Gaps { t } => {
            let t = t.unwrap_or(cfg.t);
            let points = enumerate(&cfg, t, None, cli.serial)?;
            let table = gap_table(&points, t, cfg.interval)?;
            let ecdf = gap_cdf(&table, None)?;
            let hist = ecdf.histogram(cfg.bin, Some(50.0))?;
            let paths = [
                (out.join("gaps.csv"), gaps_csv(&table, &meta)),
                (out.join("cdf.csv"), cdf_csv(&ecdf, &cdf_grid(), &meta)),
                (out.join("hist.csv"), histogram_csv(&hist, &meta)),
            ];
            for (path, content) in &paths {
                write_text(path, content)?;
            }
            println!(
                "{} tangencies, {} gaps; scaled gaps: min {} median {}",
                table.thetas.len(),
                table.gaps.len(),
                format_float(ecdf.values()[0]),
                format_float(ecdf.median()),
            );
            for (path, _) in &paths {
                println!("wrote {}", path.display());
            }
        }

        Cmd::Delta { method, depth, grid } => {
            let method = match method {
                None => cfg.delta_method,
                Some(m) => m.parse::<DeltaMethod>().map_err(Error::Config)?,
            };
            let est = match method {
                DeltaMethod::Eigenvalue => {
                    estimate_delta_eigenvalue(&cfg.group, depth.unwrap_or(cfg.delta_depth))?
                }
                DeltaMethod::SlopeFit => {
                    let thresholds: Vec<f64> = match grid {
                        Some(g) => g
                            .split(',')
                            .map(|s| {
                                s.trim()
                                    .parse::<f64>()
                                    .map_err(|_| Error::Config(format!("bad threshold `{s}`")))
                            })
                            .collect::<Result<_, _>>()?,
                        None => vec![30.0, 100.0, 300.0, 1000.0, 3000.0],
                    };
                    let profile = count_profile(&cfg.group, &thresholds, cfg.interval)?;
                    estimate_delta_counting(&profile)?
                }
            };
            let path = out.join("delta.json");
            write_text(&path, &json_report("delta", &meta, &est)?)?;
            println!("delta = {} ({})", format_float(est.delta), est.method);
            println!("wrote {}", path.display());
        }

        Cmd::Audit => {
            let reports = run_all_audits(&cfg.group, cfg.seed)?;
            let path = out.join("audit.json");
            write_text(&path, &json_report("audit", &meta, &reports)?)?;
            let mut failed = 0;
            for r in &reports {
                println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
                if !r.pass {
                    failed += 1;
                }
            }
            println!("wrote {}", path.display());
            if failed > 0 {
                eprintln!("{failed} audit(s) failed");
                return Ok(4);
            }
        }

        Cmd::PointProcess { n, trials } => {
            let delta = estimate_delta_eigenvalue(&cfg.group, cfg.delta_depth)?.delta;
            let points = enumerate(&cfg, cfg.t, None, cli.serial)?;
            let src = TangencySource::from_orbit(&points, cfg.t)?;
            let s_grid: Vec<f64> = (1..=50).map(|k| 0.1 * k as f64).collect();
            let zn = zn_compare(&src, *n, delta, &s_grid, *trials, cfg.seed)?;
            let bonferroni = bonferroni_check(&src, 200.min(*n), 1.0, 1, delta, *trials, cfg.seed)?;
            let tail_grid: Vec<f64> = (2..=12).map(|k| 0.5 * k as f64).collect();
            let tail_c = tail_exponent(&src, *n, delta, &tail_grid, cfg.seed, 1000)?;
            let payload = serde_json::json!({
                "delta": delta,
                "atoms": src.len(),
                "zn": zn,
                "bonferroni": bonferroni,
                "tail_exponent": tail_c,
            });
            let path = out.join("pointprocess.json");
            write_text(&path, &json_report("pointprocess", &meta, &payload)?)?;
            println!(
                "nu vs 1-Z sup discrepancy {} over {} trials (N = {})",
                format_float(zn.sup_discrepancy),
                trials,
                n
            );
            println!(
                "bracket violations {} of {}; A1 mean {} vs closed form {}",
                bonferroni.violations,
                bonferroni.trials,
                format_float(bonferroni.a1_mean),
                format_float(bonferroni.a1_closed_form),
            );
            println!("tail exponent c = {}", format_float(tail_c));
            println!("wrote {}", path.display());
        }

        Cmd::Render => {
            let path = out.join("orbit.svg");
            write_text(&path, &render_svg(&cfg)?)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(0)
}
