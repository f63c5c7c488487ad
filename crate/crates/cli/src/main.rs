use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use weighted_curvature::ambient::SphereSpec;
use weighted_curvature::functionals::{ResidualReport, Verdict};
use weighted_curvature::rigidity::{run_probe, ProbeVerdict};
use weighted_curvature::scenario::{
    convergence_csv, run_convergence, run_scenario, ProbeScenario, RunOptions, Scenario,
};
use weighted_curvature::surface::RadialShape;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FAIL: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

/// Weighted curvature integrals of star-shaped hypersurfaces in hyperbolic
/// space: identity checks, convergence studies and rigidity probes.
#[derive(Parser)]
#[command(name = "wcurv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the scenario's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the grid resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of one or more scenario files and write JSON and CSV reports.
    Verify {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate identity residuals against grid resolution.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated resolutions; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
    /// Minimize the variance of V H_k / H_j at fixed area.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write a sphere or perturbed-sphere shape file.
    MakeShape {
        #[arg(long)]
        dimension: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        band_limit: usize,
        /// Perturbation amplitude (random band-limited, unit sup-norm).
        #[arg(long)]
        amplitude: Option<f64>,
        /// Distance of the sphere's center from the origin.
        #[arg(long)]
        center_distance: Option<f64>,
        /// Comma-separated unit direction of the center.
        #[arg(long, value_delimiter = ',')]
        center_direction: Option<Vec<f64>>,
        /// File name inside the output directory, without extension.
        #[arg(long, default_value = "shape")]
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let outcome = match cli.command {
        Command::Verify { configs, common } => verify(&configs, &common),
        Command::Convergence {
            config,
            resolutions,
            common,
        } => convergence(&config, resolutions, &common),
        Command::Probe { config, common } => probe(&config, &common),
        Command::MakeShape {
            dimension,
            radius,
            band_limit,
            amplitude,
            center_distance,
            center_direction,
            name,
            common,
        } => make_shape(
            dimension,
            radius,
            band_limit,
            amplitude,
            center_distance.zip(center_direction),
            &name,
            &common,
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if s.is_empty() {
        "scenario".into()
    } else {
        s
    }
}

fn options(config: &Path, common: &Common) -> RunOptions {
    RunOptions {
        base_dir: config.parent().map(Path::to_path_buf).unwrap_or_default(),
        resolution: common.resolution,
        seed: common.seed,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("reading scenario {}", path.display()))
}

fn verify(configs: &[PathBuf], common: &Common) -> Result<u8> {
    let scenarios = configs
        .iter()
        .map(|p| load_scenario(p).map(|s| (p, s)))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<ResidualReport> = scenarios
        .iter()
        .map(|(p, s)| {
            run_scenario(s, &options(p, common)).with_context(|| format!("running {}", p.display()))
        })
        .collect::<Result<_>>()?;

    let mut code = EXIT_OK;
    for ((_, scenario), report) in scenarios.iter().zip(&reports) {
        let stem = slug(&scenario.name);
        let json = common
            .out
            .join(scenario.output.json.clone().unwrap_or_else(|| format!("{stem}.json").into()));
        let csv = common
            .out
            .join(scenario.output.csv.clone().unwrap_or_else(|| format!("{stem}.csv").into()));
        write(&json, &report.to_json()?)?;
        write(&csv, &report.to_csv())?;
        if report.has_failure() {
            code = EXIT_FAIL;
        }
        if !common.quiet {
            println!("scenario {} (n = {}, resolution {})", report.scenario, report.dimension, report.resolution);
            for c in &report.checks {
                let idx = match (c.k, c.j) {
                    (Some(k), Some(j)) => format!("k={k} j={j}"),
                    (Some(k), None) => format!("k={k}"),
                    _ => String::new(),
                };
                println!(
                    "  {:<20} {:<36} {:<8} rel {:>12.4e}",
                    c.verdict.as_str(),
                    c.name,
                    idx,
                    c.relative_residual
                );
            }
            println!(
                "  {} pass, {} equality, {} hypothesis not met, {} fail -> {}",
                report.count(Verdict::Pass),
                report.count(Verdict::EqualityDetected),
                report.count(Verdict::HypothesisNotMet),
                report.count(Verdict::Fail),
                json.display()
            );
        }
    }
    Ok(code)
}

fn convergence(config: &Path, resolutions: Option<Vec<usize>>, common: &Common) -> Result<u8> {
    let scenario = load_scenario(config)?;
    let resolutions = match resolutions.or_else(|| scenario.resolutions.clone()) {
        Some(r) if !r.is_empty() => r,
        _ => bail!("no resolutions: pass --resolutions or set \"resolutions\" in the scenario"),
    };
    let rows = run_convergence(&scenario, &resolutions, &options(config, common))?;
    let path = common.out.join(format!("{}_convergence.csv", slug(&scenario.name)));
    let csv = convergence_csv(&rows);
    write(&path, &csv)?;
    if !common.quiet {
        print!("{csv}");
    }
    Ok(EXIT_OK)
}

fn probe(config: &Path, common: &Common) -> Result<u8> {
    let scenario = ProbeScenario::load(config)
        .with_context(|| format!("reading probe config {}", config.display()))?;
    let probe_config = scenario.to_config(&options(config, common))?;
    let result = run_probe(&probe_config)?;
    let stem = slug(&scenario.name);
    write(
        &common.out.join(format!("{stem}_probe.json")),
        &(serde_json::to_string_pretty(&result)? + "\n"),
    )?;
    write(&common.out.join(format!("{stem}_history.csv")), &result.history_csv())?;
    if !common.quiet {
        println!(
            "probe {}: {:?} after {} evaluations in {:.2?}; J = {:.3e}, std(r)/mean(r) = {:.3e}, mean Q = {:.9} (sphere value {:.9})",
            scenario.name,
            result.verdict,
            result.evaluations,
            result.elapsed,
            result.final_objective,
            result.radius_spread,
            result.q_mean,
            result.expected_q_mean
        );
    }
    Ok(match result.verdict {
        ProbeVerdict::SphereReached => EXIT_OK,
        ProbeVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn make_shape(
    dimension: usize,
    radius: f64,
    band_limit: usize,
    amplitude: Option<f64>,
    center: Option<(f64, Vec<f64>)>,
    name: &str,
    common: &Common,
) -> Result<u8> {
    let (shape, description) = match (amplitude, center) {
        (Some(_), Some(_)) => bail!("--amplitude and --center-distance are exclusive"),
        (Some(a), None) => {
            let seed = common.seed.unwrap_or(0);
            (
                RadialShape::perturb_sphere(dimension, radius, a, seed, band_limit)?,
                format!("sphere of radius {radius} perturbed with amplitude {a}, seed {seed}"),
            )
        }
        (None, Some((d, dir))) => {
            let spec = SphereSpec {
                center_distance: d,
                center_direction: dir,
                radius,
            };
            (
                RadialShape::sphere(dimension, &spec, band_limit)?,
                format!("geodesic sphere of radius {radius} centered at distance {d}"),
            )
        }
        (None, None) => (
            RadialShape::centered_sphere(dimension, radius)?.with_band_limit(band_limit)?,
            format!("centered geodesic sphere of radius {radius}"),
        ),
    };
    let path = common.out.join(format!("{name}.json"));
    write(&path, &(serde_json::to_string_pretty(&shape.to_file(description))? + "\n"))?;
    if !common.quiet {
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}
