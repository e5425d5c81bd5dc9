use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holomimo::angular::compute_spectrum;
use holomimo::channel::{sample_angular_channel, synthesize_spatial};
use holomimo::experiments::{
    emit_csv, emit_svg, fig4_spec, fig5_spec, fig6_spec, parse_sweep_spec, run_point, run_sweep,
    SweepOptions, SweepSpec,
};
use holomimo::export::export_realization;
use holomimo::geometry::{build_fourier_basis, enumerate_lattice};
use holomimo::scenario::{load_scenario, ScenarioConfig};
use holomimo::Error;

#[derive(Parser)]
#[command(
    name = "holomimo",
    version,
    about = "Holographic MIMO capacity under 3GPP angle distributions"
)]
struct Cli {
    /// More progress output on stderr (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only print errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity of one scenario.
    Point {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Sweep described by a JSON spec file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_svg: Option<PathBuf>,
        /// Record per-point wall time in the CSV (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Capacity vs azimuth spread for several elevation spreads.
    Fig4(FigArgs),
    /// Capacity vs SNR for UMa/UMi/RMa at two apertures.
    Fig5(FigArgs),
    /// Capacity vs antenna spacing.
    Fig6(FigArgs),
    /// Per-cell variances of both link ends.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
    },
    /// One channel realization in HMIO format, with a JSON sidecar.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Synthesize the N_R×N_S spatial channel instead of H_a.
        #[arg(long)]
        spatial: bool,
    },
}

#[derive(Args)]
struct FigArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = holomimo::capacity::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Multiplies every aperture (0.25 turns 15λ into 3.75λ).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    timing: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::UnknownPreset { .. }
        | Error::Contract(_) => 2,
        Error::Domain(_) | Error::Numeric(_) | Error::DegenerateSpectrum { .. } => 3,
        Error::Io { .. } => 4,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("HOLOMIMO_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "HOLOMIMO_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size thread pool: {e}")))
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_sweep(
    spec: &SweepSpec,
    timing: bool,
    csv: &Path,
    svg: Option<&Path>,
) -> Result<(), Error> {
    let result = run_sweep(spec, SweepOptions { timing })?;
    emit_csv(&result, csv)?;
    log::info!("wrote {}", csv.display());
    if let Some(svg) = svg {
        emit_svg(&result, svg)?;
        log::info!("wrote {}", svg.display());
    }
    Ok(())
}

fn run_figure(name: &str, args: &FigArgs) -> Result<(), Error> {
    let spec = match name {
        "fig4" => fig4_spec(args.scale, args.trials, args.seed)?,
        "fig5" => fig5_spec(args.scale, args.trials, args.seed)?,
        _ => fig6_spec(args.scale, args.trials, args.seed)?,
    };
    ensure_dir(&args.out)?;
    let csv = args.out.join(format!("{name}.csv"));
    let svg = args.out.join(format!("{name}.svg"));
    write_sweep(&spec, args.timing, &csv, Some(&svg))
}

fn with_overrides(
    mut cfg: ScenarioConfig,
    seed: Option<u64>,
    trials: Option<usize>,
) -> Result<ScenarioConfig, Error> {
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        if trials < 2 {
            return Err(Error::Config(format!(
                "need at least 2 trials, got {trials}"
            )));
        }
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn write_spectrum_csv(cfg: &ScenarioConfig, path: &Path) -> Result<(), Error> {
    let io = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io)?;
    w.write_record([
        "side", "index", "idx_x", "idx_y", "kx0", "kx1", "ky0", "ky1", "variance",
    ])
    .map_err(io)?;
    for (side, array, dist) in [
        ("rx", &cfg.rx_array, cfg.rx_distribution()?),
        ("tx", &cfg.tx_array, cfg.tx_distribution()?),
    ] {
        let lattice = enumerate_lattice(array);
        let spectrum = compute_spectrum(&dist, &lattice)?;
        log::info!(
            "{side}: {} cells, mass before normalization {:.9}",
            lattice.cardinality(),
            spectrum.raw_total()
        );
        for (i, (cell, v)) in lattice.cells().iter().zip(spectrum.variances()).enumerate() {
            let b = cell.bounds;
            w.write_record([
                side.to_string(),
                i.to_string(),
                cell.idx_x.to_string(),
                cell.idx_y.to_string(),
                b.x0.to_string(),
                b.x1.to_string(),
                b.y0.to_string(),
                b.y1.to_string(),
                v.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn export(cfg: &ScenarioConfig, out: &Path, spatial: bool) -> Result<(), Error> {
    let rx_lattice = enumerate_lattice(&cfg.rx_array);
    let tx_lattice = enumerate_lattice(&cfg.tx_array);
    let rx = compute_spectrum(&cfg.rx_distribution()?, &rx_lattice)?;
    let tx = compute_spectrum(&cfg.tx_distribution()?, &tx_lattice)?;
    let ha = sample_angular_channel(&rx, &tx, cfg.seed)?;
    let (matrix, domain) = if spatial {
        let rb = build_fourier_basis(&cfg.rx_array, &rx_lattice)?;
        let tb = build_fourier_basis(&cfg.tx_array, &tx_lattice)?;
        (synthesize_spatial(&ha, &rb, &tb)?.matrix, "spatial")
    } else {
        (ha.matrix, "angular")
    };
    let sidecar = export_realization(out, &matrix, domain, cfg.seed, cfg.to_value(), &rx, &tx)?;
    println!(
        "{} {}x{} sha256 {}",
        out.display(),
        sidecar.rows,
        sidecar.cols,
        sidecar.data_sha256
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    match cli.command {
        Command::Point {
            config,
            seed,
            trials,
        } => {
            let cfg = with_overrides(load_scenario(&config)?, seed, trials)?;
            let result = run_point(&cfg)?;
            log::info!("evaluated in {:.2} s", result.wall_time_s);
            print!("{}", result.report(&cfg));
        }
        Command::Sweep {
            spec,
            out_csv,
            out_svg,
            timing,
        } => {
            let text = fs::read_to_string(&spec).map_err(|e| Error::Io {
                path: spec.clone(),
                source: e,
            })?;
            let sweep = parse_sweep_spec(&text)?;
            write_sweep(&sweep, timing, &out_csv, out_svg.as_deref())?;
        }
        Command::Fig4(args) => run_figure("fig4", &args)?,
        Command::Fig5(args) => run_figure("fig5", &args)?,
        Command::Fig6(args) => run_figure("fig6", &args)?,
        Command::Spectrum { config, out_csv } => {
            write_spectrum_csv(&load_scenario(&config)?, &out_csv)?
        }
        Command::Export {
            config,
            out,
            seed,
            spatial,
        } => export(
            &with_overrides(load_scenario(&config)?, seed, None)?,
            &out,
            spatial,
        )?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
