use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leaky_lamb::io::modeshape::{reconstruct, select_mode, write_mode_shape, ModeSelector};
use leaky_lamb::io::validate::{validate_dataset, DEFAULT_THRESHOLD};
use leaky_lamb::io::{run_sweep, write_outputs, Dataset, RunConfig};
use leaky_lamb::{Error, Material};

/// Process exit codes. Usage errors exit with clap's code 2.
mod code {
    pub const OTHER: u8 = 1;
    pub const CONFIG: u8 = 3;
    pub const MATERIAL: u8 = 4;
    pub const PARTIAL: u8 = 5;
    pub const NOT_FOUND: u8 = 6;
    pub const VALIDATION: u8 = 7;
    pub const IO: u8 = 8;
}

#[derive(Parser)]
#[command(
    name = "leaky-lamb",
    version,
    about = "Leaky Lamb wave dispersion of a plate between elastic half-spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep frequency and write dispersion.csv, modes.json and plot scripts
    Sweep {
        /// JSON run configuration
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (overrides the config; 0 = all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Suppress progress output
        #[arg(long, short)]
        quiet: bool,
    },
    /// Rebuild the shape of one stored mode
    Modeshape {
        /// Directory holding modes.json from a sweep
        #[arg(long)]
        data: PathBuf,
        /// Frequency in MHz; snapped to the nearest swept frequency
        #[arg(long)]
        freq: f64,
        /// Mode id, curve id `c<N>` or case label; default is the least attenuated mode
        #[arg(long)]
        mode: Option<String>,
        /// Distance into each half-space in mm (default: plate thickness)
        #[arg(long)]
        extent: Option<f64>,
        /// Sample points across the guide and across each half-space
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Output directory (default: the data directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every stored mode against the partial-wave determinant
    Validate {
        /// Directory holding modes.json from a sweep
        #[arg(long)]
        data: PathBuf,
        /// Largest accepted relative deviation in k_x
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Built-in materials
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
    },
}

#[derive(Subcommand)]
enum MaterialsAction {
    List,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidGeometry(_) | Error::InvalidMap(_) | Error::DegenerateGrid { .. } => {
            code::CONFIG
        }
        Error::UnknownMaterial(_) | Error::InvalidMaterial(_) => code::MATERIAL,
        Error::NotFound(_) => code::NOT_FOUND,
        Error::Io(_) | Error::Json(_) => code::IO,
        _ => code::OTHER,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // the sweep parallelises across frequencies; keep each solve sequential
    faer::set_global_parallelism(faer::Par::Seq);
    match cli.command {
        Command::Sweep {
            config,
            out,
            jobs,
            quiet,
        } => sweep(config, out, jobs, quiet),
        Command::Modeshape {
            data,
            freq,
            mode,
            extent,
            samples,
            out,
        } => modeshape(data, freq, mode, extent, samples, out),
        Command::Validate { data, threshold } => validate(data, threshold),
        Command::Materials {
            action: MaterialsAction::List,
        } => {
            materials();
            ExitCode::SUCCESS
        }
    }
}

fn sweep(config: PathBuf, out: PathBuf, jobs: Option<usize>, quiet: bool) -> ExitCode {
    let mut cfg = match RunConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Some(j) = jobs {
        cfg.jobs = j;
    }
    if let Err(e) = cfg.build_system() {
        return fail(e);
    }
    let step = std::sync::atomic::AtomicUsize::new(0);
    let progress = |done: usize, total: usize| {
        if quiet {
            return;
        }
        let pct = 100 * done / total.max(1);
        if pct / 5 > step.load(std::sync::atomic::Ordering::Relaxed) || done == total {
            step.store(pct / 5, std::sync::atomic::Ordering::Relaxed);
            eprint!("\rsolving {done}/{total} ({pct}%)");
            let _ = std::io::stderr().flush();
            if done == total {
                eprintln!();
            }
        }
    };
    let ds = match run_sweep(&cfg, progress) {
        Ok(ds) => ds,
        Err(e) => return fail(e),
    };
    let written = match write_outputs(&ds, &out) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    println!(
        "{} modes at {} frequencies in {:.1} s",
        ds.modes.len(),
        ds.frequencies_mhz.len(),
        ds.finished_at - ds.started_at
    );
    for c in &ds.cases {
        let n = ds.modes.iter().filter(|m| m.case_index == c.index).count();
        let hi = c.c_max.map(|v| format!("{v}")).unwrap_or_else(|| "inf".into());
        println!(
            "  case {} {:<16} c in [{}, {}] km/s: {} modes",
            c.index, c.label, c.c_min, hi, n
        );
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    if !ds.failed_points.is_empty() {
        eprintln!("warning: {} (frequency, case) points failed:", ds.failed_points.len());
        for f in &ds.failed_points {
            eprintln!("  {:.6} MHz case {}: {}", f.frequency_mhz, f.case_label, f.message);
        }
        return ExitCode::from(code::PARTIAL);
    }
    ExitCode::SUCCESS
}

fn modeshape(
    data: PathBuf,
    freq: f64,
    mode: Option<String>,
    extent: Option<f64>,
    samples: usize,
    out: Option<PathBuf>,
) -> ExitCode {
    let run = || -> leaky_lamb::Result<()> {
        let ds = Dataset::load(&data)?;
        let selector = match mode {
            Some(m) => m.parse()?,
            None => ModeSelector::LeastAttenuated,
        };
        let rec = select_mode(&ds, freq, &selector)?;
        let extent = extent.unwrap_or(2.0 * ds.config.system.half_thickness_mm);
        let shape = reconstruct(&ds, rec, extent, samples)?;
        let dir = out.unwrap_or(data);
        std::fs::create_dir_all(&dir)?;
        let files = write_mode_shape(&shape, rec, &dir)?;
        println!(
            "mode {} (curve c{}) at {:.6} MHz, {}: k_x = {:.8}{:+.8}i rad/mm, c = {:.5} km/s",
            rec.id, rec.curve, rec.frequency_mhz, rec.case_label, rec.k_x.re, rec.k_x.im, rec.phase_velocity
        );
        for f in shape.growth_flags {
            println!(
                "  side {} {:?}: {:?}, {}",
                f.side.label(),
                f.wave,
                f.kind,
                if f.growing { "growing" } else { "decaying" }
            );
        }
        if shape.branch_point {
            println!("  warning: k_x sits on a branch point");
        }
        for f in files {
            println!("wrote {}", f.display());
        }
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn validate(data: PathBuf, threshold: f64) -> ExitCode {
    let ds = match Dataset::load(&data) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let report = match validate_dataset(&ds, threshold) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let table = report.to_table();
    print!("{table}");
    if let Err(e) = std::fs::write(data.join("validation.txt"), &table) {
        return fail(e.into());
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(code::VALIDATION)
    }
}

fn materials() {
    println!(
        "{:<10} {:>9} {:>11} {:>11} {:>10} {:>10} {:>8}",
        "name", "rho g/cc", "c_l km/s", "c_t km/s", "lambda GPa", "mu GPa", "poisson"
    );
    for name in Material::preset_names() {
        let m = Material::preset(name).expect("preset exists");
        println!(
            "{:<10} {:>9.3} {:>11.3} {:>11.3} {:>10.4} {:>10.4} {:>8.4}",
            m.name,
            m.rho,
            m.c_l,
            m.c_t,
            m.lambda,
            m.mu,
            m.poisson_ratio()
        );
    }
}
