use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use syndetic_core::report::{CertificateStore, DecisionReport};
use syndetic_core::repro::{repro_figures, write_grids};
use syndetic_core::request::{verify_json, verify_scs_report};
use syndetic_core::strong::{Epsilon, ScsCertificate};
use syndetic_core::symmetric::SymmetricVariant;
use syndetic_core::{Error, GroupElement, GroupModel, Request, RunConfig, SetExpr, SetSpec, Word};

const EXIT_USAGE: u8 = 64;
const EXIT_SCALE: u8 = 65;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "syndetic", version)]
#[command(about = "Decide syndeticity properties of subsets of Z, free groups and finite groups")]
struct Cli {
    /// Group: z, f2..f25, z<N>, s3, d<M>, q8 or table:<path>
    #[arg(long, global = true, default_value = "z")]
    group: String,

    /// Configuration file (key = value lines); SYNDETIC_CONFIG takes precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write the report's certificate to this path
    #[arg(long, global = true)]
    emit_cert: Option<PathBuf>,

    /// Store the certificate in the configured certificate directory
    #[arg(long, global = true)]
    store: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SetArg {
    /// Inline set expression (e.g. residue:3:exclude0, pow2c, cyl:a) or a JSON file
    #[arg(long)]
    set: String,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the set is n-syndetic
    CheckNsyndetic {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Decide whether the set is 1/n-thick
    CheckThick {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Strong complete syndeticity at level epsilon
    CheckScs {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value = "1/4")]
        epsilon: Epsilon,
    },
    /// Build a certificate for a letter cylinder in a free group
    BuildScsCert {
        #[arg(long, default_value_t = 2)]
        rank: u8,
        #[arg(long, default_value = "1/4")]
        epsilon: Epsilon,
        #[arg(long, default_value = "a")]
        letter: String,
    },
    /// Verify a bare strong complete syndeticity certificate
    VerifyScsCert { cert: PathBuf },
    /// Symmetric syndeticity
    CheckSymmetric {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value = "plain")]
        variant: SymmetricVariant,
    },
    /// Dense orbit set test
    DenseOrbit {
        #[command(flatten)]
        set: SetArg,
    },
    /// Search translates whose intersection misses a window
    Subshift {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Radius of the observation window
        #[arg(long, default_value_t = 3)]
        window_radius: u32,
        /// Radius of the translates considered
        #[arg(long, default_value_t = 3)]
        radius: u32,
    },
    /// F-avoidance and pairwise intersection of translates
    WitnessShift {
        #[command(flatten)]
        set: SetArg,
        /// Comma-separated elements of F
        #[arg(long)]
        avoid: String,
        /// Close F under inverses
        #[arg(long)]
        symmetric: bool,
        #[arg(long, default_value_t = 3)]
        radius: u32,
    },
    /// Round trip between an F-avoiding n-syndetic set and an (F,n)-coloring
    Coloring {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        avoid: String,
        #[arg(long, default_value_t = 2)]
        radius: u32,
    },
    /// Search a set with both it and its complement strongly completely syndetic
    AmenabilityWitness {
        #[arg(long, default_value = "1/4")]
        epsilon: Epsilon,
        #[arg(long, default_value_t = 6)]
        max_modulus: u64,
    },
    /// Search an F-avoiding 2-syndetic set in a simple candidate class
    StrongAmenabilityWitness {
        #[arg(long)]
        avoid: String,
        #[arg(long, default_value_t = 2)]
        max_cells: usize,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 6)]
        max_modulus: u64,
    },
    /// Re-check a report (or bare certificate) by replay
    Verify { file: PathBuf },
    /// Reproduction scripts
    Repro {
        #[command(subcommand)]
        what: Repro,
    },
}

#[derive(Subcommand)]
enum Repro {
    /// Figure grids, verdicts and the gap-bound table
    Figures {
        /// Directory for fig1.csv, fig2.csv, fig3.csv
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load_set(arg: &str, group: &str) -> syndetic_core::Result<SetSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        if let Ok(spec) = serde_json::from_str::<SetSpec>(&text) {
            return Ok(spec);
        }
        let expr: SetExpr = serde_json::from_str(&text)?;
        return Ok(SetSpec { group: group.into(), expr });
    }
    Ok(SetSpec { group: group.into(), expr: SetExpr::parse_inline(arg)? })
}

fn parse_elements(group: &str, list: &str) -> syndetic_core::Result<Vec<GroupElement>> {
    let g = GroupModel::from_spec(group)?;
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| g.parse_element(s)).collect()
}

fn parse_letter(s: &str) -> syndetic_core::Result<i8> {
    let w: Word = s.parse()?;
    match w.letters() {
        [l] => Ok(*l),
        _ => Err(Error::InvalidInput(format!("expected a single letter, got {s:?}"))),
    }
}

fn build_request(cli: &Cli) -> syndetic_core::Result<Request> {
    let group = cli.group.as_str();
    let set = |s: &SetArg| load_set(&s.set, group);
    Ok(match &cli.command {
        Command::CheckNsyndetic { set: s, n } => Request::CheckNsyndetic { set: set(s)?, n: *n },
        Command::CheckThick { set: s, n } => Request::CheckThick { set: set(s)?, n: *n },
        Command::CheckScs { set: s, epsilon } => Request::CheckScs { set: set(s)?, epsilon: *epsilon },
        Command::BuildScsCert { rank, epsilon, letter } => {
            Request::BuildScsCert { rank: *rank, epsilon: *epsilon, letter: parse_letter(letter)? }
        }
        Command::CheckSymmetric { set: s, variant } => Request::CheckSymmetric { set: set(s)?, variant: *variant },
        Command::DenseOrbit { set: s } => Request::DenseOrbit { set: set(s)? },
        Command::Subshift { set: s, n, window_radius, radius } => {
            Request::Subshift { set: set(s)?, n: *n, window_radius: *window_radius, radius: *radius }
        }
        Command::WitnessShift { set: s, avoid, symmetric, radius } => {
            let spec = set(s)?;
            let avoid = parse_elements(&spec.group, avoid)?;
            Request::WitnessShift { set: spec, avoid, symmetric: *symmetric, radius: *radius }
        }
        Command::Coloring { set: s, n, avoid, radius } => {
            let spec = set(s)?;
            let avoid = parse_elements(&spec.group, avoid)?;
            Request::Coloring { set: spec, n: *n, avoid, radius: *radius }
        }
        Command::AmenabilityWitness { epsilon, max_modulus } => {
            Request::AmenabilityWitness { group: group.into(), epsilon: *epsilon, max_modulus: *max_modulus }
        }
        Command::StrongAmenabilityWitness { avoid, max_cells, depth, max_modulus } => {
            Request::StrongAmenabilityWitness {
                group: group.into(),
                avoid: parse_elements(group, avoid)?,
                max_cells: *max_cells,
                depth: *depth,
                max_modulus: *max_modulus,
            }
        }
        Command::VerifyScsCert { .. } | Command::Verify { .. } | Command::Repro { .. } => {
            unreachable!("handled without a request")
        }
    })
}

fn run(cli: &Cli) -> syndetic_core::Result<DecisionReport> {
    let mut cfg = RunConfig::load_default(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.init_threads();
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::VerifyScsCert { cert } => {
            let cert: ScsCertificate = serde_json::from_str(&std::fs::read_to_string(cert)?)?;
            verify_scs_report(&cert)
        }
        Command::Verify { file } => verify_json(&std::fs::read_to_string(file)?)?,
        Command::Repro { what: Repro::Figures { out_dir } } => {
            let (mut report, grids) = repro_figures(&cfg)?;
            report.request = Some(serde_json::to_value(syndetic_core::Invocation {
                request: Request::ReproFigures,
                config: cfg.clone(),
            })?);
            if let Some(dir) = out_dir {
                for p in write_grids(&grids, dir)? {
                    report = report.note(format!("wrote {}", p.display()));
                }
            }
            report
        }
        _ => build_request(cli)?.execute(&cfg)?,
    };
    report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    if let Some(cert) = &report.certificate {
        if let Some(path) = &cli.emit_cert {
            std::fs::write(path, serde_json::to_string_pretty(cert)?)?;
        }
        if cli.store {
            let path = CertificateStore::new(&cfg.cert_dir).put(cert)?;
            report = report.note(format!("certificate stored at {}", path.display()));
        }
    }
    let text = serde_json::to_string_pretty(&report)?;
    match &cli.out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(report) => ExitCode::from(report.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ScaleExceeded { .. } => ExitCode::from(EXIT_SCALE),
                Error::Parse(_) | Error::InvalidElement(_) | Error::InvalidExpr(_) => ExitCode::from(EXIT_USAGE),
                _ => ExitCode::from(EXIT_ERROR),
            }
        }
    }
}
