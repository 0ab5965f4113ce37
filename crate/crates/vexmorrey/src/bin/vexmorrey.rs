//! Command-line front end: corpus generation, norm evaluation, dyadic
//! decomposition, and the probe suite, driven by a flat key-value config.
//!
//! Exit codes: 0 success / probes passed, 1 probe-cap failure, 2 usage or
//! configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vexmorrey::config::RunConfig;
use vexmorrey::error::Error;
use vexmorrey::grid::{read_csv, read_raw, write_csv, write_raw, GridFunction};
use vexmorrey::lebesgue::{quasi_norm, DomainMask};
use vexmorrey::morrey::morrey_norm;
use vexmorrey::probes::{
    dyadic_radius_sweep, nonneg_sequence_corpus, probe_convolution_inequality, probe_hardy,
    probe_peetre_equivalence, probe_power_reindex, probe_xinorm, scalar_corpus, sequence_corpus,
    snap_to_node, ConvolutionProbe, EquivalenceProbe, HardyProbe, PowerReindexProbe, ProbeReport,
    XinormProbe,
};
use vexmorrey::tlm::{decompose, tlm_norm};

#[derive(Parser)]
#[command(
    name = "vexmorrey",
    about = "Variable-exponent Lebesgue/Morrey/Triebel-Lizorkin-Morrey norms and inequality probes",
    long_about = None,
    after_help = "Config file: flat `key = value` lines with sectioned keys (grid.n, \
exponent.p.family, probe.convolution.m, ...); see the project README for the key \
reference. Probe reports are CSV files with columns \
instance,label,lhs,rhs,ratio,degenerate plus a summary.txt. The output directory \
comes from output.dir and can be overridden with VEXMORREY_OUT."
)]
struct Cli {
    /// Path to the run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Lebesgue,
    Morrey,
    Tlm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Convolution,
    Equivalence,
    Xinorm,
    Hardy,
    PowerReindex,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusAction {
    Generate,
    List,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the log-Hölder continuity of a configured exponent.
    ValidateExponent {
        /// Which exponent to certify: p, q or u.
        #[arg(long, default_value = "p")]
        which: String,
    },
    /// Evaluate a norm of a grid function read from a file (.csv or .gf64).
    Norm {
        input: PathBuf,
        #[arg(long, value_enum)]
        which: NormKind,
    },
    /// Write the weighted dyadic pieces w_j (phi_j f^)∨ as .gf64 files.
    Decompose {
        input: PathBuf,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a probe over a generated corpus; emits CSV + summary.
    Probe {
        #[arg(value_enum)]
        which: ProbeKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate or list the deterministic corpus for the current config.
    Corpus {
        #[arg(value_enum)]
        action: CorpusAction,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_input(config: &RunConfig, path: &Path) -> Result<GridFunction, Error> {
    let grid = config.grid()?;
    let f = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_csv(grid, path)?,
        _ => {
            let f = read_raw(path)?;
            if f.grid() != grid {
                return Err(Error::Input(format!(
                    "input grid {:?} does not match the configured grid {:?}",
                    f.grid(),
                    grid
                )));
            }
            f
        }
    };
    Ok(f)
}

fn emit_report(report: &ProbeReport, dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    report.write_csv(&dir.join(format!("{}.csv", report.name)))?;
    std::fs::write(dir.join(format!("{}-summary.txt", report.name)), report.summary())?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::ValidateExponent { which } => {
            let grid = config.grid()?;
            let spec = match which.as_str() {
                "p" => &config.p,
                "q" => &config.q,
                "u" => &config.u,
                other => {
                    return Err(Error::Config(format!(
                        "--which must be p, q or u, got {other:?}"
                    )))
                }
            };
            let field = spec.build(grid)?;
            let cert = field.log_holder_certificate(config.cert_threshold)?;
            println!(
                "exponent {which}: c_log_local = {:.6}, c_inf = {:.6}, 1/p_inf = {:.6}, threshold = {}",
                cert.c_log_local, cert.c_inf, cert.limit_value, cert.threshold
            );
            println!(
                "local: {}, global: {}",
                if cert.passes_local { "pass" } else { "fail" },
                if cert.passes_global { "pass" } else { "fail" }
            );
            Ok(if cert.passes() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Norm { input, which } => {
            let f = load_input(&config, &input)?;
            let grid = config.grid()?;
            match which {
                NormKind::Lebesgue => {
                    let p = config.p.build(grid)?;
                    let value = quasi_norm(&f, &p, &DomainMask::whole(grid))?;
                    println!("norm={value}");
                }
                NormKind::Morrey => {
                    let p = config.p.build(grid)?;
                    let u = config.u.build(grid)?;
                    let family = config.ball_family(grid)?;
                    let norm = morrey_norm(&f, &p, &u, &family)?;
                    println!(
                        "argmax_center={:?} argmax_radius={}",
                        norm.argmax.center, norm.argmax.radius
                    );
                    println!("norm={}", norm.value);
                }
                NormKind::Tlm => {
                    let params = config.space_params()?;
                    for w in params.warnings() {
                        eprintln!("warning: {w}");
                    }
                    let norm = tlm_norm(&f, &params)?;
                    println!(
                        "argmax_center={:?} argmax_radius={}",
                        norm.argmax.center, norm.argmax.radius
                    );
                    println!("norm={}", norm.value);
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Decompose { input, out } => {
            let f = load_input(&config, &input)?;
            let params = config.space_params()?;
            let pieces = decompose(&f, &params)?;
            let dir = out.unwrap_or_else(|| config.output_dir());
            std::fs::create_dir_all(&dir)?;
            for (j, piece) in pieces.iter().enumerate() {
                let path = dir.join(format!("level_{j:02}.gf64"));
                write_raw(piece, &path)?;
                println!("level {j}: max |w_j (phi_j f^)∨| = {:.6e} -> {}", piece.max_abs(), path.display());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Probe { which, out } => {
            let report = run_probe(&config, which)?;
            let dir = out.unwrap_or_else(|| config.output_dir());
            emit_report(&report, &dir)?;
            print!("{}", report.summary());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Corpus { action, out } => {
            let grid = config.grid()?;
            let corpus = scalar_corpus(grid, config.corpus_seed, config.corpus_size)?;
            match action {
                CorpusAction::List => {
                    for (i, inst) in corpus.instances.iter().enumerate() {
                        println!(
                            "{i:3} {} (peak {:.4e})",
                            inst.label,
                            inst.function.max_abs()
                        );
                    }
                }
                CorpusAction::Generate => {
                    let dir = out.unwrap_or_else(|| config.output_dir());
                    std::fs::create_dir_all(&dir)?;
                    let mut manifest = String::new();
                    for (i, inst) in corpus.instances.iter().enumerate() {
                        let raw = dir.join(format!("corpus_{i:03}.gf64"));
                        let csv = dir.join(format!("corpus_{i:03}.csv"));
                        write_raw(&inst.function, &raw)?;
                        write_csv(&inst.function, &csv)?;
                        manifest.push_str(&format!("{i:3} {} {}\n", inst.label, raw.display()));
                    }
                    std::fs::write(dir.join("manifest.txt"), &manifest)?;
                    println!("wrote {} instances to {}", corpus.instances.len(), dir.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_probe(config: &RunConfig, which: ProbeKind) -> Result<ProbeReport, Error> {
    let grid = config.grid()?;
    match which {
        ProbeKind::Convolution => {
            let p = config.p.build(grid)?;
            let q = config.q.build(grid)?;
            let u = config.u.build(grid)?;
            let family = config.ball_family(grid)?;
            let corpus = sequence_corpus(
                grid,
                config.corpus_seed,
                config.corpus_size * 2,
                config.corpus_levels,
                config.corpus_mollifier_m,
            )?;
            probe_convolution_inequality(
                &corpus,
                &ConvolutionProbe {
                    p: &p,
                    q: &q,
                    u: &u,
                    m: config.convolution_m,
                    family: &family,
                    cap: config.cap_convolution,
                    cert_threshold: config.cert_threshold,
                    stability_split: Some(config.corpus_size),
                },
            )
        }
        ProbeKind::Equivalence => {
            let params = config.space_params()?;
            let j_max = config.effective_j_max(grid);
            let second = params.with_system(config.secondary_system(grid, j_max)?)?;
            let corpus = scalar_corpus(grid, config.corpus_seed, config.corpus_size * 2)?;
            probe_peetre_equivalence(
                &corpus,
                &params,
                &second,
                &EquivalenceProbe {
                    spread_cap: config.cap_equivalence,
                    stability_split: Some(config.corpus_size),
                },
            )
        }
        ProbeKind::Xinorm => {
            let p = config.p.build(grid)?;
            let radii = dyadic_radius_sweep();
            probe_xinorm(&XinormProbe {
                p: &p,
                center: snap_to_node(grid, [config.xinorm_center, 0.0]),
                radii: &radii,
                cap: config.cap_xinorm,
                cert_threshold: config.cert_threshold,
            })
        }
        ProbeKind::Hardy => {
            let p = config.p.build(grid)?;
            let q = config.q.build(grid)?;
            let u = config.u.build(grid)?;
            let family = config.ball_family(grid)?;
            let corpus = nonneg_sequence_corpus(
                grid,
                config.corpus_seed,
                config.corpus_size,
                config.corpus_levels,
                config.corpus_mollifier_m,
            )?;
            probe_hardy(
                &corpus,
                &HardyProbe {
                    p: &p,
                    q: &q,
                    u: &u,
                    delta: config.hardy_delta,
                    family: &family,
                },
            )
        }
        ProbeKind::PowerReindex => {
            let p = config.p.build(grid)?;
            let q = config.q.build(grid)?;
            let u = config.u.build(grid)?;
            let family = config.ball_family(grid)?;
            let corpus = sequence_corpus(
                grid,
                config.corpus_seed,
                config.corpus_size,
                3,
                config.corpus_mollifier_m,
            )?;
            probe_power_reindex(
                &corpus,
                &PowerReindexProbe {
                    p: &p,
                    q: &q,
                    u: &u,
                    powers: &config.reindex_powers,
                    family: &family,
                    tolerance: config.reindex_tolerance,
                },
            )
        }
    }
}
