use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spectral_csp::cheeger::Gamma2Config;
use spectral_csp::commands::{self, AssignSpec, FamilySpec, PermSpec};
use spectral_csp::format::{parse_instance, serialize_instance};
use spectral_csp::generate::{generate_even_xor, generate_random};
use spectral_csp::report::RunReport;
use spectral_csp::CspInstance;

#[derive(Parser)]
#[command(name = "spectral-csp", version, about = "Spectral energy, sparsification and Cheeger analysis for field-affine CSPs")]
struct Cli {
    /// Emit the report as one JSON object.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral energy at given or random assignments.
    Energy {
        file: PathBuf,
        /// Comma-separated values, random:K, or all-boolean.
        #[arg(long)]
        assign: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spectral sparsifier via the lifted code, verified before writing.
    Sparsify {
        file: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// exhaustive or sampled:K
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random fractional assignments in the verification.
        #[arg(long, default_value_t = 100)]
        random: usize,
    },
    /// Checks that a reweighted instance preserves energies within 1±eps.
    Verify {
        original: PathBuf,
        sparse: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// auto, exhaustive, sampled:K or none
        #[arg(long, default_value = "auto")]
        family: String,
    },
    /// Incidence and crossing matrices for an ordering.
    Matrices {
        file: PathBuf,
        /// id, all, or 1-based variables from smallest to largest value
        #[arg(long, default_value = "id")]
        perm: String,
    },
    /// Expansion, γ₂ upper bound and the Cheeger inequality checks.
    Cheeger {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random instance file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Arity, or the largest even arity with --even-xor.
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, default_value_t = 1.0)]
        wmin: f64,
        #[arg(long, default_value_t = 1.0)]
        wmax: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Even-arity XOR constraints over F_2 covering every variable.
        #[arg(long)]
        even_xor: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<CspInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, instance: &CspInstance) -> Result<()> {
    fs::write(path, serialize_instance(instance)).with_context(|| format!("writing {}", path.display()))
}

fn run(command: Command) -> Result<Option<RunReport>> {
    let report = match command {
        Command::Energy { file, assign, seed } => {
            let spec: AssignSpec = assign.parse()?;
            commands::energy(&load(&file)?, &spec, seed)?
        }
        Command::Sparsify {
            file,
            eps,
            seed,
            mode,
            out,
            random,
        } => {
            let mode = commands::parse_mode(&mode)?;
            let (mut report, sparse) = commands::sparsify(&load(&file)?, eps, seed, mode, random)?;
            if let Some(out) = out {
                write(&out, &sparse)?;
                report.param("out", out.display());
            }
            report
        }
        Command::Verify {
            original,
            sparse,
            eps,
            random,
            seed,
            family,
        } => {
            let family: FamilySpec = family.parse()?;
            commands::verify(&load(&original)?, &load(&sparse)?, eps, random, seed, family)?
        }
        Command::Matrices { file, perm } => {
            let spec: PermSpec = perm.parse()?;
            commands::matrices(&load(&file)?, &spec)?
        }
        Command::Cheeger {
            file,
            restarts,
            iterations,
            seed,
        } => commands::cheeger(
            &load(&file)?,
            &Gamma2Config {
                restarts,
                iterations,
                seed,
            },
        )?,
        Command::Gen {
            n,
            m,
            p,
            arity,
            wmin,
            wmax,
            seed,
            even_xor,
            out,
        } => {
            let instance = if even_xor {
                generate_even_xor(n, m, arity, (wmin, wmax), seed)?
            } else {
                generate_random(n, m, p, arity, (wmin, wmax), seed)?
            };
            let Some(out) = out else {
                print!("{}", serialize_instance(&instance));
                return Ok(None);
            };
            write(&out, &instance)?;
            let mut report = RunReport::new("gen");
            report
                .param("n", n)
                .param("m", m)
                .param("p", instance.field())
                .param("arity", arity)
                .param("even_xor", even_xor)
                .param("out", out.display());
            report.seed = Some(seed);
            report.value("total_weight", instance.total_weight());
            report
        }
    };
    Ok(Some(report))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(mut report)) => {
            if cli.timing {
                report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
