//! `finsub`: command-line access to finite additive subgroups of GF(p^n).

mod commands;
mod output;

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "finsub", version, about = "Dickson invariants and dilation classes of subgroups of GF(p^n)")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "FINSUB_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Seed for sampled runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct FieldArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modulus, primitive element and subfields of GF(p^n).
    FieldInfo(FieldArgs),
    /// Rank-r subgroups in canonical form.
    Subgroups {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: usize,
        /// Print a seeded random sample of this size instead of all subgroups.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Dilation orbits of rank-r subgroups (JSON lines with --format json).
    Orbits {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: usize,
    },
    /// Partition of a subgroup by the theorems and by brute force.
    Classify {
        #[command(flatten)]
        field: FieldArgs,
        /// Comma-separated basis elements (little-endian base-p digits).
        #[arg(long, conflicts_with = "r")]
        basis: Option<String>,
        /// Classify every orbit representative of this rank.
        #[arg(long)]
        r: Option<usize>,
    },
    /// Evaluate an invariant on a basis.
    Eval {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        basis: String,
        /// Name such as v_1, v_12, u_23 or v_{1,10}.
        #[arg(long, conflicts_with = "exponents")]
        invariant: Option<String>,
        /// Comma-separated a_1,...,a_r of a weight-zero monomial.
        #[arg(long)]
        exponents: Option<String>,
    },
    /// Primitive solutions of the weight equation.
    Primitives {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        r: usize,
        /// Coordinate bound; defaults to twice the largest expected generator coordinate.
        #[arg(long)]
        cap: Option<u64>,
        /// Also print tilde-basis coordinates.
        #[arg(long)]
        tilde: bool,
    },
    /// Closed-form generating family for r in {3, 4, 5}.
    GenSet {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        r: usize,
    },
    /// Separating invariants for rank r.
    SepSet {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        r: usize,
    },
    /// Check that the separating set distinguishes all dilation orbits.
    Separate {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: usize,
    },
    /// Check a theorem or conjecture against brute force.
    Verify {
        #[arg(long, value_enum, required_unless_present = "conjecture", conflicts_with = "conjecture")]
        theorem: Option<TheoremArg>,
        #[arg(long, value_enum)]
        conjecture: Option<ConjectureArg>,
        #[arg(long)]
        p: u64,
        /// Ambient degree; defaults to the smallest one meeting the preconditions.
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TheoremArg {
    Field,
    Comp,
    Codim1,
    Embedding,
    Rk2,
    Rk3,
    Rk4,
    Rk4p2,
    Rk5,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConjectureArg {
    Fp3,
    Subspace,
    Fp2,
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if cli.run.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.run.jobs).build_global()?;
    }
    let seed = cli.run.seed;
    let rendered = match cli.command {
        Command::FieldInfo(f) => commands::field_info(f)?,
        Command::Subgroups { field, r, sample } => commands::subgroups(field, r, sample, seed)?,
        Command::Orbits { field, r } => commands::orbits(field, r)?,
        Command::Classify { field, basis, r } => commands::classify(field, basis.as_deref(), r)?,
        Command::Eval { field, basis, invariant, exponents } => {
            commands::eval(field, &basis, invariant.as_deref(), exponents.as_deref())?
        }
        Command::Primitives { p, r, cap, tilde } => commands::primitives(p, r, cap, tilde)?,
        Command::GenSet { p, r } => commands::gen_set(p, r)?,
        Command::SepSet { p, r } => commands::sep_set(p, r)?,
        Command::Separate { field, r } => commands::separate(field, r)?,
        Command::Verify { theorem, conjecture, p, n } => commands::verify(theorem, conjecture, p, n)?,
    };
    let mut sink: Box<dyn Write> = match &cli.run.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    rendered.write(cli.run.format, &mut sink)?;
    sink.flush()?;
    Ok(rendered.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
