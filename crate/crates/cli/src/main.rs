use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use regent::LogBase;

mod commands;

#[derive(Parser)]
#[command(name = "regent", version, about = "Nearly entropy of R-maps on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Topology validity, regular-open catalogue, Hausdorff and R-space
    /// verdicts, and the R-map verdict of an optional map.
    Check {
        space: PathBuf,
        map: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Join-sequence counts, cycle certificate and entropy of an R-map.
    Entropy {
        space: PathBuf,
        map: PathBuf,
        /// Regular cover document; defaults to the finest regular cover.
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Invariant set such as `{0,2}`; defaults to the whole space.
        #[arg(long = "K", value_name = "SET")]
        k: Option<String>,
        /// Also take the supremum over all invariant sets.
        #[arg(long)]
        sup: bool,
        #[arg(long, default_value_t = 12)]
        mmax: usize,
        #[arg(long, default_value = "e")]
        base: LogBase,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Word counts, growth certificate and spectral oracle of a subshift.
    Sft {
        sft: PathBuf,
        #[arg(long, default_value_t = 20)]
        mmax: usize,
        #[arg(long, default_value = "e")]
        base: LogBase,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Product system f×h and the entropy product inequalities.
    Product {
        space1: PathBuf,
        space2: PathBuf,
        map1: PathBuf,
        map2: PathBuf,
        #[arg(long, default_value_t = 12)]
        mmax: usize,
        #[arg(long, default_value = "e")]
        base: LogBase,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the randomised verification suite; exit 0 iff every check holds.
    Verify {
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What a command hands back to the shell.
pub struct Rendered {
    pub table: String,
    pub json: String,
    /// False when a verification inside the command failed.
    pub ok: bool,
}

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Engine(regent::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<regent::Error> for CliError {
    fn from(e: regent::Error) -> Self {
        CliError::Engine(e)
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn run(cli: Cli) -> Result<(Rendered, Option<PathBuf>), CliError> {
    Ok(match cli.command {
        Command::Check { space, map, out } => (commands::check(&space, map.as_deref())?, out),
        Command::Entropy {
            space,
            map,
            cover,
            k,
            sup,
            mmax,
            base,
            out,
        } => {
            let args = commands::EntropyArgs {
                cover: cover.as_deref(),
                k: k.as_deref(),
                sup,
                mmax,
                base,
            };
            (commands::entropy(&space, &map, args)?, out)
        }
        Command::Sft {
            sft,
            mmax,
            base,
            out,
        } => (commands::sft(&sft, mmax, base)?, out),
        Command::Product {
            space1,
            space2,
            map1,
            map2,
            mmax,
            base,
            out,
        } => (commands::product([&space1, &space2], [&map1, &map2], mmax, base)?, out),
        Command::Verify { config, seed, out } => (commands::verify(config.as_deref(), seed)?, out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((r, out)) => {
            print!("{}", r.table);
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &r.json) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if r.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
