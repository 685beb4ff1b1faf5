use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relmonad_cli::{cmd_list, emit, execute, parse_param, CliError, Command, Format, RunManifest, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "relmonad", version, about = "Run, check and prove the relmonad case studies")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate a target program and list its outcomes.
    Run(Opts),
    /// Check the target's triple by enumeration.
    Check(Opts),
    /// Execute the target's proof script and compose it.
    Prove(Opts),
    /// Generate (and by default discharge) verification conditions.
    Vcgen(Opts),
    /// List targets, their commands and parameters.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Opts {
    /// Target name (see `relmonad list`).
    #[arg(long)]
    target: Option<String>,
    /// Target parameter, repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    params: Vec<(String, String)>,
    /// Kleene iteration budget per recursion.
    #[arg(long)]
    fuel: Option<usize>,
    /// Largest state or context domain to enumerate.
    #[arg(long)]
    state_cap: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON manifest; flags given on the command line override it.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl Opts {
    fn manifest(self) -> Result<RunManifest, CliError> {
        let mut m = match &self.manifest {
            Some(path) => RunManifest::from_file(path)?,
            None => RunManifest::default(),
        };
        if let Some(t) = self.target {
            m.target = t;
        }
        if m.target.is_empty() {
            return Err(CliError::InvalidParameter { name: "target".into(), reason: "no target given".into() });
        }
        m.params.extend(self.params);
        m.fuel = self.fuel.or(m.fuel);
        m.state_cap = self.state_cap.or(m.state_cap);
        m.format = self.format.or(m.format);
        m.out = self.out.or(m.out);
        Ok(m)
    }
}

fn run(cmd: Command, opts: Opts) -> Result<i32, CliError> {
    let m = opts.manifest()?;
    let report = execute(cmd, &m)?;
    if let Some(text) = emit(&report, m.format.unwrap_or_default(), m.out.as_deref())? {
        print!("{text}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Sub::Run(o) => run(Command::Run, o),
        Sub::Check(o) => run(Command::Check, o),
        Sub::Prove(o) => run(Command::Prove, o),
        Sub::Vcgen(o) => run(Command::Vcgen, o),
        Sub::List { format } => {
            print!("{}", cmd_list(format));
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
