use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use turbox::cli::{
    configure_threads, parse_bound, parse_constraint, parse_grid, run, CliError, Command, ConfigFile, Format,
    ModelSource, RunConfig,
};
use turbox::optimize::StudySpec;
use turbox::{Family, Params};

/// Thermodynamic uncertainty of virtual-qubit thermal machines.
///
/// Model parameters are passed as `--NAME VALUE` using the family's parameter names,
/// e.g. `turbox tur --model qubit --p 1 --R 0.3 --g 0.25 --delta 0`.
#[derive(Parser)]
#[command(name = "turbox", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a model and report every admissibility test.
    Validate(Common),
    /// Perturbative steady state and its ingredients.
    Steady(Common),
    /// Currents, entropy production and the uncertainty decomposition.
    Tur(Common),
    /// Scaled cumulant generating function of one reservoir's photon count.
    Oracle(Common),
    /// Evaluate the uncertainty on a parameter grid.
    Sweep(Common),
    /// Multi-start minimization of the uncertainty.
    Optimize(Common),
}

#[derive(Args)]
struct Common {
    /// Model family: qubit, two-qubit, qutrit, fridge or qutrit-global.
    #[arg(long)]
    model: Option<Family>,
    /// JSON file with `model`, `study`, `reservoir` or `seed`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Counted reservoir label for `oracle`.
    #[arg(long)]
    reservoir: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    chi_max: f64,
    #[arg(long, default_value_t = 21)]
    chi_points: usize,
    /// Sweep axis `NAME=START:STOP:N`; repeatable, first varies slowest.
    #[arg(long)]
    grid: Vec<String>,
    /// Free search parameter `NAME=MIN:MAX`; repeatable.
    #[arg(long)]
    free: Vec<String>,
    /// Search constraint, e.g. `engine-ordering`.
    #[arg(long)]
    constraint: Vec<String>,
    #[arg(long, default_value_t = 20)]
    starts: usize,
}

/// Split `--NAME VALUE` pairs for model parameters out of the argument list.
fn split_scalars(args: Vec<String>) -> Result<(Vec<String>, Params), CliError> {
    let names: Vec<&str> = Family::ALL.iter().flat_map(|f| f.parameter_names()).collect();
    let mut rest = Vec::with_capacity(args.len());
    let mut scalars = Params::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            rest.push(a);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !names.contains(&name.as_str()) {
            rest.push(a);
            continue;
        }
        let value = match inline.or_else(|| it.next()) {
            Some(v) => v,
            None => return Err(CliError::Config(format!("--{name} needs a value"))),
        };
        let v: f64 = value.parse().map_err(|_| CliError::Config(format!("--{name} `{value}` is not a number")))?;
        scalars.insert(name, v);
    }
    Ok((rest, scalars))
}

fn config(command: Command, c: Common, scalars: Params) -> Result<RunConfig, CliError> {
    let file = match &c.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut cfg = RunConfig::new(command);
    cfg.output = c.out;
    cfg.format = c.format;
    cfg.seed = c.seed.or(file.seed).or(file.study.as_ref().map(|s| s.seed)).unwrap_or(0);
    cfg.reservoir = c.reservoir.or(file.reservoir);
    cfg.chi_max = c.chi_max;
    cfg.chi_points = c.chi_points;
    cfg.starts = c.starts;

    let mut study = file.study;
    if let Some(family) = c.model {
        match &mut study {
            Some(s) if s.family == family => {}
            _ => {
                study = Some(StudySpec {
                    family,
                    fixed: Params::new(),
                    free: Vec::new(),
                    grid: Vec::new(),
                    seed: cfg.seed,
                    constraints: Vec::new(),
                })
            }
        }
    }
    if let Some(s) = &mut study {
        s.fixed.extend(scalars);
        for g in &c.grid {
            let axis = parse_grid(g)?;
            s.grid.retain(|a| a.name != axis.name);
            s.grid.push(axis);
        }
        for b in &c.free {
            let bound = parse_bound(b)?;
            s.free.retain(|x| x.name != bound.name);
            s.free.push(bound);
        }
        for k in &c.constraint {
            s.constraints.push(parse_constraint(k)?);
        }
        cfg.model = Some(ModelSource::Family { family: s.family, params: s.fixed.clone() });
    } else if let Some(doc) = file.model {
        if !scalars.is_empty() {
            return Err(CliError::Config("parameter flags need --model".into()));
        }
        cfg.model = Some(ModelSource::Inline(doc));
    } else if !scalars.is_empty() {
        return Err(CliError::Config("parameter flags need --model".into()));
    }
    cfg.study = study;
    Ok(cfg)
}

fn main() -> ExitCode {
    let result = (|| {
        let (args, scalars) = split_scalars(std::env::args().collect())?;
        let cli = Cli::parse_from(args);
        configure_threads()?;
        let (command, common) = match cli.command {
            Cmd::Validate(c) => (Command::Validate, c),
            Cmd::Steady(c) => (Command::Steady, c),
            Cmd::Tur(c) => (Command::Tur, c),
            Cmd::Oracle(c) => (Command::Oracle, c),
            Cmd::Sweep(c) => (Command::Sweep, c),
            Cmd::Optimize(c) => (Command::Optimize, c),
        };
        let cfg = config(command, common, scalars)?;
        let outcome = run(&cfg)?;
        if cfg.output.is_none() {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.artifact.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
        Ok::<_, CliError>(outcome.exit_code)
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
