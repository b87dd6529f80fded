//! Command-line front end.
//!
//! ```text
//! lm05-decoy curve    [--config FILE] [--KEY VALUE]... [--set KEY=VALUE]...
//! lm05-decoy optimize ...
//! lm05-decoy cutoff   ...
//! lm05-decoy sample   ...
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 computation error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use config::{ConfigError, Origin, RawConfig, RunConfig, CONFIG_ENV, KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

fn command() -> Command {
    let mut shared = vec![
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help(format!("key = value config file (default: ${CONFIG_ENV})")),
        Arg::new("set")
            .long("set")
            .value_name("KEY=VALUE")
            .action(ArgAction::Append)
            .help("override any config key, e.g. --set mu_finite_b=0.35"),
    ];
    for &key in KEYS {
        shared.push(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .allow_hyphen_values(true),
        );
    }
    let sub = |name: &'static str, about: &'static str| {
        Command::new(name).about(about).args(shared.clone())
    };
    Command::new("lm05-decoy")
        .about("Decoy-state key-rate bounds for two-way LM05 quantum key distribution")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub(
            "curve",
            "rate-versus-distance CSV for the selected formulas",
        ))
        .subcommand(sub("optimize", "optimal signal intensity at one distance"))
        .subcommand(sub("cutoff", "cutoff distances and curve crossing"))
        .subcommand(sub(
            "sample",
            "Monte-Carlo sessions fed through both estimators",
        ))
}

fn load_config(
    matches: &ArgMatches,
    env_config: Option<PathBuf>,
) -> Result<RunConfig, ConfigError> {
    let path = matches
        .get_one::<String>("config")
        .map(PathBuf::from)
        .or(env_config);
    let mut raw = match path {
        Some(p) => RawConfig::parse_file(&p)?,
        None => RawConfig::default(),
    };
    let mut flags = RawConfig::default();
    for &key in KEYS {
        if let Some(v) = matches.get_one::<String>(key) {
            flags.insert(key, v, Origin::Flag)?;
        }
    }
    for pair in matches.get_many::<String>("set").into_iter().flatten() {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(ConfigError {
                origin: Some(Origin::Flag),
                key: None,
                message: format!("--set expects KEY=VALUE, found `{pair}`"),
            });
        };
        flags.insert(k.trim(), v.trim(), Origin::Flag)?;
    }
    raw.overlay(flags);
    RunConfig::from_raw(&raw)
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. `env_config` stands in for the config-file environment variable.
pub fn run<I, T>(
    args: I,
    env_config: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        return EXIT_CONFIG;
    };
    let config = match load_config(sub, env_config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match name {
        "curve" => commands::curve(&config),
        "optimize" => commands::optimize(&config),
        "cutoff" => commands::cutoff(&config),
        "sample" => commands::sample(&config),
        _ => unreachable!("clap only accepts known subcommands"),
    };
    let text = match result {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_COMPUTE;
        }
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => out.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_COMPUTE;
    }
    EXIT_OK
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let env_config = std::env::var_os(CONFIG_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        env_config,
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}
