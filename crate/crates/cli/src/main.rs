use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use selfsim_cli::commands::{self, Riemann1d};
use selfsim_cli::config::{ExperimentConfig, KEYS};
use selfsim_cli::{output, CliError, CliResult};

fn with_config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value configuration file; flags override it"),
    );
    KEYS.iter().fold(cmd, |cmd, key| {
        cmd.arg(
            Arg::new(*key)
                .long(key.replace('_', "-"))
                .value_name("VALUE")
                .help(format!("configuration key `{key}`")),
        )
    })
}

fn cli() -> Command {
    Command::new("selfsim")
        .about("Self-similar 2D Euler flows on similarity-coordinate meshes")
        .subcommand_required(true)
        .subcommand(with_config_args(
            Command::new("build-ic").about("Construct Solution T and write its spec and interface checks"),
        ))
        .subcommand(
            Command::new("verify-t")
                .about("Check the jump conditions of a stored Solution T spec")
                .arg(Arg::new("spec").required(true).value_name("SPEC"))
                .arg(Arg::new("output").long("output").value_name("FILE").help("also write the table here")),
        )
        .subcommand(with_config_args(
            Command::new("run").about("Run the finite-volume solver from Solution T data"),
        ))
        .subcommand(
            Command::new("riemann1d")
                .about("Sample the exact 1D Riemann fan as CSV")
                .arg(Arg::new("left").long("left").required(true).value_name("RHO,V,P"))
                .arg(Arg::new("right").long("right").required(true).value_name("RHO,V,P"))
                .arg(Arg::new("gamma").long("gamma").default_value("1.4"))
                .arg(Arg::new("t").long("t").default_value("0.2"))
                .arg(Arg::new("samples").long("samples").default_value("101"))
                .arg(Arg::new("x-min").long("x-min").default_value("-0.5").allow_hyphen_values(true))
                .arg(Arg::new("x-max").long("x-max").default_value("0.5").allow_hyphen_values(true))
                .arg(Arg::new("output").long("output").value_name("FILE")),
        )
        .subcommand(
            Command::new("diagnose")
                .about("Compute estimators over the snapshots of a run directory")
                .arg(Arg::new("dir").required(true).value_name("RUN_DIR"))
                .arg(Arg::new("output").long("output").value_name("DIR").action(ArgAction::Set)),
        )
}

fn config_from(m: &ArgMatches) -> CliResult<ExperimentConfig> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => ExperimentConfig::load(Path::new(p))?,
        None => ExperimentConfig::default(),
    };
    for key in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v).map_err(CliError::Usage)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse<T: std::str::FromStr>(m: &ArgMatches, name: &str) -> CliResult<T> {
    let v = m.get_one::<String>(name).expect("defaulted");
    v.parse().map_err(|_| CliError::Usage(format!("--{name}: cannot parse `{v}`")))
}

fn triple(m: &ArgMatches, name: &str) -> CliResult<[f64; 3]> {
    let v = m.get_one::<String>(name).expect("required");
    let xs: Vec<f64> = v
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--{name}: expected rho,v,p")))?;
    <[f64; 3]>::try_from(xs).map_err(|_| CliError::Usage(format!("--{name}: expected rho,v,p")))
}

fn dispatch(m: &ArgMatches) -> CliResult<()> {
    match m.subcommand() {
        Some(("build-ic", m)) => print!("{}", commands::build_ic(&config_from(m)?)?),
        Some(("verify-t", m)) => {
            let (table, ok) = commands::verify_t(Path::new(m.get_one::<String>("spec").unwrap()))?;
            if let Some(p) = m.get_one::<String>("output") {
                output::write(Path::new(p), &table)?;
            }
            print!("{table}");
            if !ok {
                return Err(CliError::Verification("an interface exceeds its tolerance".into()));
            }
        }
        Some(("run", m)) => print!("{}", commands::run(&config_from(m)?)?),
        Some(("riemann1d", m)) => {
            let r = Riemann1d {
                left: triple(m, "left")?,
                right: triple(m, "right")?,
                gamma: parse(m, "gamma")?,
                t: parse(m, "t")?,
                samples: parse(m, "samples")?,
                x_min: parse(m, "x-min")?,
                x_max: parse(m, "x-max")?,
            };
            let csv = commands::riemann1d(&r)?.to_csv();
            match m.get_one::<String>("output") {
                Some(p) => output::write(Path::new(p), &csv)?,
                None => print!("{csv}"),
            }
        }
        Some(("diagnose", m)) => {
            let out = m.get_one::<String>("output").map(PathBuf::from);
            print!("{}", commands::diagnose(Path::new(m.get_one::<String>("dir").unwrap()), out.as_deref())?);
        }
        _ => unreachable!("subcommand required"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match dispatch(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
