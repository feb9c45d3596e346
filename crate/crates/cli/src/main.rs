mod commands;
mod config;
mod verify;

use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, Command};

use config::{CliError, Layers};

fn env_name(long: &str) -> &'static str {
    let name = format!("FLOQUET_{}", long.to_uppercase().replace('-', "_"));
    Box::leak(name.into_boxed_str())
}

fn knob(long: &'static str, help: &'static str) -> Arg {
    Arg::new(long).long(long).env(env_name(long)).help(help)
}

fn num(long: &'static str, help: &'static str) -> Arg {
    knob(long, help).value_parser(value_parser!(f64)).allow_negative_numbers(true)
}

fn count(long: &'static str, help: &'static str) -> Arg {
    knob(long, help).value_parser(value_parser!(usize))
}

fn text(long: &'static str, help: &'static str) -> Arg {
    knob(long, help).value_parser(value_parser!(String))
}

fn switch(long: &'static str, help: &'static str) -> Arg {
    knob(long, help)
        .value_parser(value_parser!(bool))
        .num_args(0..=1)
        .default_missing_value("true")
        .action(ArgAction::Set)
}

fn common(cmd: Command) -> Command {
    cmd.arg(text("config", "flat TOML file with the same keys as the flags"))
        .arg(text("output", "output file; standard output when absent"))
}

fn threaded(cmd: Command) -> Command {
    cmd.arg(count("threads", "worker threads for grid sweeps (default 1)"))
}

fn evolve_command() -> Command {
    common(Command::new("evolve").about("Entanglement entropy under a periodic drive"))
        .arg(text("family", "two-step | harmonic | non-hermitian (default two-step)"))
        .arg(num("T", "drive period (default 2.5)"))
        .arg(num("lambda", "defect strength of the second half-period (default 0.5)"))
        .arg(count("L", "half length; the chain has 2L sites (default 200)"))
        .arg(count("cycles", "number of drive periods (default 300)"))
        .arg(count("n-sub", "midpoint steps per period for the harmonic drive (default 256)"))
        .arg(switch("profile", "emit every cut instead of the half chain"))
        .arg(count("samples", "samples per period; 1 is stroboscopic (default 1)"))
        .arg(count("every", "keep every n-th sample (default 1)"))
        .arg(num("gauge-offset", "shift of the period origin, in [0, T) (default 0)"))
}

fn spectrum_command() -> Command {
    threaded(common(Command::new("spectrum").about("Floquet spectra and average energies")))
        .arg(text("mode", "roots | sp | mb | free-lowk | kato-grid (default roots)"))
        .arg(text("family", "harmonic | two-step, for --mode sp (default harmonic)"))
        .arg(count("L", "half length (default 50)"))
        .arg(count("sites", "number of sites 2L; overrides --L"))
        .arg(count("N", "particle number (default half filling)"))
        .arg(num("T", "drive period (default 2.5)"))
        .arg(text("T-list", "comma-separated periods for --mode mb; adds a T column"))
        .arg(num("lambda", "two-step defect strength (default 0.5)"))
        .arg(num("delta", "nearest-neighbour interaction for --mode mb (default 0)"))
        .arg(count("K", "number of states for --mode free-lowk (default 100000)"))
        .arg(switch("all-fillings", "free-lowk over every particle number"))
        .arg(switch("compare", "add the root-vs-diagonalization residual column"))
        .arg(text("method", "analytic | numeric average energies (default analytic)"))
}

fn phase_command() -> Command {
    threaded(common(Command::new("phase").about("PT or heating phase diagram on a (T, lambda) grid")))
        .arg(text("kind", "pt | heating (default pt)"))
        .arg(text("family", "two-step | harmonic, for --kind heating (default two-step)"))
        .arg(count("L", "half length (default 200)"))
        .arg(num("T-min", "smallest period (default 2.0)"))
        .arg(num("T-max", "largest period (default 4.0)"))
        .arg(num("T-step", "period step (default 0.05)"))
        .arg(num("lambda-min", "smallest lambda (default 1.0)"))
        .arg(num("lambda-max", "largest lambda (default 2.4)"))
        .arg(num("lambda-step", "lambda step (default 0.05)"))
        .arg(num("pt-tol", "tolerance on ||u| - 1| (default 1e-6)"))
        .arg(count("cycles", "cycles per heating run (default 60)"))
        .arg(count("n-sub", "harmonic midpoint steps (default 256)"))
        .arg(count("window-start", "first cycle of the slope fit (default 5)"))
        .arg(count("window-end", "last cycle of the slope fit (default 60)"))
        .arg(num("slope-threshold", "heating threshold in nats per cycle (default 0.02)"))
}

fn gap_command() -> Command {
    threaded(common(Command::new("gap").about("Quasienergy gap against the drive period")))
        .arg(text("family", "harmonic | two-step (default harmonic)"))
        .arg(num("lambda", "two-step defect strength (default 0.5)"))
        .arg(count("L", "half length (default 200)"))
        .arg(num("T-min", "smallest period (default 0.2)"))
        .arg(num("T-max", "largest period (default 4.2)"))
        .arg(num("T-step", "period step (default 0.1)"))
}

fn verify_command() -> Command {
    common(Command::new("verify").about("Run the built-in invariant suites"))
        .arg(text("suite", "all | su2 | eq4 | roots | sw | kato | lowk | mb | pt | heating (default all)"))
}

fn cli() -> Command {
    Command::new("driven-impurity")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Periodically driven impurities in free-fermion chains")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(evolve_command())
        .subcommand(spectrum_command())
        .subcommand(phase_command())
        .subcommand(gap_command())
        .subcommand(verify_command())
}

fn run() -> Result<ExitCode, CliError> {
    let matches = cli().get_matches();
    // single-threaded kernels keep every output byte-identical
    faer::set_global_parallelism(faer::Par::Seq);
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = cli().find_subcommand(name).expect("known subcommand").clone();
    let mut layers = Layers::new(sub, &command)?;
    match name {
        "evolve" => commands::evolve(&mut layers)?,
        "spectrum" => commands::spectrum(&mut layers)?,
        "phase" => commands::phase(&mut layers)?,
        "gap" => commands::gap(&mut layers)?,
        "verify" => return verify::run(&mut layers),
        _ => unreachable!("clap rejects unknown subcommands"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
