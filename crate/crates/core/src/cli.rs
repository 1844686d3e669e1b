//! The `rectifier` command line.
//!
//! Data goes to stdout or `--out`; diagnostics go to stderr. Exit status is
//! 0 on success, 1 when the computation rejects its input and 2 for usage
//! errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fisher::{optimal_time, FisherEvaluator, FisherOptions, Method, OptimalTime, OptimalTimeOptions};
use crate::io::config::{key_applies, load_config, model_params, RawConfig, RunConfig};
use crate::io::output::{fmt_data, fmt_sig6, write_csv, write_files, write_table, TIME_UNIT};
use crate::io::presets::{preset, IDS};
use crate::model::{ModelKind, ModelParams, Param};
use crate::multilevel::{multilevel_rates, RateSet5};
use crate::sweep::{run_sweep, run_sweep_with_threads, Grid, SweepResult};
use crate::tls::tls_rates;

#[derive(Debug, Parser)]
#[command(name = "rectifier", version, about = "Donor-acceptor rectifier populations and Fisher information")]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Time tolerance of the optimal-time refinement.
    #[arg(long, global = true, value_name = "T")]
    tol: Option<f64>,
    /// Central-difference step.
    #[arg(long = "fd-step", global = true, value_name = "H")]
    fd_step: Option<f64>,
    /// Probability floor of the Fisher sum.
    #[arg(long = "p-floor", global = true, value_name = "P")]
    p_floor: Option<f64>,
    /// Write data here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every transition rate; both models unless --model is given.
    Rates {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Population trace on a time grid.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        /// Time grid: linear(a, b, n), log(a, b, n) or values(x, ...).
        #[arg(long, default_value = "linear(0, 40, 401)")]
        times: String,
    },
    /// Fisher information about one parameter on a time grid.
    Fisher {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value = "linear(0, 40, 401)")]
        times: String,
        /// central_fd or analytic_chain.
        #[arg(long, default_value = "central_fd")]
        method: String,
    },
    /// Steady-state populations, and I(theta) when --theta is given.
    Steady {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value = "central_fd")]
        method: String,
    },
    /// Run the sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a figure preset.
    Figure {
        #[arg(required_unless_present = "list")]
        id: Option<String>,
        /// List preset ids and exit.
        #[arg(long)]
        list: bool,
    },
}

/// Model parameters; anything omitted takes its documented default.
#[derive(Debug, Args)]
struct ModelArgs {
    /// tls or multilevel.
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "eps-d", allow_negative_numbers = true)]
    eps_d: Option<f64>,
    #[arg(long = "eps-a", allow_negative_numbers = true)]
    eps_a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega0: Option<f64>,
    #[arg(long = "mu-l", allow_negative_numbers = true)]
    mu_l: Option<f64>,
    #[arg(long = "mu-r", allow_negative_numbers = true)]
    mu_r: Option<f64>,
    #[arg(long = "t-l", allow_negative_numbers = true)]
    t_l: Option<f64>,
    #[arg(long = "t-r", allow_negative_numbers = true)]
    t_r: Option<f64>,
    /// Two-level hybridization prefactor.
    #[arg(long = "gamma-hyb", allow_negative_numbers = true)]
    gamma_hyb: Option<f64>,
    #[arg(long = "gamma-l", allow_negative_numbers = true)]
    gamma_l: Option<f64>,
    #[arg(long = "gamma-r", allow_negative_numbers = true)]
    gamma_r: Option<f64>,
    #[arg(long = "gamma-da", allow_negative_numbers = true)]
    gamma_da: Option<f64>,
    #[arg(long = "gamma-ad", allow_negative_numbers = true)]
    gamma_ad: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long = "t-vib", allow_negative_numbers = true)]
    t_vib: Option<f64>,
    /// Initial populations, comma separated.
    #[arg(long, allow_negative_numbers = true)]
    p0: Option<String>,
}

impl ModelArgs {
    fn entries(&self) -> Vec<(&'static str, &'static str, f64)> {
        let all = [
            ("--eps-d", "model.eps_d", self.eps_d),
            ("--eps-a", "model.eps_a", self.eps_a),
            ("--omega0", "vibration.omega0", self.omega0),
            ("--mu-l", "leads.mu_l", self.mu_l),
            ("--mu-r", "leads.mu_r", self.mu_r),
            ("--t-l", "leads.t_l", self.t_l),
            ("--t-r", "leads.t_r", self.t_r),
            ("--gamma-hyb", "model.gamma_hyb", self.gamma_hyb),
            ("--gamma-l", "model.gamma_l", self.gamma_l),
            ("--gamma-r", "model.gamma_r", self.gamma_r),
            ("--gamma-da", "model.gamma_da", self.gamma_da),
            ("--gamma-ad", "model.gamma_ad", self.gamma_ad),
            ("--gamma0", "model.gamma0", self.gamma0),
            ("--lambda", "model.lambda", self.lambda),
            ("--t-vib", "vibration.t_vib", self.t_vib),
        ];
        all.into_iter().filter_map(|(f, k, v)| v.map(|v| (f, k, v))).collect()
    }

    fn kind(&self) -> Result<Option<ModelKind>> {
        self.model.as_deref().map(str::parse).transpose()
    }

    /// Parameters of `kind`; with `lenient`, flags of the other model are
    /// ignored instead of rejected.
    fn params(&self, kind: ModelKind, lenient: bool) -> Result<ModelParams> {
        let entries = self.entries();
        let mut cfg = RawConfig::default();
        for (flag, key, v) in &entries {
            if lenient && !key_applies(kind, key) {
                continue;
            }
            if !key_applies(kind, key) {
                return Err(Error::Domain(format!("{flag} is not a parameter of the {kind} model")));
            }
            cfg.insert(key, fmt_data(*v));
        }
        model_params(&cfg, kind).map_err(|e| match e {
            Error::ConfigParse { message, .. } => {
                let message = entries.iter().fold(message, |m, (flag, key, _)| m.replace(key, flag));
                Error::Domain(message)
            }
            other => other,
        })
    }

    fn initial(&self, params: &ModelParams) -> Result<Vec<f64>> {
        match &self.p0 {
            None => Ok(params.default_initial()),
            Some(s) => s
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Domain(format!("--p0: cannot parse '{s}'"))))
                .collect(),
        }
    }
}

/// Failure split by exit status.
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn fisher_options(cli: &Cli, method: &str) -> Result<FisherOptions> {
    let d = FisherOptions::default();
    Ok(FisherOptions { method: method.parse::<Method>()?, step: cli.fd_step.or(d.step), p_floor: cli.p_floor.unwrap_or(d.p_floor) })
}

/// Sends `write` to `--out` or stdout.
fn emit(cli: &Cli, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &cli.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Rates { model } => {
            let kinds = match model.kind()? {
                Some(k) => vec![(k, false)],
                None => vec![(ModelKind::Tls, true), (ModelKind::Multilevel, true)],
            };
            let mut rows = Vec::new();
            for (kind, lenient) in kinds {
                match model.params(kind, lenient)? {
                    ModelParams::Tls(p) => {
                        let r = tls_rates(&p)?;
                        let named = [
                            ("a_da_plus", r.a_da_plus),
                            ("a_ad_plus", r.a_ad_plus),
                            ("a_da_minus", r.a_da_minus),
                            ("a_ad_minus", r.a_ad_minus),
                        ];
                        rows.extend(named.iter().map(|(n, v)| vec!["tls".into(), n.to_string(), fmt_data(*v)]));
                    }
                    ModelParams::Multilevel(p) => {
                        let r = multilevel_rates(&p)?;
                        rows.extend(
                            RateSet5::NAMES
                                .iter()
                                .zip(r.to_array())
                                .map(|(n, v)| vec!["multilevel".into(), n.to_string(), fmt_data(v)]),
                        );
                    }
                }
            }
            let cols = [("model".to_string(), "-"), ("rate".to_string(), "-"), ("value".to_string(), "eV")];
            emit(cli, stdout, |w| write_table(&cols, &rows, w))?;
        }
        Command::Evolve { model, times } => {
            let params = model.params(model.kind()?.unwrap_or(ModelKind::Tls), false)?;
            let p0 = model.initial(&params)?;
            let times = times.parse::<Grid>()?.points()?;
            let rows = times
                .iter()
                .enumerate()
                .map(|(index, &t)| {
                    let p = params.populations(&p0, t).map_err(|e| Error::AtGridIndex { index, source: Box::new(e) })?;
                    Ok(std::iter::once(t).chain(p).map(fmt_data).collect())
                })
                .collect::<Result<Vec<Vec<String>>>>()?;
            let mut cols = vec![("t".to_string(), TIME_UNIT)];
            cols.extend(params.kind().state_labels().iter().map(|l| (l.to_string(), "1")));
            emit(cli, stdout, |w| write_table(&cols, &rows, w))?;
        }
        Command::Fisher { model, theta, times, method } => {
            let params = model.params(model.kind()?.unwrap_or(ModelKind::Tls), false)?;
            let theta = parse_theta(theta, params.kind())?;
            let p0 = model.initial(&params)?;
            let times = times.parse::<Grid>()?.points()?;
            let opts = OptimalTimeOptions { time_tol: cli.tol, ..OptimalTimeOptions::default() };
            let (series, opt) = optimal_time(&params, theta, &times, &p0, fisher_options(cli, method)?, &opts)?;
            let rows: Vec<Vec<String>> =
                series.times.iter().zip(&series.values).map(|(t, v)| vec![fmt_data(*t), fmt_data(*v)]).collect();
            let cols = [("t".to_string(), TIME_UNIT), ("I".to_string(), theta.fisher_unit())];
            emit(cli, stdout, |w| write_table(&cols, &rows, w))?;
            let summary = match opt {
                OptimalTime::Interior { t, value } => format!("interior maximum I = {} at t = {}", fmt_sig6(value), fmt_sig6(t)),
                OptimalTime::Saturating { plateau } => format!("saturating, plateau I = {}", fmt_sig6(plateau)),
                OptimalTime::Boundary { t, value } => format!("boundary maximum I = {} at t = {}", fmt_sig6(value), fmt_sig6(t)),
            };
            let _ = writeln!(stderr, "I({theta}) [{}], h = {}: {summary}", series.method, fmt_sig6(series.diff_step));
        }
        Command::Steady { model, theta, method } => {
            let params = model.params(model.kind()?.unwrap_or(ModelKind::Tls), false)?;
            let theta = theta.as_deref().map(|t| parse_theta(t, params.kind())).transpose()?;
            let ss = params.steady_state()?;
            let mut text = String::new();
            for (label, p) in params.kind().state_labels().iter().zip(&ss) {
                text.push_str(&format!("{label}_ss,{}\n", fmt_data(*p)));
            }
            if let Some(theta) = theta {
                let p0 = model.initial(&params)?;
                let ev = FisherEvaluator::new(&params, theta, &p0, fisher_options(cli, method)?)?;
                text.push_str(&format!("I_ss({theta}),{}\n", fmt_data(ev.steady()?)));
            }
            emit(cli, stdout, |w| Ok(w.write_all(text.as_bytes())?))?;
        }
        Command::Sweep { config } => {
            let run = load_config(config)?;
            let source = format!("config {}", config.display());
            sweep_and_write(cli, run, &source, stdout, stderr)?;
        }
        Command::Figure { id, list } => {
            if *list {
                for id in IDS {
                    let p = preset(id)?;
                    writeln!(stdout, "{id}\t{}", p.title).map_err(Error::from)?;
                }
                return Ok(());
            }
            let id = id.as_deref().expect("clap requires id without --list");
            let p = preset(id).map_err(|e| Failure::Usage(e.to_string()))?;
            sweep_and_write(cli, p.run, &format!("preset {id}"), stdout, stderr)?;
        }
    }
    Ok(())
}

fn parse_theta(name: &str, kind: ModelKind) -> Result<Param> {
    let invalid = || Error::InvalidParameter {
        name: name.to_string(),
        model: kind.name(),
        valid: kind.params().iter().map(|p| p.name()).collect(),
    };
    let p = name.parse::<Param>().map_err(|_| invalid())?;
    kind.check_param(p)?;
    Ok(p)
}

fn sweep_and_write(cli: &Cli, mut run: RunConfig, source: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    if let Some(h) = cli.fd_step {
        run.spec.fisher.step = Some(h);
    }
    if let Some(f) = cli.p_floor {
        run.spec.fisher.p_floor = f;
    }
    if let Some(t) = cli.tol {
        run.spec.optimal.time_tol = Some(t);
    }
    let result: SweepResult = match cli.threads {
        Some(n) => run_sweep_with_threads(&run.spec, n)?,
        None => run_sweep(&run.spec)?,
    };
    if result.n_failed() > 0 {
        let _ = writeln!(stderr, "warning: {} of {} cells failed; see the status column", result.n_failed(), result.flat().len() / result.shape[3]);
    }
    match &cli.out {
        Some(path) => write_files(&result, &run, path, source),
        None => write_csv(&result, run.layout, stdout),
    }
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}
