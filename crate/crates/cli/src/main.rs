use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cureassess::io::{
    emit_km_plot, exit_code, format_sig, read_csv, render_km_csv, render_km_svg, run_assess,
    write_csv, write_csv_to, AssessOptions, CsvSpec, FittedModel, PlotFormat, EXIT_ERROR,
};
use cureassess::{
    fit_model, followup_summary, kaplan_meier, restrict_followup, simulate_mixture, Censoring,
    Config, Dropout, Error, Family, FamilySpec, FitOptions, Latency, Result, SimulationConfig,
};

#[derive(Parser)]
#[command(name = "cureassess", version, about = "Is a mixture cure model appropriate for this survival data?")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full three-step assessment; exit 0 when appropriate, 2 when not.
    Assess(AssessArgs),
    /// Fit parametric models with and/or without a cure fraction.
    Fit(FitArgs),
    /// Kaplan-Meier estimate and follow-up summary.
    Km(KmArgs),
    /// Simulate mixture-cure data with known ground truth.
    Simulate(SimulateArgs),
    /// Censor all follow-up at a cutoff.
    Restrict(RestrictArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Plot {
    Svg,
    Csv,
}

impl From<Plot> for PlotFormat {
    fn from(p: Plot) -> Self {
        match p {
            Plot::Svg => PlotFormat::Svg,
            Plot::Csv => PlotFormat::Csv,
        }
    }
}

#[derive(Args)]
struct Input {
    /// CSV file with one row per subject.
    input: PathBuf,
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "event")]
    event_col: String,
    /// Raw times are divided by this (365.25 turns days into years).
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    /// Label for the analysis time unit.
    #[arg(long, default_value = "")]
    time_unit: String,
}

impl Input {
    fn spec(&self) -> CsvSpec {
        CsvSpec {
            time_col: self.time_col.clone(),
            event_col: self.event_col.clone(),
            time_scale: self.time_scale,
            time_unit: self.time_unit.clone(),
        }
    }
}

#[derive(Args)]
struct AssessArgs {
    #[command(flatten)]
    input: Input,
    /// Comma-separated latency families.
    #[arg(long, value_delimiter = ',', default_value = "exponential,weibull,gamma,loglogistic,lognormal")]
    families: Vec<Family>,
    /// Evaluation time for the survivor ratio; defaults to the largest observed time.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 0.025)]
    cure_threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    r_threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha_threshold: f64,
    /// Window for the late event rate; defaults to 20% of maximum follow-up.
    #[arg(long)]
    late_window: Option<f64>,
    /// Censor follow-up at this time before assessing.
    #[arg(long)]
    restrict: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, value_enum)]
    plot: Option<Plot>,
    /// Plot file; defaults to km.svg or km.csv.
    #[arg(long)]
    plot_path: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Unused; accepted so scripted runs can pass one seed everywhere.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum CureChoice {
    Both,
    Yes,
    No,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_delimiter = ',', default_value = "exponential,weibull,gamma,loglogistic,lognormal")]
    families: Vec<Family>,
    /// Which model variants to fit.
    #[arg(long, value_enum, default_value = "both")]
    cure: CureChoice,
    #[arg(long)]
    restrict: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct KmArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    late_window: Option<f64>,
    #[arg(long)]
    restrict: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Emit the curve as a plot instead of a table.
    #[arg(long, value_enum)]
    plot: Option<Plot>,
    /// Plot file; stdout when absent.
    #[arg(long)]
    plot_path: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.4)]
    cure_fraction: f64,
    #[arg(long, default_value = "weibull")]
    family: Family,
    /// Latency parameters as name=value pairs, e.g. shape=0.8,scale=0.8.
    #[arg(long, default_value = "shape=0.8,scale=0.8")]
    params: String,
    /// admin:T, uniform:MAX, exponential:RATE, or admin:T+uniform:MAX
    /// and admin:T+exponential:RATE.
    #[arg(long, default_value = "admin:7.3+uniform:25")]
    censoring: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "event")]
    event_col: String,
    /// Written times are multiplied by this.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    #[arg(long, default_value = "")]
    time_unit: String,
    /// Follow-up cutoff applied to the simulated sample.
    #[arg(long)]
    restrict: Option<f64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ground truth (configuration and latent times) as JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct RestrictArgs {
    #[command(flatten)]
    input: Input,
    /// Follow-up cutoff, in the units of the input after scaling.
    #[arg(long)]
    restrict: f64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn parse_number(field: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| invalid(format!("{field}: `{raw}` is not a number")))?;
    Ok(v)
}

fn parse_latency(family: Family, raw: &str) -> Result<Latency<f64>> {
    let names = family.parameter_names();
    let mut values = vec![None; names.len()];
    for pair in raw.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| invalid(format!("expected name=value, got `{pair}`")))?;
        let i = names
            .iter()
            .position(|n| *n == k.trim())
            .ok_or_else(|| invalid(format!("{family} has no parameter `{}`; expected {}", k.trim(), names.join(", "))))?;
        values[i] = Some(parse_number(k.trim(), v)?);
    }
    let values: Vec<f64> = values
        .into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| invalid(format!("missing {family} parameter `{n}`"))))
        .collect::<Result<_>>()?;
    Latency::from_values(family, &values)
}

fn parse_dropout(kind: &str, v: f64) -> Result<Dropout<f64>> {
    match kind {
        "uniform" => Ok(Dropout::Uniform { max: v }),
        "exponential" | "exp" => Ok(Dropout::Exponential { rate: v }),
        other => Err(invalid(format!("unknown dropout `{other}`"))),
    }
}

fn parse_censoring(raw: &str) -> Result<Censoring<f64>> {
    let part = |p: &str| -> Result<(String, f64)> {
        let (k, v) = p
            .split_once(':')
            .ok_or_else(|| invalid(format!("expected kind:value, got `{p}`")))?;
        Ok((k.trim().to_ascii_lowercase(), parse_number(k, v)?))
    };
    match raw.split_once('+') {
        Some((a, b)) => {
            let (ka, va) = part(a)?;
            let (kb, vb) = part(b)?;
            if ka != "admin" {
                return Err(invalid("composite censoring must start with admin:T"));
            }
            Ok(Censoring::Composite {
                time: va,
                dropout: parse_dropout(&kb, vb)?,
            })
        }
        None => {
            let (k, v) = part(raw)?;
            match k.as_str() {
                "admin" => Ok(Censoring::Administrative { time: v }),
                "uniform" => Ok(Censoring::Uniform { max: v }),
                "exponential" | "exp" => Ok(Censoring::Exponential { rate: v }),
                other => Err(invalid(format!("unknown censoring `{other}`"))),
            }
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_input(input: &Input) -> Result<cureassess::Sample> {
    read_csv(&input.input, &input.spec()).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", input.input.display()),
        )),
        other => other,
    })
}

fn load(input: &Input, restrict: Option<f64>) -> Result<cureassess::Sample> {
    let s = read_input(input)?;
    match restrict {
        Some(c) => restrict_followup(&s, c),
        None => Ok(s),
    }
}

fn assess(a: AssessArgs) -> Result<i32> {
    let sample = read_input(&a.input)?;
    let opts = AssessOptions {
        dataset: a.input.input.display().to_string(),
        config: Config {
            families: a.families,
            cure_fraction_threshold: a.cure_threshold,
            r_threshold: a.r_threshold,
            tau: a.tau,
            alpha_threshold: a.alpha_threshold,
            late_window: a.late_window,
            ..Config::default()
        },
        restrict: a.restrict,
        time_scale: a.input.time_scale,
    };
    let outcome = run_assess(&sample, &opts);
    let code = exit_code(&outcome);
    let report = outcome?;
    if let Some(p) = a.plot {
        let plotted = match a.restrict {
            Some(c) => restrict_followup(&sample, c)?,
            None => sample,
        };
        let fmt = PlotFormat::from(p);
        let path = a
            .plot_path
            .unwrap_or_else(|| PathBuf::from(format!("km.{}", fmt.extension())));
        emit_km_plot(&kaplan_meier(&plotted), path, fmt)?;
    }
    let body = match a.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json()?,
    };
    emit(a.out.as_deref(), &body)?;
    Ok(code)
}

fn fit(a: FitArgs) -> Result<i32> {
    let sample = load(&a.input, a.restrict)?;
    if sample.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    let variants: &[bool] = match a.cure {
        CureChoice::Both => &[false, true],
        CureChoice::Yes => &[true],
        CureChoice::No => &[false],
    };
    let options = FitOptions::default();
    let mut fits = Vec::new();
    for &family in &a.families {
        for &cure in variants {
            let f = fit_model(&sample, &FamilySpec::new(family, cure), &options)?;
            fits.push(FittedModel::from(&f));
        }
    }
    let body = match a.format {
        Format::Json => to_json(&fits)?,
        Format::Text => fits
            .iter()
            .map(|m| {
                m.to_text("Model")
            })
            .collect::<Vec<_>>()
            .join("\n"),
    };
    emit(None, &body)?;
    Ok(0)
}

fn km(a: KmArgs) -> Result<i32> {
    let sample = load(&a.input, a.restrict)?;
    let curve = kaplan_meier(&sample);
    if let Some(p) = a.plot {
        let fmt = PlotFormat::from(p);
        match &a.plot_path {
            Some(path) => emit_km_plot(&curve, path, fmt)?,
            None => {
                let body = match fmt {
                    PlotFormat::Svg => render_km_svg(&curve),
                    PlotFormat::Csv => render_km_csv(&curve),
                };
                emit(None, &body)?;
                return Ok(0);
            }
        }
    }
    let window = a
        .late_window
        .unwrap_or_else(|| cureassess::survival::default_late_window(&sample));
    let summary = followup_summary(&sample, window)?;
    let body = match a.format {
        Format::Json => to_json(&serde_json::json!({ "summary": summary, "curve": curve }))?,
        Format::Text => {
            let mut o = String::new();
            let g = |x: f64| format_sig(x, 6);
            let _ = writeln!(o, "n = {}, events = {}", summary.n, summary.n_events);
            let _ = writeln!(o, "median follow-up = {}", g(summary.median_followup));
            let _ = writeln!(o, "max follow-up = {}", g(summary.max_followup));
            let _ = writeln!(o, "KM at max = {}", g(summary.km_at_max));
            let _ = writeln!(o, "plateau length = {}", g(summary.plateau_length));
            let _ = writeln!(
                o,
                "late event rate = {} (window {})",
                g(summary.late_event_rate),
                g(summary.late_window)
            );
            let _ = writeln!(o, "\n{:>12} {:>8} {:>8} {:>10}", "time", "at_risk", "events", "survival");
            for s in &curve.steps {
                let _ = writeln!(
                    o,
                    "{:>12} {:>8} {:>8} {:>10}",
                    g(s.time),
                    s.n_at_risk,
                    s.n_events,
                    g(s.survival)
                );
            }
            o
        }
    };
    emit(None, &body)?;
    Ok(0)
}

fn simulate(a: SimulateArgs) -> Result<i32> {
    let config = SimulationConfig {
        n: a.n,
        cure_fraction: a.cure_fraction,
        latency: parse_latency(a.family, &a.params)?,
        censoring: parse_censoring(&a.censoring)?,
        seed: a.seed,
        time_unit: a.time_unit.clone(),
    };
    let sim = simulate_mixture(&config)?;
    let sample = match a.restrict {
        Some(c) => restrict_followup(&sim.sample, c)?,
        None => sim.sample,
    };
    let spec = CsvSpec {
        time_col: a.time_col,
        event_col: a.event_col,
        time_scale: a.time_scale,
        time_unit: a.time_unit,
    };
    if let Some(p) = &a.truth {
        std::fs::write(p, to_json(&sim.truth)?)?;
    }
    match &a.out {
        Some(p) => write_csv(&sample, p, &spec)?,
        None => write_csv_to(&sample, std::io::stdout().lock(), &spec)?,
    }
    Ok(0)
}

fn restrict(a: RestrictArgs) -> Result<i32> {
    let sample = load(&a.input, Some(a.restrict))?;
    let spec = a.input.spec();
    match &a.out {
        Some(p) => write_csv(&sample, p, &spec)?,
        None => write_csv_to(&sample, std::io::stdout().lock(), &spec)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors; usage errors must not look
            // like a "not appropriate" verdict
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Assess(a) => assess(a),
        Command::Fit(a) => fit(a),
        Command::Km(a) => km(a),
        Command::Simulate(a) => simulate(a),
        Command::Restrict(a) => restrict(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
