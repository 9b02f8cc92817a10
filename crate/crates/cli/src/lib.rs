//! `drxsim` command-line front end.

pub mod error;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use drxsim_core::config::{fingerprint, AnalysisSettings, LoadedConfig};
use drxsim_core::{
    analyze, compare, generate_trace, parse_sample_series, simulate, summary_csv, sweep, EnergyReport, OutputFormat,
    RunConfig, Scenario,
};

pub use error::Failure;

/// Output directory used when neither flag, environment nor config name one.
pub const DEFAULT_OUT_DIR: &str = "drxsim-out";

#[derive(Debug, Parser)]
#[command(name = "drxsim", version, about = "Radio energy simulation for edge and cloud placements")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, env = "DRXSIM_OUT", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated output formats: json, csv, svg.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_format)]
    pub format: Option<Vec<OutputFormat>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every scenario and write one report per scenario.
    Simulate,
    /// Write the packet trace of each scenario as CSV.
    GenTrace {
        /// Only this scenario.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Warm-up removal and slot-minimum filtering of a measured series.
    Analyze {
        series: PathBuf,
        /// Slot length in seconds.
        #[arg(long)]
        slot_len: Option<f64>,
        /// Warm-up to discard in seconds.
        #[arg(long)]
        warmup: Option<f64>,
    },
    /// Energy ratios of saved reports against a baseline.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        baseline: String,
    },
    /// Re-run scenarios over a range of parameter values.
    Sweep {
        /// Dotted parameter name, e.g. `workload.resource_bytes`.
        #[arg(long)]
        param: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[arg(long)]
        scenario: Option<String>,
    },
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s.trim() {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        "svg" => Ok(OutputFormat::Svg),
        other => Err(format!("unknown format `{other}` (expected json, csv or svg)")),
    }
}

/// Lines the caller should print to stdout on success.
pub type Output = Vec<String>;

pub fn run(cli: Cli) -> Result<Output, Failure> {
    let ctx = Context::new(&cli.global)?;
    match cli.command {
        Command::Simulate => cmd_simulate(&ctx),
        Command::GenTrace { scenario } => cmd_gen_trace(&ctx, scenario.as_deref()),
        Command::Analyze {
            series,
            slot_len,
            warmup,
        } => cmd_analyze(&ctx, &series, slot_len, warmup),
        Command::Compare { reports, baseline } => cmd_compare(&ctx, &reports, &baseline),
        Command::Sweep {
            param,
            values,
            scenario,
        } => cmd_sweep(&ctx, param, values, scenario.as_deref()),
    }
}

struct Context {
    config: Option<(PathBuf, LoadedConfig)>,
    out_dir: PathBuf,
    formats: Vec<OutputFormat>,
}

impl Context {
    fn new(global: &GlobalArgs) -> Result<Self, Failure> {
        let config = match &global.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::read(path, e))?;
                let loaded = RunConfig::from_json(&text).map_err(|e| Failure::from(e).context(path.display()))?;
                Some((path.clone(), loaded))
            }
            None => None,
        };
        // Relative directories in a config are resolved next to the config file.
        let out_dir = global.out_dir.clone().unwrap_or_else(|| {
            config
                .as_ref()
                .and_then(|(path, c)| {
                    let dir = c.config.output.directory.as_ref()?;
                    Some(path.parent().unwrap_or(Path::new(".")).join(dir))
                })
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
        });
        let formats = match &global.format {
            Some(f) if f.is_empty() => return Err(Failure::input("--format: at least one format is required")),
            Some(f) => f.clone(),
            None => config
                .as_ref()
                .map_or_else(|| vec![OutputFormat::Json], |(_, c)| c.config.output.formats.clone()),
        };
        Ok(Context {
            config,
            out_dir,
            formats,
        })
    }

    fn loaded(&self) -> Result<&LoadedConfig, Failure> {
        self.config
            .as_ref()
            .map(|(_, c)| c)
            .ok_or_else(|| Failure::input("this command needs --config"))
    }

    fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Failure::write(&self.out_dir, e))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::write(&path, e))?;
        Ok(path)
    }

    fn scenarios(&self, only: Option<&str>) -> Result<Vec<Scenario>, Failure> {
        let all = self.loaded()?.config.scenarios();
        match only {
            None => Ok(all),
            Some(label) => {
                let picked: Vec<Scenario> = all.into_iter().filter(|s| s.label == label).collect();
                if picked.is_empty() {
                    Err(Failure::input(format!("--scenario: no scenario labelled `{label}`")))
                } else {
                    Ok(picked)
                }
            }
        }
    }
}

/// Report labels become file names, so keep them to a safe alphabet.
fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '@') { c } else { '_' })
        .collect()
}

fn cmd_simulate(ctx: &Context) -> Result<Output, Failure> {
    let loaded = ctx.loaded()?;
    let mut reports = Vec::new();
    for scenario in loaded.config.scenarios() {
        let mut report = simulate(&scenario).map_err(|e| Failure::from(e).context(&scenario.label))?;
        report.fingerprint = Some(loaded.fingerprint.clone());
        reports.push(report);
    }
    let mut out = Vec::new();
    for r in &reports {
        if ctx.wants(OutputFormat::Json) {
            ctx.write(&format!("{}.json", file_stem(&r.label)), &r.to_json())?;
        }
        out.push(format!(
            "{}: {:.6} J over {} s, mean {:.6} W / {:.3} mA",
            r.label,
            r.total_energy,
            r.horizon,
            r.mean_power,
            r.mean_current * 1e3
        ));
    }
    if ctx.wants(OutputFormat::Csv) {
        ctx.write("summary.csv", &summary_csv(&reports))?;
    }
    if ctx.wants(OutputFormat::Svg) {
        let bars: Vec<(String, f64)> = reports.iter().map(|r| (r.label.clone(), r.mean_current * 1e3)).collect();
        ctx.write("mean_current.svg", &svg::bar_chart("Mean radio current", "mA", &bars))?;
    }
    out.push(format!("wrote {} report(s) to {}", reports.len(), ctx.out_dir.display()));
    Ok(out)
}

fn cmd_gen_trace(ctx: &Context, only: Option<&str>) -> Result<Output, Failure> {
    let mut out = Vec::new();
    for s in ctx.scenarios(only)? {
        let trace = generate_trace(&s.workload, &s.path).map_err(|e| Failure::from(e).context(&s.label))?;
        let path = ctx.write(&format!("{}.trace.csv", file_stem(&s.label)), &trace.to_csv())?;
        out.push(format!("{}: {} events -> {}", s.label, trace.events.len(), path.display()));
    }
    Ok(out)
}

fn cmd_analyze(ctx: &Context, series: &Path, slot_len: Option<f64>, warmup: Option<f64>) -> Result<Output, Failure> {
    let defaults = ctx
        .config
        .as_ref()
        .map_or_else(AnalysisSettings::default, |(_, c)| c.config.analysis.clone());
    let slot_len = slot_len.unwrap_or(defaults.slot_len_s);
    let warmup = warmup.unwrap_or(defaults.warmup_s);
    let text = fs::read_to_string(series).map_err(|e| Failure::read(series, e))?;
    let parsed = parse_sample_series(&text).map_err(|e| Failure::from(e).context(series.display()))?;
    let report = analyze(&parsed, slot_len, warmup).map_err(|e| Failure::from(e).context(series.display()))?;

    let mut value = serde_json::to_value(&report).expect("analysis serializes");
    value["fingerprint"] = fingerprint(&text).into();
    let json = serde_json::to_string_pretty(&value).expect("analysis serializes") + "\n";
    let stem = series.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    ctx.write(&format!("{}.analysis.json", file_stem(stem)), &json)?;
    Ok(vec![json.trim_end().to_owned()])
}

fn read_report(path: &Path) -> Result<EnergyReport, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::read(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: not an energy report: {e}", path.display())))
}

fn cmd_compare(ctx: &Context, paths: &[PathBuf], baseline: &str) -> Result<Output, Failure> {
    let reports = paths.iter().map(|p| read_report(p)).collect::<Result<Vec<_>, _>>()?;
    let table = compare(&reports, baseline)?;
    let csv = table.to_csv();
    ctx.write("comparison.csv", &csv)?;
    if ctx.wants(OutputFormat::Svg) {
        let bars: Vec<(String, f64)> = table.rows.iter().map(|r| (r.label.clone(), r.ratio)).collect();
        let title = format!("Energy relative to {baseline}");
        ctx.write("comparison.svg", &svg::bar_chart(&title, "ratio", &bars))?;
    }
    Ok(vec![csv.trim_end().to_owned()])
}

fn cmd_sweep(
    ctx: &Context,
    param: Option<String>,
    values: Option<Vec<f64>>,
    only: Option<&str>,
) -> Result<Output, Failure> {
    let loaded = ctx.loaded()?;
    let configured = loaded.config.sweep.as_ref();
    let param = param
        .or_else(|| configured.map(|s| s.parameter.clone()))
        .ok_or_else(|| Failure::input("--param is required when the config has no sweep section"))?;
    let values = values
        .or_else(|| configured.map(|s| s.values.clone()))
        .ok_or_else(|| Failure::input("--values is required when the config has no sweep section"))?;
    if values.is_empty() {
        return Err(Failure::input("--values: at least one value is required"));
    }

    let mut all = Vec::new();
    let mut lines = Vec::new();
    let mut curves = Vec::new();
    for s in ctx.scenarios(only)? {
        let mut reports = sweep(&s, &param, &values).map_err(|e| Failure::from(e).context(&s.label))?;
        for r in &mut reports {
            r.fingerprint = Some(loaded.fingerprint.clone());
        }
        let points: Vec<(f64, f64)> = values.iter().zip(&reports).map(|(&v, r)| (v, r.mean_current * 1e3)).collect();
        lines.push(format!("{}: {} point(s)", s.label, reports.len()));
        curves.push((s.label.clone(), points));
        all.extend(reports);
    }
    if ctx.wants(OutputFormat::Json) {
        let json = serde_json::to_string_pretty(&all).expect("reports serialize") + "\n";
        ctx.write("sweep.json", &json)?;
    }
    if ctx.wants(OutputFormat::Csv) {
        ctx.write("sweep.csv", &summary_csv(&all))?;
    }
    if ctx.wants(OutputFormat::Svg) {
        ctx.write("sweep.svg", &svg::line_chart("Mean radio current", &param, "mA", &curves))?;
    }
    lines.push(format!("wrote sweep over {param} to {}", ctx.out_dir.display()));
    Ok(lines)
}
