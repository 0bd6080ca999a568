//! The `obs` command line.
//!
//! Exit status is 0 on success, 1 on a usage error and 2 when input data
//! cannot be read or is invalid.

mod dataset;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use obs_core::analytics::{
    daily_series, hourly, period_compare, report, weekday_summary, DayRange,
};
use obs_core::scenario::{pn_config, simulate_pn, SimOptions};
use obs_core::store::formats::{
    read_annotations_jsonl, read_observations_csv, read_presses_csv, read_presses_jsonl,
    write_jsonl, write_observations_csv, ObservationRow, PRESS_CSV_HEADER,
};
use obs_core::time::{MS_PER_DAY, MS_PER_MINUTE};
use obs_core::{
    decode_per_device, Annotation, AnnotationKind, CivilDate, DatasetConfig, Observation, RawPress,
};

pub use dataset::{CONFIG_FILE, STORE_FILE};

#[derive(Debug, Parser)]
#[command(name = "obs", version, about = "One-button self-tracking pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a scenario and sync it through a simulated device into a dataset directory.
    Simulate(SimulateArgs),
    /// Turn a press file or a dataset's presses into an observation CSV.
    Decode(DecodeArgs),
    /// Hourly, weekday, daily or period-comparison report.
    Report(ReportArgs),
    /// Write presses, annotations or observations out of a dataset.
    Export(ExportArgs),
    /// Load presses or annotations into a dataset.
    Import(ImportArgs),
    /// Run the HTTP service over a dataset.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scenario {
    Pn,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "pn")]
    scenario: Scenario,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Dataset directory to create or replace.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 35, allow_negative_numbers = true)]
    drift_ppm: i32,
    /// Chance that any hour of the dataset has no link.
    #[arg(long, default_value_t = 0.3)]
    p_disconnect: f64,
    #[arg(long, default_value_t = 0.05)]
    drop_probability: f64,
    /// Device ring buffer size.
    #[arg(long, default_value_t = obs_core::device::DEFAULT_BUFFER_CAPACITY)]
    capacity: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["data", "input"])))]
struct DecodeArgs {
    /// Dataset directory to decode.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Press file, CSV or JSON lines.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Observation CSV to write; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    burst_gap_ms: Option<u64>,
    /// Offset in minutes used for the local date and time columns.
    #[arg(long, allow_negative_numbers = true)]
    utc_offset: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Hourly,
    Weekday,
    Daily,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Start of the range: epoch milliseconds or a local date (YYYY-MM-DD).
    #[arg(long, allow_negative_numbers = true)]
    from: Option<String>,
    /// End of the range: epoch milliseconds (exclusive) or a local date (inclusive).
    #[arg(long, allow_negative_numbers = true)]
    to: Option<String>,
    /// Offset in minutes overriding the dataset's.
    #[arg(long, allow_negative_numbers = true)]
    utc_offset: Option<i32>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(value_enum)]
    kind: ReportKind,
    #[arg(long, default_value = ".")]
    data: PathBuf,
    /// Observation CSV to report on instead of decoding the dataset.
    #[arg(long)]
    observations: Option<PathBuf>,
    #[command(flatten)]
    range: RangeArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: TextFormat,
    #[arg(long)]
    burst_gap_ms: Option<u64>,
    /// First period of a comparison, as FIRST:LAST day indices.
    #[arg(long)]
    a: Option<DayRange>,
    /// Second period of a comparison.
    #[arg(long)]
    b: Option<DayRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportWhat {
    Presses,
    Annotations,
    Observations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(value_enum)]
    what: ExportWhat,
    #[arg(long, default_value = ".")]
    data: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FileFormat>,
    #[command(flatten)]
    range: RangeArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ImportArgs {
    #[arg(value_enum)]
    what: ExportWhat,
    #[arg(long, default_value = ".")]
    data: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Creates the dataset when it has no config yet.
    #[arg(long)]
    start_date: Option<CivilDate>,
    #[arg(long)]
    days: Option<u32>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
    utc_offset: i32,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = ".")]
    data: PathBuf,
    #[arg(long, env = "OBS_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Decode(a) => decode(a, out),
        Command::Report(a) => report_cmd(a, out),
        Command::Export(a) => export(a, out),
        Command::Import(a) => import(a, out),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> CliResult {
    match output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => out
            .write_all(text.as_bytes())
            .context("writing standard output")?,
    }
    Ok(())
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Reads a press file, telling CSV from JSON lines by the header.
fn read_press_file(path: &Path) -> anyhow::Result<Vec<RawPress>> {
    let text = read_text(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let presses = match first {
        None => Vec::new(),
        Some(l) if l.trim_end() == PRESS_CSV_HEADER => read_presses_csv(&text)?,
        Some(_) => read_presses_jsonl(&text)?,
    };
    Ok(presses)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> CliResult {
    let Scenario::Pn = a.scenario;
    if !(0.0..=1.0).contains(&a.p_disconnect) || !(0.0..1.0).contains(&a.drop_probability) {
        return Err(usage(
            "--p-disconnect must lie in [0, 1] and --drop-probability in [0, 1)",
        ));
    }
    if a.capacity == 0 || a.drift_ppm.abs() > 10_000 {
        return Err(usage(
            "--capacity must be positive and --drift-ppm within ±10000",
        ));
    }
    let config = pn_config();
    let options = SimOptions {
        drift_ppm: a.drift_ppm,
        p_disconnect: a.p_disconnect,
        drop_probability: a.drop_probability,
        capacity: a.capacity,
        ..SimOptions::default()
    };
    let sim = simulate_pn(a.seed, &config, &options).map_err(|e| CliError::Data(e.into()))?;
    let mut ds = dataset::create(&a.out, &config)?;
    ds.store
        .append_presses(&sim.presses)
        .context("storing presses")?;
    ds.store
        .append_gaps(&sim.gaps)
        .context("storing overflow gaps")?;
    for annotation in &sim.annotations {
        ds.store
            .append_annotation(annotation.clone())
            .context("storing annotations")?;
    }
    writeln!(
        out,
        "seed {}: {} presses stored, {} lost to overflow, {} annotations, {} frames sent, {} dropped, {} retransmitted -> {}",
        a.seed,
        sim.presses.len(),
        sim.gaps.iter().map(|g| g.missing_count()).sum::<u64>(),
        sim.annotations.len(),
        sim.stats.frames_sent,
        sim.stats.frames_dropped,
        sim.stats.retransmissions,
        a.out.display()
    )
    .context("writing standard output")?;
    Ok(())
}

fn decode(a: DecodeArgs, out: &mut dyn Write) -> CliResult {
    let (presses, mut config) = match (&a.data, &a.input) {
        (Some(dir), _) => {
            let ds = dataset::open(dir)?;
            (ds.store.presses().cloned().collect(), ds.config)
        }
        (None, Some(path)) => {
            let config =
                DatasetConfig::new(CivilDate::from_days_since_epoch(0), 0, 1).expect("valid");
            (read_press_file(path)?, config)
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(offset) = a.utc_offset {
        config.utc_offset_minutes = offset;
    }
    if let Some(gap) = a.burst_gap_ms {
        config.burst_gap_ms = gap;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    let decoded = decode_per_device(&presses, config.burst_gap_ms);
    emit(
        &write_observations_csv(&decoded.observations, &config),
        a.output.as_deref(),
        out,
    )
}

/// Parses a range bound under the dataset's offset. Dates name local days;
/// as an end bound a date includes its whole day.
fn parse_instant(text: &str, config: &DatasetConfig, end: bool) -> Result<i64, CliError> {
    if let Ok(ms) = text.parse::<i64>() {
        return Ok(ms);
    }
    let date: CivilDate = text.parse().map_err(|_| {
        usage(format!(
            "{text:?} is neither epoch milliseconds nor YYYY-MM-DD"
        ))
    })?;
    let day = date.days_since_epoch() + i64::from(end);
    Ok(day * MS_PER_DAY - i64::from(config.utc_offset_minutes) * MS_PER_MINUTE)
}

impl RangeArgs {
    fn apply_offset(&self, config: &mut DatasetConfig) -> CliResult {
        if let Some(offset) = self.utc_offset {
            config.utc_offset_minutes = offset;
            config.validate().map_err(|e| usage(e.to_string()))?;
        }
        Ok(())
    }

    fn is_set(&self) -> bool {
        self.from.is_some() || self.to.is_some()
    }

    fn window(&self, config: &DatasetConfig) -> Result<Range<i64>, CliError> {
        let from = self
            .from
            .as_deref()
            .map_or(Ok(i64::MIN), |s| parse_instant(s, config, false))?;
        let to = self
            .to
            .as_deref()
            .map_or(Ok(i64::MAX), |s| parse_instant(s, config, true))?;
        if from > to {
            return Err(usage("--from is after --to"));
        }
        Ok(from..to)
    }
}

fn store_observations(ds: &dataset::Dataset, burst_gap_ms: u64) -> Vec<Observation> {
    decode_per_device(ds.store.presses(), burst_gap_ms).observations
}

fn report_cmd(a: ReportArgs, out: &mut dyn Write) -> CliResult {
    if a.kind == ReportKind::Compare && (a.a.is_none() || a.b.is_none()) {
        return Err(usage(
            "report compare needs --a FIRST:LAST and --b FIRST:LAST",
        ));
    }
    if a.kind == ReportKind::Compare && a.range.is_set() {
        return Err(usage("report compare takes day ranges, not --from/--to"));
    }
    let ds = dataset::open(&a.data)?;
    let mut config = ds.config.clone();
    if let Some(gap) = a.burst_gap_ms {
        config.burst_gap_ms = gap;
        config.validate().map_err(|e| usage(e.to_string()))?;
    }
    a.range.apply_offset(&mut config)?;
    let window = a.range.window(&config)?;

    let times: Vec<i64> = match &a.observations {
        Some(path) => {
            let rows: Vec<ObservationRow> =
                read_observations_csv(&read_text(path)?).map_err(anyhow::Error::from)?;
            rows.iter().map(|r| r.t_utc_ms).collect()
        }
        None => store_observations(&ds, config.burst_gap_ms)
            .iter()
            .map(|o| o.t_utc_ms)
            .collect(),
    };
    let times: Vec<i64> = times.into_iter().filter(|t| window.contains(t)).collect();
    let annotations: Vec<Annotation> = ds.store.annotations().map(|(_, a)| a.clone()).collect();
    let calendar = if a.range.is_set() {
        config
            .restricted(window)
            .ok_or_else(|| usage("the range does not overlap the dataset"))?
    } else {
        config.clone()
    };
    let table = a.format == TextFormat::Table;
    let text = match a.kind {
        ReportKind::Hourly => {
            let h = hourly(&times, &calendar);
            if table {
                report::hourly_table(&h)
            } else {
                report::hourly_csv(&h)
            }
        }
        ReportKind::Weekday => {
            let s = weekday_summary(&times, &annotations, &calendar);
            if table {
                report::weekday_table(&s)
            } else {
                report::weekday_csv(&s)
            }
        }
        ReportKind::Daily => {
            let s = daily_series(&times, &annotations, &calendar);
            if table {
                report::daily_table(&s)
            } else {
                report::daily_csv(&s)
            }
        }
        ReportKind::Compare => {
            let (pa, pb) = (a.a.expect("checked"), a.b.expect("checked"));
            let c = period_compare(&times, &annotations, &calendar, pa, pb)
                .map_err(|e| usage(e.to_string()))?;
            if table {
                report::compare_table(&c)
            } else {
                report::compare_csv(&c)
            }
        }
    };
    emit(&text, None, out)
}

fn export(a: ExportArgs, out: &mut dyn Write) -> CliResult {
    let ds = dataset::open(&a.data)?;
    let mut config = ds.config.clone();
    a.range.apply_offset(&mut config)?;
    let window = a
        .range
        .is_set()
        .then(|| a.range.window(&config))
        .transpose()?;
    let text = match (a.what, a.format) {
        (ExportWhat::Presses, None | Some(FileFormat::Csv)) => ds.store.export_presses_csv(window),
        (ExportWhat::Presses, Some(FileFormat::Jsonl)) => ds.store.export_presses_jsonl(window),
        (ExportWhat::Annotations, None | Some(FileFormat::Jsonl)) => {
            let w = window.unwrap_or(i64::MIN..i64::MAX);
            let list = ds.store.query_annotations(w);
            write_jsonl(list.into_iter().map(|(_, a)| a))
        }
        (ExportWhat::Annotations, Some(FileFormat::Csv)) => {
            return Err(usage("annotations export as jsonl only"));
        }
        (ExportWhat::Observations, format) => {
            let obs: Vec<Observation> = store_observations(&ds, config.burst_gap_ms)
                .into_iter()
                .filter(|o| window.as_ref().is_none_or(|w| w.contains(&o.t_utc_ms)))
                .collect();
            match format {
                None | Some(FileFormat::Csv) => write_observations_csv(&obs, &config),
                Some(FileFormat::Jsonl) => write_jsonl(&obs),
            }
        }
    };
    emit(&text, a.output.as_deref(), out)
}

fn import(a: ImportArgs, out: &mut dyn Write) -> CliResult {
    if !a.data.join(CONFIG_FILE).exists() {
        let (Some(start), Some(days)) = (a.start_date, a.days) else {
            return Err(usage(format!(
                "{} has no {CONFIG_FILE}; pass --start-date and --days to create it",
                a.data.display()
            )));
        };
        let config =
            DatasetConfig::new(start, a.utc_offset, days).map_err(|e| usage(e.to_string()))?;
        dataset::write_config(&a.data, &config)?;
    }
    let mut ds = dataset::open(&a.data)?;
    match a.what {
        ExportWhat::Presses => {
            let presses = read_press_file(&a.input)?;
            let before = ds.store.press_count();
            ds.store
                .append_presses(&presses)
                .context("storing presses")?;
            writeln!(
                out,
                "imported {} new presses",
                ds.store.press_count() - before
            )
            .context("writing standard output")?;
        }
        ExportWhat::Annotations => {
            let annotations =
                read_annotations_jsonl(&read_text(&a.input)?).map_err(anyhow::Error::from)?;
            for (i, annotation) in annotations.iter().enumerate() {
                annotation
                    .validate()
                    .map_err(|e| anyhow!("annotation {}: {e}", i + 1))?;
                let span = annotation.span();
                let clash = annotation.kind == AnnotationKind::Gap
                    && ds
                        .store
                        .annotations()
                        .any(|(_, have)| have.kind == AnnotationKind::Gap && have.overlaps(&span));
                if clash {
                    return Err(anyhow!("annotation {}: overlaps an existing gap", i + 1).into());
                }
                ds.store
                    .append_annotation(annotation.clone())
                    .context("storing annotation")?;
            }
            writeln!(out, "imported {} annotations", annotations.len())
                .context("writing standard output")?;
        }
        ExportWhat::Observations => {
            return Err(usage(
                "observations are derived from presses and cannot be imported",
            ))
        }
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CliResult {
    let ds = dataset::open(&a.data)?;
    let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.bind.as_str(), a.port))
            .await
            .with_context(|| format!("binding {}:{}", a.bind, a.port))?;
        let state = obs_service::AppState::new(ds.store, ds.config, obs_service::system_clock());
        obs_service::serve(listener, state)
            .await
            .context("serving")?;
        Ok::<(), anyhow::Error>(())
    })?;
    Ok(())
}
