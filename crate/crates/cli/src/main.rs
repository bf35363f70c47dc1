//! Command-line front end: generate snapshots, load the warehouse, run
//! reports and benchmark both backends.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use campusdw::bench::{capacity_report, render, run_benchmark, Format};
use campusdw::campus::{evolve, generate_snapshot, load_snapshot, snapshot, GenConfig, Snapshot};
use campusdw::etl::{run_etl, Warehouse};
use campusdw::reports::{run_report, Backend};
use campusdw::Error;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "campusdw",
    version,
    about = "Academic OLTP versus star-schema warehouse benchmark"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an OLTP snapshot, or evolve an existing one.
    Gen(GenArgs),
    /// Load a snapshot into the warehouse directory.
    Etl(EtlArgs),
    /// Run one report on one backend.
    Report(ReportArgs),
    /// Run the full pipeline and emit the capacity and efficiency tables.
    Bench(BenchArgs),
    /// Per-table record length, record count and bytes.
    Capacity(CapacityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Paper,
    Desk,
    Custom,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "desk")]
    scale: Scale,
    /// Snapshot date, also the load date of an ETL run over it.
    #[arg(long)]
    taken: Option<NaiveDate>,
    #[arg(long, help_heading = "Custom scale")]
    students: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    prodi: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    fakultas: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    krs: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    jadkul: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    dosen: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    matkul: Option<usize>,
    #[arg(long, help_heading = "Custom scale")]
    first_year: Option<i64>,
    #[arg(long, help_heading = "Custom scale")]
    last_year: Option<i64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    scale: ScaleArgs,
    /// Evolve this snapshot instead of generating from scratch.
    #[arg(long, requires = "taken")]
    from: Option<PathBuf>,
    /// Number of random edits applied with --from.
    #[arg(long, default_value_t = 100, requires = "from")]
    changes: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EtlFormat {
    Text,
    Json,
}

#[derive(Args)]
struct EtlArgs {
    /// Snapshot the warehouse was last loaded from; enables diff-driven loading.
    #[arg(long)]
    old: Option<PathBuf>,
    #[arg(long)]
    new: PathBuf,
    #[arg(long)]
    warehouse: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: EtlFormat,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    id: u32,
    #[arg(long)]
    backend: Backend,
    /// Snapshot file, required for the oltp backend.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Warehouse directory, required for the dw backend.
    #[arg(long)]
    warehouse: Option<PathBuf>,
    /// Validity date for warehouse rows; defaults to the date of the loaded data.
    #[arg(long)]
    as_of: Option<NaiveDate>,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scale: ScaleArgs,
    /// Benchmark this snapshot instead of generating one.
    #[arg(long, conflicts_with = "seed")]
    db: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value = "markdown")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct CapacitySource {
    /// Snapshot file.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Warehouse directory.
    #[arg(long)]
    warehouse: Option<PathBuf>,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    source: CapacitySource,
    #[arg(long, default_value = "markdown")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Rejected command-line input that clap cannot express.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Invalid(String);

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Invalid(msg.into()).into())
}

impl ScaleArgs {
    fn config(&self) -> Result<GenConfig> {
        let overrides = [
            self.students,
            self.prodi,
            self.fakultas,
            self.krs,
            self.jadkul,
            self.dosen,
            self.matkul,
        ];
        let custom = overrides.iter().any(Option::is_some) || self.first_year.is_some() || self.last_year.is_some();
        let mut config = match self.scale {
            Scale::Paper => GenConfig::paper(self.seed),
            Scale::Desk | Scale::Custom => GenConfig::desk(self.seed),
        };
        if custom && !matches!(self.scale, Scale::Custom) {
            return invalid("size options require --scale custom");
        }
        let set = |slot: &mut usize, v: Option<usize>| *slot = v.unwrap_or(*slot);
        set(&mut config.n_students, self.students);
        set(&mut config.n_prodi, self.prodi);
        set(&mut config.n_fakultas, self.fakultas);
        set(&mut config.n_krs, self.krs);
        set(&mut config.n_jadkul, self.jadkul);
        set(&mut config.n_dosen, self.dosen);
        set(&mut config.n_matkul, self.matkul);
        let first = self.first_year.unwrap_or(*config.years.start());
        let last = self.last_year.unwrap_or(*config.years.end());
        config.years = first..=last;
        if let Some(taken) = self.taken {
            config.taken_on = taken;
        }
        config.validate().map_err(Error::from)?;
        Ok(config)
    }

    fn snapshot(&self) -> Result<Snapshot> {
        let config = self.config()?;
        log::info!("generating snapshot {}", config.config_hash());
        Ok(generate_snapshot(&config).map_err(Error::from)?)
    }
}

fn read_snapshot(path: &Path) -> Result<Snapshot> {
    load_snapshot(path, None)
        .map_err(Error::from)
        .with_context(|| format!("reading snapshot {}", path.display()))
}

fn open_warehouse(dir: &Path) -> Result<Warehouse> {
    Warehouse::open(dir)
        .map_err(Error::from)
        .with_context(|| format!("opening warehouse {}", dir.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(Error::from)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(args: &GenArgs) -> Result<()> {
    let snap = match &args.from {
        Some(base) => {
            let base = read_snapshot(base)?;
            let taken = args.scale.taken.expect("clap requires --taken with --from");
            if taken <= base.taken_on {
                return invalid(format!(
                    "--taken {taken} must be after the base snapshot date {}",
                    base.taken_on
                ));
            }
            evolve(&base, args.scale.seed, args.changes, taken).context("evolving snapshot")?
        }
        None => args.scale.snapshot()?,
    };
    snapshot(&snap, &args.out)
        .map_err(Error::from)
        .with_context(|| format!("writing {}", args.out.display()))?;
    log::info!("wrote {} records to {}", snap.total_records(), args.out.display());
    Ok(())
}

fn etl(args: &EtlArgs) -> Result<()> {
    let old = args.old.as_deref().map(read_snapshot).transpose()?;
    let new = read_snapshot(&args.new)?;
    let mut wh = open_warehouse(&args.warehouse)?;
    let report = run_etl(old.as_ref(), &new, &mut wh).map_err(Error::from)?;
    fs::create_dir_all(&args.warehouse).map_err(Error::from)?;
    wh.save(&args.warehouse).map_err(Error::from)?;
    let text = match args.format {
        EtlFormat::Text => report.to_text(),
        EtlFormat::Json => report.to_json() + "\n",
    };
    emit(&text, None)
}

fn report(args: &ReportArgs) -> Result<()> {
    let (db, as_of) = match args.backend {
        Backend::Oltp => {
            let Some(path) = &args.db else {
                return invalid("--backend oltp needs --db SNAPSHOT");
            };
            let snap = read_snapshot(path)?;
            (snap.db, snap.taken_on)
        }
        Backend::Warehouse => {
            let Some(dir) = &args.warehouse else {
                return invalid("--backend dw needs --warehouse DIR");
            };
            let wh = open_warehouse(dir)?;
            let Some(taken) = wh.last_source().map(|s| s.taken_on).or(args.as_of) else {
                return invalid(format!("warehouse {} has never been loaded", dir.display()));
            };
            (wh.db().clone(), taken)
        }
    };
    let result = run_report(args.id, args.backend, &db, args.as_of.unwrap_or(as_of)).map_err(Error::from)?;
    let text = match args.format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json() + "\n",
        Format::Markdown => result.to_markdown(),
    };
    emit(&text, args.out.as_deref())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let snap = match &args.db {
        Some(path) => read_snapshot(path)?,
        None => args.scale.snapshot()?,
    };
    if args.repeats == 0 {
        return invalid("--repeats must be at least 1");
    }
    let outcome = run_benchmark(&snap, args.repeats)?;
    for eq in outcome.equivalence.iter().filter(|e| !e.equivalent) {
        log::error!("{eq}");
    }
    emit(&outcome.render(args.format), args.out.as_deref())?;
    if !outcome.all_equivalent() {
        anyhow::bail!("reports differ between backends");
    }
    Ok(())
}

fn capacity(args: &CapacityArgs) -> Result<()> {
    let doc = match (&args.source.db, &args.source.warehouse) {
        (Some(path), _) => capacity_report("OLTP capacity", &read_snapshot(path)?.db),
        (None, Some(dir)) => capacity_report("Warehouse capacity", open_warehouse(dir)?.db()),
        (None, None) => unreachable!("clap requires one source"),
    };
    emit(&render(&doc, args.format), args.out.as_deref())
}

/// The context chain, skipping causes already spelled out by their wrapper.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out += ": ";
            }
            out += &msg;
        }
    }
    out
}

/// 2 when the input was rejected, 1 when processing failed.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_validation() { 2 } else { 1 };
        }
        if cause.is::<Invalid>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Etl(a) => etl(a),
        Command::Report(a) => report(a),
        Command::Bench(a) => bench(a),
        Command::Capacity(a) => capacity(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
