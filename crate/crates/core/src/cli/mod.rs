//! The `remoteness` command-line tool: `compute`, `analyze` and `generate`.
//!
//! Every failure ends the process with a kind-specific exit code (see
//! [`exit`]) and a single `error code=.. kind=.. message=".."` line on
//! standard error. Output files are written all-or-nothing.

pub mod exit;
pub mod manifest;
pub mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    code_agreement, heterogeneity, render_table, AnalysisReport, CountyCodeTable,
};
use crate::index_core::{
    compute_multi_year, ConfigFile, RunConfig, ScalingMode, Warning, WarningKind, WeightScheme,
    WeightsSpec,
};
use crate::ingest::{parse_inputs, validate_coordinates, write_places_csv, CoordinateMode};
use crate::spatial::FallbackPolicy;
use crate::synth::{generate, Extent, SynthConfig};

pub use exit::CliError;
use manifest::{default_manifest_path, now_rfc3339, sha256_hex, InputDigest, RunManifest, YearCount};

#[derive(Debug, Parser)]
#[command(name = "remoteness", version, about = "Place-level remoteness index")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the index for one or more place files.
    Compute(ComputeArgs),
    /// Summarize within-county spread of a results file.
    Analyze(AnalyzeArgs),
    /// Write a seeded synthetic place file.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Geographic,
    Planar,
}

impl From<ModeArg> for CoordinateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Geographic => CoordinateMode::Geographic,
            ModeArg::Planar => CoordinateMode::Planar,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalingArg {
    PerYear,
    Global,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FallbackArg {
    Error,
    Diagonal,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Place file (CSV or GeoJSON); repeat for several files.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub coord_mode: Option<ModeArg>,
    /// `equal`, `ascending`, or a JSON weights file.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingArg>,
    #[arg(long, value_enum)]
    pub fallback: Option<FallbackArg>,
    #[arg(long)]
    pub log_base: Option<f64>,
    #[arg(long)]
    pub population_floor: Option<u64>,
    #[arg(long)]
    pub distance_floor_km: Option<f64>,
    /// Nearest-neighbor backend (`kdtree`, `brute-force`).
    #[arg(long)]
    pub index: Option<String>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub geojson: Option<PathBuf>,
    #[arg(long)]
    pub debug_distances: Option<PathBuf>,
    /// Defaults to the results path with a `.manifest.json` extension.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Fail on the first rejected input row instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Results CSV written by `compute`.
    #[arg(long)]
    pub results: PathBuf,
    /// The place file(s) the results were computed from (for county ids).
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub coord_mode: Option<ModeArg>,
    /// `county_id,code` CSV of an external county classification.
    #[arg(long)]
    pub codes: Option<PathBuf>,
    /// Label of the code scheme in the report.
    #[arg(long, default_value = "county_code")]
    pub scheme: String,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of the table on standard output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "count", short = 'n', default_value_t = 1000)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "geographic")]
    pub coord_mode: ModeArg,
    /// Comma-separated census years.
    #[arg(long, value_delimiter = ',', default_value = "2010")]
    pub years: Vec<i32>,
    /// `min_x,min_y,max_x,max_y` in the coordinate mode's units.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub extent: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    pub county_grid: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Compute(a) => cmd_compute(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Generate(a) => cmd_generate(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.error_line());
            e.exit_code()
        }
    }
}

/// Resolves the run configuration: defaults, then `--config`, then flags.
pub fn resolve_config(args: &ComputeArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg = cfg.merge(ConfigFile::load(path)?)?;
    }
    if let Some(w) = &args.weights {
        cfg.weights = match WeightScheme::preset(w) {
            Some(p) => p,
            None if Path::new(w).exists() => WeightsSpec::load(Path::new(w))?,
            None => WeightsSpec::Preset(w.clone()).resolve()?,
        };
    }
    if let Some(s) = args.scaling {
        cfg.scaling = match s {
            ScalingArg::PerYear => ScalingMode::PerYear,
            ScalingArg::Global => ScalingMode::Global,
        };
    }
    if let Some(f) = args.fallback {
        cfg.fallback = match f {
            FallbackArg::Error => FallbackPolicy::Error,
            FallbackArg::Diagonal => FallbackPolicy::Diagonal,
        };
    }
    if let Some(b) = args.log_base {
        cfg.log_base = b;
    }
    if let Some(p) = args.population_floor {
        cfg.population_floor = p;
    }
    if let Some(d) = args.distance_floor_km {
        cfg.distance_floor_km = d;
    }
    if let Some(i) = &args.index {
        cfg.index = i.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<(), CliError> {
    let mut cfg = resolve_config(args)?;
    let mut parsed = parse_inputs(&args.inputs, args.coord_mode.map(Into::into))?;
    if args.strict {
        parsed = parsed.strict()?;
    }
    for r in &parsed.rejections {
        log::warn!("{}:{}: skipped: {}", r.source.display(), r.row, r.reason);
    }
    cfg.metric = Some(cfg.metric_for(parsed.mode)?);

    let mut extra = Vec::new();
    for set in &parsed.sets {
        let dups = validate_coordinates(set)?;
        if !dups.is_empty() {
            for d in &dups {
                log::warn!("{}: places share a position: {}", set.year(), d.place_ids.join(", "));
            }
            extra.push(Warning {
                kind: WarningKind::DuplicatePosition,
                year: Some(set.year()),
                category: None,
                count: dups.iter().map(|d| d.place_ids.len() as u64).sum(),
            });
        }
    }
    if !parsed.rejections.is_empty() {
        extra.push(Warning {
            kind: WarningKind::RejectedRow,
            year: None,
            category: None,
            count: parsed.rejections.len() as u64,
        });
    }

    let run = compute_multi_year(&parsed.sets, &cfg)?;
    for w in run.warnings.iter().filter(|w| w.kind == WarningKind::DegenerateGroup) {
        log::warn!("degenerate scaling group ({:?}): all {} value(s) set to 0.5", w.year, w.count);
    }

    let mut files = Vec::new();
    let mut digests = BTreeMap::new();
    let results = output::results_csv(&run)?;
    digests.insert("results", sha256_hex(&results));
    files.push((args.out.clone(), results));
    if let Some(p) = &args.geojson {
        let g = output::results_geojson(&run, &parsed.sets)?;
        digests.insert("geojson", sha256_hex(&g));
        files.push((p.clone(), g));
    }
    if let Some(p) = &args.debug_distances {
        let d = output::debug_distances_csv(&run)?;
        digests.insert("debug_distances", sha256_hex(&d));
        files.push((p.clone(), d));
    }

    let mut warnings = run.warnings.clone();
    warnings.extend(extra);
    warnings.sort();
    let manifest = RunManifest {
        tool: manifest::TOOL_NAME,
        version: manifest::TOOL_VERSION,
        timestamp: now_rfc3339(),
        coord_mode: parsed.mode,
        config: cfg,
        inputs: args
            .inputs
            .iter()
            .map(|p| InputDigest::of(p))
            .collect::<Result<_, _>>()?,
        years: run
            .years
            .iter()
            .map(|y| YearCount {
                year: y.year,
                places: y.results.len(),
            })
            .collect(),
        warnings,
        rejections: parsed.rejections,
        outputs: digests,
    };
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.out));
    files.push((manifest_path, manifest.to_json()?));

    output::write_all_atomic(&files)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let results = output::read_results_csv(&args.results)?;
    let parsed = parse_inputs(&args.inputs, args.coord_mode.map(Into::into))?;
    let codes = args
        .codes
        .as_ref()
        .map(|p| CountyCodeTable::from_csv(p, args.scheme.clone()))
        .transpose()?;

    let mut years: Vec<i32> = results.iter().map(|r| r.year).collect();
    years.sort_unstable();
    years.dedup();

    let mut report = AnalysisReport { years: Vec::new() };
    for year in years {
        let set = parsed.sets.iter().find(|s| s.year() == year).ok_or_else(|| {
            let r = results.iter().find(|r| r.year == year).expect("year from results");
            crate::analysis::AnalysisError::UnknownPlace {
                place_id: r.place_id.clone(),
                year,
            }
        })?;
        let mut h = heterogeneity(&results, set)?;
        if let Some(codes) = &codes {
            h.agreement = Some(code_agreement(&results, set, codes)?);
        }
        report.years.push(h);
    }

    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push(b'\n');
    if let Some(out) = &args.out {
        output::write_all_atomic(&[(out.clone(), json.clone())])?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let written = if args.json {
        lock.write_all(&json)
    } else {
        lock.write_all(render_table(&report).as_bytes())
    };
    written.map_err(|e| CliError::io("<stdout>", e))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let mode: CoordinateMode = args.coord_mode.into();
    let mut cfg = SynthConfig::new(args.seed, args.count, mode);
    cfg.years = args.years.clone();
    cfg.county_grid = args.county_grid;
    if let Some(e) = &args.extent {
        let extent = Extent {
            min: crate::Coord::new(e[0], e[1]),
            max: crate::Coord::new(e[2], e[3]),
        };
        if !(extent.min.x < extent.max.x && extent.min.y < extent.max.y) {
            return Err(CliError::Usage(format!("empty extent {e:?}")));
        }
        for c in [extent.min, extent.max] {
            crate::ingest::check_coordinate(mode, c).map_err(CliError::Usage)?;
        }
        cfg.extent = extent;
    }
    let mut years = cfg.years.clone();
    years.sort_unstable();
    years.dedup();
    if years.len() != cfg.years.len() {
        return Err(CliError::Usage("--years lists a year twice".into()));
    }

    let sets = generate(&cfg);
    let mut buf = Vec::new();
    write_places_csv(&mut buf, &sets).map_err(|e| CliError::Internal(e.to_string()))?;
    match &args.out {
        Some(p) => output::write_all_atomic(&[(p.clone(), buf)]),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
