use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use twr_pcd::catalog::MappingCatalog;
use twr_pcd::gf::{GfField, GfSymbol};
use twr_pcd::ldpc::lift_to_gfq;
use twr_pcd::mapping::{xor_map, ClusterMap, MapKind};
use twr_pcd::outage::{outage_lower_bound, write_outage_csv, OutageBudget};
use twr_pcd::par::Exec;
use twr_pcd::sim::{run_experiment_with, write_curve_csv, ChannelMode, CodeSource, CurvePoint, ExperimentConfig};
use twr_pcd::tab::{build_decoder_tab, build_encoder_tab, dump_tabs, CorrelativeRow};

/// Pairwise check decoding experiments for two-way relay channels.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relay SER curves over fixed channel gains.
    Deterministic(Common),
    /// Relay and source FER curves over Rayleigh block fading.
    Fading(Common),
    /// Lower bound on the outage probability.
    Outage(Common),
    /// Dump the check-relation tabs of one row as JSON.
    Tabs(Common),
    /// Dump the two-stage map catalog as JSON.
    Catalog(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

/// Configuration of the `outage` subcommand.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutageConfig {
    snr_db: Vec<f64>,
    #[serde(default = "default_q")]
    q: usize,
    #[serde(default = "default_rate")]
    rate: f64,
    #[serde(default)]
    budget: OutageBudget,
    #[serde(default)]
    seed: u64,
}

impl Default for OutageConfig {
    fn default() -> Self {
        Self {
            snr_db: (0..=20).map(|i| 2.5 * i as f64).collect(),
            q: default_q(),
            rate: default_rate(),
            budget: OutageBudget::default(),
            seed: 0,
        }
    }
}

fn default_q() -> usize {
    4
}

fn default_rate() -> f64 {
    0.5
}

/// Map whose tabs are dumped.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MapChoice {
    /// The three-output binary map `{(0,1)}, {(0,0),(1,1)}, {(1,0)}`.
    MNl,
    Xor,
    FirstStage(usize),
    SecondStage(usize),
}

/// Configuration of the `tabs` subcommand. Defaults reproduce the tabs of
/// the first row of the 4 x 6 example code.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabsConfig {
    #[serde(default = "default_tab_code")]
    code: CodeSource,
    #[serde(default = "default_tab_q")]
    q: usize,
    #[serde(default = "default_lift")]
    eta: u8,
    #[serde(default)]
    xi: Option<u8>,
    #[serde(default = "default_map")]
    map: MapChoice,
    #[serde(default)]
    row: usize,
}

impl Default for TabsConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn default_tab_code() -> CodeSource {
    CodeSource::Toy
}

fn default_tab_q() -> usize {
    2
}

fn default_lift() -> u8 {
    1
}

fn default_map() -> MapChoice {
    MapChoice::MNl
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!("--threads must be at least 1");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("built without the parallel feature; running on one thread");
    }
    Ok(())
}

fn curves(args: &Common, fading: bool) -> Result<()> {
    let path = args.config.as_deref().context("--config is required")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if fading != matches!(cfg.channel, ChannelMode::Rayleigh {}) {
        bail!("channel mode in {} does not match the subcommand", path.display());
    }
    let points = run_experiment_with(&cfg, Exec::default(), |p: &CurvePoint| {
        eprintln!(
            "{:>6} dB {:<18} ser {:.3e} fer {:.3e} frames {}",
            p.snr_db,
            p.scheme.name(),
            p.ser_relay(),
            p.fer_relay(),
            p.frames
        );
    })?;
    let mut w = output(args.out.as_deref())?;
    write_curve_csv(&points, &mut w)?;
    w.flush()?;
    Ok(())
}

fn outage(args: &Common) -> Result<()> {
    let mut cfg: OutageConfig = match &args.config {
        Some(p) => read_config(p)?,
        None => OutageConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let p = outage_lower_bound(&cfg.snr_db, cfg.q, cfg.rate, cfg.budget, cfg.seed)?;
    let mut w = output(args.out.as_deref())?;
    write_outage_csv(&cfg.snr_db, &p, &mut w)?;
    w.flush()?;
    Ok(())
}

fn tabs(args: &Common) -> Result<()> {
    let cfg: TabsConfig = match &args.config {
        Some(p) => read_config(p)?,
        None => TabsConfig::default(),
    };
    let field = GfField::new(cfg.q)?;
    let base = cfg.code.load()?;
    let ha = lift_to_gfq(&base, GfSymbol(cfg.eta), &field)?;
    let hb = lift_to_gfq(&base, GfSymbol(cfg.xi.unwrap_or(cfg.eta)), &field)?;
    let catalog = MappingCatalog::qpsk4();
    let pick = |maps: &[ClusterMap], i: usize| maps.get(i).cloned().with_context(|| format!("no catalog map {i}"));
    let map = match cfg.map {
        MapChoice::MNl => ClusterMap::from_labels(2, &["b", "a", "c", "b"], MapKind::Custom)?,
        MapChoice::Xor => xor_map(cfg.q)?,
        MapChoice::FirstStage(i) => pick(catalog.first_stage(), i)?,
        MapChoice::SecondStage(j) => pick(catalog.second_stage(), j)?,
    };
    if cfg.row >= ha.rows() {
        bail!("row {} outside a matrix with {} rows", cfg.row, ha.rows());
    }
    let row = CorrelativeRow::from_matrices(&ha, &hb, cfg.row)?;
    let e = build_encoder_tab(&row, &field, &map)?;
    let d = build_decoder_tab(&e);
    let mut w = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &dump_tabs(&e, &d))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn catalog(args: &Common) -> Result<()> {
    if args.config.is_some() {
        bail!("catalog takes no configuration");
    }
    let mut w = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &MappingCatalog::qpsk4().to_json())?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Deterministic(a) | Command::Fading(a) | Command::Outage(a) | Command::Tabs(a) | Command::Catalog(a) => a,
    };
    set_threads(args.threads)?;
    match &cli.command {
        Command::Deterministic(a) => curves(a, false),
        Command::Fading(a) => curves(a, true),
        Command::Outage(a) => outage(a),
        Command::Tabs(a) => tabs(a),
        Command::Catalog(a) => catalog(a),
    }
}
