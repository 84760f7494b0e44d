//! `snnbp`: build codes and run reproducible decoder experiments.

mod grid;
mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use snnbp::channel::{ChannelPoint, LlrScaling, SnrAxis};
use snnbp::code::{parse_alist, serialize_alist, TannerGraph};
use snnbp::decoder::{CheckRule, DecoderConfig};
use snnbp::fgcodes::{line_incidence, Geometry};
use snnbp::scnu::ScnuParams;
use snnbp::sim::{
    measure_spikes, run_curve, run_sweep, RunSpec, SimCode, StopRule, SweepParam, SweepSpec, Transmission, CSV_HEADER,
};

use manifest::{sha256_hex, CodeIdentity, RunManifest};

/// `li_tau_m` used by elena-star when the flag is absent.
const ELENA_STAR_TAU_M: f64 = 1.639;

#[derive(Parser)]
#[command(name = "snnbp", version, about = "LDPC decoding with spiking check nodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect a parity-check matrix.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Bit and frame error rates over an SNR grid.
    Ber(BerArgs),
    /// Error rates over a grid of one decoder parameter at a fixed SNR.
    Sweep(SweepArgs),
    /// Spike counts and rates of a spiking decoder.
    Spikes(SpikesArgs),
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Write the circulant line-incidence code of PG(2, 2^s) or EG(2, 2^s).
    Build {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        s: u32,
        /// Alist destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print N, M, degrees, rank and dimension of an alist file.
    Inspect { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Pg2,
    Eg2,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Pg2 => "pg2",
            Family::Eg2 => "eg2",
        }
    }

    fn geometry(self) -> Geometry {
        match self {
            Family::Pg2 => Geometry::Projective,
            Family::Eg2 => Geometry::Euclidean,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecoderName {
    Spa,
    Ms,
    Nms,
    Oms,
    Ddbmp,
    Elena,
    ElenaStar,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamName {
    LiTauM,
    Theta1,
    Theta2,
    AlphaNorm,
    SrGamma,
}

impl From<ParamName> for SweepParam {
    fn from(p: ParamName) -> Self {
        match p {
            ParamName::LiTauM => SweepParam::LiTauM,
            ParamName::Theta1 => SweepParam::Theta1,
            ParamName::Theta2 => SweepParam::Theta2,
            ParamName::AlphaNorm => SweepParam::AlphaNorm,
            ParamName::SrGamma => SweepParam::SrGamma,
        }
    }
}

#[derive(Args)]
struct DecoderArgs {
    /// Alist file, or `pg2:<s>` / `eg2:<s>` to build the code in memory.
    #[arg(long)]
    code: String,
    #[arg(long, value_enum)]
    decoder: DecoderName,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    #[arg(long)]
    early_stop: bool,
    /// `matched`, or `fixed:<EsN0 dB>` for a constant channel reliability.
    #[arg(long, default_value = "matched")]
    lc: String,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long)]
    li_tau_m: Option<f64>,
    #[arg(long)]
    alpha_norm: Option<f64>,
    #[arg(long)]
    beta_off: Option<f64>,
    #[arg(long)]
    sr_gamma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Transmit the all-zero codeword instead of random codewords.
    #[arg(long)]
    all_zero: bool,
}

#[derive(Args)]
struct StopArgs {
    /// Stop a point after this many frame errors (0 disables).
    #[arg(long, default_value_t = 100)]
    min_frame_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
}

#[derive(Args)]
#[group(id = "axis", required = true, multiple = false)]
struct GridAxis {
    /// Eb/N0 values in dB: `a,b,c` or `start:step:stop`.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    /// Es/N0 values in dB, same syntax.
    #[arg(long, allow_hyphen_values = true)]
    esn0: Option<String>,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    stop: StopArgs,
    #[command(flatten)]
    axis: GridAxis,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    stop: StopArgs,
    #[arg(long, value_enum)]
    param: ParamName,
    /// Parameter values, same syntax as SNR grids.
    #[arg(long)]
    grid: String,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "ebn0", required_unless_present = "ebn0")]
    esn0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    ebn0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpikesArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    axis: GridAxis,
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Code(CodeCommand::Build { family, s, out }) => cmd_build(family, s, out.as_deref()),
        Command::Code(CodeCommand::Inspect { path }) => cmd_inspect(&path),
        Command::Ber(a) => cmd_ber(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Spikes(a) => cmd_spikes(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn build_graph(family: Family, s: u32) -> Outcome<TannerGraph> {
    let v = match line_incidence(family.geometry(), s) {
        Ok(v) => v,
        Err(e) => return usage(format!("{} with s = {s}: {e}", family.name())),
    };
    Ok(TannerGraph::circulant(&v).map_err(anyhow::Error::from)?)
}

fn cmd_build(family: Family, s: u32, out: Option<&Path>) -> Outcome<()> {
    let graph = build_graph(family, s)?;
    let text = serialize_alist(&graph);
    let identity = CodeIdentity::Geometry {
        family: family.name().into(),
        s,
    };
    emit(out, &text, identity, 0, &())
}

fn cmd_inspect(path: &Path) -> Outcome<()> {
    if !path.exists() {
        return usage(format!("file not found: {}", path.display()));
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let graph = parse_alist(&text).with_context(|| format!("parsing {}", path.display()))?;
    println!("{}", graph.summary());
    Ok(())
}

/// Loads `--code`, returning the code and how to find it again.
fn load_code(spec: &str) -> Outcome<(SimCode, CodeIdentity)> {
    if let Some((fam, s)) = spec.split_once(':') {
        let family = match fam {
            "pg2" => Some(Family::Pg2),
            "eg2" => Some(Family::Eg2),
            _ => None,
        };
        if let Some(family) = family {
            let Ok(s) = s.parse::<u32>() else {
                return usage(format!("bad code spec `{spec}`"));
            };
            let graph = build_graph(family, s)?;
            let identity = CodeIdentity::Geometry {
                family: family.name().into(),
                s,
            };
            return Ok((SimCode::new(graph, format!("{}-s{s}", family.name())), identity));
        }
    }
    let path = Path::new(spec);
    if !path.exists() {
        return usage(format!("file not found: {spec}"));
    }
    let bytes = std::fs::read(path).with_context(|| format!("reading {spec}"))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| anyhow!("{spec} is not UTF-8"))?;
    let graph = parse_alist(&text).with_context(|| format!("parsing {spec}"))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    let identity = CodeIdentity::Alist {
        path: spec.into(),
        sha256: sha256_hex(&bytes),
    };
    Ok((SimCode::new(graph, name), identity))
}

fn parse_lc(text: &str) -> Outcome<LlrScaling> {
    if text == "matched" {
        return Ok(LlrScaling::Matched);
    }
    if let Some(db) = text.strip_prefix("fixed:") {
        if let Ok(db) = db.parse::<f64>() {
            if db.is_finite() {
                return Ok(LlrScaling::fixed_at_esn0(db));
            }
        }
    }
    usage(format!("--lc expects `matched` or `fixed:<EsN0 dB>`, got `{text}`"))
}

/// Resolves the decoder flags, rejecting parameters the decoder would ignore.
fn decoder_config(a: &DecoderArgs) -> Outcome<DecoderConfig> {
    use DecoderName as D;
    let d = a.decoder;
    let name = d.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let reject = |flag: &str, given: bool, allowed: &[D]| -> Outcome<()> {
        if given && !allowed.contains(&d) {
            return usage(format!("--{flag} does not apply to --decoder {name}"));
        }
        Ok(())
    };
    reject("theta1", a.theta1.is_some(), &[D::Elena])?;
    reject("theta2", a.theta2.is_some(), &[D::Elena])?;
    reject("li-tau-m", a.li_tau_m.is_some(), &[D::Elena, D::ElenaStar])?;
    reject("alpha-norm", a.alpha_norm.is_some(), &[D::Nms])?;
    reject("beta-off", a.beta_off.is_some(), &[D::Oms])?;

    let rule = match d {
        D::Spa => CheckRule::Spa,
        D::Ms => CheckRule::MinSum,
        D::Nms => CheckRule::Normalized {
            alpha: a.alpha_norm.unwrap_or(0.8),
        },
        D::Oms => CheckRule::Offset {
            beta: a.beta_off.unwrap_or(0.5),
        },
        D::Ddbmp => CheckRule::DdBmp,
        D::Elena => CheckRule::Elena,
        D::ElenaStar => CheckRule::ElenaStar,
    };
    let mut scnu = ScnuParams::default();
    if d == D::ElenaStar {
        scnu.li_tau_m = ELENA_STAR_TAU_M;
    }
    scnu.theta1 = a.theta1.unwrap_or(scnu.theta1);
    scnu.theta2 = a.theta2.unwrap_or(scnu.theta2);
    scnu.li_tau_m = a.li_tau_m.unwrap_or(scnu.li_tau_m);

    let mut cfg = DecoderConfig::new(rule).with_scnu(scnu);
    cfg.iterations = a.iters;
    cfg.early_stop = a.early_stop;
    cfg.sr_gamma = a.sr_gamma;
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    Ok(cfg)
}

fn run_spec(a: &DecoderArgs, stop: StopRule) -> Outcome<RunSpec> {
    let workers = match a.workers {
        Some(0) => return usage("--workers must be at least 1"),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let mut spec = RunSpec::new(parse_lc(&a.lc)?, stop, a.seed).with_workers(workers);
    if a.all_zero {
        spec.transmission = Transmission::AllZero;
    }
    Ok(spec)
}

fn stop_rule(s: &StopArgs) -> Outcome<StopRule> {
    if s.max_frames == 0 {
        return usage("--max-frames must be at least 1");
    }
    Ok(StopRule {
        min_frame_errors: (s.min_frame_errors > 0).then_some(s.min_frame_errors),
        max_frames: Some(s.max_frames),
    })
}

fn snr_grid(axis: &GridAxis) -> Outcome<(SnrAxis, Vec<f64>)> {
    let (kind, text) = match (&axis.ebn0, &axis.esn0) {
        (Some(t), None) => (SnrAxis::EbN0, t),
        (None, Some(t)) => (SnrAxis::EsN0, t),
        _ => return usage("give exactly one of --ebn0 and --esn0"),
    };
    match grid::parse_grid(text) {
        Ok(v) => Ok((kind, v)),
        Err(e) => usage(format!("bad SNR grid: {e:#}")),
    }
}

/// Everything besides the code that determines the output bytes.
/// The worker count is left out because it does not change results.
#[derive(Serialize)]
struct ResolvedRun<'a, P: Serialize> {
    command: &'a str,
    decoder: DecoderConfig,
    llr_scaling: LlrScaling,
    stop: StopRule,
    transmission: Transmission,
    seed: u64,
    axis: SnrAxis,
    points: P,
}

fn resolved<'a, P: Serialize>(command: &'a str, cfg: &DecoderConfig, spec: &RunSpec, axis: SnrAxis, points: P) -> ResolvedRun<'a, P> {
    ResolvedRun {
        command,
        decoder: *cfg,
        llr_scaling: spec.scaling,
        stop: spec.stop,
        transmission: spec.transmission,
        seed: spec.seed,
        axis,
        points,
    }
}

/// Writes `text` to `out` with its manifest, or to stdout.
fn emit<C: Serialize>(out: Option<&Path>, text: &str, code: CodeIdentity, seed: u64, config: &C) -> Outcome<()> {
    let Some(path) = out else {
        print!("{text}");
        return Ok(());
    };
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    RunManifest::new(code, seed, config, text.as_bytes())?.write_beside(path)?;
    Ok(())
}

fn cmd_ber(a: &BerArgs) -> Outcome<()> {
    let cfg = decoder_config(&a.decoder)?;
    let spec = run_spec(&a.decoder, stop_rule(&a.stop)?)?;
    let (axis, values) = snr_grid(&a.axis)?;
    let (code, identity) = load_code(&a.decoder.code)?;
    let points = run_curve(&code, &cfg, axis, &values, &spec).map_err(anyhow::Error::from)?;
    let text = snnbp::sim::to_csv(&points, &cfg.label(), &code.name, spec.seed);
    emit(a.out.as_deref(), &text, identity, spec.seed, &resolved("ber", &cfg, &spec, axis, &values))
}

fn cmd_sweep(a: &SweepArgs) -> Outcome<()> {
    let cfg = decoder_config(&a.decoder)?;
    let spec = run_spec(&a.decoder, stop_rule(&a.stop)?)?;
    let grid = match grid::parse_grid(&a.grid) {
        Ok(g) => g,
        Err(e) => return usage(format!("bad --grid: {e:#}")),
    };
    let param = SweepParam::from(a.param);
    if let Err(e) = param.apply(&cfg, grid[0]) {
        return usage(e.to_string());
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return usage("--grid must be strictly increasing");
    }
    let (code, identity) = load_code(&a.decoder.code)?;
    let (axis, db) = match (a.ebn0, a.esn0) {
        (Some(db), None) => (SnrAxis::EbN0, db),
        (None, Some(db)) => (SnrAxis::EsN0, db),
        _ => return usage("give exactly one of --ebn0 and --esn0"),
    };
    let point = ChannelPoint::on_axis(axis, db, code.rate()).map_err(anyhow::Error::from)?;
    let sweep = SweepSpec { param, grid, point };
    let table = run_sweep(&code, &cfg, &sweep, &spec).map_err(anyhow::Error::from)?;

    let mut text = format!("param,value,{CSV_HEADER}\n");
    for (k, (v, p)) in table.rows.iter().enumerate() {
        let label = param.apply(&cfg, *v).map(|c| c.label()).unwrap_or_else(|_| cfg.label());
        let row = p.csv_row(&label, &code.name, spec.seed);
        let _ = writeln!(text, "{},{v},{row}", param.name());
        if k + 1 == table.rows.len() {
            let (bv, bp) = &table.rows[table.argmin];
            let _ = writeln!(text, "argmin,{bv},{}", bp.csv_row(&label, &code.name, spec.seed));
        }
    }
    let config = (resolved("sweep", &cfg, &spec, axis, [db]), param.name(), &sweep.grid);
    emit(a.out.as_deref(), &text, identity, spec.seed, &config)
}

fn cmd_spikes(a: &SpikesArgs) -> Outcome<()> {
    let cfg = decoder_config(&a.decoder)?;
    if !cfg.rule.is_spiking() {
        return usage(format!("spikes needs a spiking decoder, got {}", cfg.rule.name()));
    }
    if a.frames == 0 {
        return usage("--frames must be at least 1");
    }
    let spec = run_spec(&a.decoder, StopRule::frames(a.frames))?;
    let (axis, values) = snr_grid(&a.axis)?;
    let (code, identity) = load_code(&a.decoder.code)?;
    let axis_name = match axis {
        SnrAxis::EbN0 => "ebn0",
        SnrAxis::EsN0 => "esn0",
    };
    let mut text = String::from(
        "axis,ebn0_db,esn0_db,frames,spikes_per_cw,rate_scnu,rate_lif,lif_spikes_per_cw,combiner_spikes_per_cw,ber,decoder,code,seed\n",
    );
    for &db in &values {
        let point = ChannelPoint::on_axis(axis, db, code.rate()).map_err(anyhow::Error::from)?;
        let r = measure_spikes(&code, &cfg, point, spec.scaling, a.frames, spec.seed, spec.workers)
            .map_err(anyhow::Error::from)?;
        let _ = writeln!(
            text,
            "{axis_name},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.eb_n0_db,
            r.es_n0_db,
            r.frames,
            r.spikes_per_codeword,
            r.rate_scnu,
            r.rate_lif,
            r.lif_spikes_per_codeword,
            r.combiner_spikes_per_codeword,
            r.ber,
            cfg.label(),
            code.name,
            spec.seed
        );
    }
    emit(a.out.as_deref(), &text, identity, spec.seed, &resolved("spikes", &cfg, &spec, axis, &values))
}
