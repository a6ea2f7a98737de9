//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trafficseg::io::synthetic::load_scene_spec;
use trafficseg::io::{generate_synthetic, SyntheticSceneSpec};
use trafficseg::mog::ColorMode;
use trafficseg::pipeline::{compare, inspect_pixel, run, Method, RunConfig, StepOrder};
use trafficseg::segment::SemanticLabel;
use trafficseg::{Error, Result};

#[derive(Parser)]
#[command(name = "trafficseg", version, about = "Road, shadow and vehicle segmentation of traffic video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a frame directory with one method.
    Run(RunArgs),
    /// Run two methods on the same sequence and report per-frame deltas.
    Compare(CompareArgs),
    /// Write a synthetic scene (frames and ground-truth masks).
    Generate(GenerateArgs),
    /// Dump one pixel's mixture model from a checkpoint.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Gray,
    Rgb,
}

impl From<Mode> for ColorMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Gray => ColorMode::Intensity,
            Mode::Rgb => ColorMode::Rgb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Default,
    SlowConvoy,
    Stalled,
}

/// Settings shared by `run` and `compare`. Omitted values keep library defaults.
#[derive(Args)]
struct Common {
    /// Directory of frame_NNNNNN.pgm/.ppm files.
    #[arg(long)]
    input: PathBuf,
    /// Directory of ground-truth mask_NNNNNN.pgm files.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gray")]
    color_mode: Mode,
    /// Prior strength: pseudo-observations behind the initial model.
    #[arg(long)]
    k: Option<f64>,
    /// Forgetting rate of incremental EM (0 disables forgetting).
    #[arg(long)]
    em_alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Refit parameters from statistics every this many updates.
    #[arg(long)]
    recompute_every: Option<u64>,
    /// Background forgetting rate.
    #[arg(long)]
    alpha: Option<f64>,
    /// Mahalanobis distance above which a pixel is foreground.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    initial_variance: Option<f64>,
    /// Skip background updates at foreground pixels (baseline-exponential).
    #[arg(long)]
    selective_update: bool,
    #[arg(long, value_parser = parse_order)]
    order: Option<StepOrder>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out_masks: Option<PathBuf>,
    #[arg(long)]
    out_shadowfree: Option<PathBuf>,
    #[arg(long)]
    out_background: Option<PathBuf>,
    #[arg(long)]
    out_metrics: Option<PathBuf>,
    /// Directory for model-bank checkpoints.
    #[arg(long)]
    out_checkpoints: Option<PathBuf>,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Model bank to continue from.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_parser = parse_method)]
    a_method: Method,
    #[arg(long, value_parser = parse_method)]
    b_method: Method,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out_metrics: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scene description in key = value form.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    x: usize,
    #[arg(long)]
    y: usize,
    #[arg(long)]
    csv: bool,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_order(s: &str) -> std::result::Result<StepOrder, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn config(method: Method, c: &Common) -> RunConfig {
    let mut cfg = RunConfig::new(method, c.color_mode.into());
    cfg.input = c.input.clone();
    cfg.truth = c.truth.clone();
    let em = &mut cfg.em;
    em.prior_strength = c.k.unwrap_or(em.prior_strength);
    em.forgetting_alpha = c.em_alpha.unwrap_or(em.forgetting_alpha);
    em.seed = c.seed.unwrap_or(em.seed);
    em.max_iterations = c.max_iterations.unwrap_or(em.max_iterations);
    em.restarts = c.restarts.unwrap_or(em.restarts);
    em.recompute_every = c.recompute_every.unwrap_or(em.recompute_every);
    cfg.alpha = c.alpha.unwrap_or(cfg.alpha);
    cfg.threshold = c.threshold.unwrap_or(cfg.threshold);
    cfg.initial_variance = c.initial_variance.unwrap_or(cfg.initial_variance);
    cfg.selective_update = c.selective_update;
    cfg.order = c.order.unwrap_or(cfg.order);
    cfg
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut cfg = config(a.method, &a.common);
    cfg.resume = a.resume;
    let o = &mut cfg.outputs;
    o.masks = a.out_masks;
    o.shadow_free = a.out_shadowfree;
    o.background = a.out_background;
    o.metrics = a.out_metrics;
    o.checkpoints = a.out_checkpoints;
    o.checkpoint_every = a.checkpoint_every;
    let out = run(&cfg)?;
    let counts = out.masks.iter().fold([0usize; 3], |mut acc, (_, m)| {
        for l in SemanticLabel::ALL {
            acc[l.index()] += m.count(l);
        }
        acc
    });
    println!(
        "{}: {} frames, road {} shadow {} vehicle {} pixels, {:.2} s",
        cfg.method,
        out.report.frames.len(),
        counts[0],
        counts[1],
        counts[2],
        out.report.total_wall_time().as_secs_f64()
    );
    if let Some(c) = out.report.aggregate(None) {
        for l in SemanticLabel::ALL {
            let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
            println!("  {:<8} precision {} recall {}", l.name(), f(c.precision(l)), f(c.recall(l)));
        }
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    // The selective flag only reaches a side that supports it.
    let side = |m: Method| {
        let mut cfg = config(m, &a.common);
        cfg.selective_update &= m == Method::BaselineExponential;
        cfg
    };
    let cmp = compare(&side(a.a_method), &side(a.b_method))?;
    match &a.out_metrics {
        Some(p) => cmp.save_csv(p)?,
        None => cmp.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = match (&a.spec, a.preset) {
        (Some(p), _) => load_scene_spec(p)?,
        (None, Some(Preset::Default)) => SyntheticSceneSpec::default_scene(),
        (None, Some(Preset::SlowConvoy)) => SyntheticSceneSpec::slow_convoy_scene(),
        (None, Some(Preset::Stalled)) => SyntheticSceneSpec::stalled_vehicle_scene(),
        (None, None) => return Err(Error::Usage("generate needs --spec or --preset".into())),
    };
    spec.seed = a.seed.unwrap_or(spec.seed);
    spec.frames = a.frames.unwrap_or(spec.frames);
    let seq = generate_synthetic(&spec)?;
    seq.write_to(&a.out)?;
    println!("wrote {} frames to {}", seq.frames.len(), a.out.display());
    Ok(())
}

fn cmd_inspect(a: InspectArgs) -> Result<()> {
    let p = inspect_pixel(&a.checkpoint, a.x, a.y)?;
    if a.csv {
        print!("{}", p.to_csv());
    } else {
        print!("{p}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
