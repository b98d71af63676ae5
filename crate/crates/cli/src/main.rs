//! `mos`: command-line front end chaining flow, MOS images, volumes,
//! training, prediction, fusion and evaluation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mos::flow::{video_flows, Tvl1Params};
use mos::fusion::{evaluate, fuse_predictions, predict_video, FusionWeights, VideoPrediction};
use mos::io::flo::{read_flo, write_flo};
use mos::io::manifest::{Manifest, Split};
use mos::io::pairs::{read_pairs, write_pairs, PairFiles};
use mos::io::pnm::{write_pgm, write_ppm};
use mos::io::scores::{read_scores, write_scores};
use mos::io::synth::{gen_synthetic, MotionFamily, SyntheticSpec};
use mos::io::tensor::write_tensor;
use mos::io::viz::flow_to_rgb;
use mos::io::{list_files, read_file, read_frames, write_file};
use mos::motion::{mos_images, xy_images, MosPair, MosParams, XyPair};
use mos::net::{read_checkpoint, train, write_checkpoint, Net, NetConfig, Shape, TrainConfig};
use mos::pipeline::{Clip, PipelineParams};
use mos::volume::{stack_volume, ChannelSelect, StackSpec};
use mos::{RescaleBounds, Rng};

#[derive(Parser)]
#[command(name = "mos", version, about = "Magnitude-orientation motion streams for action recognition")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frames directory -> one .flo file per consecutive frame pair.
    Flow(FlowArgs),
    /// .flo directory -> magnitude/orientation (or x/y) PGM pairs.
    Mos(MosArgs),
    /// PGM pairs -> stacked input tensors.
    Volume(VolumeArgs),
    /// Generate the synthetic motion dataset.
    Synth(SynthArgs),
    /// Train a network on the train split of a manifest.
    Train(TrainArgs),
    /// Score every clip of a manifest split.
    Predict(PredictArgs),
    /// Late fusion of several score files.
    Fuse(FuseArgs),
    /// Accuracy and confusion matrix of a score file.
    Eval(EvalArgs),
    /// Colour rendering of a .flo file.
    Viz(VizArgs),
}

/// Single-clip mode by default; with `--manifest`, INPUT and OUTPUT are
/// dataset roots and every manifest entry is processed.
#[derive(Args)]
struct Paths {
    /// Input clip directory (dataset root with --manifest).
    input: PathBuf,
    /// Output clip directory (dataset root with --manifest).
    output: PathBuf,
    /// Process every entry of this manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl Paths {
    fn jobs(&self) -> Result<Vec<(PathBuf, PathBuf)>> {
        match &self.manifest {
            None => Ok(vec![(self.input.clone(), self.output.clone())]),
            Some(m) => Ok(load_manifest(m)?
                .entries()
                .iter()
                .map(|e| (self.input.join(&e.path), self.output.join(&e.path)))
                .collect()),
        }
    }
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    paths: Paths,
    #[arg(long, default_value_t = 0.15)]
    lambda: f64,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long, default_value_t = 5)]
    warps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Mos,
    Xy,
}

#[derive(Args)]
struct MosArgs {
    #[command(flatten)]
    paths: Paths,
    #[arg(long, default_value_t = -15.0, allow_hyphen_values = true)]
    mag_low: f64,
    #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
    mag_high: f64,
    #[arg(long, default_value_t = -180.0, allow_hyphen_values = true)]
    ori_low: f64,
    #[arg(long, default_value_t = 180.0, allow_hyphen_values = true)]
    ori_high: f64,
    #[arg(long, default_value_t = 128)]
    mag_threshold: u8,
    /// `xy` writes rescaled horizontal/vertical components using the
    /// magnitude bounds.
    #[arg(long, value_enum, default_value_t = Encoding::Mos)]
    encoding: Encoding,
}

#[derive(Args)]
struct VolumeArgs {
    #[command(flatten)]
    paths: Paths,
    #[arg(long, default_value_t = 10)]
    stack_length: usize,
    /// Distance between consecutive stack starts.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, value_enum, default_value_t = Encoding::Mos)]
    encoding: Encoding,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Translation,
    Rotation,
    Zoom,
}

#[derive(Args)]
struct SynthArgs {
    output: PathBuf,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 12)]
    frames: usize,
    #[arg(long, value_enum, default_value_t = Family::Translation)]
    family: Family,
    #[arg(long, value_delimiter = ',', default_value = "1,3")]
    speeds: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    clips_per_class: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Channels {
    Both,
    First,
    Second,
}

#[derive(Args)]
struct StreamArgs {
    /// Dataset manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Root holding the image pairs of every manifest entry.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Encoding::Mos)]
    encoding: Encoding,
    #[arg(long, value_enum, default_value_t = Channels::Both)]
    channels: Channels,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    stream: StreamArgs,
    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,
    /// Loss curve CSV (`iter,lr,loss`).
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    stack_length: usize,
    #[arg(long, default_value_t = 56)]
    input_side: usize,
    #[arg(long, default_value_t = 3000)]
    iterations: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.005)]
    lr: f64,
    #[arg(long, default_value_t = 5000)]
    lr_step: usize,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0.0005)]
    weight_decay: f64,
    #[arg(long, default_value_t = 16)]
    conv1: usize,
    #[arg(long, default_value_t = 32)]
    conv2: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Scores CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Stack starts per video; each is scored on ten crops.
    #[arg(long, default_value_t = 25)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    split: SplitArg,
}

#[derive(Args)]
struct FuseArgs {
    #[arg(required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
    /// One weight per score file; equal weights when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    scores: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    confusion_csv: Option<PathBuf>,
    #[arg(long)]
    confusion_pgm: Option<PathBuf>,
}

#[derive(Args)]
struct VizArgs {
    input: PathBuf,
    output: PathBuf,
    /// Magnitude mapped to full saturation; the field maximum by default.
    #[arg(long)]
    max_magnitude: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Flow(a) => cmd_flow(a),
        Command::Mos(a) => cmd_mos(a),
        Command::Volume(a) => cmd_volume(a),
        Command::Synth(a) => cmd_synth(a, seed),
        Command::Train(a) => match a.stream.encoding {
            Encoding::Mos => cmd_train::<MosPair>(a, seed),
            Encoding::Xy => cmd_train::<XyPair>(a, seed),
        },
        Command::Predict(a) => match a.stream.encoding {
            Encoding::Mos => cmd_predict::<MosPair>(a),
            Encoding::Xy => cmd_predict::<XyPair>(a),
        },
        Command::Fuse(a) => cmd_fuse(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Viz(a) => cmd_viz(a),
    }
}

fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = String::from_utf8(read_file(path)?).with_context(|| format!("{} is not UTF-8", path.display()))?;
    Manifest::parse(&text).with_context(|| format!("reading {}", path.display()))
}

fn flo_name(t: usize) -> String {
    format!("flow_{t:04}.flo")
}

fn cmd_flow(a: FlowArgs) -> Result<()> {
    let params = Tvl1Params {
        lambda: a.lambda,
        levels: a.levels,
        warps_per_level: a.warps,
        ..Tvl1Params::default()
    };
    params.validate()?;
    for (input, output) in a.paths.jobs()? {
        let frames = read_frames(&input)?;
        let flows = video_flows(&frames, &params).with_context(|| format!("clip {}", input.display()))?;
        for (t, f) in flows.flows().iter().enumerate() {
            write_file(&output.join(flo_name(t)), &write_flo(f))?;
        }
    }
    Ok(())
}

fn read_flow_dir(dir: &Path) -> Result<Vec<mos::FlowField>> {
    let files = list_files(dir, &["flo"])?;
    if files.is_empty() {
        bail!("no .flo files in {}", dir.display());
    }
    files
        .iter()
        .map(|p| read_flo(&read_file(p)?).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn cmd_mos(a: MosArgs) -> Result<()> {
    let params = MosParams {
        mag_bounds: RescaleBounds::new(a.mag_low, a.mag_high)?,
        ori_bounds: RescaleBounds::new(a.ori_low, a.ori_high)?,
        mag_threshold: a.mag_threshold,
    };
    for (input, output) in a.paths.jobs()? {
        let flows = read_flow_dir(&input)?;
        match a.encoding {
            Encoding::Mos => {
                let pairs: Vec<MosPair> = flows.iter().map(|f| mos_images(f, &params)).collect();
                write_pairs(&output, &pairs)?;
            }
            Encoding::Xy => {
                let pairs: Vec<XyPair> = flows.iter().map(|f| xy_images(f, params.mag_bounds)).collect();
                write_pairs(&output, &pairs)?;
            }
        }
    }
    Ok(())
}

fn cmd_volume(a: VolumeArgs) -> Result<()> {
    fn stacks<P: PairFiles>(input: &Path, output: &Path, spec: &StackSpec, stride: usize) -> Result<()> {
        let pairs: Vec<P> = read_pairs(input)?;
        if pairs.len() < spec.stack_length {
            bail!(
                "{}: {} image pairs, stack length {} needs at least that many",
                input.display(),
                pairs.len(),
                spec.stack_length
            );
        }
        for (n, start) in (0..=pairs.len() - spec.stack_length).step_by(stride).enumerate() {
            let v = stack_volume(&pairs, start, spec)?;
            write_file(&output.join(format!("stack_{n:04}.mosv")), &write_tensor(&v))?;
        }
        Ok(())
    }
    if a.stride == 0 {
        bail!("stride must be at least 1");
    }
    let spec = StackSpec::new(a.stack_length)?;
    for (input, output) in a.paths.jobs()? {
        match a.encoding {
            Encoding::Mos => stacks::<MosPair>(&input, &output, &spec, a.stride)?,
            Encoding::Xy => stacks::<XyPair>(&input, &output, &spec, a.stride)?,
        }
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs, seed: u64) -> Result<()> {
    let spec = SyntheticSpec {
        width: a.width,
        height: a.height,
        frames_per_clip: a.frames,
        family: match a.family {
            Family::Translation => MotionFamily::Translation,
            Family::Rotation => MotionFamily::Rotation,
            Family::Zoom => MotionFamily::Zoom,
        },
        speeds: a.speeds,
        clips_per_class: a.clips_per_class,
        train_fraction: a.train_fraction,
        seed,
    };
    let manifest = gen_synthetic(&spec, &a.output)?;
    println!(
        "{} clips, {} classes -> {}",
        manifest.entries().len(),
        manifest.class_count(),
        a.output.display()
    );
    Ok(())
}

fn select(c: Channels) -> ChannelSelect {
    match c {
        Channels::Both => ChannelSelect::Both,
        Channels::First => ChannelSelect::FirstOnly,
        Channels::Second => ChannelSelect::SecondOnly,
    }
}

fn load_clips<P: PairFiles>(stream: &StreamArgs, manifest: &Manifest, split: Split) -> Result<Vec<Clip<P>>> {
    manifest
        .split(split)
        .map(|e| {
            Ok(Clip {
                id: e.path.clone(),
                class: e.class_index,
                pairs: read_pairs(&stream.data.join(&e.path))?,
            })
        })
        .collect()
}

fn cmd_train<P: PairFiles>(a: TrainArgs, seed: u64) -> Result<()> {
    let manifest = load_manifest(&a.stream.manifest)?;
    let clips: Vec<Clip<P>> = load_clips(&a.stream, &manifest, Split::Train)?;
    if clips.is_empty() {
        bail!("manifest has no training clips");
    }
    let pipeline = PipelineParams {
        stack: StackSpec {
            select: select(a.stream.channels),
            ..StackSpec::new(a.stack_length)?
        },
        out_side: a.input_side,
        ..PipelineParams::default()
    };
    let cfg = TrainConfig {
        base_lr: a.lr,
        lr_step: a.lr_step,
        max_iter: a.iterations,
        momentum: a.momentum,
        weight_decay: a.weight_decay,
        batch_size: a.batch_size,
        seed,
        ..TrainConfig::default()
    };
    let input = Shape::new(2 * a.stack_length, a.input_side, a.input_side);
    let config = NetConfig::small(input, manifest.class_count(), a.conv1, a.conv2, a.hidden, a.dropout);
    let mut net = Net::new(config, &mut Rng::with_stream(seed, 1))?;
    let curve = train(&mut net, &clips, &pipeline, &cfg)?;

    let mut bytes = Vec::new();
    write_checkpoint(&net, &mut bytes)?;
    write_file(&a.out, &bytes)?;
    if let Some(path) = &a.loss_csv {
        let mut csv = String::from("iter,lr,loss\n");
        for r in &curve {
            csv.push_str(&format!("{},{},{}\n", r.iter, r.lr, r.loss));
        }
        write_file(path, csv.as_bytes())?;
    }
    if let Some(last) = curve.last() {
        println!("trained {} iterations, final loss {:.4}", curve.len(), last.loss);
    }
    Ok(())
}

fn cmd_predict<P: PairFiles>(a: PredictArgs) -> Result<()> {
    let manifest = load_manifest(&a.stream.manifest)?;
    let net = read_checkpoint(&read_file(&a.checkpoint)?).with_context(|| format!("reading {}", a.checkpoint.display()))?;
    if net.classes() != manifest.class_count() {
        bail!(
            "checkpoint has {} classes, manifest has {}",
            net.classes(),
            manifest.class_count()
        );
    }
    let input = net.config().input;
    if input.h != input.w || input.c % 2 != 0 {
        bail!("checkpoint input {}x{}x{} is not a square pair stack", input.c, input.h, input.w);
    }
    let pipeline = PipelineParams {
        stack: StackSpec {
            select: select(a.stream.channels),
            ..StackSpec::new(input.c / 2)?
        },
        out_side: input.w,
        test_samples: a.samples,
        ..PipelineParams::default()
    };
    let split = match a.split {
        SplitArg::Train => Split::Train,
        SplitArg::Test => Split::Test,
    };
    let clips: Vec<Clip<P>> = load_clips(&a.stream, &manifest, split)?;
    let predictions = clips
        .iter()
        .map(|c| predict_video(&net, &c.id, &c.pairs, &pipeline).with_context(|| format!("clip {}", c.id)))
        .collect::<Result<Vec<_>>>()?;
    write_file(&a.out, write_scores(&predictions)?.as_bytes())?;
    Ok(())
}

fn load_scores(path: &Path) -> Result<Vec<VideoPrediction>> {
    let text = String::from_utf8(read_file(path)?).with_context(|| format!("{} is not UTF-8", path.display()))?;
    read_scores(&text).with_context(|| format!("reading {}", path.display()))
}

fn cmd_fuse(a: FuseArgs) -> Result<()> {
    let streams = a.scores.iter().map(|p| load_scores(p)).collect::<Result<Vec<_>>>()?;
    let weights = match a.weights {
        Some(w) => FusionWeights::new(w)?,
        None => FusionWeights::unweighted(streams.len()),
    };
    let fused = fuse_predictions(&streams, &weights)?;
    write_file(&a.out, write_scores(&fused)?.as_bytes())?;
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let manifest = load_manifest(&a.manifest)?;
    let report = evaluate(&load_scores(&a.scores)?, &manifest)?;
    let mut text = format!(
        "accuracy {:.1}%\nclass-mean accuracy {:.1}%\n",
        100.0 * report.accuracy,
        100.0 * report.class_mean
    );
    for (label, acc) in manifest.labels().iter().zip(&report.per_class) {
        match acc {
            Some(acc) => text.push_str(&format!("  {label}: {:.1}%\n", 100.0 * acc)),
            None => text.push_str(&format!("  {label}: -\n")),
        }
    }
    print_report(&text)?;
    if let Some(p) = &a.confusion_csv {
        write_file(p, report.confusion.to_csv().as_bytes())?;
    }
    if let Some(p) = &a.confusion_pgm {
        write_file(p, &write_pgm(&report.confusion.heat_image()))?;
    }
    Ok(())
}

/// Write to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_report(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_viz(a: VizArgs) -> Result<()> {
    let flow = read_flo(&read_file(&a.input)?)?;
    write_file(&a.output, &write_ppm(&flow_to_rgb(&flow, a.max_magnitude)))?;
    Ok(())
}
