mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use flowkit::augment::{augment_pair, glare_cnn_preset, AugmentConfig, FramePair};
use flowkit::estimator::{estimate_flow, EstimatorConfig};
use flowkit::fisheye::{analytic_flow, CameraModel, DepthConvention, DepthMap, RigidPose};
use flowkit::flowio::{encode_mask_png, flow_to_color, read_flow, read_image, write_flow, write_image};
use flowkit::glare::{detect_glare, GlareConfig, PolygonReport};
use flowkit::losses::{brightness_consistency_loss, sequence_loss, total_loss, LossConfig};
use flowkit::metrics::{confusion, epe, iou_cases, mean, median, precision_recall};
use flowkit::schedule::{parse_schedule, sample_mixture, FINETUNE_SCHEDULE, JOINT_SCHEDULE};
use flowkit::BinaryMask;

use output::Report;

#[derive(Parser)]
#[command(name = "flowkit", version, about = "Optical-flow robustness toolkit")]
struct Cli {
    /// Print results as one JSON object instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for multi-file subcommands.
    #[arg(long, global = true, env = "FLOWKIT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Produce the plain and brightness-perturbed branches of a frame pair.
    Augment(AugmentArgs),
    /// Flow ground truth from depth, relative pose and camera model.
    Synthflow(SynthflowArgs),
    /// Estimate flow between two frames with pyramidal Lucas-Kanade.
    Estimate(EstimateArgs),
    #[command(subcommand)]
    Eval(EvalCommand),
    #[command(subcommand)]
    Glare(GlareCommand),
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Sequence, consistency and total loss of flow files.
    Loss(LossArgs),
    #[command(subcommand)]
    Schedule(ScheduleCommand),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Mean endpoint error of a predicted flow.
    Epe {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Optional evaluation mask image; nonzero pixels are evaluated.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Pixel KPIs and IoU (percent) of glare masks, paired in the order given.
    Glare {
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        #[arg(long, required = true)]
        gt: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GlareCommand {
    /// Detect glare polygons in an image.
    Detect {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out_mask: PathBuf,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Profile::Detection)]
        profile: Profile,
        /// JSON file overriding individual detector parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Detection,
    Annotation,
}

#[derive(Subcommand)]
enum FlowCommand {
    /// Render a flow file with the standard color wheel.
    Vis {
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Magnitude mapped to the wheel rim; defaults to the largest valid vector.
        #[arg(long)]
        max_norm: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ScheduleCommand {
    /// Draw dataset ids from a stage's mixture.
    Sample {
        /// Schedule JSON file, or `finetune` / `joint` for the built-in ones.
        #[arg(long)]
        config: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stage name; defaults to the last stage.
        #[arg(long)]
        stage: Option<String>,
    },
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    first: PathBuf,
    #[arg(long)]
    second: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Augmentation config JSON; unspecified fields keep their defaults.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    GlareCnn,
}

#[derive(Args)]
struct SynthflowArgs {
    #[arg(long)]
    camera: PathBuf,
    #[arg(long)]
    pose: PathBuf,
    /// Single-channel PFM depth.
    #[arg(long)]
    depth: PathBuf,
    /// Depth file holds z coordinates instead of along-ray distances.
    #[arg(long)]
    z_depth: bool,
    /// Output flow, `.flo` or KITTI `.png`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    color: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    first: PathBuf,
    #[arg(long)]
    second: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    color: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 15)]
    window: usize,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 1e-4)]
    min_eigen: f64,
}

#[derive(Args)]
struct LossArgs {
    /// Predictions from the first to the last refinement iteration.
    #[arg(long, required = true, num_args = 1..)]
    preds: Vec<PathBuf>,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    /// Flow estimated on the plain branch.
    #[arg(long, requires = "branch_b")]
    branch_a: Option<PathBuf>,
    /// Flow estimated on the perturbed branch.
    #[arg(long, requires = "branch_a")]
    branch_b: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(report) => {
            print!("{}", report.render(cli.json));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Report> {
    match command {
        Command::Augment(args) => augment(args),
        Command::Synthflow(args) => synthflow(args),
        Command::Estimate(args) => estimate(args),
        Command::Eval(EvalCommand::Epe { pred, gt, mask }) => eval_epe(&pred, &gt, mask.as_deref()),
        Command::Eval(EvalCommand::Glare { pred, gt }) => eval_glare(&pred, &gt),
        Command::Glare(GlareCommand::Detect {
            image,
            out_mask,
            out_json,
            profile,
            config,
        }) => glare_detect(&image, &out_mask, out_json.as_deref(), profile, config.as_deref()),
        Command::Flow(FlowCommand::Vis { flow, out, max_norm }) => flow_vis(&flow, &out, max_norm),
        Command::Loss(args) => loss(args),
        Command::Schedule(ScheduleCommand::Sample { config, n, seed, stage }) => {
            schedule_sample(&config, n, seed, stage.as_deref())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_flow(path: &Path) -> Result<flowkit::FlowField> {
    read_flow(path).with_context(|| format!("reading flow {}", path.display()))
}

fn load_image(path: &Path) -> Result<flowkit::Image> {
    read_image(path).with_context(|| format!("reading image {}", path.display()))
}

/// Nonzero pixels of an image file.
fn load_mask(path: &Path) -> Result<BinaryMask> {
    let img = load_image(path)?.to_luma();
    Ok(BinaryMask::new(
        img.width(),
        img.height(),
        img.data().iter().map(|&v| v > 0.5 / 255.0).collect(),
    )?)
}

fn augment(args: AugmentArgs) -> Result<Report> {
    let cfg = match (&args.config, args.preset) {
        (Some(path), _) => serde_json::from_str::<AugmentConfig>(&read_text(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        (None, Some(Preset::GlareCnn)) => glare_cnn_preset(),
        (None, None) => AugmentConfig::default(),
    };
    let pair = FramePair::new(load_image(&args.first)?, load_image(&args.second)?)?;
    let (a, b, log) = augment_pair(&pair, &cfg, args.seed)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let outputs = [
        ("a_first.png", &a.first),
        ("a_second.png", &a.second),
        ("b_first.png", &b.first),
        ("b_second.png", &b.second),
    ];
    outputs.par_iter().try_for_each(|(name, img)| -> Result<()> {
        write_image(args.out_dir.join(name), img).with_context(|| format!("writing {name}"))?;
        Ok(())
    })?;
    let log_path = args.out_dir.join("transform_log.json");
    fs::write(&log_path, serde_json::to_string_pretty(&log)? + "\n")
        .with_context(|| format!("writing {}", log_path.display()))?;

    let mut r = Report::default();
    r.put("seed", args.seed)
        .put("width", a.first.width())
        .put("height", a.first.height())
        .put("out_dir", args.out_dir.display().to_string());
    Ok(r)
}

fn synthflow(args: SynthflowArgs) -> Result<Report> {
    let cam: CameraModel = serde_json::from_str(&read_text(&args.camera)?)
        .with_context(|| format!("parsing camera {}", args.camera.display()))?;
    let pose: RigidPose = serde_json::from_str(&read_text(&args.pose)?)
        .with_context(|| format!("parsing pose {}", args.pose.display()))?;
    let convention = if args.z_depth {
        DepthConvention::ZDepth
    } else {
        DepthConvention::AlongRay
    };
    let bytes = fs::read(&args.depth).with_context(|| format!("reading {}", args.depth.display()))?;
    let depth = DepthMap::from_pfm(&bytes, convention, &cam)?;
    let flow = analytic_flow(&depth, &pose, &cam)?;
    write_flow(&args.out, &flow).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.color {
        write_image(path, &flow_to_color(&flow, None)?)?;
    }
    let mut r = Report::default();
    r.put("valid_fraction", flow.valid().count() as f64 / flow.len() as f64)
        .put("max_magnitude", flow.max_magnitude());
    Ok(r)
}

fn estimate(args: EstimateArgs) -> Result<Report> {
    let cfg = EstimatorConfig {
        levels: args.levels,
        window: args.window,
        iterations: args.iterations,
        min_eigen_threshold: args.min_eigen,
    };
    let flow = estimate_flow(&load_image(&args.first)?, &load_image(&args.second)?, &cfg)?;
    write_flow(&args.out, &flow).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.color {
        write_image(path, &flow_to_color(&flow, None)?)?;
    }
    let mut r = Report::default();
    r.put("valid_fraction", flow.valid().count() as f64 / flow.len() as f64)
        .put("max_magnitude", flow.max_magnitude());
    Ok(r)
}

fn eval_epe(pred: &Path, gt: &Path, mask: Option<&Path>) -> Result<Report> {
    let mask = mask.map(load_mask).transpose()?;
    let value = epe(&load_flow(pred)?, &load_flow(gt)?, mask.as_ref())?;
    let mut r = Report::default();
    r.put("epe", value);
    Ok(r)
}

fn eval_glare(preds: &[PathBuf], gts: &[PathBuf]) -> Result<Report> {
    if preds.len() != gts.len() {
        bail!("{} predictions for {} ground-truth masks", preds.len(), gts.len());
    }
    let rows = preds
        .par_iter()
        .zip(gts)
        .map(|(p, g)| -> Result<_> {
            let (pm, gm) = (load_mask(p)?, load_mask(g)?);
            let c = confusion(&pm, &gm).with_context(|| format!("{} vs {}", p.display(), g.display()))?;
            Ok((c, precision_recall(&c), iou_cases(&pm, &gm)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut r = Report::default();
    let (mut bg, mut glare) = (Vec::new(), Vec::new());
    for (i, (c, (precision, recall), iou)) in rows.iter().enumerate() {
        r.put(format!("image{i}.tp_fraction"), c.tp)
            .put(format!("image{i}.fp_fraction"), c.fp)
            .put(format!("image{i}.fn_fraction"), c.fn_)
            .put(format!("image{i}.tn_fraction"), c.tn)
            .put(format!("image{i}.precision"), *precision)
            .put(format!("image{i}.recall"), *recall)
            .put(format!("image{i}.case"), format!("{:?}", iou.case))
            .put(format!("image{i}.iou_background"), iou.iou_background)
            .put(format!("image{i}.iou_glare"), iou.iou_glare);
        bg.push(iou.iou_background);
        glare.push(iou.iou_glare);
    }
    let means: Vec<f64> = bg.iter().zip(&glare).map(|(a, b)| (a + b) / 2.0).collect();
    r.put("mean_iou_background", mean(&bg))
        .put("mean_iou_glare", mean(&glare))
        .put("mean_iou", mean(&means))
        .put("median_iou_background", median(&bg))
        .put("median_iou_glare", median(&glare))
        .put("median_iou", median(&means));
    Ok(r)
}

fn glare_detect(
    image: &Path,
    out_mask: &Path,
    out_json: Option<&Path>,
    profile: Profile,
    config: Option<&Path>,
) -> Result<Report> {
    let base = match profile {
        Profile::Detection => GlareConfig::detection(),
        Profile::Annotation => GlareConfig::annotation(),
    };
    let cfg = match config {
        Some(path) => {
            // fields missing from the file keep the profile's values
            let mut merged = serde_json::to_value(base)?;
            let overrides: serde_json::Value = serde_json::from_str(&read_text(path)?)?;
            let Some(fields) = overrides.as_object() else {
                bail!("{} must hold a JSON object", path.display());
            };
            for (k, v) in fields {
                merged[k] = v.clone();
            }
            serde_json::from_value(merged).with_context(|| format!("parsing {}", path.display()))?
        }
        None => base,
    };
    let img = load_image(image)?.to_rgb();
    let det = detect_glare(&img, &cfg)?;
    fs::write(out_mask, encode_mask_png(&det.mask)?).with_context(|| format!("writing {}", out_mask.display()))?;
    if let Some(path) = out_json {
        let report = PolygonReport {
            image: image.display().to_string(),
            polygons: det.polygons.clone(),
        };
        fs::write(path, serde_json::to_string(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let mut r = Report::default();
    r.put("polygons", det.polygons.len())
        .put("glare_fraction", det.mask.count() as f64 / det.mask.len() as f64);
    Ok(r)
}

fn flow_vis(flow: &Path, out: &Path, max_norm: Option<f64>) -> Result<Report> {
    let flow = load_flow(flow)?;
    write_image(out, &flow_to_color(&flow, max_norm)?).with_context(|| format!("writing {}", out.display()))?;
    let mut r = Report::default();
    r.put("max_magnitude", flow.max_magnitude());
    Ok(r)
}

fn loss(args: LossArgs) -> Result<Report> {
    let preds = args.preds.iter().map(|p| load_flow(p)).collect::<Result<Vec<_>>>()?;
    let gt = load_flow(&args.gt)?;
    let cfg = LossConfig::new(args.gamma, preds.len())?;
    let ls = sequence_loss(&preds, &gt, &cfg)?;
    let lb = match (&args.branch_a, &args.branch_b) {
        (Some(a), Some(b)) => brightness_consistency_loss(&load_flow(a)?, &load_flow(b)?)?,
        _ => 0.0,
    };
    let mut r = Report::default();
    r.put("sequence_loss", ls)
        .put("consistency_loss", lb)
        .put("total_loss", total_loss(ls, lb)?);
    Ok(r)
}

fn schedule_sample(config: &str, n: usize, seed: u64, stage: Option<&str>) -> Result<Report> {
    let text = match config {
        "finetune" => FINETUNE_SCHEDULE.to_string(),
        "joint" => JOINT_SCHEDULE.to_string(),
        path => read_text(Path::new(path))?,
    };
    let schedule = parse_schedule(&text).with_context(|| format!("loading schedule {config}"))?;
    let st = match stage {
        Some(name) => schedule
            .stage(name)
            .with_context(|| format!("no stage named `{name}`"))?,
        None => schedule.stages.last().expect("validated schedules are non-empty"),
    };
    let draws = sample_mixture(&st.mixture, n, seed)?;
    let mut r = Report::default();
    r.put("seed", seed)
        .put("stage", st.name.clone())
        .put("draws", draws.iter().map(|d| d.code()).collect::<Vec<_>>());
    Ok(r)
}
