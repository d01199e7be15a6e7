//! Command-line surface.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mirrorsweep_core::eval::{depth_metrics, error_percentage_curve, l_dpt, rescale_depth};
use mirrorsweep_core::geometry::{angle_error, correspondence_from_plane, SymmetryPlane};
use mirrorsweep_core::photo::{build_cost_volume, extract_features, ConfidenceMap, DepthMap};
use mirrorsweep_core::pipeline::{detect_symmetry, estimate_depth, multi_symmetry_depth, ReconstructionResult};
use mirrorsweep_core::scene::{
    benchmark_scene, doubly_symmetric_occluded_scene, occlusion_free_scene, render, textureless_scene, Scene,
    BENCHMARK_SCENES, BENCHMARK_SIZE,
};
use mirrorsweep_core::{Grid, RgbImage, Vec3};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::image_io::{decode_mask, decode_rgb, encode_mask, encode_rgb};
use crate::pfm::{decode_pfm, encode_pfm};
use crate::record::{curve_csv, MetricsDoc, ResultRecord, RoundDoc, Timings};
use crate::scene_spec::{emit_scene_spec, scene_from_spec, CameraSpec, PlaneDoc, SymmetryName};
use crate::selfcheck;

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "MIRRORSWEEP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mirrorsweep",
    version,
    about = "Mirror-plane detection and reflective plane-sweep depth from a single image",
    after_help = "Environment:\n  MIRRORSWEEP_THREADS  worker threads when --threads is not given (0 = automatic)\n\n\
                  Exit status: 0 success, 2 usage error, 3 i/o error, 4 invalid input"
)]
pub struct Cli {
    /// Worker threads (0 = automatic); overrides the config file.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Omit wall-clock timings from result files.
    #[arg(long, global = true)]
    pub no_timings: bool,
    /// Run configuration (JSON); missing fields take defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene to rgb.png, depth.pfm, occlusion.png, camera.json and gt.json.
    Render(RenderArgs),
    /// Detect the mirror plane of an image.
    Detect(DetectArgs),
    /// Estimate depth for a known plane.
    Depth(DepthArgs),
    /// Estimate depth from several object symmetries (needs R and t).
    Multi(MultiArgs),
    /// Depth metrics of a prediction against ground truth.
    Eval(EvalArgs),
    /// Error-percentage curve (CSV) from a list of errors.
    Curves(CurvesArgs),
    /// Run the built-in invariant suite.
    Selfcheck(SelfcheckArgs),
    /// Print cost-volume build throughput.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Scene document (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "builtin", required_unless_present = "builtin")]
    pub spec: Option<PathBuf>,
    /// Built-in scene: benchmark-<i>, occlusion-free-<i>, textureless, doubly-occluded.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = BENCHMARK_SIZE)]
    pub width: usize,
    #[arg(long, default_value_t = BENCHMARK_SIZE)]
    pub height: usize,
    /// Multiply the scene's length unit by this factor.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Also write the scene document as scene.json.
    #[arg(long)]
    pub emit_spec: bool,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    /// Input image (PNG).
    #[arg(long, value_name = "FILE")]
    pub image: PathBuf,
    /// Camera document (JSON).
    #[arg(long, value_name = "FILE")]
    pub camera: PathBuf,
    /// Result document (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub io: ImageArgs,
    /// Reference document with a "plane" entry (e.g. gt.json); adds the angle error.
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DepthOutputs {
    /// Write the depth map (PFM).
    #[arg(long, value_name = "FILE")]
    pub depth_out: Option<PathBuf>,
    /// Write the confidence map (PFM, full resolution).
    #[arg(long, value_name = "FILE")]
    pub confidence_out: Option<PathBuf>,
    /// Ground-truth depth (PFM); adds metrics to the result.
    #[arg(long, value_name = "FILE")]
    pub gt_depth: Option<PathBuf>,
    /// Restrict metrics to nonzero pixels of this PNG mask.
    #[arg(long, value_name = "FILE")]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[command(flatten)]
    pub io: ImageArgs,
    /// Document with a "plane" entry (a detect result or gt.json).
    #[arg(long, value_name = "FILE", conflicts_with = "w", required_unless_present = "w")]
    pub plane: Option<PathBuf>,
    /// Plane parameter w as "x,y,z" (plane wᵀX + 1 = 0).
    #[arg(long, value_delimiter = ',', num_args = 3, allow_negative_numbers = true)]
    pub w: Option<Vec<f64>>,
    #[command(flatten)]
    pub outputs: DepthOutputs,
}

#[derive(Debug, Args)]
pub struct MultiArgs {
    #[command(flatten)]
    pub io: ImageArgs,
    /// Object symmetries to fuse, e.g. M2,M3.
    #[arg(long, value_delimiter = ',', required = true)]
    pub transforms: Vec<String>,
    #[command(flatten)]
    pub outputs: DepthOutputs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted depth (PFM).
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Ground-truth depth (PFM).
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub mask: Option<PathBuf>,
    /// Plane the prediction was made under; with --gt-plane, rescales it.
    #[arg(long, value_name = "FILE", requires = "gt_plane")]
    pub pred_plane: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "pred_plane")]
    pub gt_plane: Option<PathBuf>,
    /// Metrics document (JSON); stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Errors, one per line ('#' comments allowed) or a JSON array.
    #[arg(long, value_name = "FILE")]
    pub errors: PathBuf,
    /// Output CSV.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Randomized cases per geometric property.
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Volumes to build.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
}

/// Ground truth written next to a render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthDoc {
    pub plane: PlaneDoc,
    pub camera: CameraSpec,
    pub depth_range: [f64; 2],
    pub width: usize,
    pub height: usize,
    pub symmetries: Vec<SymmetryName>,
    pub valid_pixels: usize,
    pub occluded_pixels: usize,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit status. Diagnostics go to stderr as one line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("usage error"));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mirrorsweep: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::from_json(&read_text(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads {
        config.threads = t;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Validation(format!("threads: {e}")))?;
    let ctx = Context { config, timings: !cli.no_timings, start: Instant::now() };
    pool.install(|| match &cli.command {
        Command::Render(a) => cmd_render(a),
        Command::Detect(a) => cmd_detect(a, &ctx),
        Command::Depth(a) => cmd_depth(a, &ctx),
        Command::Multi(a) => cmd_multi(a, &ctx),
        Command::Eval(a) => cmd_eval(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Selfcheck(a) => selfcheck::run(a.cases, ctx.config.seed),
        Command::Bench(a) => cmd_bench(a, &ctx),
    })
}

struct Context {
    config: RunConfig,
    timings: bool,
    start: Instant,
}

impl Context {
    fn record(&self, command: &str) -> ResultRecord {
        ResultRecord::new(command, &self.config)
    }

    fn finish(&self, mut record: ResultRecord, out: &Path) -> Result<(), CliError> {
        if self.timings {
            record.timings = Some(Timings { total_s: self.start.elapsed().as_secs_f64() });
        }
        write_file(out, record.to_json().as_bytes())
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_image(path: &Path) -> Result<RgbImage, CliError> {
    decode_rgb(&read_bytes(path)?).map_err(|e| CliError::validation(path.display(), e))
}

fn read_mask(path: &Path) -> Result<Grid<bool>, CliError> {
    decode_mask(&read_bytes(path)?).map_err(|e| CliError::validation(path.display(), e))
}

fn read_depth(path: &Path) -> Result<DepthMap, CliError> {
    decode_pfm(&read_bytes(path)?).map_err(|e| CliError::validation(path.display(), e))
}

fn read_camera(path: &Path) -> Result<CameraSpec, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::validation(path.display(), e))
}

/// The "plane" entry of any result or ground-truth document.
fn read_plane(path: &Path) -> Result<SymmetryPlane, CliError> {
    let doc: serde_json::Value =
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::validation(path.display(), e))?;
    let plane = doc.get("plane").ok_or_else(|| CliError::validation(path.display(), "no \"plane\" entry"))?;
    let plane: PlaneDoc = serde_json::from_value(plane.clone()).map_err(|e| CliError::validation(path.display(), e))?;
    plane.plane()
}

/// Scene by built-in name.
pub fn builtin_scene(name: &str) -> Result<Scene, CliError> {
    let indexed = |prefix: &str| -> Option<usize> {
        name.strip_prefix(prefix).and_then(|s| s.parse().ok()).filter(|i| *i < BENCHMARK_SCENES)
    };
    let scene = if let Some(i) = indexed("benchmark-") {
        benchmark_scene(i)
    } else if let Some(i) = indexed("occlusion-free-") {
        occlusion_free_scene(i)
    } else if name == "textureless" {
        textureless_scene()
    } else if name == "doubly-occluded" {
        doubly_symmetric_occluded_scene()
    } else {
        return Err(CliError::Usage(format!("unknown built-in scene {name:?}")));
    };
    scene.map_err(|e| CliError::validation(name, e))
}

fn cmd_render(a: &RenderArgs) -> Result<(), CliError> {
    let mut scene = match (&a.spec, &a.builtin) {
        (Some(p), _) => scene_from_spec(&read_text(p)?)?,
        (None, Some(name)) => builtin_scene(name)?,
        (None, None) => return Err(CliError::Usage("one of --spec or --builtin is required".into())),
    };
    if let Some(c) = a.scale {
        scene = scene.scaled(c).map_err(|e| CliError::validation("--scale", e))?;
    }
    if a.width == 0 || a.height == 0 {
        return Err(CliError::Usage("image size must be positive".into()));
    }
    let out = render(&scene, a.width, a.height).map_err(|e| CliError::validation("render", e))?;
    let rgb = encode_rgb(&out.rgb).map_err(|e| CliError::validation("rgb.png", e))?;
    let occ = encode_mask(&out.occlusion).map_err(|e| CliError::validation("occlusion.png", e))?;
    let camera = CameraSpec::new(scene.intrinsics(), Some(&scene.pose()));
    let (lo, hi) = scene.depth_range();
    let gt = GroundTruthDoc {
        plane: PlaneDoc::from(&scene.gt_plane()),
        camera: camera.clone(),
        depth_range: [lo, hi],
        width: a.width,
        height: a.height,
        symmetries: scene.symmetries().iter().filter_map(|s| SymmetryName::from_label(s.label())).collect(),
        valid_pixels: out.depth.valid_count(),
        occluded_pixels: out.occlusion.iter().filter(|o| **o).count(),
    };
    write_file(&a.out.join("rgb.png"), &rgb)?;
    write_file(&a.out.join("depth.pfm"), &encode_pfm(&out.depth))?;
    write_file(&a.out.join("occlusion.png"), &occ)?;
    write_file(&a.out.join("camera.json"), to_json(&camera).as_bytes())?;
    write_file(&a.out.join("gt.json"), to_json(&gt).as_bytes())?;
    if a.emit_spec {
        write_file(&a.out.join("scene.json"), emit_scene_spec(&scene).as_bytes())?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("document serializes");
    s.push('\n');
    s
}

fn cmd_detect(a: &DetectArgs, ctx: &Context) -> Result<(), CliError> {
    let image = read_image(&a.io.image)?;
    let k = read_camera(&a.io.camera)?.intrinsics()?;
    let reference = a.reference.as_deref().map(read_plane).transpose()?;
    let result = detect_symmetry(&image, &k, &ctx.config.schedule()?, &ctx.config.pipeline()?)
        .map_err(|e| CliError::validation("detect", e))?;
    let mut record = ctx.record("detect");
    record.plane = Some(PlaneDoc::from(&result.plane));
    record.score = Some(result.score);
    record.trace = result.trace.iter().map(RoundDoc::from).collect();
    record.angle_error_deg = reference.map(|r| angle_error(&r, &result.plane));
    ctx.finish(record, &a.io.out)
}

/// Writes the requested maps and fills metrics and confidence.
fn finish_depth(
    result: &ReconstructionResult,
    image: &RgbImage,
    outputs: &DepthOutputs,
    stride: usize,
    record: &mut ResultRecord,
) -> Result<(), CliError> {
    record.mean_confidence = result.confidence.mean();
    if let Some(p) = &outputs.depth_out {
        write_file(p, &encode_pfm(&result.depth))?;
    }
    if let Some(p) = &outputs.confidence_out {
        let full = result.confidence.upsample(stride, image.width(), image.height());
        write_file(p, &encode_pfm(&confidence_as_map(&full)))?;
    }
    if let Some(p) = &outputs.gt_depth {
        let gt = read_depth(p)?;
        let mask = outputs.mask.as_deref().map(read_mask).transpose()?;
        let m = depth_metrics(&result.depth, &gt, mask.as_ref()).map_err(|e| CliError::validation("metrics", e))?;
        record.metrics = Some(MetricsDoc::from(&m));
    }
    Ok(())
}

fn confidence_as_map(c: &ConfidenceMap) -> DepthMap {
    let values = c.values().as_slice().iter().zip(c.mask().as_slice()).map(|(v, m)| if *m { *v } else { f64::NAN });
    DepthMap::from_values(c.width(), c.height(), values.collect())
}

fn cmd_depth(a: &DepthArgs, ctx: &Context) -> Result<(), CliError> {
    let image = read_image(&a.io.image)?;
    let k = read_camera(&a.io.camera)?.intrinsics()?;
    let plane = match (&a.plane, &a.w) {
        (Some(p), _) => read_plane(p)?,
        (None, Some(w)) => {
            SymmetryPlane::new(Vec3::new(w[0], w[1], w[2])).map_err(|e| CliError::validation("--w", e))?
        }
        (None, None) => return Err(CliError::Usage("one of --plane or --w is required".into())),
    };
    let cfg = ctx.config.pipeline()?;
    let result = estimate_depth(&image, &k, &plane, &cfg).map_err(|e| CliError::validation("depth", e))?;
    let mut record = ctx.record("depth");
    record.plane = Some(PlaneDoc::from(&plane));
    finish_depth(&result, &image, &a.outputs, cfg.features.stride, &mut record)?;
    ctx.finish(record, &a.io.out)
}

fn cmd_multi(a: &MultiArgs, ctx: &Context) -> Result<(), CliError> {
    let transforms = a
        .transforms
        .iter()
        .map(|s| {
            SymmetryName::parse(s.trim())
                .map(SymmetryName::transform)
                .ok_or_else(|| CliError::Usage(format!("unknown transform {s:?} (expected M2, M3 or M4)")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let image = read_image(&a.io.image)?;
    let camera = read_camera(&a.io.camera)?;
    let (k, pose) = (camera.intrinsics()?, camera.pose()?);
    let cfg = ctx.config.pipeline()?;
    let result =
        multi_symmetry_depth(&image, &k, &pose, &transforms, &cfg).map_err(|e| CliError::validation("multi", e))?;
    let mut record = ctx.record("multi");
    record.plane = result.plane.as_ref().map(PlaneDoc::from);
    finish_depth(&result, &image, &a.outputs, cfg.features.stride, &mut record)?;
    ctx.finish(record, &a.io.out)
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let mut pred = read_depth(&a.pred)?;
    let gt = read_depth(&a.gt)?;
    let mask = a.mask.as_deref().map(read_mask).transpose()?;
    let planes = match (&a.pred_plane, &a.gt_plane) {
        (Some(p), Some(g)) => Some((read_plane(p)?, read_plane(g)?)),
        _ => None,
    };
    let mut ldpt = None;
    if let Some((w_hat, w_gt)) = &planes {
        ldpt = Some(l_dpt(&pred, &gt, w_gt, w_hat, mask.as_ref()).map_err(|e| CliError::validation("eval", e))?);
        pred = rescale_depth(&pred, w_gt, w_hat);
    }
    let m = depth_metrics(&pred, &gt, mask.as_ref()).map_err(|e| CliError::validation("eval", e))?;
    let doc = MetricsDoc { l_dpt: ldpt, ..MetricsDoc::from(&m) };
    let text = to_json(&doc);
    match &a.out {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Errors from a JSON array or from one number per line.
pub fn parse_errors(text: &str) -> Result<Vec<f64>, CliError> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| CliError::validation("errors", e));
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::Validation(format!("errors: line {}: not a number: {line:?}", i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

fn cmd_curves(a: &CurvesArgs) -> Result<(), CliError> {
    let errors = parse_errors(&read_text(&a.errors)?)?;
    let curve = error_percentage_curve(&errors).map_err(|e| CliError::validation("curves", e))?;
    write_file(&a.out, curve_csv(&curve).as_bytes())
}

fn cmd_bench(a: &BenchArgs, ctx: &Context) -> Result<(), CliError> {
    let index = (ctx.config.seed % BENCHMARK_SCENES as u64) as usize;
    let scene = benchmark_scene(index).map_err(|e| CliError::validation("bench", e))?;
    let image = render(&scene, BENCHMARK_SIZE, BENCHMARK_SIZE).map_err(|e| CliError::validation("bench", e))?.rgb;
    let cfg = ctx.config.pipeline()?;
    let features = extract_features(&image, &cfg.features).map_err(|e| CliError::validation("bench", e))?;
    let c = correspondence_from_plane(scene.intrinsics(), &scene.gt_plane());
    let reps = a.reps.max(1);
    let start = Instant::now();
    let mut cells = 0;
    for _ in 0..reps {
        let v = build_cost_volume(&features, &c, &cfg.hypotheses, &cfg.matching);
        cells = v.width() * v.height() * v.depth();
    }
    let per = start.elapsed().as_secs_f64() / reps as f64;
    println!(
        "cost volume {}x{}x{} on benchmark-{index}: {:.1} ms/volume, {:.2} Mcell/s, {} threads",
        features.width(),
        features.height(),
        cfg.hypotheses.count(),
        per * 1e3,
        cells as f64 / per / 1e6,
        rayon::current_num_threads()
    );
    Ok(())
}
