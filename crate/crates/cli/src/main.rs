use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tancov::bench::{run_experiment, ExperimentConfig, NoiseLadder, RotationSet, Shape};
use tancov::glp::{dump_maximal, maximal_primitives, PrimitiveKind};
use tancov::igrid::constraints_from_cells;
use tancov::mindss::{min_cycle, ArcGraph};
use tancov::mscale::{meaningful_boxes_with, Cell, CellDump, NoiseRule, DEFAULT_MAX_SCALE};
use tancov::pipeline::{run_image, ContourRun, PipelineConfig};
use tancov::raster::{load_image, trace_contours, BinaryImage};
use tancov::reconstruct::{render_svg, Canvas, Overlay, Reconstruction};

#[derive(Parser)]
#[command(name = "tancov", version, about = "Reconstruct noisy digital contours as segments or arcs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on every contour of an image.
    Reconstruct(ReconstructArgs),
    /// Robustness experiment on noisy synthetic shapes.
    Bench(BenchArgs),
    /// Dump one intermediate stage as JSON (and optionally SVG).
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Segment,
    Arc,
}

impl From<KindArg> for PrimitiveKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Segment => PrimitiveKind::Segment,
            KindArg::Arc => PrimitiveKind::Arc,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    FirstDecrease,
    DecreasingTail,
}

impl From<RuleArg> for NoiseRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::FirstDecrease => NoiseRule::FirstDecrease,
            RuleArg::DecreasingTail => NoiseRule::DecreasingTail,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OverlayArg {
    None,
    Boxes,
    Intervals,
    Maximal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShapeArg {
    Hexagon,
    Ellipse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StageArg {
    Boxes,
    Sxy,
    Maximal,
    Cycle,
}

#[derive(Args)]
struct PipelineArgs {
    /// Binary PBM/PGM image.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "segment")]
    kind: KindArg,
    /// Per-contour kinds in discovery order, e.g. `arc,segment`.
    #[arg(long, value_enum, value_delimiter = ',')]
    kind_per_contour: Vec<KindArg>,
    #[arg(long, default_value_t = DEFAULT_MAX_SCALE, value_parser = clap::value_parser!(u32).range(2..))]
    max_scale: u32,
    #[arg(long, value_enum, default_value = "decreasing-tail")]
    noise_rule: RuleArg,
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            kind: self.kind.into(),
            max_scale: self.max_scale,
            noise_rule: self.noise_rule.into(),
        }
    }

    fn kinds(&self) -> Vec<PrimitiveKind> {
        self.kind_per_contour.iter().map(|&k| k.into()).collect()
    }

    fn kind_of(&self, contour: usize) -> PrimitiveKind {
        self.kind_per_contour.get(contour).copied().unwrap_or(self.kind).into()
    }
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON array with one reconstruction per contour.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    overlay: OverlayArg,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "hexagon")]
    shape: ShapeArg,
    /// Defaults to segments for the hexagon and arcs for the ellipse.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Noise scales, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = NoiseLadder::default().scales)]
    ladder: Vec<f64>,
    /// Rotation angles in radians.
    #[arg(long, value_delimiter = ',', default_values_t = RotationSet::default().angles)]
    angles: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_SCALE, value_parser = clap::value_parser!(u32).range(2..))]
    max_scale: u32,
    /// Score |ΔQ| instead of the signed increase.
    #[arg(long)]
    absolute: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_enum)]
    stage: StageArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    json: Option<PathBuf>,
    /// SVG overlay of the stage (needs a reconstruction, so the whole
    /// pipeline runs).
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Inspect(a) => cmd_inspect(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_out(path: &Path, data: &str) -> Result<()> {
    fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))
}

/// Prints to standard output; a closed pipe (`| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r.context("cannot write to standard output"),
    }
}

fn canvas_of(img: &BinaryImage) -> Canvas {
    Canvas {
        width: img.width(),
        height: img.height(),
    }
}

fn overlay_for(run: &ContourRun, which: OverlayArg) -> Overlay {
    let mut ov = Overlay::default();
    match which {
        OverlayArg::None => {}
        OverlayArg::Boxes => ov.boxes = run.boxes.clone(),
        OverlayArg::Intervals => ov.constraints = Some(run.constraints.clone()),
        OverlayArg::Maximal => ov.maximal = run.maximal.clone(),
    }
    ov
}

fn write_svg(path: &Path, img: &BinaryImage, runs: &[ContourRun], overlay: OverlayArg) -> Result<()> {
    let recs: Vec<&Reconstruction> = runs.iter().map(|r| &r.reconstruction).collect();
    let overlays: Vec<Overlay> = runs.iter().map(|r| overlay_for(r, overlay)).collect();
    let refs: Vec<&Overlay> = overlays.iter().collect();
    let svg = render_svg(&recs, &refs, canvas_of(img)).context("stage realize: cannot render SVG")?;
    write_out(path, &svg)
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let img = load_image(&a.pipeline.input)?;
    let runs = run_image(&img, a.pipeline.config(), &a.pipeline.kinds())?;
    for (i, run) in runs.iter().enumerate() {
        let kind = a.pipeline.kind_of(i);
        println!(
            "contour {i}: {} {kind} primitives, {} missed constraints",
            run.reconstruction.primitives.len(),
            run.reconstruction.missed.len()
        );
    }
    if let Some(path) = &a.json {
        let recs: Vec<&Reconstruction> = runs.iter().map(|r| &r.reconstruction).collect();
        write_out(path, &serde_json::to_string_pretty(&recs)?)?;
    }
    if let Some(path) = &a.svg {
        write_svg(path, &img, &runs, a.overlay)?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let shape = match a.shape {
        ShapeArg::Hexagon => Shape::Hexagon,
        ShapeArg::Ellipse => Shape::Ellipse,
    };
    let kind = a.kind.map(PrimitiveKind::from).unwrap_or(match shape {
        Shape::Hexagon => PrimitiveKind::Segment,
        Shape::Ellipse => PrimitiveKind::Arc,
    });
    let mut cfg = ExperimentConfig::new(shape, kind, a.seed);
    cfg.ladder = NoiseLadder::new(a.ladder.clone()).context("invalid --ladder")?;
    if a.angles.is_empty() {
        bail!("--angles needs at least one angle");
    }
    cfg.rotations = RotationSet {
        angles: a.angles.clone(),
    };
    cfg.max_scale = a.max_scale;
    cfg.absolute = a.absolute;
    let report = run_experiment(&cfg)?;
    for (k, q) in report.q_values.iter().enumerate() {
        println!("scale {}: counts {:?} Q {q:.4}", report.scales[k], report.primitive_counts[k]);
    }
    match (report.alpha, report.sigma) {
        (Some(alpha), Some(sigma)) => {
            println!("{:<28} {:>8} {:>6}", "method", "alpha", "sigma");
            println!("{:<28} {alpha:>8.3} {sigma:>6}", "this run");
            for r in &report.reference {
                println!("{:<28} {:>8.3} {:>6}", r.name, r.alpha, r.sigma);
            }
        }
        _ => println!("single scale: alpha undefined"),
    }
    if let Some(path) = &a.csv {
        write_out(path, &report.to_csv())?;
    }
    if let Some(path) = &a.json {
        write_out(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

/// Runs the stages up to `stage` on every contour and returns its JSON.
fn stage_json(img: &BinaryImage, p: &PipelineArgs, stage: StageArg) -> Result<serde_json::Value> {
    let contours = trace_contours(img);
    if contours.is_empty() {
        bail!("stage trace failed on contour 0: no foreground contour");
    }
    let mut out = Vec::with_capacity(contours.len());
    for (i, contour) in contours.iter().enumerate() {
        let fail = |s: &str| format!("stage {s} failed on contour {i}");
        let boxes: Vec<Cell> =
            meaningful_boxes_with(contour, p.max_scale, p.noise_rule.into()).with_context(|| fail("mscale"))?;
        if stage == StageArg::Boxes {
            let dump: Vec<CellDump> = boxes.iter().map(Cell::to_dump).collect();
            out.push(json!({ "contour": i, "boxes": dump }));
            continue;
        }
        let cons = constraints_from_cells(&boxes, contour, img).with_context(|| fail("igrid"))?;
        if stage == StageArg::Sxy {
            out.push(json!({ "contour": i, "n": cons.n, "constraints": cons.to_dump() }));
            continue;
        }
        let kind = p.kind_of(i);
        let maximal = maximal_primitives(&cons, kind).with_context(|| fail("glp"))?;
        if stage == StageArg::Maximal {
            out.push(json!({ "contour": i, "n": cons.n, "maximal": dump_maximal(&maximal, cons.n) }));
            continue;
        }
        let graph = ArcGraph::from_primitives(&maximal, cons.n).with_context(|| fail("mindss"))?;
        let cycle = min_cycle(&graph).with_context(|| fail("mindss"))?;
        out.push(json!({ "contour": i, "n": cons.n, "cycle": cycle }));
    }
    Ok(serde_json::Value::Array(out))
}

fn cmd_inspect(a: &InspectArgs) -> Result<()> {
    let img = load_image(&a.pipeline.input)?;
    let value = stage_json(&img, &a.pipeline, a.stage)?;
    let text = serde_json::to_string_pretty(&value)?;
    match &a.json {
        Some(path) => write_out(path, &text)?,
        None => print_stdout(&text)?,
    }
    if let Some(path) = &a.svg {
        let runs = run_image(&img, a.pipeline.config(), &a.pipeline.kinds())?;
        let overlay = match a.stage {
            StageArg::Boxes => OverlayArg::Boxes,
            StageArg::Sxy => OverlayArg::Intervals,
            StageArg::Maximal => OverlayArg::Maximal,
            StageArg::Cycle => OverlayArg::None,
        };
        write_svg(path, &img, &runs, overlay)?;
    }
    Ok(())
}
