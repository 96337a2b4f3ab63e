//! End-to-end run of every stage on one contour or a whole image.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::glp::{maximal_primitives, MaximalPrimitive, PrimitiveKind};
use crate::igrid::{constraints_from_cells, ConstraintCycle};
use crate::mindss::{min_cycle, ArcGraph, PrimitiveCycle};
use crate::mscale::{meaningful_boxes_with, Cell, NoiseRule, DEFAULT_MAX_SCALE};
use crate::raster::{trace_contours, BinaryImage, DigitalContour};
use crate::reconstruct::{realize, Reconstruction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Trace,
    Mscale,
    Igrid,
    Glp,
    Mindss,
    Realize,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Trace => "trace",
            Stage::Mscale => "mscale",
            Stage::Igrid => "igrid",
            Stage::Glp => "glp",
            Stage::Mindss => "mindss",
            Stage::Realize => "realize",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
#[error("stage {stage} failed on contour {contour}")]
pub struct PipelineError {
    pub stage: Stage,
    pub contour: usize,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub kind: PrimitiveKind,
    pub max_scale: u32,
    pub noise_rule: NoiseRule,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            kind: PrimitiveKind::Segment,
            max_scale: DEFAULT_MAX_SCALE,
            noise_rule: NoiseRule::DecreasingTail,
        }
    }
}

/// Every intermediate of one contour.
#[derive(Clone, Debug)]
pub struct ContourRun {
    pub contour: DigitalContour,
    pub boxes: Vec<Cell>,
    pub constraints: ConstraintCycle,
    pub maximal: Vec<MaximalPrimitive>,
    pub graph: ArcGraph,
    pub cycle: PrimitiveCycle,
    pub reconstruction: Reconstruction,
}

fn tag<E>(stage: Stage, contour: usize) -> impl FnOnce(E) -> PipelineError
where
    E: std::error::Error + Send + Sync + 'static,
{
    move |e| PipelineError {
        stage,
        contour,
        source: Box::new(e),
    }
}

/// Runs mscale through realize on one traced contour; `index` only labels
/// errors.
pub fn run_contour(
    img: &BinaryImage,
    contour: DigitalContour,
    index: usize,
    cfg: PipelineConfig,
) -> Result<ContourRun, PipelineError> {
    let boxes = meaningful_boxes_with(&contour, cfg.max_scale, cfg.noise_rule).map_err(tag(Stage::Mscale, index))?;
    log::debug!("contour {index}: {} points, {} boxes", contour.len(), boxes.len());
    let constraints = constraints_from_cells(&boxes, &contour, img).map_err(tag(Stage::Igrid, index))?;
    let maximal = maximal_primitives(&constraints, cfg.kind).map_err(tag(Stage::Glp, index))?;
    log::debug!(
        "contour {index}: {} constraints, {} maximal primitives",
        constraints.n,
        maximal.len()
    );
    let graph = ArcGraph::from_primitives(&maximal, constraints.n).map_err(tag(Stage::Mindss, index))?;
    let cycle = min_cycle(&graph).map_err(tag(Stage::Mindss, index))?;
    let reconstruction = realize(&cycle, &constraints, cfg.kind).map_err(tag(Stage::Realize, index))?;
    if !reconstruction.is_closed() {
        log::warn!(
            "contour {index}: junction gap {:.3} exceeds tolerance",
            reconstruction.max_join_gap()
        );
    }
    Ok(ContourRun {
        contour,
        boxes,
        constraints,
        maximal,
        graph,
        cycle,
        reconstruction,
    })
}

/// Traces every contour and runs the pipeline on each, in parallel.
/// `kinds[i]` overrides the primitive kind of contour `i`.
pub fn run_image(
    img: &BinaryImage,
    cfg: PipelineConfig,
    kinds: &[PrimitiveKind],
) -> Result<Vec<ContourRun>, PipelineError> {
    let contours = trace_contours(img);
    if contours.is_empty() {
        return Err(PipelineError {
            stage: Stage::Trace,
            contour: 0,
            source: "no foreground contour".into(),
        });
    }
    contours
        .into_par_iter()
        .enumerate()
        .map(|(i, c)| {
            let cfg = PipelineConfig {
                kind: kinds.get(i).copied().unwrap_or(cfg.kind),
                ..cfg
            };
            run_contour(img, c, i, cfg)
        })
        .collect()
}
