use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::baseline::BackgroundModel;
use crate::em::{batch_em, EmConfig};
use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::io::bank::{load_model_bank, save_model_bank, ModelBank};
use crate::io::pnm::write_frame;
use crate::io::sequence::{read_truth, SequenceReader, SequenceWriter};
use crate::mog::{log_marginal, MixtureModel, PixelValue};
use crate::pipeline::config::{Method, RunConfig, StepOrder};
use crate::pipeline::metrics::{Confusion, FrameMetrics, MetricsReport};
use crate::segment::{classify_pixel, heuristic_label, remove_shadows, LabelAssignment, SemanticLabel};

/// What one frame produced.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    pub mask: LabelMask,
    /// Input with shadow pixels replaced; mixture methods only.
    pub shadow_free: Option<Frame>,
    pub mean_log_likelihood: Option<f64>,
    /// Pixels whose slot-to-label assignment changed with this frame.
    pub label_flips: u64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn road_mean_image(frame_like: (usize, usize), models: &[MixtureModel], assignments: &[LabelAssignment]) -> Result<Frame> {
    let (w, h) = frame_like;
    let mode = models[0].mode();
    let pixels = models
        .iter()
        .zip(assignments)
        .map(|(m, a)| PixelValue::clamped(*m.component(a.slot_of(SemanticLabel::Road)).mean()))
        .collect();
    Frame::new(w, h, mode, pixels)
}

/// Incremental mixture segmentation of a whole frame: per pixel, update the
/// model, label its components, then classify (or classify first, per
/// [`StepOrder`]).
#[derive(Clone, Debug)]
pub struct MogPipeline {
    bank: ModelBank,
    assignments: Vec<LabelAssignment>,
    em: EmConfig,
    order: StepOrder,
}

impl MogPipeline {
    pub fn new(width: usize, height: usize, prior: &MixtureModel, em: EmConfig, order: StepOrder) -> Result<Self> {
        Self::from_bank(ModelBank::new(width, height, prior, &em)?, em, order)
    }

    pub fn from_bank(bank: ModelBank, em: EmConfig, order: StepOrder) -> Result<Self> {
        em.validate()?;
        let assignments = bank.states().iter().map(|s| heuristic_label(s.model())).collect();
        Ok(MogPipeline {
            bank,
            assignments,
            em,
            order,
        })
    }

    pub fn bank(&self) -> &ModelBank {
        &self.bank
    }

    pub fn into_bank(self) -> ModelBank {
        self.bank
    }

    pub fn assignments(&self) -> &[LabelAssignment] {
        &self.assignments
    }

    /// Road-component means as an image.
    pub fn road_image(&self) -> Result<Frame> {
        road_mean_image((self.bank.width(), self.bank.height()), &self.bank.models(), &self.assignments)
    }

    pub fn process(&mut self, frame: &Frame) -> Result<FrameResult> {
        frame.check_shape(self.bank.width(), self.bank.height(), self.bank.mode())?;
        let (em, order) = (self.em, self.order);
        let per_pixel = self
            .bank
            .states_mut()
            .par_iter_mut()
            .zip(frame.pixels().par_iter())
            .map(|(state, px)| {
                if order == StepOrder::UpdateFirst {
                    state.update(px, &em)?;
                }
                let m = *state.model();
                let a = heuristic_label(&m);
                let label = classify_pixel(px, &m, &a)?;
                let ll = log_marginal(px, &m)?;
                if order == StepOrder::ClassifyFirst {
                    state.update(px, &em)?;
                }
                Ok((label, a, ll, m))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut labels = Vec::with_capacity(per_pixel.len());
        let mut lls = Vec::with_capacity(per_pixel.len());
        let mut models = Vec::with_capacity(per_pixel.len());
        let mut flips = 0;
        for ((label, a, ll, m), prev) in per_pixel.into_iter().zip(self.assignments.iter_mut()) {
            if a != *prev {
                flips += 1;
                *prev = a;
            }
            labels.push(label);
            lls.push(ll);
            models.push(m);
        }
        let mask = LabelMask::new(frame.width(), frame.height(), labels)?;
        let shadow_free = remove_shadows(frame, &mask, &models, &self.assignments)?;
        Ok(FrameResult {
            mask,
            shadow_free: Some(shadow_free),
            mean_log_likelihood: Some(mean(&lls)),
            label_flips: flips,
        })
    }
}

/// Per-pixel batch EM over a stored sequence, followed by classification
/// of every frame under the fitted models.
#[derive(Clone, Debug)]
pub struct BatchMogPipeline {
    width: usize,
    height: usize,
    models: Vec<MixtureModel>,
    assignments: Vec<LabelAssignment>,
}

impl BatchMogPipeline {
    pub fn fit(frames: &[Frame], prior: &MixtureModel, em: &EmConfig) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::usage("batch fit needs at least one frame"))?;
        let (w, h) = (first.width(), first.height());
        for f in frames {
            f.check_shape(w, h, prior.mode())?;
        }
        let models = (0..w * h)
            .into_par_iter()
            .map(|k| {
                let series: Vec<PixelValue> = frames.iter().map(|f| f.pixels()[k]).collect();
                batch_em(&series, prior, em).map(|(m, _)| m)
            })
            .collect::<Result<Vec<_>>>()?;
        let assignments = models.iter().map(heuristic_label).collect();
        Ok(BatchMogPipeline {
            width: w,
            height: h,
            models,
            assignments,
        })
    }

    pub fn models(&self) -> &[MixtureModel] {
        &self.models
    }

    pub fn road_image(&self) -> Result<Frame> {
        road_mean_image((self.width, self.height), &self.models, &self.assignments)
    }

    pub fn process(&self, frame: &Frame) -> Result<FrameResult> {
        frame.check_shape(self.width, self.height, self.models[0].mode())?;
        let per_pixel = frame
            .pixels()
            .par_iter()
            .zip(self.models.par_iter().zip(self.assignments.par_iter()))
            .map(|(px, (m, a))| Ok((classify_pixel(px, m, a)?, log_marginal(px, m)?)))
            .collect::<Result<Vec<_>>>()?;
        let (labels, lls): (Vec<_>, Vec<_>) = per_pixel.into_iter().unzip();
        let mask = LabelMask::new(self.width, self.height, labels)?;
        let shadow_free = remove_shadows(frame, &mask, &self.models, &self.assignments)?;
        Ok(FrameResult {
            mask,
            shadow_free: Some(shadow_free),
            mean_log_likelihood: Some(mean(&lls)),
            label_flips: 0,
        })
    }
}

/// Two-class background subtraction. Foreground is reported as vehicle and
/// everything else as road.
#[derive(Clone, Debug)]
pub struct BaselinePipeline {
    background: BackgroundModel,
    threshold: f64,
    order: StepOrder,
}

impl BaselinePipeline {
    pub fn new(background: BackgroundModel, threshold: f64, order: StepOrder) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::Usage(format!("threshold must be positive, got {threshold}")));
        }
        Ok(BaselinePipeline {
            background,
            threshold,
            order,
        })
    }

    pub fn from_config(cfg: &RunConfig, width: usize, height: usize) -> Result<Self> {
        let bg = match cfg.method {
            Method::BaselineCumulative => BackgroundModel::cumulative(width, height, cfg.mode),
            Method::BaselineExponential => {
                BackgroundModel::exponential(width, height, cfg.mode, cfg.alpha, cfg.selective_update)?
                    .with_initial_variance(cfg.initial_variance)?
            }
            m => return Err(Error::Usage(format!("{m} is not a baseline method"))),
        };
        Self::new(bg, cfg.threshold, cfg.order)
    }

    pub fn background(&self) -> &BackgroundModel {
        &self.background
    }

    /// With update first, a selective background skips the pixels flagged
    /// by the previous background before the frame is classified against
    /// the updated one. The first frame only initializes the background and
    /// is reported as all road.
    pub fn process(&mut self, frame: &Frame) -> Result<FrameResult> {
        let bg = &mut self.background;
        let fg = match self.order {
            StepOrder::ClassifyFirst => {
                let fg = if bg.frames_seen() > 0 {
                    Some(bg.mahalanobis_classify(frame, self.threshold)?)
                } else {
                    None
                };
                bg.update(frame, fg.as_ref())?;
                fg
            }
            StepOrder::UpdateFirst => {
                let seen = bg.frames_seen();
                if bg.selective_update() && seen > 0 {
                    let pre = bg.mahalanobis_classify(frame, self.threshold)?;
                    bg.update(frame, Some(&pre))?;
                } else {
                    bg.update(frame, None)?;
                }
                (seen > 0).then(|| bg.mahalanobis_classify(frame, self.threshold)).transpose()?
            }
        };
        let mask = match fg {
            Some(fg) => fg.to_label_mask(),
            None => LabelMask::filled(frame.width(), frame.height(), SemanticLabel::Road)?,
        };
        Ok(FrameResult {
            mask,
            shadow_free: None,
            mean_log_likelihood: None,
            label_flips: 0,
        })
    }
}

/// Any of the segmentation engines behind one interface.
#[derive(Clone, Debug)]
pub enum Engine {
    Mog(MogPipeline),
    Batch(BatchMogPipeline),
    Baseline(BaselinePipeline),
}

impl Engine {
    pub fn process(&mut self, frame: &Frame) -> Result<FrameResult> {
        match self {
            Engine::Mog(p) => p.process(frame),
            Engine::Batch(p) => p.process(frame),
            Engine::Baseline(p) => p.process(frame),
        }
    }

    /// Final background estimate: the baseline's mean image, or the road
    /// means of the mixture models.
    pub fn background_image(&self) -> Result<Frame> {
        match self {
            Engine::Mog(p) => p.road_image(),
            Engine::Batch(p) => p.road_image(),
            Engine::Baseline(p) => p.background().background_image(),
        }
    }

    pub fn bank(&self) -> Option<&ModelBank> {
        match self {
            Engine::Mog(p) => Some(p.bank()),
            _ => None,
        }
    }
}

/// Everything a run returns besides the files it writes.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: MetricsReport,
    /// Frame index and mask of every processed frame.
    pub masks: Vec<(usize, LabelMask)>,
    pub engine: Option<Engine>,
}

fn checkpoint_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("checkpoint_{t:06}.tsmb"))
}

pub const FINAL_CHECKPOINT: &str = "final.tsmb";

struct Driver<'a> {
    cfg: &'a RunConfig,
    engine: Option<Engine>,
    skip_through: u64,
    masks_out: Option<SequenceWriter>,
    shadow_out: Option<SequenceWriter>,
    report: MetricsReport,
    masks: Vec<(usize, LabelMask)>,
    processed: u64,
}

impl<'a> Driver<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        cfg.validate()?;
        let writer = |p: &Option<PathBuf>| p.as_ref().map(SequenceWriter::create).transpose();
        if let Some(dir) = &cfg.outputs.checkpoints {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(Driver {
            cfg,
            engine: None,
            skip_through: 0,
            masks_out: writer(&cfg.outputs.masks)?,
            shadow_out: writer(&cfg.outputs.shadow_free)?,
            report: MetricsReport::new(cfg.method, cfg.order),
            masks: Vec::new(),
            processed: 0,
        })
    }

    fn start(&mut self, first: &Frame, all: Option<&[Frame]>) -> Result<()> {
        let cfg = self.cfg;
        if first.mode() != cfg.mode {
            return Err(Error::Usage(format!(
                "input frames are {:?} but the run is configured for {:?}",
                first.mode(),
                cfg.mode
            )));
        }
        let (w, h) = (first.width(), first.height());
        let prior = cfg.prior.model(cfg.mode)?;
        self.engine = Some(match cfg.method {
            Method::MogIncremental => match &cfg.resume {
                Some(path) => {
                    let bank = load_model_bank(path)?;
                    bank.check_compatible(w, h, cfg.mode)?;
                    self.skip_through = bank.frames_seen();
                    Engine::Mog(MogPipeline::from_bank(bank, cfg.em, cfg.order)?)
                }
                None => Engine::Mog(MogPipeline::new(w, h, &prior, cfg.em, cfg.order)?),
            },
            Method::MogBatch => {
                let frames = all.ok_or_else(|| Error::Internal("batch fit without the frame set".into()))?;
                Engine::Batch(BatchMogPipeline::fit(frames, &prior, &cfg.em)?)
            }
            Method::BaselineCumulative | Method::BaselineExponential => {
                Engine::Baseline(BaselinePipeline::from_config(cfg, w, h)?)
            }
        });
        Ok(())
    }

    fn step(&mut self, t: usize, frame: &Frame, truth: Option<LabelMask>) -> Result<()> {
        if (t as u64) <= self.skip_through {
            return Ok(());
        }
        let engine = self.engine.as_mut().expect("engine started");
        let started = Instant::now();
        let out = engine.process(frame)?;
        let wall_time = started.elapsed();
        let confusion = truth.map(|tm| Confusion::from_masks(&tm, &out.mask)).transpose()?;
        let mut class_counts = [0u64; 3];
        for l in out.mask.labels() {
            class_counts[l.index()] += 1;
        }
        if let Some(w) = &self.masks_out {
            w.write_mask(t, &out.mask)?;
        }
        if let (Some(w), Some(sf)) = (&self.shadow_out, &out.shadow_free) {
            w.write_frame(t, sf)?;
        }
        self.processed += 1;
        if let (Some(dir), Some(n)) = (&self.cfg.outputs.checkpoints, self.cfg.outputs.checkpoint_every) {
            if self.processed % n == 0 {
                let bank = engine.bank().expect("checkpoints validated for mog-incremental");
                save_model_bank(bank, checkpoint_path(dir, t))?;
            }
        }
        self.report.frames.push(FrameMetrics {
            t,
            class_counts,
            confusion,
            mean_log_likelihood: out.mean_log_likelihood,
            label_flips: out.label_flips,
            wall_time,
        });
        self.masks.push((t, out.mask));
        Ok(())
    }

    fn finish(self) -> Result<RunOutput> {
        let outputs = &self.cfg.outputs;
        let engine = self.engine.as_ref().ok_or_else(|| Error::usage("input sequence is empty"))?;
        if let Some(path) = &outputs.background {
            write_frame(&engine.background_image()?, path)?;
        }
        if let (Some(dir), Some(bank)) = (&outputs.checkpoints, engine.bank()) {
            save_model_bank(bank, dir.join(FINAL_CHECKPOINT))?;
        }
        Ok(RunOutput {
            report: self.report,
            masks: self.masks,
            engine: self.engine,
        })
    }

    /// Writes whatever metrics exist; used both on success and on abort.
    fn flush_metrics(&self) -> Result<()> {
        match &self.cfg.outputs.metrics {
            Some(path) => self.report.save_csv(path),
            None => Ok(()),
        }
    }
}

fn drive<F>(driver: &mut Driver, frames: &mut dyn Iterator<Item = Result<(usize, Frame)>>, mut truth: F, all: Option<&[Frame]>) -> Result<()>
where
    F: FnMut(usize) -> Result<Option<LabelMask>>,
{
    for item in frames {
        let (t, frame) = item?;
        if driver.engine.is_none() {
            driver.start(&frame, all).map_err(|e| e.at_frame(t))?;
        }
        let gt = truth(t)?;
        driver.step(t, &frame, gt).map_err(|e| e.at_frame(t))?;
    }
    Ok(())
}

fn execute<F>(cfg: &RunConfig, frames: &mut dyn Iterator<Item = Result<(usize, Frame)>>, truth: F, all: Option<&[Frame]>) -> Result<RunOutput>
where
    F: FnMut(usize) -> Result<Option<LabelMask>>,
{
    let mut driver = Driver::new(cfg)?;
    let outcome = drive(&mut driver, frames, truth, all);
    if driver.engine.is_some() {
        driver.flush_metrics()?;
    }
    outcome?;
    let out = driver.finish()?;
    log::info!(
        "{}: {} frames in {:.2?}",
        cfg.method,
        out.report.frames.len(),
        out.report.total_wall_time()
    );
    Ok(out)
}

/// Runs `cfg` on in-memory frames numbered from 1, with optional ground
/// truth aligned to them. File outputs selected in `cfg` are still written.
pub fn run_frames(cfg: &RunConfig, frames: &[Frame], truth: Option<&[LabelMask]>) -> Result<RunOutput> {
    if let Some(tr) = truth {
        if tr.len() != frames.len() {
            return Err(Error::Usage(format!("{} frames but {} truth masks", frames.len(), tr.len())));
        }
    }
    let mut it = frames.iter().cloned().enumerate().map(|(k, f)| Ok((k + 1, f)));
    execute(cfg, &mut it, |t| Ok(truth.map(|tr| tr[t - 1].clone())), Some(frames))
}

/// Runs `cfg` on the sequence in `cfg.input`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let reader = SequenceReader::open(&cfg.input)?;
    let truth_dir = cfg.truth.clone();
    let truth = move |t| truth_dir.as_ref().map(|d| read_truth(d, t)).transpose();
    if cfg.method == Method::MogBatch {
        let items: Vec<(usize, Frame)> = reader.collect::<Result<_>>()?;
        let frames: Vec<Frame> = items.iter().map(|(_, f)| f.clone()).collect();
        let mut it = items.into_iter().map(Ok);
        execute(cfg, &mut it, truth, Some(&frames))
    } else {
        let mut it = reader;
        execute(cfg, &mut it, truth, None)
    }
}

/// Runs `cfg` with a mixture method.
pub fn run_mog(cfg: &RunConfig) -> Result<MetricsReport> {
    if !cfg.method.is_mog() {
        return Err(Error::Usage(format!("{} is not a mixture method", cfg.method)));
    }
    run(cfg).map(|o| o.report)
}

/// Runs `cfg` with a baseline method.
pub fn run_baseline(cfg: &RunConfig) -> Result<MetricsReport> {
    if cfg.method.is_mog() {
        return Err(Error::Usage(format!("{} is not a baseline method", cfg.method)));
    }
    run(cfg).map(|o| o.report)
}
