//! Classical background subtraction: a per-pixel background mean and
//! diagonal variance, maintained either as the long-term average of all
//! frames or with exponential forgetting, and a Mahalanobis threshold to
//! flag foreground.

use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::linalg::Vector;
use crate::mog::{ColorMode, VAR_FLOOR};
use crate::segment::SemanticLabel;

pub const DEFAULT_ALPHA: f64 = 0.02;
pub const DEFAULT_THRESHOLD: f64 = 2.5;
/// Variance assigned to every pixel on the first frame in exponential mode.
pub const DEFAULT_INITIAL_VARIANCE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BackgroundMode {
    /// `B_t = ((t-1)/t) B_{t-1} + (1/t) I_t`
    Cumulative,
    /// `B_t = (1 - alpha) B_{t-1} + alpha I_t`
    Exponential { alpha: f64 },
}

/// Per-pixel foreground flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForegroundMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != width * height {
            return Err(Error::usage("foreground mask size does not match its dimensions"));
        }
        Ok(ForegroundMask { width, height, flags })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        ForegroundMask {
            width,
            height,
            flags: vec![value; width * height],
        }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.flags[y * self.width + x]
    }

    pub fn foreground_count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    /// Two-class label mask: foreground as vehicle, everything else as road.
    pub fn to_label_mask(&self) -> LabelMask {
        let labels = self
            .flags
            .iter()
            .map(|&f| if f { SemanticLabel::Vehicle } else { SemanticLabel::Road })
            .collect();
        LabelMask::new(self.width, self.height, labels).expect("shape checked at construction")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    mode: ColorMode,
    update: BackgroundMode,
    selective_update: bool,
    initial_variance: f64,
    mean: Vec<Vector>,
    variance: Vec<Vector>,
    // running mean of squares, cumulative mode only
    second_moment: Vec<Vector>,
    frames_seen: u64,
}

impl BackgroundModel {
    pub fn cumulative(width: usize, height: usize, mode: ColorMode) -> Self {
        Self::with_mode(width, height, mode, BackgroundMode::Cumulative, false)
    }

    /// Exponential-forgetting background. With `selective_update`, pixels
    /// flagged as foreground are left out of each update.
    pub fn exponential(
        width: usize,
        height: usize,
        mode: ColorMode,
        alpha: f64,
        selective_update: bool,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::usage(format!("alpha must be in (0, 1], got {alpha}")));
        }
        Ok(Self::with_mode(
            width,
            height,
            mode,
            BackgroundMode::Exponential { alpha },
            selective_update,
        ))
    }

    fn with_mode(width: usize, height: usize, mode: ColorMode, update: BackgroundMode, selective: bool) -> Self {
        let n = width * height;
        BackgroundModel {
            width,
            height,
            mode,
            update,
            selective_update: selective,
            initial_variance: DEFAULT_INITIAL_VARIANCE,
            mean: vec![Vector::zeros(mode); n],
            variance: vec![Vector::splat(mode, VAR_FLOOR); n],
            second_moment: vec![Vector::zeros(mode); n],
            frames_seen: 0,
        }
    }

    /// Variance every pixel starts with in exponential mode.
    pub fn with_initial_variance(mut self, variance: f64) -> Result<Self> {
        if !(variance >= VAR_FLOOR) || !variance.is_finite() {
            return Err(Error::usage(format!("initial variance must be at least {VAR_FLOOR}")));
        }
        self.initial_variance = variance;
        Ok(self)
    }

    pub fn update_mode(&self) -> BackgroundMode {
        self.update
    }

    pub fn selective_update(&self) -> bool {
        self.selective_update
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn mean_at(&self, x: usize, y: usize) -> &Vector {
        &self.mean[y * self.width + x]
    }

    pub fn variance_at(&self, x: usize, y: usize) -> &Vector {
        &self.variance[y * self.width + x]
    }

    /// Current background estimate as an image.
    pub fn background_image(&self) -> Result<Frame> {
        Frame::from_vectors(self.width, self.height, self.mode, &self.mean)
    }

    fn floor(v: Vector) -> Vector {
        v.map(|x| x.max(VAR_FLOOR))
    }

    pub fn cumulative_update(&mut self, frame: &Frame) -> Result<()> {
        if self.update != BackgroundMode::Cumulative {
            return Err(Error::usage("cumulative update on an exponential background"));
        }
        frame.check_shape(self.width, self.height, self.mode)?;
        self.frames_seen += 1;
        let t = self.frames_seen as f64;
        let keep = (t - 1.0) / t;
        for (k, px) in frame.pixels().iter().enumerate() {
            let i = *px.as_vector();
            let sq = i.map(|x| x * x);
            self.mean[k] = self.mean[k] * keep + i * (1.0 / t);
            self.second_moment[k] = self.second_moment[k] * keep + sq * (1.0 / t);
            let m = self.mean[k];
            self.variance[k] = Self::floor(self.second_moment[k] - m.map(|x| x * x));
        }
        Ok(())
    }

    /// Exponential-forgetting update. A selective background needs the
    /// current foreground mask (from [`Self::mahalanobis_classify`]) for
    /// every frame after the first.
    pub fn exponential_update(&mut self, frame: &Frame, foreground: Option<&ForegroundMask>) -> Result<()> {
        let BackgroundMode::Exponential { alpha } = self.update else {
            return Err(Error::usage("exponential update on a cumulative background"));
        };
        frame.check_shape(self.width, self.height, self.mode)?;
        if self.frames_seen == 0 {
            for (k, px) in frame.pixels().iter().enumerate() {
                self.mean[k] = *px.as_vector();
                self.variance[k] = Vector::splat(self.mode, self.initial_variance);
            }
            self.frames_seen = 1;
            return Ok(());
        }
        let skip = match (self.selective_update, foreground) {
            (false, _) => None,
            (true, Some(m)) if m.width == self.width && m.height == self.height => Some(m),
            (true, Some(_)) => return Err(Error::usage("foreground mask size differs from the background")),
            (true, None) => return Err(Error::usage("selective update needs a foreground mask")),
        };
        for (k, px) in frame.pixels().iter().enumerate() {
            if skip.is_some_and(|m| m.flags[k]) {
                continue;
            }
            let i = *px.as_vector();
            let dev = (i - self.mean[k]).map(|x| x * x);
            self.variance[k] = Self::floor(self.variance[k] * (1.0 - alpha) + dev * alpha);
            self.mean[k] = self.mean[k] * (1.0 - alpha) + i * alpha;
        }
        self.frames_seen += 1;
        Ok(())
    }

    /// Applies whichever update rule this background was built with.
    pub fn update(&mut self, frame: &Frame, foreground: Option<&ForegroundMask>) -> Result<()> {
        match self.update {
            BackgroundMode::Cumulative => self.cumulative_update(frame),
            BackgroundMode::Exponential { .. } => self.exponential_update(frame, foreground),
        }
    }

    /// Diagonal Mahalanobis distance of every pixel from the background.
    pub fn distances(&self, frame: &Frame) -> Result<Vec<f64>> {
        if self.frames_seen == 0 {
            return Err(Error::usage("background has not seen any frame yet"));
        }
        frame.check_shape(self.width, self.height, self.mode)?;
        Ok(frame
            .pixels()
            .iter()
            .enumerate()
            .map(|(k, px)| {
                let diff = *px.as_vector() - self.mean[k];
                diff.as_slice()
                    .iter()
                    .zip(self.variance[k].as_slice())
                    .map(|(d, v)| d * d / v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect())
    }

    /// Flags pixels whose distance from the background exceeds `threshold`
    /// standard deviations.
    pub fn mahalanobis_classify(&self, frame: &Frame, threshold: f64) -> Result<ForegroundMask> {
        if !(threshold > 0.0) {
            return Err(Error::usage(format!("threshold must be positive, got {threshold}")));
        }
        let flags = self.distances(frame)?.into_iter().map(|d| d > threshold).collect();
        ForegroundMask::new(self.width, self.height, flags)
    }
}
