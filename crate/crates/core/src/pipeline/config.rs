use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::baseline::{DEFAULT_ALPHA, DEFAULT_INITIAL_VARIANCE, DEFAULT_THRESHOLD};
use crate::em::EmConfig;
use crate::error::{Error, Result};
use crate::mog::{ColorMode, MixtureModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    MogIncremental,
    MogBatch,
    BaselineCumulative,
    BaselineExponential,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::MogIncremental,
        Method::MogBatch,
        Method::BaselineCumulative,
        Method::BaselineExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MogIncremental => "mog-incremental",
            Method::MogBatch => "mog-batch",
            Method::BaselineCumulative => "baseline-cumulative",
            Method::BaselineExponential => "baseline-exponential",
        }
    }

    pub fn is_mog(self) -> bool {
        matches!(self, Method::MogIncremental | Method::MogBatch)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method '{s}'")))
    }
}

/// Whether a frame updates the models before or after it is classified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StepOrder {
    #[default]
    UpdateFirst,
    ClassifyFirst,
}

impl StepOrder {
    pub fn name(self) -> &'static str {
        match self {
            StepOrder::UpdateFirst => "update-first",
            StepOrder::ClassifyFirst => "classify-first",
        }
    }
}

impl fmt::Display for StepOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "update-first" => Ok(StepOrder::UpdateFirst),
            "classify-first" => Ok(StepOrder::ClassifyFirst),
            _ => Err(Error::Usage(format!("unknown step order '{s}'"))),
        }
    }
}

/// Initial per-pixel model in slot order road, shadow, vehicle. Intensity
/// values are replicated per channel in RGB and covariances are isotropic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prior {
    pub weights: [f64; 3],
    pub means: [f64; 3],
    pub variances: [f64; 3],
}

impl Default for Prior {
    fn default() -> Self {
        Prior {
            weights: [0.7, 0.2, 0.1],
            means: [120.0, 60.0, 150.0],
            variances: [400.0, 400.0, 3000.0],
        }
    }
}

impl Prior {
    pub fn model(&self, mode: ColorMode) -> Result<MixtureModel> {
        MixtureModel::isotropic(mode, self.weights, self.means, self.variances)
    }
}

/// Files and directories a run writes. Everything is optional.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outputs {
    /// Directory of `mask_*.pgm`.
    pub masks: Option<PathBuf>,
    /// Directory of `frame_*` with shadow pixels replaced.
    pub shadow_free: Option<PathBuf>,
    /// Image of the final background (baseline) or road means (mixture).
    pub background: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    /// Directory of model-bank checkpoints.
    pub checkpoints: Option<PathBuf>,
    pub checkpoint_every: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub mode: ColorMode,
    pub em: EmConfig,
    pub prior: Prior,
    pub order: StepOrder,
    pub alpha: f64,
    pub threshold: f64,
    pub initial_variance: f64,
    pub selective_update: bool,
    /// Directory of `frame_*` files. Unused by the in-memory entry points.
    pub input: PathBuf,
    /// Directory of ground-truth `mask_*` files.
    pub truth: Option<PathBuf>,
    /// Model bank to continue from; frames up to its frame count are skipped.
    pub resume: Option<PathBuf>,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn new(method: Method, mode: ColorMode) -> Self {
        RunConfig {
            method,
            mode,
            em: EmConfig::default(),
            prior: Prior::default(),
            order: StepOrder::default(),
            alpha: DEFAULT_ALPHA,
            threshold: DEFAULT_THRESHOLD,
            initial_variance: DEFAULT_INITIAL_VARIANCE,
            selective_update: false,
            input: PathBuf::new(),
            truth: None,
            resume: None,
            outputs: Outputs::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.em.validate()?;
        self.prior.model(self.mode)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Usage(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::Usage(format!("threshold must be positive, got {}", self.threshold)));
        }
        if !(self.initial_variance > 0.0 && self.initial_variance.is_finite()) {
            return Err(Error::usage("initial variance must be positive"));
        }
        if self.selective_update && self.method != Method::BaselineExponential {
            return Err(Error::usage("selective update applies to baseline-exponential only"));
        }
        if self.resume.is_some() && self.method != Method::MogIncremental {
            return Err(Error::usage("resume applies to mog-incremental only"));
        }
        if self.outputs.shadow_free.is_some() && !self.method.is_mog() {
            return Err(Error::usage("shadow-free output needs a mixture method"));
        }
        match (self.outputs.checkpoint_every, &self.outputs.checkpoints) {
            (Some(0), _) => return Err(Error::usage("checkpoint cadence must be at least 1")),
            (Some(_), None) => return Err(Error::usage("checkpoint cadence needs a checkpoint directory")),
            _ => {}
        }
        if self.outputs.checkpoints.is_some() && self.method != Method::MogIncremental {
            return Err(Error::usage("checkpoints apply to mog-incremental only"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("mog".parse::<Method>().is_err());
        assert_eq!("classify-first".parse::<StepOrder>().unwrap(), StepOrder::ClassifyFirst);
    }

    #[test]
    fn validation() {
        let ok = RunConfig::new(Method::MogIncremental, ColorMode::Intensity);
        ok.validate().unwrap();
        let mut c = ok.clone();
        c.selective_update = true;
        assert!(c.validate().is_err());
        c.method = Method::BaselineExponential;
        c.validate().unwrap();
        let mut c = ok.clone();
        c.outputs.checkpoint_every = Some(5);
        assert!(c.validate().is_err());
        c.outputs.checkpoints = Some("x".into());
        c.validate().unwrap();
        let mut c = ok.clone();
        c.alpha = 0.0;
        assert!(c.validate().is_err());
        let mut c = ok;
        c.prior.weights = [0.5, 0.5, 0.5];
        assert!(c.validate().is_err());
    }
}
