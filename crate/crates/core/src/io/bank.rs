//! Checkpoint files holding every pixel's mixture parameters and
//! sufficient statistics.
//!
//! Layout, all integers and doubles little-endian:
//!
//! ```text
//! magic  b"TSMB"          4 bytes
//! version u32             currently 1
//! width, height, d u32
//! frames_seen u64
//! per pixel, row-major, per slot r, s, v:
//!     w, mu[d], Sigma[d*d], N, M[d], Z[d*d]      f64 each
//! ```

use std::fs;
use std::path::Path;

use crate::em::{incremental_init, EmConfig, IncrementalEmState};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::mog::{ColorMode, GaussianComponent, MixtureModel, SlotStats, SufficientStats};

pub const MAGIC: [u8; 4] = *b"TSMB";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 * 4 + 8;

/// Number of doubles stored per pixel.
pub fn doubles_per_pixel(mode: ColorMode) -> usize {
    let d = mode.dim();
    3 * (2 + 2 * d + 2 * d * d)
}

/// Incremental EM state of every pixel of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelBank {
    width: usize,
    height: usize,
    mode: ColorMode,
    states: Vec<IncrementalEmState>,
}

impl ModelBank {
    /// Every pixel starts from `prior`.
    pub fn new(width: usize, height: usize, prior: &MixtureModel, cfg: &EmConfig) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::usage("model bank dimensions must be positive"));
        }
        let state = incremental_init(prior, cfg)?;
        Ok(ModelBank {
            width,
            height,
            mode: prior.mode(),
            states: vec![state; width * height],
        })
    }

    pub fn from_states(width: usize, height: usize, states: Vec<IncrementalEmState>) -> Result<Self> {
        if width == 0 || height == 0 || states.len() != width * height {
            return Err(Error::usage("state count does not match the bank dimensions"));
        }
        let mode = states[0].model().mode();
        if states.iter().any(|s| s.model().mode() != mode) {
            return Err(Error::usage("bank mixes color modes"));
        }
        Ok(ModelBank {
            width,
            height,
            mode,
            states,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn states(&self) -> &[IncrementalEmState] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [IncrementalEmState] {
        &mut self.states
    }

    pub fn state(&self, x: usize, y: usize) -> Result<&IncrementalEmState> {
        if x >= self.width || y >= self.height {
            return Err(Error::usage(format!(
                "pixel ({x}, {y}) outside the {}x{} bank (valid x 0..{}, y 0..{})",
                self.width,
                self.height,
                self.width - 1,
                self.height - 1
            )));
        }
        Ok(&self.states[y * self.width + x])
    }

    pub fn models(&self) -> Vec<MixtureModel> {
        self.states.iter().map(|s| *s.model()).collect()
    }

    pub fn frames_seen(&self) -> u64 {
        self.states.first().map_or(0, |s| s.frames_seen())
    }

    pub fn check_compatible(&self, width: usize, height: usize, mode: ColorMode) -> Result<()> {
        if self.width != width || self.height != height || self.mode != mode {
            return Err(Error::usage(format!(
                "bank is {}x{} {:?}, run expects {}x{} {:?}",
                self.width, self.height, self.mode, width, height, mode
            )));
        }
        Ok(())
    }
}

pub fn encode_model_bank(bank: &ModelBank) -> Vec<u8> {
    let per_pixel = doubles_per_pixel(bank.mode) * 8;
    let mut out = Vec::with_capacity(HEADER_LEN + bank.states.len() * per_pixel);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(bank.width as u32).to_le_bytes());
    out.extend_from_slice(&(bank.height as u32).to_le_bytes());
    out.extend_from_slice(&(bank.mode.dim() as u32).to_le_bytes());
    out.extend_from_slice(&bank.frames_seen().to_le_bytes());
    let mut put = |x: f64| out.extend_from_slice(&x.to_le_bytes());
    for state in &bank.states {
        let model = state.model();
        for (c, s) in model.components().iter().zip(state.stats().slots()) {
            put(c.weight());
            c.mean().as_slice().iter().for_each(|x| put(*x));
            c.covariance().to_row_major().into_iter().for_each(&mut put);
            put(s.count);
            s.sum.as_slice().iter().for_each(|x| put(*x));
            s.outer_sum.to_row_major().into_iter().for_each(&mut put);
        }
    }
    out
}

pub fn decode_model_bank(bytes: &[u8], path: &Path) -> Result<ModelBank> {
    let err = |message: String| Error::Bank {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < HEADER_LEN {
        return Err(err(format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len())));
    }
    if bytes[0..4] != MAGIC {
        return Err(err("not a model bank (bad magic)".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(err(format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    let width = u32_at(8) as usize;
    let height = u32_at(12) as usize;
    let mode = ColorMode::from_dim(u32_at(16) as usize).map_err(|e| err(e.to_string()))?;
    let frames_seen = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    if width == 0 || height == 0 {
        return Err(err(format!("empty bank {width}x{height}")));
    }
    let expected = HEADER_LEN + width * height * doubles_per_pixel(mode) * 8;
    if bytes.len() != expected {
        return Err(err(format!("expected {expected} bytes for {width}x{height} d={}, found {}", mode.dim(), bytes.len())));
    }

    let d = mode.dim();
    let mut doubles = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut take = |n: usize| -> Vec<f64> { doubles.by_ref().take(n).collect() };
    let mut states = Vec::with_capacity(width * height);
    for k in 0..width * height {
        let mut comps = Vec::with_capacity(3);
        let mut slots = Vec::with_capacity(3);
        for _ in 0..3 {
            let w = take(1)[0];
            let mu = Vector::new(mode, &take(d))?;
            let sigma = Matrix::from_row_major(mode, &take(d * d))?;
            let n = take(1)[0];
            let m = Vector::new(mode, &take(d))?;
            let z = Matrix::from_row_major(mode, &take(d * d))?;
            comps.push(GaussianComponent::new(w, mu, sigma).map_err(|e| err(format!("pixel {k}: {e}")))?);
            slots.push(SlotStats {
                count: n,
                sum: m,
                outer_sum: z,
            });
        }
        let model = MixtureModel::new([comps[0], comps[1], comps[2]]).map_err(|e| err(format!("pixel {k}: {e}")))?;
        let stats = SufficientStats::new([slots[0], slots[1], slots[2]]).map_err(|e| err(format!("pixel {k}: {e}")))?;
        states.push(IncrementalEmState::from_parts(model, stats, frames_seen)?);
    }
    ModelBank::from_states(width, height, states)
}

pub fn save_model_bank(bank: &ModelBank, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model_bank(bank)).map_err(|e| Error::io(path, e))
}

pub fn load_model_bank(path: impl AsRef<Path>) -> Result<ModelBank> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model_bank(&bytes, path)
}
