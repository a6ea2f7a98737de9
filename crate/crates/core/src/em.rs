//! Learning procedures for one pixel's mixture: batch EM over a stored
//! sequence, and the streaming incremental variant that only keeps
//! sufficient statistics (optionally with exponential forgetting).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::mog::{
    recover_params, responsibilities, stats_from_params, stream_log_likelihood, Flooring,
    GaussianComponent, MixtureModel, PixelValue, SufficientStats,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmConfig {
    /// Number of pseudo-observations the initial model is worth.
    pub prior_strength: f64,
    pub max_iterations: usize,
    /// Batch EM stops once the total log-likelihood changes by less than this.
    pub convergence_tol: f64,
    /// Per-observation decay of the accumulated statistics; 0 disables forgetting.
    pub forgetting_alpha: f64,
    pub seed: u64,
    /// Batch EM runs, the first from the given model and the rest from
    /// jittered copies of it; the most likely result wins.
    pub restarts: usize,
    /// Incremental EM recomputes parameters every this many observations.
    pub recompute_every: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            prior_strength: 10.0,
            max_iterations: 100,
            convergence_tol: 1e-4,
            forgetting_alpha: 0.0,
            seed: 0,
            restarts: 1,
            recompute_every: 1,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_strength > 0.0) || !self.prior_strength.is_finite() {
            return Err(Error::usage(format!("prior strength must be positive, got {}", self.prior_strength)));
        }
        if self.max_iterations == 0 {
            return Err(Error::usage("max_iterations must be at least 1"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::usage("convergence tolerance must be positive"));
        }
        if !(0.0..1.0).contains(&self.forgetting_alpha) {
            return Err(Error::usage(format!(
                "forgetting alpha must be in [0, 1), got {}",
                self.forgetting_alpha
            )));
        }
        if self.restarts == 0 {
            return Err(Error::usage("restarts must be at least 1"));
        }
        if self.recompute_every == 0 {
            return Err(Error::usage("recompute_every must be at least 1"));
        }
        Ok(())
    }
}

/// Expected sufficient statistics of `data` under `m`.
pub fn batch_e_step(data: &[PixelValue], m: &MixtureModel) -> Result<SufficientStats> {
    if data.is_empty() {
        return Err(Error::usage("E-step over an empty sequence"));
    }
    let mut stats = SufficientStats::zeros(m.mode());
    for i in data {
        if i.mode() != m.mode() {
            return Err(Error::usage("observation dimension differs from the model"));
        }
        stats.accumulate(i, responsibilities(i, m)?);
    }
    Ok(stats)
}

/// Log-likelihood after every batch EM iteration. Entry 0 is the starting
/// model; `flooring[k]` records the regularizations that fired while
/// producing iterate `k`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmTrace {
    pub log_likelihood: Vec<f64>,
    pub flooring: Vec<Flooring>,
    pub converged: bool,
}

impl EmTrace {
    pub fn iterations(&self) -> usize {
        self.log_likelihood.len().saturating_sub(1)
    }

    /// Steps whose likelihood dropped by more than `tol` although no floor fired.
    pub fn monotonicity_violations(&self, tol: f64) -> Vec<usize> {
        self.log_likelihood
            .windows(2)
            .enumerate()
            .filter(|(k, w)| w[1] < w[0] - tol && !self.flooring[k + 1].any())
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood.last().unwrap_or(&f64::NEG_INFINITY)
    }
}

fn run_batch(data: &[PixelValue], init: MixtureModel, cfg: &EmConfig) -> Result<(MixtureModel, EmTrace)> {
    let mut model = init;
    let mut trace = EmTrace {
        log_likelihood: vec![stream_log_likelihood(data, &model)?],
        flooring: vec![Flooring::default()],
        converged: false,
    };
    for iter in 0..cfg.max_iterations {
        let stats = batch_e_step(data, &model)?;
        let rec = recover_params(&stats, Some(&model))?;
        if rec.flooring.any() {
            log::debug!("batch EM iteration {}: flooring fired {:?}", iter + 1, rec.flooring);
        }
        model = rec.model;
        let ll = stream_log_likelihood(data, &model)?;
        let prev = trace.final_log_likelihood();
        trace.log_likelihood.push(ll);
        trace.flooring.push(rec.flooring);
        if (ll - prev).abs() < cfg.convergence_tol {
            trace.converged = true;
            break;
        }
    }
    Ok((model, trace))
}

fn jittered(init: &MixtureModel, rng: &mut ChaCha8Rng) -> Result<MixtureModel> {
    let mut comps = *init.components();
    for c in comps.iter_mut() {
        let spread = (c.covariance().trace() / c.mode().dim() as f64).sqrt() * 0.5;
        let noise = Normal::new(0.0, spread.max(1.0)).expect("positive spread");
        let mean = c.mean().map(|x| (x + noise.sample(rng)).clamp(0.0, 255.0));
        *c = GaussianComponent::new(c.weight(), mean, *c.covariance())?;
    }
    MixtureModel::new(comps)
}

/// Batch EM from `init` until the log-likelihood settles or
/// `cfg.max_iterations` is reached. Returns the last iterate of the most
/// likely restart together with its trace.
pub fn batch_em(data: &[PixelValue], init: &MixtureModel, cfg: &EmConfig) -> Result<(MixtureModel, EmTrace)> {
    cfg.validate()?;
    if data.len() < 3 {
        return Err(Error::usage(format!("batch EM needs at least 3 observations, got {}", data.len())));
    }
    let mut best = run_batch(data, *init, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 1..cfg.restarts {
        let candidate = run_batch(data, jittered(init, &mut rng)?, cfg)?;
        if candidate.1.final_log_likelihood() > best.1.final_log_likelihood() {
            best = candidate;
        }
    }
    Ok(best)
}

/// Streaming learner state for one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncrementalEmState {
    model: MixtureModel,
    stats: SufficientStats,
    frames_seen: u64,
}

impl IncrementalEmState {
    /// Rebuilds a state from stored parts, e.g. a checkpoint.
    pub fn from_parts(model: MixtureModel, stats: SufficientStats, frames_seen: u64) -> Result<Self> {
        if model.mode() != stats.mode() {
            return Err(Error::usage("model and statistics dimensions differ"));
        }
        Ok(IncrementalEmState {
            model,
            stats,
            frames_seen,
        })
    }

    pub fn model(&self) -> &MixtureModel {
        &self.model
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    /// Folds one observation in and returns the responsibilities it was
    /// split by. The state is left untouched on error.
    pub fn update(&mut self, i: &PixelValue, cfg: &EmConfig) -> Result<[f64; 3]> {
        if i.mode() != self.model.mode() {
            return Err(Error::usage("observation dimension differs from the model"));
        }
        let gamma = responsibilities(i, &self.model)?;
        let mut stats = if cfg.forgetting_alpha > 0.0 {
            self.stats.scaled(1.0 - cfg.forgetting_alpha)
        } else {
            self.stats
        };
        stats.accumulate(i, gamma);
        let frames_seen = self.frames_seen + 1;
        if frames_seen % cfg.recompute_every.max(1) == 0 {
            self.model = recover_params(&stats, Some(&self.model))?.model;
        }
        self.stats = stats;
        self.frames_seen = frames_seen;
        Ok(gamma)
    }
}

/// Fresh state whose statistics are worth `cfg.prior_strength` observations of `init`.
pub fn incremental_init(init: &MixtureModel, cfg: &EmConfig) -> Result<IncrementalEmState> {
    cfg.validate()?;
    Ok(IncrementalEmState {
        model: *init,
        stats: stats_from_params(init, cfg.prior_strength)?,
        frames_seen: 0,
    })
}

pub fn incremental_update(
    state: &IncrementalEmState,
    i: &PixelValue,
    cfg: &EmConfig,
) -> Result<IncrementalEmState> {
    let mut next = *state;
    next.update(i, cfg)?;
    Ok(next)
}

/// Total accumulated count. Grows by one per observation without
/// forgetting and saturates at `1 / alpha` with it.
pub fn effective_sample_size(state: &IncrementalEmState) -> f64 {
    state.stats.total_count()
}

/// Mean of each slot, for intensity models the leading component.
pub fn slot_means(m: &MixtureModel) -> [Vector; 3] {
    m.components().map(|c| *c.mean())
}
