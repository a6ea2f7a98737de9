//! Per-pixel three-component Gaussian mixture: domain types and the pure
//! math shared by every learning procedure.
//!
//! A pixel's appearance is modelled as a weighted sum of three Gaussians,
//! one per class slot. Parameters are recovered from sufficient statistics
//! (count `N`, sum `M`, outer-product sum `Z` per slot) as
//!
//! ```text
//! w = N / sum(N)      mu = M / N      Sigma = Z / N - mu mu^T
//! ```
//!
//! All densities are combined in log space.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix, Vector};

/// Smallest eigenvalue any recovered covariance may have, in squared sensor levels.
pub const VAR_FLOOR: f64 = 1.0;

/// Smallest weight a recovered component may have.
pub const WEIGHT_FLOOR: f64 = 1e-4;

/// Slots whose count is below this are considered unsupported by the data
/// and keep fallback parameters instead of dividing by a near-zero count.
pub const MIN_SUPPORT: f64 = 1e-3;

const SUM_TOL: f64 = 1e-9;

/// Number of channels per pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColorMode {
    /// One channel, d = 1.
    Intensity,
    /// Three channels, d = 3.
    Rgb,
}

impl ColorMode {
    pub fn dim(self) -> usize {
        match self {
            ColorMode::Intensity => 1,
            ColorMode::Rgb => 3,
        }
    }

    pub fn from_dim(d: usize) -> Result<Self> {
        match d {
            1 => Ok(ColorMode::Intensity),
            3 => Ok(ColorMode::Rgb),
            _ => Err(Error::usage(format!("unsupported pixel dimension {d}, expected 1 or 3"))),
        }
    }
}

/// One observed pixel: `d` finite sensor levels in `[0, 255]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelValue(Vector);

impl PixelValue {
    pub fn new(mode: ColorMode, values: &[f64]) -> Result<Self> {
        Self::from_vector(Vector::new(mode, values)?)
    }

    pub fn from_vector(v: Vector) -> Result<Self> {
        if let Some(bad) = v
            .as_slice()
            .iter()
            .find(|x| !x.is_finite() || **x < 0.0 || **x > 255.0)
        {
            return Err(Error::usage(format!("pixel component {bad} outside [0, 255]")));
        }
        Ok(PixelValue(v))
    }

    pub fn intensity(value: f64) -> Result<Self> {
        Self::new(ColorMode::Intensity, &[value])
    }

    pub fn from_bytes(mode: ColorMode, bytes: &[u8]) -> Result<Self> {
        let vals: Vec<f64> = bytes.iter().map(|&b| b as f64).collect();
        Self::new(mode, &vals)
    }

    /// Clamps each component into `[0, 255]`; non-finite components become 0.
    pub fn clamped(v: Vector) -> Self {
        PixelValue(v.map(|x| if x.is_finite() { x.clamp(0.0, 255.0) } else { 0.0 }))
    }

    pub fn mode(&self) -> ColorMode {
        self.0.mode()
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Index of one of the three mixture components. The nominal names
/// `r`, `s`, `v` only describe the prior ordering; the semantic label of a
/// slot is decided separately each frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassSlot(usize);

impl ClassSlot {
    pub const R: ClassSlot = ClassSlot(0);
    pub const S: ClassSlot = ClassSlot(1);
    pub const V: ClassSlot = ClassSlot(2);
    pub const ALL: [ClassSlot; 3] = [Self::R, Self::S, Self::V];

    pub fn new(index: usize) -> Option<Self> {
        (index < 3).then_some(ClassSlot(index))
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn nominal_name(self) -> char {
        ['r', 's', 'v'][self.0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianComponent {
    weight: f64,
    mean: Vector,
    covariance: Matrix,
}

impl GaussianComponent {
    /// Checks weight range, dimensions and symmetry. Positive definiteness
    /// is checked when a density is evaluated or a [`MixtureModel`] is built.
    pub fn new(weight: f64, mean: Vector, covariance: Matrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Invariant(format!("weight {weight} outside [0, 1]")));
        }
        if mean.mode() != covariance.mode() {
            return Err(Error::usage("mean and covariance dimensions differ"));
        }
        if !mean.is_finite() || !covariance.is_finite() {
            return Err(Error::Invariant("non-finite component parameter".into()));
        }
        let scale = covariance.trace().abs().max(1.0);
        if !covariance.is_symmetric(1e-9 * scale) {
            return Err(Error::Invariant("covariance is not symmetric".into()));
        }
        Ok(GaussianComponent {
            weight,
            mean,
            covariance,
        })
    }

    pub fn intensity(weight: f64, mean: f64, variance: f64) -> Result<Self> {
        Self::new(
            weight,
            Vector::new(ColorMode::Intensity, &[mean])?,
            Matrix::scaled_identity(ColorMode::Intensity, variance),
        )
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn mode(&self) -> ColorMode {
        self.mean.mode()
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Invariant(format!("weight {weight} outside [0, 1]")));
        }
        self.weight = weight;
        Ok(self)
    }

    fn factor(&self) -> Result<Cholesky> {
        self.covariance
            .cholesky()
            .ok_or_else(|| Error::Invariant("covariance is not positive definite".into()))
    }
}

/// The parameter set of one pixel: three weighted Gaussians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureModel {
    mode: ColorMode,
    components: [GaussianComponent; 3],
}

impl MixtureModel {
    pub fn new(components: [GaussianComponent; 3]) -> Result<Self> {
        let mode = components[0].mode();
        if components.iter().any(|c| c.mode() != mode) {
            return Err(Error::usage("mixture components have different dimensions"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Invariant(format!("weights sum to {total}, expected 1")));
        }
        for c in &components {
            c.factor()?;
        }
        Ok(MixtureModel { mode, components })
    }

    /// Convenience constructor for intensity models.
    pub fn intensity(weights: [f64; 3], means: [f64; 3], variances: [f64; 3]) -> Result<Self> {
        let c = |i: usize| GaussianComponent::intensity(weights[i], means[i], variances[i]);
        Self::new([c(0)?, c(1)?, c(2)?])
    }

    /// Same weights, means on every channel and isotropic variances, in the
    /// given color mode.
    pub fn isotropic(
        mode: ColorMode,
        weights: [f64; 3],
        means: [f64; 3],
        variances: [f64; 3],
    ) -> Result<Self> {
        let c = |i: usize| {
            GaussianComponent::new(
                weights[i],
                Vector::splat(mode, means[i]),
                Matrix::scaled_identity(mode, variances[i]),
            )
        };
        Self::new([c(0)?, c(1)?, c(2)?])
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn component(&self, slot: ClassSlot) -> &GaussianComponent {
        &self.components[slot.index()]
    }

    pub fn components(&self) -> &[GaussianComponent; 3] {
        &self.components
    }

    pub fn weights(&self) -> [f64; 3] {
        self.components.map(|c| c.weight)
    }

    /// Model whose slot `i` holds this model's slot `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> MixtureModel {
        MixtureModel {
            mode: self.mode,
            components: perm.map(|p| self.components[p]),
        }
    }

    /// Largest absolute difference over all weights, means and covariance entries.
    pub fn max_abs_diff(&self, other: &MixtureModel) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                let dw = (a.weight - b.weight).abs();
                let dm = a
                    .mean
                    .as_slice()
                    .iter()
                    .zip(b.mean.as_slice())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                dw.max(dm).max(a.covariance.max_abs_diff(&b.covariance))
            })
            .fold(0.0, f64::max)
    }
}

/// Accumulators for one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotStats {
    pub count: f64,
    pub sum: Vector,
    pub outer_sum: Matrix,
}

impl SlotStats {
    pub fn zeros(mode: ColorMode) -> Self {
        SlotStats {
            count: 0.0,
            sum: Vector::zeros(mode),
            outer_sum: Matrix::zeros(mode),
        }
    }
}

/// Per-slot `N`, `M`, `Z` for one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SufficientStats {
    mode: ColorMode,
    slots: [SlotStats; 3],
}

impl SufficientStats {
    pub fn zeros(mode: ColorMode) -> Self {
        SufficientStats {
            mode,
            slots: [SlotStats::zeros(mode); 3],
        }
    }

    pub fn new(slots: [SlotStats; 3]) -> Result<Self> {
        let mode = slots[0].sum.mode();
        for s in &slots {
            if s.sum.mode() != mode || s.outer_sum.mode() != mode {
                return Err(Error::usage("statistics have mixed dimensions"));
            }
            if !(s.count >= 0.0) || !s.count.is_finite() {
                return Err(Error::Invariant(format!("count {} is not a nonnegative number", s.count)));
            }
            if !s.sum.is_finite() || !s.outer_sum.is_finite() {
                return Err(Error::Invariant("non-finite statistic".into()));
            }
            let scale = s.outer_sum.trace().abs().max(1.0);
            if !s.outer_sum.is_symmetric(1e-9 * scale) {
                return Err(Error::Invariant("outer-product sum is not symmetric".into()));
            }
        }
        Ok(SufficientStats { mode, slots })
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn slot(&self, slot: ClassSlot) -> &SlotStats {
        &self.slots[slot.index()]
    }

    pub fn slots(&self) -> &[SlotStats; 3] {
        &self.slots
    }

    pub fn total_count(&self) -> f64 {
        self.slots.iter().map(|s| s.count).sum()
    }

    /// Every statistic multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SufficientStats {
        SufficientStats {
            mode: self.mode,
            slots: self.slots.map(|s| SlotStats {
                count: s.count * factor,
                sum: s.sum * factor,
                outer_sum: s.outer_sum * factor,
            }),
        }
    }

    /// Adds one observation split across slots by `weights`.
    pub fn accumulate(&mut self, x: &PixelValue, weights: [f64; 3]) {
        let v = *x.as_vector();
        let outer = v.outer();
        for (s, g) in self.slots.iter_mut().zip(weights) {
            s.count += g;
            s.sum += v * g;
            s.outer_sum += outer * g;
        }
    }

    pub fn add(&mut self, other: &SufficientStats) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            a.count += b.count;
            a.sum += b.sum;
            a.outer_sum += b.outer_sum;
        }
    }
}

fn check_mode(a: ColorMode, b: ColorMode) -> Result<()> {
    if a != b {
        return Err(Error::usage(format!("dimension mismatch: {a:?} vs {b:?}")));
    }
    Ok(())
}

/// `log N(i; mu, Sigma)`.
pub fn gaussian_log_density(i: &PixelValue, c: &GaussianComponent) -> Result<f64> {
    check_mode(i.mode(), c.mode())?;
    let chol = c.factor()?;
    let diff = *i.as_vector() - c.mean;
    let d = c.mode().dim() as f64;
    Ok(-0.5 * d * (2.0 * PI).ln() - 0.5 * chol.log_det() - 0.5 * chol.mahalanobis_sq(&diff))
}

/// `log P(L = slot, I = i | model)`; `-inf` when the slot's weight is zero.
pub fn joint_log_probability(i: &PixelValue, m: &MixtureModel, slot: ClassSlot) -> Result<f64> {
    let c = m.component(slot);
    let density = gaussian_log_density(i, c)?;
    Ok(if c.weight > 0.0 {
        c.weight.ln() + density
    } else {
        f64::NEG_INFINITY
    })
}

pub(crate) fn joint_log_probabilities(i: &PixelValue, m: &MixtureModel) -> Result<[f64; 3]> {
    Ok([
        joint_log_probability(i, m, ClassSlot::R)?,
        joint_log_probability(i, m, ClassSlot::S)?,
        joint_log_probability(i, m, ClassSlot::V)?,
    ])
}

fn log_sum_exp(xs: &[f64; 3]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `log P(I = i | model)`, the mixture density marginalized over slots.
pub fn log_marginal(i: &PixelValue, m: &MixtureModel) -> Result<f64> {
    Ok(log_sum_exp(&joint_log_probabilities(i, m)?))
}

/// Posterior `P(L = l | I = i, model)` for each slot.
pub fn responsibilities(i: &PixelValue, m: &MixtureModel) -> Result<[f64; 3]> {
    let joints = joint_log_probabilities(i, m)?;
    let max = joints.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(Error::Internal("no slot has positive posterior mass".into()));
    }
    let unnorm = joints.map(|j| (j - max).exp());
    let total: f64 = unnorm.iter().sum();
    Ok(unnorm.map(|u| u / total))
}

/// Which regularizations fired while recovering parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flooring {
    pub variance: bool,
    pub weight: bool,
    pub fallback: bool,
}

impl Flooring {
    pub fn any(&self) -> bool {
        self.variance || self.weight || self.fallback
    }

    pub fn merge(&mut self, other: Flooring) {
        self.variance |= other.variance;
        self.weight |= other.weight;
        self.fallback |= other.fallback;
    }
}

/// Symmetrizes and lifts the spectrum so every eigenvalue is at least
/// [`VAR_FLOOR`]. Returns whether a lift was needed.
pub(crate) fn floor_covariance(sigma: Matrix) -> (Matrix, bool) {
    let sigma = sigma.symmetrized();
    let mode = sigma.mode();
    match mode {
        crate::mog::ColorMode::Intensity => {
            let v = sigma.get(0, 0);
            if v >= VAR_FLOOR {
                (sigma, false)
            } else {
                (Matrix::scaled_identity(mode, VAR_FLOOR), true)
            }
        }
        crate::mog::ColorMode::Rgb => {
            if (sigma - Matrix::scaled_identity(mode, VAR_FLOOR)).cholesky().is_some() {
                (sigma, false)
            } else {
                let lift = VAR_FLOOR - sigma.min_eigenvalue();
                (sigma + Matrix::scaled_identity(mode, lift.max(0.0)), true)
            }
        }
    }
}

/// Raises weights below [`WEIGHT_FLOOR`] to the floor and rescales the rest
/// so the total stays one.
pub(crate) fn floor_weights(raw: [f64; 3]) -> ([f64; 3], bool) {
    let mut floored = [false; 3];
    let mut w = raw;
    let mut fired = false;
    // at most three slots can be pinned, so this settles in three rounds
    for _ in 0..3 {
        let newly: Vec<usize> = (0..3).filter(|&i| !floored[i] && w[i] < WEIGHT_FLOOR).collect();
        if newly.is_empty() {
            break;
        }
        fired = true;
        for i in newly {
            floored[i] = true;
        }
        let pinned = floored.iter().filter(|f| **f).count() as f64;
        let free_mass: f64 = (0..3).filter(|&i| !floored[i]).map(|i| raw[i]).sum();
        let target = 1.0 - pinned * WEIGHT_FLOOR;
        for i in 0..3 {
            w[i] = if floored[i] {
                WEIGHT_FLOOR
            } else {
                raw[i] * target / free_mass
            };
        }
    }
    (w, fired)
}

/// Result of [`recover_params`].
#[derive(Clone, Copy, Debug)]
pub struct Recovery {
    pub model: MixtureModel,
    pub flooring: Flooring,
}

/// Maximum-likelihood parameters from sufficient statistics, with
/// covariance and weight floors applied. Slots with almost no support keep
/// `previous`'s parameters when given, otherwise they are centred on the
/// pooled mean with a floor-sized covariance.
pub fn recover_params(s: &SufficientStats, previous: Option<&MixtureModel>) -> Result<Recovery> {
    if let Some(p) = previous {
        check_mode(s.mode, p.mode)?;
    }
    let total = s.total_count();
    if !(total > 0.0) {
        return Err(Error::EmptyStats);
    }
    let mode = s.mode;
    let mut pooled = Vector::zeros(mode);
    for slot in &s.slots {
        pooled += slot.sum;
    }
    let pooled = pooled * (1.0 / total);

    let mut flooring = Flooring::default();
    let mut means = [Vector::zeros(mode); 3];
    let mut covs = [Matrix::zeros(mode); 3];
    for (k, slot) in s.slots.iter().enumerate() {
        if slot.count < MIN_SUPPORT {
            flooring.fallback = true;
            match previous {
                Some(p) => {
                    means[k] = p.components[k].mean;
                    covs[k] = p.components[k].covariance;
                }
                None => {
                    means[k] = pooled;
                    covs[k] = Matrix::scaled_identity(mode, VAR_FLOOR);
                }
            }
            continue;
        }
        let mu = slot.sum * (1.0 / slot.count);
        let raw = slot.outer_sum * (1.0 / slot.count) - mu.outer();
        let (sigma, lifted) = floor_covariance(raw);
        flooring.variance |= lifted;
        means[k] = mu;
        covs[k] = sigma;
    }

    let raw_w = s.slots.map(|slot| slot.count / total);
    let (weights, w_fired) = floor_weights(raw_w);
    flooring.weight = w_fired;

    let c = |k: usize| GaussianComponent::new(weights[k], means[k], covs[k]);
    let model = MixtureModel::new([c(0)?, c(1)?, c(2)?])?;
    Ok(Recovery { model, flooring })
}

/// Parameters from sufficient statistics (see [`recover_params`]).
pub fn params_from_stats(s: &SufficientStats) -> Result<MixtureModel> {
    recover_params(s, None).map(|r| r.model)
}

/// Expected statistics of `k` pseudo-observations drawn from `m`:
/// `N = k w`, `M = k w mu`, `Z = k w (Sigma + mu mu^T)`.
pub fn stats_from_params(m: &MixtureModel, prior_strength: f64) -> Result<SufficientStats> {
    if !(prior_strength > 0.0) || !prior_strength.is_finite() {
        return Err(Error::usage(format!("prior strength must be positive, got {prior_strength}")));
    }
    let slots = m.components.map(|c| {
        let n = prior_strength * c.weight;
        SlotStats {
            count: n,
            sum: c.mean * n,
            outer_sum: (c.covariance + c.mean.outer()) * n,
        }
    });
    Ok(SufficientStats {
        mode: m.mode,
        slots,
    })
}

/// Total log-likelihood `sum_t log P(i_t | model)`.
pub fn stream_log_likelihood(data: &[PixelValue], m: &MixtureModel) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::usage("log-likelihood of an empty sequence"));
    }
    data.iter().map(|i| log_marginal(i, m)).sum()
}
