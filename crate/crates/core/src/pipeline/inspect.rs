use std::fmt;
use std::path::Path;

use crate::em::{effective_sample_size, IncrementalEmState};
use crate::error::Result;
use crate::io::bank::load_model_bank;
use crate::linalg::{Matrix, Vector};
use crate::mog::ClassSlot;
use crate::segment::{heuristic_label, SemanticLabel};

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentDump {
    pub slot: ClassSlot,
    pub label: SemanticLabel,
    pub weight: f64,
    pub mean: Vector,
    pub covariance: Matrix,
    pub count: f64,
    pub sum: Vector,
    pub outer_sum: Matrix,
}

/// One pixel's mixture, statistics and heuristic labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelInspection {
    pub x: usize,
    pub y: usize,
    pub frames_seen: u64,
    pub effective_sample_size: f64,
    pub components: [ComponentDump; 3],
}

impl PixelInspection {
    pub fn from_state(x: usize, y: usize, state: &IncrementalEmState) -> Self {
        let m = state.model();
        let a = heuristic_label(m);
        let components = ClassSlot::ALL.map(|slot| {
            let c = m.component(slot);
            let s = state.stats().slot(slot);
            ComponentDump {
                slot,
                label: a.label_of(slot),
                weight: c.weight(),
                mean: *c.mean(),
                covariance: *c.covariance(),
                count: s.count,
                sum: s.sum,
                outer_sum: s.outer_sum,
            }
        });
        PixelInspection {
            x,
            y,
            frames_seen: state.frames_seen(),
            effective_sample_size: effective_sample_size(state),
            components,
        }
    }

    pub fn component(&self, label: SemanticLabel) -> &ComponentDump {
        self.components.iter().find(|c| c.label == label).expect("labels form a bijection")
    }

    /// Header plus one row per slot; vectors and matrices are
    /// space-separated, matrices row-major.
    pub fn to_csv(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
        let mut s = String::from("x,y,frames_seen,effective_sample_size,slot,label,weight,mean,covariance,N,M,Z\n");
        for c in &self.components {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                self.x,
                self.y,
                self.frames_seen,
                self.effective_sample_size,
                c.slot.index(),
                c.label.name(),
                c.weight,
                join(c.mean.as_slice()),
                join(&c.covariance.to_row_major()),
                c.count,
                join(c.sum.as_slice()),
                join(&c.outer_sum.to_row_major()),
            ));
        }
        s
    }
}

impl fmt::Display for PixelInspection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_v = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
        writeln!(
            f,
            "pixel ({}, {}) after {} frames, effective sample size {:.3}",
            self.x, self.y, self.frames_seen, self.effective_sample_size
        )?;
        for c in &self.components {
            writeln!(f, "  slot {} -> {}", c.slot.nominal_name(), c.label.name())?;
            writeln!(f, "    weight      {:.6}", c.weight)?;
            writeln!(f, "    mean        [{}]", fmt_v(c.mean.as_slice()))?;
            writeln!(f, "    covariance  [{}]", fmt_v(&c.covariance.to_row_major()))?;
            writeln!(f, "    N           {:.6}", c.count)?;
            writeln!(f, "    M           [{}]", fmt_v(c.sum.as_slice()))?;
            writeln!(f, "    Z           [{}]", fmt_v(&c.outer_sum.to_row_major()))?;
        }
        Ok(())
    }
}

/// Loads a checkpoint and dumps pixel `(x, y)`; coordinates are zero-based.
pub fn inspect_pixel(checkpoint: impl AsRef<Path>, x: usize, y: usize) -> Result<PixelInspection> {
    let bank = load_model_bank(checkpoint)?;
    Ok(PixelInspection::from_state(x, y, bank.state(x, y)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::EmConfig;
    use crate::io::bank::{save_model_bank, ModelBank};
    use crate::mog::ColorMode;
    use crate::pipeline::config::Prior;

    #[test]
    fn fresh_bank_shows_prior() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.tsmb");
        let prior = Prior::default().model(ColorMode::Intensity).unwrap();
        save_model_bank(&ModelBank::new(3, 2, &prior, &EmConfig::default()).unwrap(), &path).unwrap();
        for (x, y) in [(0, 0), (2, 1)] {
            let p = inspect_pixel(&path, x, y).unwrap();
            assert_eq!(p.frames_seen, 0);
            assert!((p.effective_sample_size - 10.0).abs() < 1e-9);
            assert_eq!(p.component(SemanticLabel::Road).mean.as_slice(), &[120.0]);
            assert_eq!(p.component(SemanticLabel::Shadow).mean.as_slice(), &[60.0]);
            assert_eq!(p.component(SemanticLabel::Vehicle).mean.as_slice(), &[150.0]);
            assert!(p.to_string().contains("slot r -> road"));
            assert_eq!(p.to_csv().lines().count(), 4);
        }
        assert_eq!(inspect_pixel(&path, 3, 2).unwrap_err().exit_code(), 1);
        assert_eq!(inspect_pixel(&path, 3, 0).unwrap_err().exit_code(), 1);
    }
}
