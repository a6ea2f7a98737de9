//! Turning per-pixel mixtures into semantic labels.
//!
//! Mixture slots carry no meaning by themselves; each frame the components
//! are named by a brightness/spread rule (darkest is shadow, the wider of
//! the other two is vehicle, the rest is road), and each pixel takes the
//! label of its maximum a-posteriori slot.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::mog::{joint_log_probabilities, ClassSlot, MixtureModel, PixelValue};

/// What a pixel shows. The derived order is the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticLabel {
    Road,
    Shadow,
    Vehicle,
}

impl SemanticLabel {
    pub const ALL: [SemanticLabel; 3] = [SemanticLabel::Road, SemanticLabel::Shadow, SemanticLabel::Vehicle];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticLabel::Road => "road",
            SemanticLabel::Shadow => "shadow",
            SemanticLabel::Vehicle => "vehicle",
        }
    }
}

/// Bijection from mixture slots to semantic labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabelAssignment([SemanticLabel; 3]);

impl LabelAssignment {
    /// `labels[k]` is the label of slot `k`.
    pub fn new(labels: [SemanticLabel; 3]) -> Result<Self> {
        if SemanticLabel::ALL.iter().any(|l| !labels.contains(l)) {
            return Err(Error::usage(format!("{labels:?} is not a bijection onto the three labels")));
        }
        Ok(LabelAssignment(labels))
    }

    /// Slot order matches the nominal `r`, `s`, `v` names.
    pub fn nominal() -> Self {
        LabelAssignment([SemanticLabel::Road, SemanticLabel::Shadow, SemanticLabel::Vehicle])
    }

    pub fn label_of(&self, slot: ClassSlot) -> SemanticLabel {
        self.0[slot.index()]
    }

    pub fn slot_of(&self, label: SemanticLabel) -> ClassSlot {
        let k = self.0.iter().position(|l| *l == label).expect("assignment is a bijection");
        ClassSlot::new(k).expect("three slots")
    }

    pub fn labels(&self) -> [SemanticLabel; 3] {
        self.0
    }
}

/// Names the components of `m`: smallest mean brightness is Shadow; of the
/// other two, the larger total variance is Vehicle and the other Road.
/// Equal keys resolve to the lower slot index.
pub fn heuristic_label(m: &MixtureModel) -> LabelAssignment {
    let comps = m.components();
    let darkness = comps.map(|c| c.mean().component_mean());
    let spread = comps.map(|c| c.covariance().trace());

    let mut shadow = 0;
    for k in 1..3 {
        if darkness[k] < darkness[shadow] {
            shadow = k;
        }
    }
    let rest: Vec<usize> = (0..3).filter(|&k| k != shadow).collect();
    let (vehicle, road) = if spread[rest[1]] > spread[rest[0]] {
        (rest[1], rest[0])
    } else {
        (rest[0], rest[1])
    };

    let mut labels = [SemanticLabel::Road; 3];
    labels[shadow] = SemanticLabel::Shadow;
    labels[vehicle] = SemanticLabel::Vehicle;
    labels[road] = SemanticLabel::Road;
    LabelAssignment(labels)
}

/// Label of the slot with the highest posterior probability. Equal
/// posteriors resolve to the smaller label.
pub fn classify_pixel(i: &PixelValue, m: &MixtureModel, a: &LabelAssignment) -> Result<SemanticLabel> {
    let joints = joint_log_probabilities(i, m)?;
    let mut best = 0;
    for k in 1..3 {
        let better = joints[k] > joints[best]
            || (joints[k] == joints[best] && a.0[k] < a.0[best]);
        if better {
            best = k;
        }
    }
    Ok(a.0[best])
}

fn check_bank(frame: &Frame, bank: &[MixtureModel], assignments: &[LabelAssignment]) -> Result<()> {
    let n = frame.width() * frame.height();
    if bank.len() != n || assignments.len() != n {
        return Err(Error::usage(format!(
            "frame has {} pixels but the bank has {} models and {} assignments",
            n,
            bank.len(),
            assignments.len()
        )));
    }
    Ok(())
}

/// Classifies every pixel independently against its own model.
pub fn classify_frame(frame: &Frame, bank: &[MixtureModel], assignments: &[LabelAssignment]) -> Result<LabelMask> {
    check_bank(frame, bank, assignments)?;
    let labels = frame
        .pixels()
        .par_iter()
        .zip(bank.par_iter())
        .zip(assignments.par_iter())
        .map(|((i, m), a)| classify_pixel(i, m, a))
        .collect::<Result<Vec<_>>>()?;
    LabelMask::new(frame.width(), frame.height(), labels)
}

/// Replaces every shadow pixel by the mean of that pixel's road component.
pub fn remove_shadows(
    frame: &Frame,
    mask: &LabelMask,
    bank: &[MixtureModel],
    assignments: &[LabelAssignment],
) -> Result<Frame> {
    check_bank(frame, bank, assignments)?;
    mask.check_shape(frame.width(), frame.height())?;
    let pixels = frame
        .pixels()
        .iter()
        .zip(mask.labels())
        .zip(bank.iter().zip(assignments))
        .map(|((px, label), (m, a))| {
            if *label == SemanticLabel::Shadow {
                PixelValue::clamped(*m.component(a.slot_of(SemanticLabel::Road)).mean())
            } else {
                *px
            }
        })
        .collect();
    Frame::new(frame.width(), frame.height(), frame.mode(), pixels)
}
