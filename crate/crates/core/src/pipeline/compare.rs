use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::pipeline::config::RunConfig;
use crate::pipeline::metrics::{Confusion, FrameMetrics, MetricsReport};
use crate::pipeline::run::{run, run_frames};
use crate::segment::SemanticLabel;

/// Per-frame difference `b - a`. Rates are `None` without ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameDelta {
    pub t: usize,
    pub vehicle_count: i64,
    pub vehicle_false_positive_rate: Option<f64>,
    pub shadow_as_vehicle_rate: Option<f64>,
    pub vehicle_precision: Option<f64>,
    pub vehicle_recall: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub a: MetricsReport,
    pub b: MetricsReport,
    pub deltas: Vec<FrameDelta>,
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(b? - a?)
}

fn vehicle_fpr(c: &Option<Confusion>) -> Option<f64> {
    c.as_ref()?.false_positive_rate(SemanticLabel::Vehicle)
}

fn shadow_fpr(c: &Option<Confusion>) -> Option<f64> {
    c.as_ref()?.rate(SemanticLabel::Shadow, SemanticLabel::Vehicle)
}

fn delta(a: &FrameMetrics, b: &FrameMetrics) -> FrameDelta {
    let v = SemanticLabel::Vehicle;
    FrameDelta {
        t: a.t,
        vehicle_count: b.class_counts[v.index()] as i64 - a.class_counts[v.index()] as i64,
        vehicle_false_positive_rate: diff(vehicle_fpr(&a.confusion), vehicle_fpr(&b.confusion)),
        shadow_as_vehicle_rate: diff(shadow_fpr(&a.confusion), shadow_fpr(&b.confusion)),
        vehicle_precision: diff(
            a.confusion.as_ref().and_then(|c| c.precision(v)),
            b.confusion.as_ref().and_then(|c| c.precision(v)),
        ),
        vehicle_recall: diff(
            a.confusion.as_ref().and_then(|c| c.recall(v)),
            b.confusion.as_ref().and_then(|c| c.recall(v)),
        ),
    }
}

impl Comparison {
    pub fn new(a: MetricsReport, b: MetricsReport) -> Result<Self> {
        let ta: Vec<_> = a.frames.iter().map(|f| f.t).collect();
        let tb: Vec<_> = b.frames.iter().map(|f| f.t).collect();
        if ta != tb {
            return Err(Error::usage("compared runs processed different frames"));
        }
        let deltas = a.frames.iter().zip(&b.frames).map(|(x, y)| delta(x, y)).collect();
        Ok(Comparison { a, b, deltas })
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let err = |e: csv::Error| Error::Internal(format!("writing comparison: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "frame",
            "a_vehicle",
            "b_vehicle",
            "d_vehicle",
            "a_vehicle_fpr",
            "b_vehicle_fpr",
            "d_vehicle_fpr",
            "a_shadow_as_vehicle",
            "b_shadow_as_vehicle",
            "d_shadow_as_vehicle",
            "d_vehicle_precision",
            "d_vehicle_recall",
        ])
        .map_err(err)?;
        let s = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.6}"));
        let vi = SemanticLabel::Vehicle.index();
        for ((fa, fb), d) in self.a.frames.iter().zip(&self.b.frames).zip(&self.deltas) {
            w.write_record([
                d.t.to_string(),
                fa.class_counts[vi].to_string(),
                fb.class_counts[vi].to_string(),
                d.vehicle_count.to_string(),
                s(vehicle_fpr(&fa.confusion)),
                s(vehicle_fpr(&fb.confusion)),
                s(d.vehicle_false_positive_rate),
                s(shadow_fpr(&fa.confusion)),
                s(shadow_fpr(&fb.confusion)),
                s(d.shadow_as_vehicle_rate),
                s(d.vehicle_precision),
                s(d.vehicle_recall),
            ])
            .map_err(err)?;
        }
        let mut out = w.into_inner().map_err(|e| Error::Internal(format!("writing comparison: {e}")))?;
        let io = |e| Error::Internal(format!("writing comparison: {e}"));
        writeln!(out, "# a,{},{}", self.a.method, self.a.order).map_err(io)?;
        writeln!(out, "# b,{},{}", self.b.method, self.b.order).map_err(io)?;
        writeln!(out, "# frames,{}", self.deltas.len()).map_err(io)?;
        if let (Some(ca), Some(cb)) = (self.a.aggregate(None), self.b.aggregate(None)) {
            let v = SemanticLabel::Vehicle;
            writeln!(out, "# vehicle_fpr,{},{}", s(ca.false_positive_rate(v)), s(cb.false_positive_rate(v))).map_err(io)?;
            writeln!(
                out,
                "# shadow_as_vehicle,{},{}",
                s(ca.rate(SemanticLabel::Shadow, v)),
                s(cb.rate(SemanticLabel::Shadow, v))
            )
            .map_err(io)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Runs both configurations on the same sequence.
pub fn compare(cfg_a: &RunConfig, cfg_b: &RunConfig) -> Result<Comparison> {
    let same = |x: &Path, y: &Path| match (fs::canonicalize(x), fs::canonicalize(y)) {
        (Ok(a), Ok(b)) => a == b,
        _ => x == y,
    };
    if !same(&cfg_a.input, &cfg_b.input) {
        return Err(Error::Usage(format!(
            "compared runs read different inputs: {} and {}",
            cfg_a.input.display(),
            cfg_b.input.display()
        )));
    }
    let truth_matches = match (&cfg_a.truth, &cfg_b.truth) {
        (Some(x), Some(y)) => same(x, y),
        (None, None) => true,
        _ => false,
    };
    if !truth_matches {
        return Err(Error::usage("compared runs use different ground truth"));
    }
    Comparison::new(run(cfg_a)?.report, run(cfg_b)?.report)
}

/// [`compare`] on in-memory frames.
pub fn compare_frames(
    cfg_a: &RunConfig,
    cfg_b: &RunConfig,
    frames: &[Frame],
    truth: Option<&[LabelMask]>,
) -> Result<Comparison> {
    Comparison::new(run_frames(cfg_a, frames, truth)?.report, run_frames(cfg_b, frames, truth)?.report)
}
