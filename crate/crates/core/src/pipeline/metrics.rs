use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::frame::LabelMask;
use crate::pipeline::config::{Method, StepOrder};
use crate::segment::SemanticLabel;

/// Pixel counts indexed `[truth][predicted]` in label order road, shadow, vehicle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub counts: [[u64; 3]; 3],
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Confusion {
    pub fn from_masks(truth: &LabelMask, predicted: &LabelMask) -> Result<Self> {
        predicted.check_shape(truth.width(), truth.height())?;
        let mut c = Confusion::default();
        for (t, p) in truth.labels().iter().zip(predicted.labels()) {
            c.counts[t.index()][p.index()] += 1;
        }
        Ok(c)
    }

    pub fn add(&mut self, other: &Confusion) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in row.iter_mut().zip(o) {
                *x += y;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn truth_count(&self, l: SemanticLabel) -> u64 {
        self.counts[l.index()].iter().sum()
    }

    pub fn predicted_count(&self, l: SemanticLabel) -> u64 {
        self.counts.iter().map(|row| row[l.index()]).sum()
    }

    fn hits(&self, l: SemanticLabel) -> u64 {
        self.counts[l.index()][l.index()]
    }

    /// `None` when nothing was predicted as `l`.
    pub fn precision(&self, l: SemanticLabel) -> Option<f64> {
        ratio(self.hits(l), self.predicted_count(l))
    }

    /// `None` when `l` never occurs in the truth.
    pub fn recall(&self, l: SemanticLabel) -> Option<f64> {
        ratio(self.hits(l), self.truth_count(l))
    }

    /// Fraction of pixels not truly `l` that were predicted as `l`.
    pub fn false_positive_rate(&self, l: SemanticLabel) -> Option<f64> {
        let wrong = self.predicted_count(l) - self.hits(l);
        ratio(wrong, self.total() - self.truth_count(l))
    }

    /// Fraction of true `truth` pixels predicted as `predicted`.
    pub fn rate(&self, truth: SemanticLabel, predicted: SemanticLabel) -> Option<f64> {
        ratio(self.counts[truth.index()][predicted.index()], self.truth_count(truth))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameMetrics {
    pub t: usize,
    pub class_counts: [u64; 3],
    pub confusion: Option<Confusion>,
    pub mean_log_likelihood: Option<f64>,
    pub label_flips: u64,
    pub wall_time: Duration,
}

impl FrameMetrics {
    /// Everything except the wall time.
    fn same_results(&self, other: &FrameMetrics) -> bool {
        self.t == other.t
            && self.class_counts == other.class_counts
            && self.confusion == other.confusion
            && self.mean_log_likelihood.map(f64::to_bits) == other.mean_log_likelihood.map(f64::to_bits)
            && self.label_flips == other.label_flips
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub method: Method,
    pub order: StepOrder,
    pub frames: Vec<FrameMetrics>,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.6}"))
}

impl MetricsReport {
    pub fn new(method: Method, order: StepOrder) -> Self {
        MetricsReport {
            method,
            order,
            frames: Vec::new(),
        }
    }

    /// Summed confusion over the last `n` frames (all frames for `None`), or
    /// `None` if any of them lacks ground truth.
    pub fn aggregate(&self, last: Option<usize>) -> Option<Confusion> {
        let skip = last.map_or(0, |n| self.frames.len().saturating_sub(n));
        let mut total = Confusion::default();
        for f in &self.frames[skip..] {
            total.add(f.confusion.as_ref()?);
        }
        Some(total)
    }

    pub fn total_wall_time(&self) -> Duration {
        self.frames.iter().map(|f| f.wall_time).sum()
    }

    /// Equal up to wall time.
    pub fn same_results(&self, other: &MetricsReport) -> bool {
        self.method == other.method
            && self.order == other.order
            && self.frames.len() == other.frames.len()
            && self.frames.iter().zip(&other.frames).all(|(a, b)| a.same_results(b))
    }

    /// One row per frame, then `#`-prefixed summary lines.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Internal(format!("writing metrics: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "frame".to_string(),
            "road".into(),
            "shadow".into(),
            "vehicle".into(),
            "mean_log_likelihood".into(),
            "label_flips".into(),
            "wall_ms".into(),
        ];
        for t in SemanticLabel::ALL {
            for p in SemanticLabel::ALL {
                header.push(format!("{}_as_{}", t.name(), p.name()));
            }
        }
        for l in SemanticLabel::ALL {
            header.push(format!("precision_{}", l.name()));
            header.push(format!("recall_{}", l.name()));
        }
        w.write_record(&header).map_err(csv_err)?;
        for f in &self.frames {
            let mut row = vec![
                f.t.to_string(),
                f.class_counts[0].to_string(),
                f.class_counts[1].to_string(),
                f.class_counts[2].to_string(),
                opt(f.mean_log_likelihood),
                f.label_flips.to_string(),
                format!("{:.3}", f.wall_time.as_secs_f64() * 1e3),
            ];
            match &f.confusion {
                Some(c) => {
                    row.extend(c.counts.iter().flatten().map(|n| n.to_string()));
                    for l in SemanticLabel::ALL {
                        row.push(opt(c.precision(l)));
                        row.push(opt(c.recall(l)));
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), 15)),
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        let mut out = w.into_inner().map_err(|e| Error::Internal(format!("writing metrics: {e}")))?;
        let io = |e| Error::Internal(format!("writing metrics: {e}"));
        writeln!(out, "# method,{}", self.method).map_err(io)?;
        writeln!(out, "# order,{}", self.order).map_err(io)?;
        writeln!(out, "# frames,{}", self.frames.len()).map_err(io)?;
        writeln!(out, "# wall_ms_total,{:.3}", self.total_wall_time().as_secs_f64() * 1e3).map_err(io)?;
        let lls: Vec<f64> = self.frames.iter().filter_map(|f| f.mean_log_likelihood).collect();
        if !lls.is_empty() {
            writeln!(out, "# mean_log_likelihood,{:.6}", lls.iter().sum::<f64>() / lls.len() as f64).map_err(io)?;
        }
        if let Some(c) = self.aggregate(None) {
            for l in SemanticLabel::ALL {
                writeln!(out, "# precision_{},{}", l.name(), opt(c.precision(l))).map_err(io)?;
                writeln!(out, "# recall_{},{}", l.name(), opt(c.recall(l))).map_err(io)?;
            }
            writeln!(out, "# vehicle_false_positive_rate,{}", opt(c.false_positive_rate(SemanticLabel::Vehicle)))
                .map_err(io)?;
            writeln!(
                out,
                "# shadow_as_vehicle_rate,{}",
                opt(c.rate(SemanticLabel::Shadow, SemanticLabel::Vehicle))
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
