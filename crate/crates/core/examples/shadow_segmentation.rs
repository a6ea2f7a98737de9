//! Three-class segmentation of the default scene against the ground truth,
//! next to the thresholded baseline. Pass a directory to also write masks
//! and shadow-free frames.

use trafficseg::io::{generate_synthetic, SequenceWriter, SyntheticSceneSpec};
use trafficseg::mog::ColorMode;
use trafficseg::pipeline::{run_frames, Method, MogPipeline, Prior, RunConfig, StepOrder};
use trafficseg::segment::SemanticLabel;

fn main() -> trafficseg::Result<()> {
    let spec = SyntheticSceneSpec::default_scene();
    let seq = generate_synthetic(&spec)?;

    let mut baseline = RunConfig::new(Method::BaselineExponential, ColorMode::Intensity);
    baseline.selective_update = true;
    for cfg in [RunConfig::new(Method::MogIncremental, ColorMode::Intensity), baseline] {
        let out = run_frames(&cfg, &seq.frames, Some(&seq.truth))?;
        let c = out.report.aggregate(Some(50)).expect("truth for every frame");
        println!("{} (last 50 frames)", cfg.method);
        for l in SemanticLabel::ALL {
            let f = |v: Option<f64>| v.map_or("  -  ".into(), |v| format!("{v:.3}"));
            println!("  {:<8} precision {}  recall {}", l.name(), f(c.precision(l)), f(c.recall(l)));
        }
        println!(
            "  shadow labelled vehicle {:.3}",
            c.rate(SemanticLabel::Shadow, SemanticLabel::Vehicle).unwrap_or(0.0)
        );
    }

    if let Some(dir) = std::env::args().nth(1) {
        let prior = Prior::default().model(ColorMode::Intensity)?;
        let mut p = MogPipeline::new(spec.width, spec.height, &prior, Default::default(), StepOrder::UpdateFirst)?;
        let out = SequenceWriter::create(&dir)?;
        for (k, f) in seq.frames.iter().enumerate() {
            let r = p.process(f)?;
            out.write_mask(k + 1, &r.mask)?;
            if let Some(clean) = &r.shadow_free {
                out.write_frame(k + 1, clean)?;
            }
        }
        println!("masks and shadow-free frames written to {dir}");
    }
    Ok(())
}
