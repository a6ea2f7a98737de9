//! Slow traffic pulls a forgetting background toward vehicle brightness,
//! while the mixture's road component stays on the road.

use trafficseg::io::{generate_synthetic, SyntheticSceneSpec};
use trafficseg::mog::ColorMode;
use trafficseg::pipeline::{run_frames, Engine, Method, RunConfig};
use trafficseg::segment::{heuristic_label, SemanticLabel};

fn main() -> trafficseg::Result<()> {
    let spec = SyntheticSceneSpec::slow_convoy_scene();
    let seq = generate_synthetic(&spec)?;
    let (x, y) = (10, 4);

    let base = run_frames(&RunConfig::new(Method::BaselineExponential, ColorMode::Intensity), &seq.frames, None)?;
    let mog = run_frames(&RunConfig::new(Method::MogIncremental, ColorMode::Intensity), &seq.frames, None)?;

    let Some(Engine::Baseline(b)) = &base.engine else { unreachable!() };
    let Some(Engine::Mog(m)) = &mog.engine else { unreachable!() };
    let model = m.bank().state(x, y)?.model();
    let road = model.component(heuristic_label(model).slot_of(SemanticLabel::Road));

    println!("road {:.0}, trucks {:.0}", spec.background.0, spec.objects[0].value[0]);
    println!("baseline background at ({x},{y}): {:.1}", b.background().mean_at(x, y).get(0));
    println!("mixture road mean at ({x},{y}):   {:.1}", road.mean().get(0));
    Ok(())
}
