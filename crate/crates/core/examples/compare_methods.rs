//! All four methods on the default scene, with the per-frame deltas of the
//! mixture against each baseline.

use trafficseg::io::{generate_synthetic, SyntheticSceneSpec};
use trafficseg::mog::ColorMode;
use trafficseg::pipeline::{compare_frames, run_frames, Method, RunConfig};
use trafficseg::segment::SemanticLabel::{Shadow, Vehicle};

fn main() -> trafficseg::Result<()> {
    let seq = generate_synthetic(&SyntheticSceneSpec::default_scene())?;
    println!("{:<22} {:>9} {:>9} {:>12} {:>9}", "method", "veh prec", "veh rec", "shadow->veh", "seconds");
    for m in Method::ALL {
        let out = run_frames(&RunConfig::new(m, ColorMode::Intensity), &seq.frames, Some(&seq.truth))?;
        let c = out.report.aggregate(Some(50)).expect("truth available");
        println!(
            "{:<22} {:>9.3} {:>9.3} {:>12.3} {:>9.2}",
            m.name(),
            c.precision(Vehicle).unwrap_or(0.0),
            c.recall(Vehicle).unwrap_or(0.0),
            c.rate(Shadow, Vehicle).unwrap_or(0.0),
            out.report.total_wall_time().as_secs_f64()
        );
    }

    let a = RunConfig::new(Method::MogIncremental, ColorMode::Intensity);
    let b = RunConfig::new(Method::BaselineExponential, ColorMode::Intensity);
    let cmp = compare_frames(&a, &b, &seq.frames, Some(&seq.truth))?;
    println!("\nbaseline-exponential minus mog-incremental, last 5 frames");
    println!("{:>5} {:>9} {:>9} {:>12}", "frame", "vehicles", "veh FPR", "shadow->veh");
    for d in &cmp.deltas[cmp.deltas.len() - 5..] {
        println!(
            "{:>5} {:>+9} {:>+9.3} {:>+12.3}",
            d.t,
            d.vehicle_count,
            d.vehicle_false_positive_rate.unwrap_or(0.0),
            d.shadow_as_vehicle_rate.unwrap_or(0.0)
        );
    }
    Ok(())
}
