//! A scene described in the flat key = value format, rendered to frames
//! and ground-truth masks.

use trafficseg::io::synthetic::{format_scene_spec, parse_scene_spec};
use trafficseg::io::generate_synthetic;
use trafficseg::segment::SemanticLabel;

const SPEC: &str = "
width = 48
height = 24
mode = gray
frames = 60
seed = 3
background = 100 130
texture = 4
road_noise = 3
shadow_noise = 2
wrap = true
# x y w h vx vy value std, then the shadow's offset, size and darkening
object = 0 6 8 5 1.5 0 200 25 shadow 1 5 8 3 0.45
";

fn main() -> trafficseg::Result<()> {
    let spec = parse_scene_spec(SPEC)?;
    let seq = generate_synthetic(&spec)?;
    let mid = &seq.truth[seq.truth.len() / 2];
    println!(
        "{} frames of {}x{}; middle frame has {} vehicle and {} shadow pixels",
        seq.frames.len(),
        spec.width,
        spec.height,
        mid.count(SemanticLabel::Vehicle),
        mid.count(SemanticLabel::Shadow)
    );
    if let Some(dir) = std::env::args().nth(1) {
        seq.write_to(&dir)?;
        println!("written to {dir}");
    }
    print!("{}", format_scene_spec(&spec));
    Ok(())
}
