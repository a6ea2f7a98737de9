//! Stop half way, save the model bank, resume from it and get the same
//! masks as an uninterrupted run. Then inspect one pixel of the saved bank.

use trafficseg::io::bank::encode_model_bank;
use trafficseg::io::pnm::encode_mask;
use trafficseg::io::{generate_synthetic, SyntheticSceneSpec};
use trafficseg::mog::ColorMode;
use trafficseg::pipeline::{inspect_pixel, run_frames, Method, RunConfig, FINAL_CHECKPOINT};

fn main() -> trafficseg::Result<()> {
    let seq = generate_synthetic(&SyntheticSceneSpec::default_scene())?;
    let half = seq.frames.len() / 2;
    let dir = std::env::temp_dir().join(format!("trafficseg-resume-{}", std::process::id()));

    let cfg = RunConfig::new(Method::MogIncremental, ColorMode::Intensity);
    let whole = run_frames(&cfg, &seq.frames, None)?;

    let mut first = cfg.clone();
    first.outputs.checkpoints = Some(dir.clone());
    run_frames(&first, &seq.frames[..half], None)?;

    let mut second = cfg.clone();
    second.resume = Some(dir.join(FINAL_CHECKPOINT));
    let rest = run_frames(&second, &seq.frames, None)?;

    let same = rest.masks.iter().zip(&whole.masks[half..]).all(|((_, a), (_, b))| encode_mask(a) == encode_mask(b));
    let banks = encode_model_bank(rest.engine.as_ref().and_then(|e| e.bank()).unwrap())
        == encode_model_bank(whole.engine.as_ref().and_then(|e| e.bank()).unwrap());
    println!("resumed {} frames after {half}; masks identical: {same}; final banks identical: {banks}", rest.masks.len());

    print!("{}", inspect_pixel(dir.join(FINAL_CHECKPOINT), 20, 6)?);
    std::fs::remove_dir_all(&dir).map_err(|e| trafficseg::Error::Internal(e.to_string()))?;
    Ok(())
}
