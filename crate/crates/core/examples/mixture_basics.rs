//! Densities, posteriors and the statistics/parameters round trip for one pixel.

use trafficseg::em::batch_e_step;
use trafficseg::mog::{
    gaussian_log_density, params_from_stats, responsibilities, stats_from_params, ClassSlot, MixtureModel, PixelValue,
};
use trafficseg::segment::{classify_pixel, heuristic_label};

fn main() -> trafficseg::Result<()> {
    let m = MixtureModel::intensity([0.7, 0.2, 0.1], [120.0, 60.0, 150.0], [400.0, 400.0, 3000.0])?;
    let labels = heuristic_label(&m);

    for v in [40.0, 95.0, 120.0, 230.0] {
        let i = PixelValue::intensity(v)?;
        let g = responsibilities(&i, &m)?;
        let road = gaussian_log_density(&i, m.component(ClassSlot::R))?;
        println!(
            "I={v:>5}: gamma = [{:.3} {:.3} {:.3}], log N(road) = {road:.3}, class {}",
            g[0],
            g[1],
            g[2],
            classify_pixel(&i, &m, &labels)?.name()
        );
    }

    // Ten pseudo-observations reproduce the model exactly.
    let back = params_from_stats(&stats_from_params(&m, 10.0)?)?;
    println!("round trip max deviation {:.2e}", back.max_abs_diff(&m));

    let data: Vec<PixelValue> = [118.0, 121.0, 64.0, 180.0].iter().map(|&v| PixelValue::intensity(v)).collect::<Result<_, _>>()?;
    let s = batch_e_step(&data, &m)?;
    for slot in ClassSlot::ALL {
        let st = s.slot(slot);
        println!("slot {}: N={:.3} M={:.2} Z={:.1}", slot.nominal_name(), st.count, st.sum.get(0), st.outer_sum.get(0, 0));
    }
    Ok(())
}
