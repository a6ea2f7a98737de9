//! Incremental EM over a stream, with and without forgetting, across a
//! sudden brightness change.

use trafficseg::em::{effective_sample_size, incremental_init, slot_means, EmConfig};
use trafficseg::io::synthetic::sample_mixture;
use trafficseg::mog::MixtureModel;

fn main() -> trafficseg::Result<()> {
    let day = MixtureModel::intensity([0.6, 0.2, 0.2], [110.0, 50.0, 190.0], [30.0, 30.0, 200.0])?;
    let dusk = MixtureModel::intensity([0.6, 0.2, 0.2], [80.0, 35.0, 170.0], [30.0, 30.0, 200.0])?;
    let mut stream = sample_mixture(&day, 1500, 2)?;
    stream.extend(sample_mixture(&dusk, 1500, 3)?);

    for alpha in [0.0, 0.01] {
        let cfg = EmConfig { forgetting_alpha: alpha, ..EmConfig::default() };
        let mut s = incremental_init(&day, &cfg)?;
        println!("forgetting rate {alpha}");
        for (t, x) in stream.iter().enumerate() {
            s.update(x, &cfg)?;
            if (t + 1) % 500 == 0 {
                let mu = slot_means(s.model());
                println!(
                    "  t={:>4}  means {:>6.1} {:>6.1} {:>6.1}  ESS {:>7.1}",
                    t + 1,
                    mu[0].get(0),
                    mu[1].get(0),
                    mu[2].get(0),
                    effective_sample_size(&s)
                );
            }
        }
    }
    Ok(())
}
