//! Batch EM on a sample from a known mixture, with the log-likelihood trace.

use trafficseg::em::{batch_em, EmConfig};
use trafficseg::io::synthetic::sample_mixture;
use trafficseg::mog::MixtureModel;

fn main() -> trafficseg::Result<()> {
    let truth = MixtureModel::intensity([0.5, 0.3, 0.2], [30.0, 90.0, 180.0], [25.0, 25.0, 400.0])?;
    let data = sample_mixture(&truth, 2000, 1)?;
    let init = MixtureModel::intensity([1.0 / 3.0; 3], [50.0, 100.0, 150.0], [900.0; 3])?;

    let cfg = EmConfig { restarts: 4, seed: 9, ..EmConfig::default() };
    let (fit, trace) = batch_em(&data, &init, &cfg)?;
    println!("{} iterations, converged: {}", trace.iterations(), trace.converged);
    for (k, ll) in trace.log_likelihood.iter().enumerate().step_by(5) {
        println!("  iter {k:>3}  log L = {ll:.4}");
    }
    println!("final log L = {:.4}", trace.final_log_likelihood());
    for (t, f) in truth.components().iter().zip(fit.components()) {
        println!(
            "  true w={:.2} mu={:>5.1} var={:>5.1}   fit w={:.3} mu={:>6.2} var={:>6.1}",
            t.weight(),
            t.mean().get(0),
            t.covariance().get(0, 0),
            f.weight(),
            f.mean().get(0),
            f.covariance().get(0, 0)
        );
    }
    Ok(())
}
