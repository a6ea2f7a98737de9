//! End-to-end behavior on the synthetic presets.

use trafficseg::baseline::DEFAULT_ALPHA;
use trafficseg::io::{generate_synthetic, SyntheticSceneSpec};
use trafficseg::mog::ColorMode;
use trafficseg::pipeline::{compare_frames, inspect_pixel, run, run_frames, Engine, Method, RunConfig, FINAL_CHECKPOINT};
use trafficseg::segment::SemanticLabel::{self, Road, Shadow, Vehicle};

#[test]
fn parked_vehicle_drags_the_exponential_background() {
    let spec = SyntheticSceneSpec::stalled_vehicle_scene();
    let seq = generate_synthetic(&spec).unwrap();
    let last = seq.truth.last().unwrap();
    // Column covered for the longest run ending at the last frame.
    let (x, dwell) = (0..spec.width)
        .map(|x| {
            let n = seq.truth.iter().rev().take_while(|m| m.get(x, 4) == Vehicle).count();
            (x, n)
        })
        .max_by_key(|&(_, n)| n)
        .unwrap();
    assert_eq!(last.get(x, 4), Vehicle);
    assert!(dwell as f64 >= 3.0 / DEFAULT_ALPHA, "dwell {dwell}");

    let cfg = RunConfig::new(Method::BaselineExponential, ColorMode::Intensity);
    let out = run_frames(&cfg, &seq.frames, None).unwrap();
    let Some(Engine::Baseline(b)) = out.engine else { panic!("baseline engine expected") };
    let (v_bg, v_obj) = (spec.background.0, spec.objects[0].value[0]);
    let drift = (b.background().mean_at(x, 4).get(0) - v_bg) / (v_obj - v_bg);
    assert!(drift >= 0.2, "drift {drift}");
}

#[test]
fn mixture_has_fewer_false_vehicles_than_baseline() {
    let seq = generate_synthetic(&SyntheticSceneSpec::default_scene()).unwrap();
    let a = RunConfig::new(Method::MogIncremental, ColorMode::Intensity);
    for method in [Method::BaselineCumulative, Method::BaselineExponential] {
        let b = RunConfig::new(method, ColorMode::Intensity);
        let cmp = compare_frames(&a, &b, &seq.frames, Some(&seq.truth)).unwrap();
        assert_eq!(cmp.deltas.len(), seq.frames.len());
        let fpr = |r: &trafficseg::pipeline::MetricsReport| {
            r.aggregate(None).unwrap().false_positive_rate(Vehicle).unwrap()
        };
        assert!(fpr(&cmp.a) < fpr(&cmp.b), "{method}: {} vs {}", fpr(&cmp.a), fpr(&cmp.b));
    }
}

#[test]
fn file_run_checkpoint_orders_component_means() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSceneSpec::default_scene();
    let input = dir.path().join("scene");
    generate_synthetic(&spec).unwrap().write_to(&input).unwrap();

    let mut cfg = RunConfig::new(Method::MogIncremental, ColorMode::Intensity);
    cfg.input = input.clone();
    cfg.truth = Some(input);
    cfg.outputs.checkpoints = Some(dir.path().join("ckpt"));
    cfg.outputs.metrics = Some(dir.path().join("metrics.csv"));
    let out = run(&cfg).unwrap();
    assert_eq!(out.report.frames.len(), spec.frames);

    let mean = |x, y, l: SemanticLabel| {
        inspect_pixel(dir.path().join("ckpt").join(FINAL_CHECKPOINT), x, y).unwrap().component(l).mean.get(0)
    };
    // Row 6 lies on the first car's lane, row 11 under its shadow.
    let (s, r, v) = (mean(20, 6, Shadow), mean(20, 6, Road), mean(20, 6, Vehicle));
    assert!(s < r && r < v, "{s} {r} {v}");
    let (s, r) = (mean(20, 11, Shadow), mean(20, 11, Road));
    assert!(s < r && r - s > 20.0, "{s} {r}");
    assert!(inspect_pixel(dir.path().join("ckpt").join(FINAL_CHECKPOINT), spec.width, 0).is_err());
}
