use hinf_core::discretize::{discretize_with, to_zpk, HistoryComponents};
use hinf_core::extrema::{build_delta, compute_extrema, golden_section, predict_frequencies, ExtremaOptions, DEFAULT_AXIS_TOL};
use hinf_core::systems::{one_delay, random_retarded, smith_predictor, tsh_system};
use hinf_core::transfer::eval_transfer;
use hinf_core::DdaeSystem;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mag(sys: &DdaeSystem, w: f64) -> f64 {
    eval_transfer(sys, Complex64::new(0.0, w)).unwrap().norm()
}

fn approx_error(sys: &DdaeSystem, n: usize, wmax: f64) -> f64 {
    let g = discretize_with(sys, n, HistoryComponents::Delayed).unwrap();
    (0..=2000)
        .map(|k| {
            let s = Complex64::new(0.0, wmax * k as f64 / 2000.0);
            (g.eval(s).unwrap() - eval_transfer(sys, s).unwrap()).norm()
        })
        .fold(0.0, f64::max)
}

/// Sweep stationary points on `(0, wmax)`, refined by golden section.
fn sweep_stationary(sys: &DdaeSystem, wmax: f64, samples: usize) -> Vec<(f64, f64)> {
    let ws: Vec<f64> = (0..=samples).map(|k| wmax * k as f64 / samples as f64).collect();
    let ms: Vec<f64> = ws.iter().map(|&w| mag(sys, w)).collect();
    let mut out = Vec::new();
    for k in 1..samples {
        let is_max = ms[k] > ms[k - 1] && ms[k] >= ms[k + 1];
        let is_min = ms[k] < ms[k - 1] && ms[k] <= ms[k + 1];
        if is_max || is_min {
            let (w, _) = golden_section(|w| mag(sys, w), ws[k - 1], ws[k + 1], 1e-13, is_max);
            out.push((w, mag(sys, w)));
        }
    }
    out
}

fn examples() -> Vec<(&'static str, DdaeSystem)> {
    vec![("tsh", tsh_system()), ("one_delay", one_delay()), ("smith", smith_predictor())]
}

#[test]
fn approximation_error_decreases_with_n() {
    for (name, sys) in examples() {
        let wc = 5.0 / sys.max_delay();
        let errs: Vec<f64> = [10, 15, 20, 30].iter().map(|&n| approx_error(&sys, n, wc)).collect();
        for w in errs.windows(2) {
            assert!(w[1] <= 10.0 * w[0], "{name}: {errs:?}");
        }
        assert!(errs[3] < errs[0] || errs[0] < 1e-12, "{name}: {errs:?}");
    }
}

#[test]
fn tsh_error_drops_two_orders_from_10_to_30() {
    let sys = tsh_system();
    let e10 = approx_error(&sys, 10, 10.0);
    let e30 = approx_error(&sys, 30, 10.0);
    assert!(e10 >= 1e2 * e30, "{e10} vs {e30}");
}

#[test]
fn reported_peak_is_not_below_sweep_maximum() {
    for (name, sys) in examples() {
        let wc = 5.0 / sys.max_delay();
        let sweep = (0..=10_000).map(|k| mag(&sys, wc * k as f64 / 10_000.0)).fold(0.0, f64::max);
        let r = compute_extrema(&sys, &ExtremaOptions::default()).unwrap();
        let peak = r.peak().unwrap().xi;
        assert!(peak >= sweep - 1e-6, "{name}: {peak} < {sweep}");
    }
}

#[test]
fn corrected_shift_is_smaller_at_higher_n() {
    for (name, sys) in examples() {
        let shift = |n: usize| {
            let r = compute_extrema(&sys, &ExtremaOptions { n_cheb: n, ..Default::default() }).unwrap();
            let p = r.peak().unwrap().clone();
            (p.omega - p.predictor_omega).abs()
        };
        let (s10, s30) = (shift(10), shift(30));
        assert!(s30 <= s10 || s30 < 1e-12, "{name}: {s10} {s30}");
    }
}

#[test]
fn zpk_round_trip_on_examples() {
    for (name, sys) in examples() {
        let g = discretize_with(&sys, 20, HistoryComponents::Delayed).unwrap();
        let zpk = to_zpk(&g).unwrap();
        for k in 0..50 {
            let s = Complex64::new(0.0, 1e-2 * 1.2f64.powi(k));
            let (a, b) = (zpk.eval(s), g.eval(s).unwrap());
            assert!((a - b).norm() <= 1e-6 * (1.0 + b.norm()), "{name} at {s}: {a} vs {b}");
        }
    }
}

fn predicted_tsh() -> Vec<f64> {
    let g = discretize_with(&tsh_system(), 20, HistoryComponents::Delayed).unwrap();
    let delta = build_delta(&to_zpk(&g).unwrap()).unwrap();
    predict_frequencies(&delta, DEFAULT_AXIS_TOL).unwrap()
}

fn coverage_gap(predicted: &[f64], reference: &[(f64, f64)]) -> f64 {
    reference.iter().map(|(w, _)| predicted.iter().map(|p| (p - w).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

#[test]
fn tsh_predictions_cover_low_frequency_extrema() {
    let reference = sweep_stationary(&tsh_system(), 15.0, 300_000);
    assert!(reference.len() >= 8);
    let gap = coverage_gap(&predicted_tsh(), &reference);
    assert!(gap <= 1e-2, "gap {gap}");
}

/// The N = 20 approximation loses the fine ripple of `|G|` past `w ~ 15`,
/// so this does not hold.
#[test]
#[ignore]
fn tsh_predictions_cover_extrema_up_to_50() {
    let reference = sweep_stationary(&tsh_system(), 50.0, 1_000_000);
    let gap = coverage_gap(&predicted_tsh(), &reference);
    assert!(gap <= 1e-2, "gap {gap}");
}

#[test]
fn random_systems_match_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..5 {
        let sys = random_retarded(&mut || rng.gen::<f64>());
        let r = compute_extrema(&sys, &ExtremaOptions::default()).unwrap();
        let wc = 5.0 / sys.max_delay();
        let sweep_peak = sweep_stationary(&sys, wc, 50_000).into_iter().map(|(_, m)| m).fold(mag(&sys, 0.0), f64::max);
        let peak = r.peak().unwrap().xi;
        assert!(peak >= sweep_peak * (1.0 - 1e-6), "case {case}: {peak} vs {sweep_peak}");
        for p in r.converged() {
            assert!((mag(&sys, p.omega) - p.xi).abs() <= 1e-8 * (1.0 + p.xi));
        }
    }
}
