//! Reference values for the scaling laws, the greedy protocol and the
//! damped plateau, each with its tolerance band.

use dualrail::analysis::units::gamma_to_natural;
use dualrail::analysis::{failure_heuristic, peak_heuristic, reproduce_figure, transfer_time_law, FigureId, FigureParams};
use dualrail::chain::{ChainSpec, SpectralDecomposition};
use dualrail::noise::{p_infinity_estimate, p_infinity_exact, NoiseParams, PlateauOptions};
use dualrail::protocol::run_schedule;
use dualrail::scheduler::{greedy_run, time_to_failure_threshold, uniform_schedule, GreedyOptions};

fn dec(n: usize) -> SpectralDecomposition<f64> {
    SpectralDecomposition::from_spec(&ChainSpec::heisenberg(n)).unwrap()
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

#[test]
fn first_arrival_height_at_100_sites() {
    let peak = dec(100).first_peak();
    assert!(within(peak.probability, 0.063, 0.15), "{peak:?}");
}

#[test]
fn first_arrival_height_at_50_sites() {
    let peak = dec(50).first_peak();
    assert!(within(peak.probability, peak_heuristic::<f64>(50), 0.15), "{peak:?}");
}

#[test]
fn first_arrival_time_at_100_sites() {
    let peak = dec(100).first_peak();
    assert!(within(peak.time, 50.0, 0.20), "{peak:?}");
}

#[test]
fn first_greedy_attempt_at_10_sites() {
    let run = greedy_run(&dec(10), 1, &GreedyOptions::default(), None).unwrap();
    let s = run.result.records[0].step_success;
    assert!(within(s, peak_heuristic::<f64>(10), 0.15), "step success {s}");
}

#[test]
fn fifty_greedy_attempts_at_10_sites() {
    let run = greedy_run(&dec(10), 50, &GreedyOptions::default(), None).unwrap();
    assert!(run.result.final_joint_failure() < 0.01);
}

#[test]
fn greedy_beats_uniform_at_20_sites() {
    let d = dec(20);
    let greedy = greedy_run(&d, 40, &GreedyOptions::default(), None).unwrap();
    let uniform = run_schedule(&d, &uniform_schedule(20, 40).unwrap(), None).unwrap();
    assert!(greedy.result.final_joint_failure() <= uniform.final_joint_failure());
}

#[test]
fn two_site_threshold_in_one_step() {
    let hit = time_to_failure_threshold(&dec(2), 1e-6, 10, &GreedyOptions::default()).unwrap();
    assert_eq!(hit.l_used, 1);
    assert!((hit.total_time - std::f64::consts::FRAC_PI_4).abs() < 1e-4);
}

#[test]
fn transfer_time_at_30_sites_within_factor_two() {
    let hit = time_to_failure_threshold(&dec(30), 0.01, 10_000, &GreedyOptions::default()).unwrap();
    let law = transfer_time_law(0.33, 30, 0.01);
    let ratio = hit.total_time / law;
    assert!((0.5..=2.0).contains(&ratio), "t = {}, law = {law}", hit.total_time);
}

#[test]
fn transfer_time_linear_in_log_target_at_20_sites() {
    let d = dec(20);
    let ratios: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&p| time_to_failure_threshold(&d, p, 10_000, &GreedyOptions::default()).unwrap().total_time / f64::ln(p).abs())
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    assert!(hi / lo - 1.0 <= 0.25, "t/|ln P| = {ratios:?}");
}

#[test]
fn uniform_schedule_tracks_geometric_estimate() {
    for n in [20, 50] {
        let r = run_schedule(&dec(n), &uniform_schedule(n, 20).unwrap(), None).unwrap();
        for (l, p) in r.joint_failures().into_iter().enumerate() {
            let h: f64 = failure_heuristic(n, l + 1);
            assert!(p / h <= 3.0 && h / p <= 3.0, "N={n} l={} P={p} estimate={h}", l + 1);
        }
    }
}

#[test]
fn joint_failure_curve_at_10_sites() {
    let params = FigureParams {
        n_values: Some(vec![10]),
        l_max: Some(30),
        ..Default::default()
    };
    let p = reproduce_figure(FigureId::JointFailure, &params).unwrap().column("P_l").unwrap();
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    let slope = (p[29].ln() - p[0].ln()) / 29.0;
    let expected = (1.0 - peak_heuristic::<f64>(10)).ln();
    assert!(within(slope, expected, 0.15), "slope {slope}, estimate {expected}");
}

#[test]
fn transfer_time_figure_refits_within_bands() {
    let ds = reproduce_figure(FigureId::TransferTime, &FigureParams::default()).unwrap();
    let meta = |k: &str| -> f64 {
        ds.metadata().iter().find(|(key, _)| key == k).unwrap().1.parse().unwrap()
    };
    let (c, a) = (meta("fit_prefactor"), meta("fit_exponent"));
    assert_eq!(ds.rows().len(), 15);
    assert!((a - 5.0 / 3.0).abs() <= 0.15 && (0.26..=0.45).contains(&c), "c = {c}, a = {a}");
}

#[test]
fn noiseless_runs_leave_no_plateau() {
    let opts = PlateauOptions::<f64>::default();
    for n in [5, 10, 20, 30] {
        let plateau = p_infinity_exact(&dec(n), &NoiseParams::symmetric(0.0).unwrap(), &opts).unwrap();
        assert!(plateau.converged && plateau.p_infinity < 1e-3, "N={n}: {plateau:?}");
    }
}

#[test]
fn plateau_estimate_at_40_sites() {
    let g = gamma_to_natural(50.0).unwrap();
    assert!((g - 1.528e-4).abs() < 1e-7);
    assert!(p_infinity_estimate(40, g, 10_000) < 0.01);
}

#[test]
fn plateau_exact_agrees_with_estimate_at_40_sites() {
    let g = gamma_to_natural(50.0).unwrap();
    let exact = p_infinity_exact(&dec(40), &NoiseParams::symmetric(g).unwrap(), &PlateauOptions::default())
        .unwrap()
        .p_infinity;
    let estimate = p_infinity_estimate(40, g, 10_000);
    assert!(exact < 0.1 && estimate < 0.1);
    assert!(exact.max(estimate) / exact.min(estimate) <= 3.0, "exact {exact}, estimate {estimate}");
}

#[test]
fn damped_plateau_figure_has_both_columns() {
    let params = FigureParams {
        n_values: Some(vec![6, 8]),
        j_over_gamma: Some(vec![2.0]),
        ..Default::default()
    };
    let ds = reproduce_figure(FigureId::DampedPlateau, &params).unwrap();
    assert!(ds.column("P_inf_exact").is_some() && ds.column("P_inf_estimate").is_some());
    let exact = ds.column("P_inf_exact").unwrap();
    assert!(exact[2] < 1e-3 && exact[3] < 1e-3);
}
