use dualrail::chain::{ChainSpec, SpectralDecomposition};
use dualrail::noise::{evolve_damped, NoiseParams};
use dualrail::oracle::FullChain;
use dualrail::protocol::{run_schedule, DualRailState};
use dualrail::scheduler::Schedule;
use proptest::prelude::*;

fn chain() -> impl Strategy<Value = ChainSpec<f64>> {
    (2usize..=24, 0.3f64..2.0, -1.0f64..2.0, -1.0f64..1.0)
        .prop_map(|(n, j, delta, b)| ChainSpec::new(n, j, delta, b).unwrap())
}

fn schedule(max_len: usize) -> impl Strategy<Value = Schedule<f64>> {
    prop::collection::vec(0.01f64..40.0, 1..=max_len).prop_map(|v| Schedule::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_unitary(spec in chain(), tau in 0.0f64..200.0) {
        let dec = SpectralDecomposition::from_spec(&spec).unwrap();
        prop_assert!(dec.propagator_matrix(tau).unwrap().unitarity_defect() < 1e-10);
    }

    #[test]
    fn amplitudes_are_symmetric(spec in chain(), t in 0.0f64..100.0, r in 1usize..=24, s in 1usize..=24) {
        let n = spec.n_sites;
        let (r, s) = (1 + (r - 1) % n, 1 + (s - 1) % n);
        let dec = SpectralDecomposition::from_spec(&spec).unwrap();
        let a = dec.transition_amplitude(r, s, t).unwrap();
        let b = dec.transition_amplitude(s, r, t).unwrap();
        let mirrored = dec.transition_amplitude(n + 1 - r, n + 1 - s, t).unwrap();
        prop_assert!((a - b).norm() < 1e-11);
        prop_assert!((a - mirrored).norm() < 1e-10);
    }

    #[test]
    fn propagators_compose(spec in chain(), a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let dec = SpectralDecomposition::from_spec(&spec).unwrap();
        let ab = dec.propagator_matrix(a).unwrap().matmul(&dec.propagator_matrix(b).unwrap());
        prop_assert!(ab.max_abs_diff(&dec.propagator_matrix(a + b).unwrap()) < 1e-10);
    }

    #[test]
    fn joint_failure_never_increases(n in 2usize..=30, sched in schedule(25), gamma in 0.0f64..0.2) {
        let dec = SpectralDecomposition::from_spec(&ChainSpec::heisenberg(n)).unwrap();
        let noise = NoiseParams::symmetric(gamma).unwrap();
        for r in [run_schedule(&dec, &sched, None).unwrap(), run_schedule(&dec, &sched, Some(&noise)).unwrap()] {
            let p = r.joint_failures();
            prop_assert!(p.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            prop_assert!(p.iter().all(|&x| (-1e-12..=1.0).contains(&x)));
        }
    }

    #[test]
    fn probability_is_conserved(n in 2usize..=30, sched in schedule(25), gamma in 0.0f64..0.2) {
        let dec = SpectralDecomposition::from_spec(&ChainSpec::heisenberg(n)).unwrap();
        let noise = NoiseParams::symmetric(gamma).unwrap();
        let mut state = DualRailState::new(n).unwrap();
        for &tau in sched.intervals() {
            evolve_damped(&mut state, &dec, tau, &noise).unwrap();
            state.measure();
            let total = state.total_success() + state.norm_sqr() + state.loss();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_matches_full_space(n in 2usize..=7, delta in -1.0f64..2.0, b in -1.0f64..1.0, t in 0.0f64..30.0) {
        let spec = ChainSpec::new(n, 1.0, delta, b).unwrap();
        let dec = SpectralDecomposition::from_spec(&spec).unwrap();
        let full = FullChain::new(&spec).unwrap();
        for s in 1..=n {
            for r in 1..=n {
                let reduced = dec.transition_amplitude(r, s, t).unwrap();
                let exact = full.transition_amplitude(r, s, t).unwrap();
                prop_assert!((reduced - exact).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn single_precision_tracks_double(n in 2usize..=16, t in 0.0f32..20.0) {
        let d64 = SpectralDecomposition::from_spec(&ChainSpec::<f64>::heisenberg(n)).unwrap();
        let d32 = SpectralDecomposition::from_spec(&ChainSpec::<f32>::heisenberg(n)).unwrap();
        let a = d64.transition_amplitude(n, 1, t as f64).unwrap();
        let b = d32.transition_amplitude(n, 1, t).unwrap();
        prop_assert!((a.re - b.re as f64).abs() < 1e-4 && (a.im - b.im as f64).abs() < 1e-4);
    }
}
