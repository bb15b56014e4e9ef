use fwmix::config::{RunConfig, TimeGrid};
use fwmix::criteria::{evaluate, evaluate_all, CriterionId};
use fwmix::dynamics::{evolve, hamiltonian_operator, lift_to_sparse, ModelParams, ReducedState};
use fwmix::ensembles::{ensemble_raw_sweep, DistributionKind, NumberDistribution};
use fwmix::fock::{evolve_exact, Mixture, OccupationVector, SparseState, SplitterConvention};
use fwmix::homodyne::{
    quadrature_moments, raw_moments_oracle, split_local_oscillator, split_local_oscillator_with,
    MeasuredQuadratureSet, QuadratureMoments, RawMoments,
};
use fwmix::sweep::run_sweep;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raw_gap(a: &RawMoments, b: &RawMoments) -> f64 {
    let fa = flatten(a);
    let fb = flatten(b);
    fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn flatten(r: &RawMoments) -> Vec<f64> {
    let mut v = Vec::new();
    v.extend(r.mean_d);
    v.extend(r.mean_e);
    v.extend(r.sq_d);
    v.extend(r.sq_e);
    v.push(r.cross_d);
    v.push(r.cross_e);
    v.extend(r.pop_signal);
    v.extend(r.pop_lo);
    v
}

#[test]
fn splitter_convention_does_not_change_criteria() {
    let st = evolve(&ReducedState::fock(20), &ModelParams::new(1.0, 20).unwrap(), 0.037).unwrap();
    let lifted = lift_to_sparse(&st);
    let set = MeasuredQuadratureSet::default();
    let a = quadrature_moments(&split_local_oscillator(&lifted, 0).unwrap(), &set).unwrap();
    let b = quadrature_moments(
        &split_local_oscillator_with(&lifted, 0, SplitterConvention::Unitary).unwrap(),
        &set,
    )
    .unwrap();
    for (x, y) in evaluate_all(&a).entries.iter().zip(&evaluate_all(&b).entries) {
        assert!((x.margin - y.margin).abs() < 1e-9, "{x:?} vs {y:?}");
    }
}

#[test]
fn rank_two_mixture_matches_operator_oracle() {
    let dist = NumberDistribution::custom(vec![(2, 0.5), (4, 0.5)]).unwrap();
    let set = MeasuredQuadratureSet::default();
    for t in [0.05, 0.3, 0.9] {
        let fast = ensemble_raw_sweep(&dist, 1.0, &[t], &Default::default()).unwrap()[0];
        let mut oracle = RawMoments::default();
        for n in [2u32, 4] {
            let evolved =
                evolve_exact(&SparseState::fock(&[n, 0, 0]), &hamiltonian_operator(1.0), t).unwrap();
            let raw = raw_moments_oracle(&split_local_oscillator(&evolved, 0).unwrap(), &set).unwrap();
            oracle = oracle.add_weighted(0.5, &raw);
        }
        assert!(raw_gap(&fast, &oracle) < 1e-10);
        // and through the density-operator style expectation
        let mut mix = Mixture::new();
        for n in [2u32, 4] {
            let e = evolve_exact(&SparseState::fock(&[n, 0, 0]), &hamiltonian_operator(1.0), t).unwrap();
            mix = mix.with(0.5, split_local_oscillator(&e, 0).unwrap());
        }
        let d = set.d_operator(1);
        let sq = mix.expectation(&d.product(&d)).unwrap();
        assert!((sq.re - fast.sq_d[1]).abs() < 1e-10 && sq.im.abs() < 1e-10);
    }
}

/// A pure coherent pump, evolved as one superposition across N sectors,
/// gives the same measured moments as the Poissonian mixture of Fock starts.
#[test]
fn coherent_superposition_equals_poisson_mixture() {
    let alpha = Complex64::new(1.2, 0.5);
    let n_cut = 10u32;
    let mut amps: Vec<(OccupationVector, Complex64)> = Vec::new();
    let mut fact = 1.0f64;
    for n in 0..=n_cut {
        if n > 0 {
            fact *= n as f64;
        }
        let a = (-alpha.norm_sqr() / 2.0).exp() * alpha.powu(n) / fact.sqrt();
        amps.push((OccupationVector::new(&[n, 0, 0]), a));
    }
    let start = SparseState::from_amplitudes(3, amps.clone()).unwrap().normalized().unwrap();
    let total: f64 = amps.iter().map(|(_, a)| a.norm_sqr()).sum();
    let weights: Vec<(usize, f64)> =
        amps.iter().enumerate().map(|(n, (_, a))| (n, a.norm_sqr() / total)).collect();
    let dist = NumberDistribution::custom(weights).unwrap();
    let set = MeasuredQuadratureSet::default();
    for t in [0.1, 0.4] {
        let evolved = evolve_exact(&start, &hamiltonian_operator(1.0), t).unwrap();
        let oracle = raw_moments_oracle(&split_local_oscillator(&evolved, 0).unwrap(), &set).unwrap();
        let fast = ensemble_raw_sweep(&dist, 1.0, &[t], &Default::default()).unwrap()[0];
        assert!(raw_gap(&fast, &oracle) < 1e-8, "t={t}: {}", raw_gap(&fast, &oracle));
    }
}

/// Truncated coherent state on one mode.
fn coherent(beta: Complex64, n_max: u32) -> SparseState {
    let mut fact = 1.0f64;
    let entries = (0..=n_max).map(|n| {
        if n > 0 {
            fact *= n as f64;
        }
        (
            OccupationVector::new(&[n]),
            (-beta.norm_sqr() / 2.0).exp() * beta.powu(n) / fact.sqrt(),
        )
    });
    let entries: Vec<_> = entries.collect();
    SparseState::from_amplitudes(1, entries).unwrap().normalized().unwrap()
}

/// With independent coherent LOs the measured `Var[X_1 +- X_2]` cannot drop
/// below `r_1 + r_2`, and the coherent-LO criteria hold for product signals.
#[test]
fn coherent_lo_floor_and_coherent_criteria() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let set = MeasuredQuadratureSet::default();
    let coherent_ids: Vec<CriterionId> =
        CriterionId::ALL.into_iter().filter(|c| c.assumes_coherent_lo()).collect();
    let lo1 = coherent(Complex64::new(1.4, 0.0), 22);
    let lo2 = coherent(Complex64::new(1.1, 0.0), 22);
    for case in 0..12 {
        // signals: an entangled pair state or a product of single-mode states
        let signal = if case % 2 == 0 {
            let entries: Vec<_> = (0..4u32)
                .map(|n| {
                    (
                        OccupationVector::new(&[n, n]),
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    )
                })
                .collect();
            SparseState::from_amplitudes(2, entries).unwrap().normalized().unwrap()
        } else {
            let one = |rng: &mut ChaCha8Rng| {
                let entries: Vec<_> = (0..3u32)
                    .map(|n| {
                        (
                            OccupationVector::new(&[n]),
                            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                        )
                    })
                    .collect();
                SparseState::from_amplitudes(1, entries).unwrap().normalized().unwrap()
            };
            one(&mut rng).tensor(&one(&mut rng))
        };
        // modes: b1, a1, a2, b2
        let psi = lo1.tensor(&signal).tensor(&lo2);
        let m = quadrature_moments(&psi, &set).unwrap();
        let floor = m.coherent_lo_floor();
        assert!(m.var_x_sum >= floor - 1e-8 && m.var_x_diff >= floor - 1e-8, "case {case}");
        if case % 2 == 1 {
            for e in evaluate(&m, &coherent_ids).entries {
                assert!(!e.defined || e.margin >= -1e-8, "{e:?}");
            }
        }
    }
}

#[test]
fn sweep_output_is_thread_count_independent() {
    let mut cfg = RunConfig::fock(30);
    cfg.kind = DistributionKind::Thermal;
    cfg.mean = 6.0;
    cfg.grid = TimeGrid::new(0.0, 0.4, 40).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_sweep(&cfg).unwrap().table().to_csv_string())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
}

#[test]
fn fast_and_oracle_agree_on_random_times() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set = MeasuredQuadratureSet::default();
    for n in [3usize, 8, 13] {
        let t: f64 = rng.random_range(0.0..1.0);
        let fast = fwmix::validate::fast_moments(n, 1.0, t).unwrap();
        let evolved =
            evolve_exact(&SparseState::fock(&[n as u32, 0, 0]), &hamiltonian_operator(1.0), t).unwrap();
        let oracle: QuadratureMoments =
            quadrature_moments(&split_local_oscillator(&evolved, 0).unwrap(), &set).unwrap();
        for (x, y) in fast.values().iter().zip(oracle.values()) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
