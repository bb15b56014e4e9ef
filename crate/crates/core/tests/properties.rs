use fwmix::criteria::{evaluate, CriterionId};
use fwmix::fock::{
    apply_beam_splitter, inner_product, BeamSplitterSpec, LadderExpression, OccupationVector,
    OperatorSum, SparseState, SplitterConvention,
};
use fwmix::homodyne::{quadrature_moments, MeasuredQuadratureSet};
use num_complex::Complex64;
use proptest::prelude::*;

/// Random pure state on `modes` modes with at most `max_total` bosons.
fn state_strategy(modes: usize, max_total: u32) -> impl Strategy<Value = SparseState> {
    let occ = prop::collection::vec(0..=max_total, modes).prop_filter("total bound", move |v| {
        v.iter().sum::<u32>() <= max_total
    });
    prop::collection::vec((occ, -1.0..1.0f64, -1.0..1.0f64), 1..6).prop_filter_map(
        "nonzero norm",
        move |entries| {
            let s = SparseState::from_amplitudes(
                modes,
                entries
                    .into_iter()
                    .map(|(o, re, im)| (OccupationVector::new(&o), Complex64::new(re, im))),
            )
            .ok()?;
            if s.norm_sqr() < 1e-6 {
                return None;
            }
            s.normalized().ok()
        },
    )
}

fn arbitrary_lo_criteria() -> Vec<CriterionId> {
    CriterionId::ALL
        .into_iter()
        .filter(|c| {
            !c.assumes_coherent_lo()
                && !matches!(
                    c,
                    CriterionId::ClassicDuan | CriterionId::ClassicEprSum | CriterionId::ClassicReid
                )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_commutator(psi in state_strategy(2, 6), mode in 0usize..2) {
        let a = LadderExpression::identity().annihilate(mode);
        let ad = LadderExpression::identity().create(mode);
        let comm = OperatorSum::new().plus(a.clone()).commutator(&OperatorSum::new().plus(ad));
        let v = comm.expectation(&psi).unwrap();
        prop_assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn splitter_is_unitary_and_involutive(psi in state_strategy(3, 5), phase in 0.0..std::f64::consts::TAU, mix in 0.0..1.0f64) {
        let t = Complex64::new(mix.sqrt(), 0.0);
        let r = Complex64::from_polar((1.0 - mix).sqrt(), phase);
        let spec = BeamSplitterSpec::new(0, 2, t, r).unwrap();
        let out = apply_beam_splitter(&psi, &spec).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        // the default convention is its own inverse
        let back = apply_beam_splitter(&out, &spec).unwrap();
        let overlap = inner_product(&psi, &back).unwrap();
        prop_assert!((overlap - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        // the unitary convention is undone by its adjoint parameters
        let u = spec.with_convention(SplitterConvention::Unitary);
        let inv = BeamSplitterSpec::new(0, 2, t.conj(), -r).unwrap()
            .with_convention(SplitterConvention::Unitary);
        let round = apply_beam_splitter(&apply_beam_splitter(&psi, &u).unwrap(), &inv).unwrap();
        prop_assert!((inner_product(&psi, &round).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn pruning_never_drops_resolvable_weight(psi in state_strategy(2, 6), threshold in 1e-30..1e-14f64) {
        let pruned = psi.clone().with_prune_threshold(threshold);
        prop_assert!((pruned.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn product_states_never_violate(
        side1 in state_strategy(2, 6),
        side2 in state_strategy(2, 6),
    ) {
        // modes: (b1, a1) (a2, b2)
        let psi = side1.tensor(&side2);
        let set = MeasuredQuadratureSet::default();
        let Ok(m) = quadrature_moments(&psi, &set) else { return Ok(()); };
        let report = evaluate(&m, &arbitrary_lo_criteria());
        for e in &report.entries {
            prop_assert!(!e.defined || e.margin >= -1e-9, "{:?}", e);
        }
    }
}
