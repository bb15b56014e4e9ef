//! Self-check suite at small N: fast reduced-basis path against the generic
//! operator pipeline, plus the closed-form identities.

use num_complex::Complex64;
use serde::Serialize;

use crate::criteria::separability;
use crate::dynamics::{
    evolve, hamiltonian_operator, lift_to_sparse, mode_populations, ModelParams, ReducedState,
};
use crate::ensembles::{ensemble_raw_sweep, NumberDistribution};
use crate::error::{Error, Result};
use crate::fock::{evolve_exact, Mixture, SparseState};
use crate::homodyne::{
    commutator_closed_form, commutator_expectation, quadrature_moments, raw_moments_reduced,
    split_local_oscillator, MeasuredQuadratureSet, QuadratureMoments, DEFAULT_LO_FLOOR,
};

pub const MAX_VALIDATION_N: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen.
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &'static str, worst: f64, tolerance: f64) -> Self {
        Check {
            name,
            passed: worst <= tolerance,
            worst,
            tolerance,
        }
    }
}

/// Deterministic scatter of `count` times in `(0, span)`.
pub fn probe_times(count: usize, span: f64) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    (1..=count).map(|k| (k as f64 * GOLDEN).fract() * span).collect()
}

/// Moments through the generic pipeline: sparse Fock evolution, LO split,
/// operator expectations.
pub fn oracle_moments(n_total: usize, chi: f64, time: f64) -> Result<QuadratureMoments> {
    let start = SparseState::fock(&[n_total as u32, 0, 0]);
    let evolved = evolve_exact(&start, &hamiltonian_operator(chi), time)?;
    let split = split_local_oscillator(&evolved, 0)?;
    quadrature_moments(&split, &MeasuredQuadratureSet::default())
}

pub fn fast_moments(n_total: usize, chi: f64, time: f64) -> Result<QuadratureMoments> {
    let st = evolve(&ReducedState::fock(n_total), &ModelParams::new(chi, n_total)?, time)?;
    QuadratureMoments::from_raw(&raw_moments_reduced(&st), DEFAULT_LO_FLOOR)
}

fn max_field_gap(a: &QuadratureMoments, b: &QuadratureMoments) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs every check for `1 <= N <= max_n`.
pub fn run_validation(max_n: usize) -> Result<Vec<Check>> {
    if max_n == 0 || max_n > MAX_VALIDATION_N {
        return Err(Error::contract(format!(
            "validation runs at 1 <= N <= {MAX_VALIDATION_N}, got {max_n}"
        )));
    }
    let sizes: Vec<usize> = (1..=max_n).collect();
    let times = probe_times(10, 0.5);
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for &n in &sizes {
        let m = fast_moments(n, 1.0, 0.0)?;
        let e = separability(&m);
        worst = worst.max(e.margin.abs()).max((e.lhs - 4.0).abs());
    }
    checks.push(Check::new("boundary_at_t0", worst, 1e-9));

    let p = ModelParams::new(1.0, 2)?;
    let mut worst = 0.0f64;
    for k in 0..100 {
        let t = 0.02 * k as f64;
        let (_, n1, _) = mode_populations(&evolve(&ReducedState::fock(2), &p, t)?);
        worst = worst.max((n1 - (2f64.sqrt() * t).sin().powi(2)).abs());
    }
    checks.push(Check::new("two_boson_population", worst, 1e-10));

    let mut worst_eq = 0.0f64;
    let mut worst_cons = 0.0f64;
    let mut worst_comm = 0.0f64;
    let set = MeasuredQuadratureSet::default();
    for &n in &sizes {
        let params = ModelParams::new(1.0, n)?;
        for &t in &times {
            worst_eq = worst_eq.max(max_field_gap(&fast_moments(n, 1.0, t)?, &oracle_moments(n, 1.0, t)?));
            let st = evolve(&ReducedState::fock(n), &params, t)?;
            let (n0, n1, n2) = mode_populations(&st);
            worst_cons = worst_cons.max((n0 + n1 + n2 - n as f64).abs()).max((n1 - n2).abs());
            let split = split_local_oscillator(&lift_to_sparse(&st), 0)?;
            let direct = commutator_expectation(&split, &set)?;
            let closed = commutator_closed_form(&quadrature_moments(&split, &set)?);
            for j in 0..2 {
                worst_comm = worst_comm.max((direct[j] - closed[j]).norm());
            }
        }
    }
    checks.push(Check::new("oracle_equivalence", worst_eq, 1e-8));
    checks.push(Check::new("number_conservation", worst_cons, 1e-9));
    checks.push(Check::new("commutator_identity", worst_comm, 1e-8));

    // rank-2 mixture against the weighted operator oracle
    let small = max_n.min(4);
    let mix_n = [small.saturating_sub(2).max(1), small];
    let dist = NumberDistribution::custom(if mix_n[0] == mix_n[1] {
        vec![(mix_n[0], 1.0)]
    } else {
        vec![(mix_n[0], 0.5), (mix_n[1], 0.5)]
    })?;
    let mut worst = 0.0f64;
    for &t in &times[..3] {
        let raw = ensemble_raw_sweep(&dist, 1.0, &[t], &Default::default())?[0];
        let mut mixture = Mixture::new();
        for &(n, w) in dist.weights() {
            let evolved = evolve_exact(
                &SparseState::fock(&[n as u32, 0, 0]),
                &hamiltonian_operator(1.0),
                t,
            )?;
            mixture = mixture.with(w, split_local_oscillator(&evolved, 0)?);
        }
        let d = set.d_operator(0);
        let sq = mixture.expectation(&d.product(&d))?;
        let cross = mixture.expectation(&d.product(&set.d_operator(1)))?;
        worst = worst
            .max((sq - Complex64::new(raw.sq_d[0], 0.0)).norm())
            .max((cross - Complex64::new(raw.cross_d, 0.0)).norm());
    }
    checks.push(Check::new("mixture_oracle", worst, 1e-8));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_at_small_n() {
        let checks = run_validation(6).unwrap();
        assert_eq!(checks.len(), 6);
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(run_validation(0).is_err());
        assert!(run_validation(21).is_err());
    }
}
