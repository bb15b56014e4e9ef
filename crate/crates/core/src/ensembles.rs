//! Initial pump states with number fluctuations.
//!
//! The Hamiltonian and every measured operator conserve total boson number,
//! so a state is handled block by block: each total number `N` evolves from
//! `|N, 0, 0>` on its own, raw moments are summed with weights `p_N`, and
//! only then divided by the ensemble LO population.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{MemoryBudget, ReducedState, Trajectory};
use crate::error::{Error, Result};
use crate::homodyne::{raw_moments_reduced, QuadratureMoments, RawMoments, DEFAULT_LO_FLOOR};

pub const DEFAULT_TRUNCATION: f64 = 1e-10;

/// Blocks lighter than this fraction of the heaviest block are skipped.
pub const RELATIVE_WEIGHT_CUTOFF: f64 = 1e-12;

/// Blocks evolved per parallel batch.
const BATCH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Fock,
    Poissonian,
    Thermal,
    CoherentPure,
    Custom,
}

impl DistributionKind {
    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::Fock => "fock",
            DistributionKind::Poissonian => "poissonian",
            DistributionKind::Thermal => "thermal",
            DistributionKind::CoherentPure => "coherent-pure",
            DistributionKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fock" => Ok(DistributionKind::Fock),
            "poissonian" | "poisson" => Ok(DistributionKind::Poissonian),
            "thermal" => Ok(DistributionKind::Thermal),
            "coherent-pure" | "coherent" => Ok(DistributionKind::CoherentPure),
            "custom" => Ok(DistributionKind::Custom),
            _ => Err(Error::config("kind", format!("unknown distribution `{s}`"))),
        }
    }
}

/// Weights `p_N` over total boson number, ascending in `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumberDistribution {
    kind: DistributionKind,
    mean: f64,
    weights: Vec<(usize, f64)>,
    /// Pure-state amplitudes, kept for `CoherentPure`.
    amplitudes: Option<Vec<(usize, Complex64)>>,
}

impl NumberDistribution {
    pub fn fock(n: usize) -> Self {
        NumberDistribution {
            kind: DistributionKind::Fock,
            mean: n as f64,
            weights: vec![(n, 1.0)],
            amplitudes: None,
        }
    }

    /// `p_N = e^(-mean) mean^N / N!`, up to the smallest `N_max` whose tail
    /// mass is below `truncation`.
    pub fn poissonian(mean: f64, truncation: f64) -> Result<Self> {
        check_mean(mean)?;
        check_truncation(truncation)?;
        let mut weights = Vec::new();
        let mut log_p = -mean;
        let mut cumulative = 0.0;
        for n in 0.. {
            if n > 0 {
                log_p += mean.ln() - (n as f64).ln();
            }
            let p = log_p.exp();
            weights.push((n, p));
            cumulative += p;
            if mean == 0.0 || (n as f64 > mean && 1.0 - cumulative < truncation) {
                break;
            }
        }
        Ok(NumberDistribution {
            kind: DistributionKind::Poissonian,
            mean,
            weights,
            amplitudes: None,
        })
    }

    /// `p_N = mean^N / (1 + mean)^(N+1)`; the tail past `N_max` is
    /// `q^(N_max + 1)` with `q = mean / (1 + mean)`.
    pub fn thermal(mean: f64, truncation: f64) -> Result<Self> {
        check_mean(mean)?;
        check_truncation(truncation)?;
        let q = mean / (1.0 + mean);
        let n_max = if mean == 0.0 {
            0
        } else {
            // smallest N with q^(N+1) < truncation
            let mut n = (truncation.ln() / q.ln() - 1.0).floor().max(0.0) as usize;
            while q.powi(n as i32 + 1) >= truncation {
                n += 1;
            }
            while n > 0 && q.powi(n as i32) < truncation {
                n -= 1;
            }
            n
        };
        let weights = (0..=n_max)
            .map(|n| (n, q.powi(n as i32) / (1.0 + mean)))
            .collect();
        Ok(NumberDistribution {
            kind: DistributionKind::Thermal,
            mean,
            weights,
            amplitudes: None,
        })
    }

    /// The coherent state `|alpha>` in the pump mode.
    pub fn coherent(alpha: Complex64, truncation: f64) -> Result<Self> {
        let poisson = Self::poissonian(alpha.norm_sqr(), truncation)?;
        let amplitudes = poisson
            .weights
            .iter()
            .map(|&(n, p)| (n, Complex64::from_polar(p.sqrt(), alpha.arg() * n as f64)))
            .collect();
        Ok(NumberDistribution {
            kind: DistributionKind::CoherentPure,
            amplitudes: Some(amplitudes),
            ..poisson
        })
    }

    /// User-supplied weights; must be non-negative and sum to 1 within 1e-9.
    pub fn custom(mut weights: Vec<(usize, f64)>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("weights", "empty weight table"));
        }
        if weights.iter().any(|&(_, p)| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::config("weights", "weights must be finite and non-negative"));
        }
        weights.sort_by_key(|&(n, _)| n);
        if weights.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::config("weights", "repeated total number"));
        }
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config("weights", format!("weights sum to {total}, not 1")));
        }
        let mean = weights.iter().map(|&(n, p)| n as f64 * p).sum();
        Ok(NumberDistribution {
            kind: DistributionKind::Custom,
            mean,
            weights,
            amplitudes: None,
        })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// The nominal mean (N itself for a Fock state).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn weights(&self) -> &[(usize, f64)] {
        &self.weights
    }

    pub fn amplitudes(&self) -> Option<&[(usize, Complex64)]> {
        self.amplitudes.as_deref()
    }

    pub fn n_max(&self) -> usize {
        self.weights.last().map_or(0, |w| w.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.1).sum()
    }

    /// Blocks that survive the relative cutoff, with weights renormalized
    /// to sum to one.
    pub fn active_blocks(&self) -> Vec<(usize, f64)> {
        let max = self.weights.iter().map(|w| w.1).fold(0.0, f64::max);
        let kept: Vec<(usize, f64)> = self
            .weights
            .iter()
            .copied()
            .filter(|&(_, p)| p > 0.0 && p >= RELATIVE_WEIGHT_CUTOFF * max)
            .collect();
        let total: f64 = kept.iter().map(|w| w.1).sum();
        kept.into_iter().map(|(n, p)| (n, p / total)).collect()
    }
}

/// Dispatches on `kind`. For `Fock` the mean must be a non-negative integer.
/// `CoherentPure` takes a real amplitude `sqrt(mean)`.
pub fn build_distribution(
    kind: DistributionKind,
    mean: f64,
    truncation: f64,
) -> Result<NumberDistribution> {
    match kind {
        DistributionKind::Fock => {
            check_mean(mean)?;
            if mean.fract() != 0.0 {
                return Err(Error::config("mean", "a Fock state needs an integer N"));
            }
            Ok(NumberDistribution::fock(mean as usize))
        }
        DistributionKind::Poissonian => NumberDistribution::poissonian(mean, truncation),
        DistributionKind::Thermal => NumberDistribution::thermal(mean, truncation),
        DistributionKind::CoherentPure => {
            check_mean(mean)?;
            NumberDistribution::coherent(Complex64::new(mean.sqrt(), 0.0), truncation)
        }
        DistributionKind::Custom => Err(Error::config(
            "kind",
            "custom distributions need an explicit weight table",
        )),
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::config("mean", format!("must be finite and >= 0, got {mean}")));
    }
    Ok(())
}

fn check_truncation(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::config("truncation", format!("must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Raw moments of every block at one time, with the weight used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMomentTable {
    pub blocks: Vec<(usize, f64, RawMoments)>,
}

impl RawMomentTable {
    /// Weighted sum in ascending `N`.
    pub fn combine(&self) -> RawMoments {
        self.blocks
            .iter()
            .fold(RawMoments::default(), |acc, (_, p, raw)| acc.add_weighted(*p, raw))
    }
}

/// Raw moments of `|N, 0, 0>` evolved to each of `times`.
pub fn block_raw_moments(
    n_total: usize,
    chi: f64,
    times: &[f64],
    budget: &MemoryBudget,
) -> Result<Vec<RawMoments>> {
    let trajectory = Trajectory::for_state(chi, &ReducedState::fock(n_total), budget)?;
    Ok(times
        .par_iter()
        .map(|&t| raw_moments_reduced(&trajectory.at(t)))
        .collect())
}

pub fn raw_moment_table(
    dist: &NumberDistribution,
    chi: f64,
    time: f64,
    budget: &MemoryBudget,
) -> Result<RawMomentTable> {
    let blocks = dist
        .active_blocks()
        .into_par_iter()
        .map(|(n, p)| Ok((n, p, block_raw_moments(n, chi, &[time], budget)?[0])))
        .collect::<Result<Vec<_>>>()?;
    Ok(RawMomentTable { blocks })
}

/// Weighted raw moments of the ensemble at every time. Blocks are evolved in
/// parallel batches but always summed in ascending `N`, so the result does
/// not depend on the thread count.
pub fn ensemble_raw_sweep(
    dist: &NumberDistribution,
    chi: f64,
    times: &[f64],
    budget: &MemoryBudget,
) -> Result<Vec<RawMoments>> {
    let blocks = dist.active_blocks();
    let mut acc = vec![RawMoments::default(); times.len()];
    for batch in blocks.chunks(BATCH) {
        let results = batch
            .par_iter()
            .map(|&(n, _)| block_raw_moments(n, chi, times, budget))
            .collect::<Result<Vec<_>>>()?;
        for ((_, p), per_time) in batch.iter().zip(&results) {
            for (a, raw) in acc.iter_mut().zip(per_time) {
                *a = a.add_weighted(*p, raw);
            }
        }
    }
    Ok(acc)
}

pub fn ensemble_moments(
    dist: &NumberDistribution,
    chi: f64,
    time: f64,
) -> Result<QuadratureMoments> {
    let raw = ensemble_raw_sweep(dist, chi, &[time], &MemoryBudget::default())?;
    QuadratureMoments::from_raw(&raw[0], DEFAULT_LO_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_weights_and_cut() {
        let d = NumberDistribution::thermal(100.0, 1e-10).unwrap();
        assert!((d.weights()[0].1 - 1.0 / 101.0).abs() < 1e-15);
        let q: f64 = 100.0 / 101.0;
        let n_max = d.n_max();
        assert!(q.powi(n_max as i32 + 1) < 1e-10);
        assert!(q.powi(n_max as i32) >= 1e-10);
        assert!(d.total_weight() > 1.0 - 1e-10 && d.total_weight() <= 1.0 + 1e-15);
    }

    #[test]
    fn poisson_mean_survives_truncation() {
        let d = NumberDistribution::poissonian(100.0, 1e-10).unwrap();
        // the weights the ensemble actually uses, renormalized after the cut
        let mean: f64 = d.active_blocks().iter().map(|&(n, p)| n as f64 * p).sum();
        assert!((mean - 100.0).abs() < 1e-8);
        let total = d.total_weight();
        assert!(total > 1.0 - 1e-10 && total <= 1.0 + 1e-12);
        // the recursion p_N = p_(N-1) mean / N
        for w in d.weights().windows(2) {
            let ratio = w[1].1 / w[0].1;
            assert!((ratio - 100.0 / w[1].0 as f64).abs() < 1e-9 * ratio);
        }
    }

    #[test]
    fn fock_needs_integer() {
        assert!(build_distribution(DistributionKind::Fock, 3.5, 1e-10).is_err());
        let d = build_distribution(DistributionKind::Fock, 4.0, 1e-10).unwrap();
        assert_eq!(d.weights(), &[(4, 1.0)]);
    }

    #[test]
    fn custom_table_is_validated() {
        assert!(NumberDistribution::custom(vec![(2, 0.5), (4, 0.4)]).is_err());
        assert!(NumberDistribution::custom(vec![(2, 0.5), (2, 0.5)]).is_err());
        let d = NumberDistribution::custom(vec![(4, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(d.weights()[0].0, 2);
        assert_eq!(d.mean(), 3.0);
    }

    #[test]
    fn order_of_blocks_does_not_matter() {
        let d = NumberDistribution::poissonian(6.0, 1e-10).unwrap();
        let times = [0.0, 0.05, 0.2];
        let budget = MemoryBudget::default();
        let forward = ensemble_raw_sweep(&d, 1.0, &times, &budget).unwrap();
        let mut reversed = vec![RawMoments::default(); times.len()];
        for &(n, p) in d.active_blocks().iter().rev() {
            let per = block_raw_moments(n, 1.0, &times, &budget).unwrap();
            for (a, r) in reversed.iter_mut().zip(&per) {
                *a = a.add_weighted(p, r);
            }
        }
        for (a, b) in forward.iter().zip(&reversed) {
            assert!((a.cross_d - b.cross_d).abs() < 1e-12 * (1.0 + a.cross_d.abs()));
            assert!((a.sq_d[0] - b.sq_d[0]).abs() < 1e-12 * (1.0 + a.sq_d[0].abs()));
        }
    }
}
