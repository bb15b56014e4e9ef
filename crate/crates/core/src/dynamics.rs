//! Exact evolution of the degenerate four-wave-mixing Hamiltonian
//! `H = i chi (a0^2 a1^dag a2^dag - a0^dag^2 a1 a2)` inside one total-number
//! block, on the symmetric basis `|N-2m, m, m>`.
//!
//! In that basis `<m+1|H|m> = i chi g_m`. Writing `c_m = i^m d_m` turns the
//! generator into the real symmetric tridiagonal matrix `chi T` with zero
//! diagonal and off-diagonal `g_m`, which is diagonalized once and reused for
//! every time point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{LadderExpression, OccupationVector, OperatorSum, SparseState};
use crate::tridiag;

/// Expansion weights at or below this magnitude are skipped when
/// synthesizing a trajectory.
pub const WEIGHT_CUTOFF: f64 = 1e-15;

/// Tolerance on `sum |c_m|^2 = 1` for states handed to the evolution.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub chi: f64,
    pub n_total: usize,
}

impl ModelParams {
    pub fn new(chi: f64, n_total: usize) -> Result<Self> {
        if !(chi.is_finite() && chi > 0.0) {
            return Err(Error::config("chi", format!("must be positive, got {chi}")));
        }
        Ok(ModelParams { chi, n_total })
    }
}

/// Basis index `m` runs over `0..=N/2`.
pub fn reduced_dimension(n_total: usize) -> usize {
    n_total / 2 + 1
}

/// Occupations `(N-2m, m, m)`.
pub fn basis_occupation(n_total: usize, m: usize) -> [u32; 3] {
    [(n_total - 2 * m) as u32, m as u32, m as u32]
}

/// Coefficients `c_m` over `|N-2m, m, m>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    n_total: usize,
    coeffs: Vec<Complex64>,
}

impl ReducedState {
    pub fn new(n_total: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let dim = reduced_dimension(n_total);
        if coeffs.len() != dim {
            return Err(Error::contract(format!(
                "N = {n_total} needs {dim} coefficients, got {}",
                coeffs.len()
            )));
        }
        let state = ReducedState { n_total, coeffs };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::contract(format!(
                "reduced state not normalized: |c|^2 = {norm}"
            )));
        }
        Ok(state)
    }

    /// `|N, 0, 0>`.
    pub fn fock(n_total: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); reduced_dimension(n_total)];
        coeffs[0] = Complex64::new(1.0, 0.0);
        ReducedState { n_total, coeffs }
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probabilities `|c_m|^2`.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.coeffs.iter().map(|c| c.norm_sqr())
    }
}

/// Off-diagonal couplings `g_m = (m+1) sqrt((N-2m)(N-2m-1))` in units of chi.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalHamiltonian {
    n_total: usize,
    couplings: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn new(n_total: usize) -> Self {
        let couplings = (0..n_total / 2)
            .map(|m| coupling(n_total, m))
            .collect();
        TridiagonalHamiltonian { n_total, couplings }
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn dimension(&self) -> usize {
        self.couplings.len() + 1
    }

    /// `<row|H|col> / chi` in the original (complex) basis.
    pub fn matrix_element(&self, row: usize, col: usize) -> Complex64 {
        if row == col + 1 {
            Complex64::new(0.0, self.couplings[col])
        } else if col == row + 1 {
            Complex64::new(0.0, -self.couplings[row])
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

pub fn coupling(n_total: usize, m: usize) -> f64 {
    let k = (n_total - 2 * m) as f64;
    (m as f64 + 1.0) * (k * (k - 1.0)).sqrt()
}

pub fn build_hamiltonian(params: &ModelParams) -> TridiagonalHamiltonian {
    TridiagonalHamiltonian::new(params.n_total)
}

/// The four-wave-mixing Hamiltonian as a ladder-operator sum over modes 0..3.
pub fn hamiltonian_operator(chi: f64) -> OperatorSum {
    let gain = LadderExpression::identity()
        .create(1)
        .create(2)
        .annihilate(0)
        .annihilate(0)
        .scaled(Complex64::new(0.0, chi));
    OperatorSum::new().plus(gain.adjoint()).plus(gain)
}

/// Cap on the eigenvector workspace of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryBudget {
    pub max_bytes: usize,
}

impl Default for MemoryBudget {
    /// 1 GiB, enough for N of about 2e4.
    fn default() -> Self {
        MemoryBudget { max_bytes: 1 << 30 }
    }
}

impl MemoryBudget {
    pub fn check(&self, dimension: usize) -> Result<()> {
        let required = dimension
            .saturating_mul(dimension)
            .saturating_mul(std::mem::size_of::<f64>());
        if required > self.max_bytes {
            return Err(Error::ResourceLimit {
                dimension,
                required_bytes: required,
                budget_bytes: self.max_bytes,
            });
        }
        Ok(())
    }
}

/// Spectral mass of the initial state allowed outside the computed window.
pub const SPECTRAL_TAIL: f64 = 1e-26;

/// Eigenpairs of the real gauge matrix `T` (units of chi), independent of chi.
///
/// `T` has zero diagonal, so its spectrum comes in pairs `+-lambda` whose
/// eigenvectors differ by the sign flip `v_m -> (-1)^m v_m`. Only the
/// non-negative half is stored. A spectrum may be restricted to
/// `|lambda| <= window`.
#[derive(Debug)]
pub struct Spectrum {
    n_total: usize,
    window: f64,
    zero: Option<Vec<f64>>,
    positive: Vec<(f64, Vec<f64>)>,
}

impl Spectrum {
    pub fn new(hamiltonian: &TridiagonalHamiltonian, budget: &MemoryBudget) -> Result<Self> {
        Self::windowed(hamiltonian, budget, f64::INFINITY)
    }

    /// Keeps only eigenpairs with `|lambda| <= window`.
    pub fn windowed(
        hamiltonian: &TridiagonalHamiltonian,
        budget: &MemoryBudget,
        window: f64,
    ) -> Result<Self> {
        let n = hamiltonian.dimension();
        let off = hamiltonian.couplings();
        let diag = vec![0.0; n];
        let half = n / 2;
        let norm = tridiag::one_norm(&diag, off);
        let zero = (n % 2 == 1).then(|| {
            tridiag::eigenvectors(&diag, off, &[0.0])
                .pop()
                .expect("one vector requested")
        });
        let (positive_values, vectors) = if window.is_finite() && window < 0.2 * norm {
            // the zero eigenvalue of odd blocks sits exactly at 0; start the
            // search just above its rounding error
            let floor = 64.0 * f64::EPSILON * norm;
            let rough = tridiag::eigenvalues_in(&diag, off, floor, window, 1e-9);
            budget.check_vectors(rough.len() + n % 2, n)?;
            let vectors = tridiag::eigenvectors(&diag, off, &rough);
            let values = vectors
                .iter()
                .map(|v| tridiag::rayleigh_quotient(&diag, off, v))
                .collect::<Vec<_>>();
            (values, vectors)
        } else {
            let all = tridiag::eigenvalues(&diag, off);
            let values: Vec<f64> = (0..half)
                .map(|j| 0.5 * (all[n - half + j] - all[half - 1 - j]))
                .filter(|l| *l <= window)
                .collect();
            budget.check_vectors(values.len() + n % 2, n)?;
            let vectors = tridiag::eigenvectors(&diag, off, &values);
            (values, vectors)
        };
        Ok(Spectrum {
            n_total: hamiltonian.n_total(),
            window: if positive_values.len() == half {
                f64::INFINITY
            } else {
                window
            },
            zero,
            positive: positive_values.into_iter().zip(vectors).collect(),
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Largest `|lambda|` guaranteed to be present.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// Stored eigenvalues of `H / chi`, ascending, including mirrored negatives.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.positive.iter().rev().map(|(l, _)| -l).collect();
        if self.zero.is_some() {
            out.push(0.0);
        }
        out.extend(self.positive.iter().map(|(l, _)| *l));
        out
    }

    /// Eigenpairs with `lambda >= 0`; the partner of `(lambda, v)` is
    /// `(-lambda, (-1)^m v_m)`.
    pub fn nonnegative_pairs(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.zero
            .iter()
            .map(|v| (0.0, v.as_slice()))
            .chain(self.positive.iter().map(|(l, v)| (*l, v.as_slice())))
    }
}

impl MemoryBudget {
    fn check_vectors(&self, count: usize, dimension: usize) -> Result<()> {
        let required = count
            .saturating_mul(dimension)
            .saturating_mul(std::mem::size_of::<f64>());
        if required > self.max_bytes {
            return Err(Error::ResourceLimit {
                dimension,
                required_bytes: required,
                budget_bytes: self.max_bytes,
            });
        }
        Ok(())
    }
}

/// Smallest `L` such that the spectral mass of `d` (unit norm) at
/// `|lambda| > L` is provably below `tail`, from
/// `mass <= ||T^p d||^2 / L^(2p)`.
pub fn spectral_window(couplings: &[f64], d: &[Complex64], tail: f64) -> f64 {
    const MAX_POWER: usize = 400;
    let n = d.len();
    let mut x = d.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut log_norm = 0.0;
    let mut best = f64::INFINITY;
    for p in 1..=MAX_POWER {
        for m in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            if m > 0 {
                acc += x[m - 1] * couplings[m - 1];
            }
            if m + 1 < n {
                acc += x[m + 1] * couplings[m];
            }
            next[m] = acc;
        }
        let s = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if s == 0.0 {
            return 0.0;
        }
        log_norm += s.ln();
        next.iter_mut().for_each(|z| *z /= s);
        std::mem::swap(&mut x, &mut next);
        let bound = ((2.0 * log_norm - tail.ln()) / (2.0 * p as f64)).exp();
        best = best.min(bound);
    }
    best
}

/// Expansion of one initial state over the eigenvectors, ready to be
/// evaluated at any time.
#[derive(Clone, Debug)]
pub struct Trajectory {
    n_total: usize,
    chi: f64,
    // (lambda, weight on v, weight on the mirrored partner, v)
    pairs: Vec<(f64, Complex64, Complex64, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(spectrum: &Spectrum, chi: f64, initial: &ReducedState) -> Result<Self> {
        if initial.n_total() != spectrum.n_total() {
            return Err(Error::contract(format!(
                "state has N = {}, spectrum has N = {}",
                initial.n_total(),
                spectrum.n_total()
            )));
        }
        if (initial.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::contract("initial state not normalized"));
        }
        let d = gauge_in(initial);
        if spectrum.window().is_finite() {
            let couplings = TridiagonalHamiltonian::new(initial.n_total()).couplings;
            let needed = spectral_window(&couplings, &d, SPECTRAL_TAIL);
            if needed > spectrum.window() {
                return Err(Error::contract(format!(
                    "spectrum covers |lambda| <= {}, state needs {needed}",
                    spectrum.window()
                )));
            }
        }
        let mut pairs = Vec::new();
        for (lambda, v) in spectrum.nonnegative_pairs() {
            let (mut even, mut odd) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (m, (vm, dm)) in v.iter().zip(&d).enumerate() {
                if m % 2 == 0 {
                    even += dm * vm;
                } else {
                    odd += dm * vm;
                }
            }
            let (plus, minus) = if lambda == 0.0 {
                (even + odd, Complex64::new(0.0, 0.0))
            } else {
                (even + odd, even - odd)
            };
            if plus.norm() > WEIGHT_CUTOFF || minus.norm() > WEIGHT_CUTOFF {
                pairs.push((lambda, plus, minus, v.to_vec()));
            }
        }
        Ok(Trajectory {
            n_total: initial.n_total(),
            chi,
            pairs,
        })
    }

    /// Diagonalizes only as much of the spectrum as `initial` needs.
    pub fn for_state(chi: f64, initial: &ReducedState, budget: &MemoryBudget) -> Result<Self> {
        let h = TridiagonalHamiltonian::new(initial.n_total());
        let window = spectral_window(h.couplings(), &gauge_in(initial), SPECTRAL_TAIL);
        let spectrum = Spectrum::windowed(&h, budget, window)?;
        Self::new(&spectrum, chi, initial)
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Number of `+-lambda` pairs carrying weight.
    pub fn retained(&self) -> usize {
        self.pairs.len()
    }

    pub fn at(&self, time: f64) -> ReducedState {
        let dim = reduced_dimension(self.n_total);
        let mut d = vec![Complex64::new(0.0, 0.0); dim];
        for (lambda, plus, minus, v) in &self.pairs {
            let phase = Complex64::from_polar(1.0, -lambda * self.chi * time);
            let a = plus * phase;
            let b = minus * phase.conj();
            let (even, odd) = (a + b, a - b);
            for (m, (dm, vm)) in d.iter_mut().zip(v).enumerate() {
                *dm += if m % 2 == 0 { even } else { odd } * vm;
            }
        }
        let coeffs = d
            .into_iter()
            .enumerate()
            .map(|(m, dm)| dm * i_pow(m))
            .collect();
        ReducedState {
            n_total: self.n_total,
            coeffs,
        }
    }
}

/// `d_m = (-i)^m c_m`.
fn gauge_in(state: &ReducedState) -> Vec<Complex64> {
    state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| c * i_pow(m).conj())
        .collect()
}

fn i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `exp(-i H t)|initial>`.
pub fn evolve(initial: &ReducedState, params: &ModelParams, time: f64) -> Result<ReducedState> {
    if initial.n_total() != params.n_total {
        return Err(Error::contract("state and parameters disagree on N"));
    }
    Ok(Trajectory::for_state(params.chi, initial, &MemoryBudget::default())?.at(time))
}

/// `(n0, n1, n2)`.
pub fn mode_populations(state: &ReducedState) -> (f64, f64, f64) {
    let n = state.n_total() as f64;
    let pairs: f64 = state
        .probabilities()
        .enumerate()
        .map(|(m, p)| p * m as f64)
        .sum();
    (n - 2.0 * pairs, pairs, pairs)
}

pub fn lift_to_sparse(state: &ReducedState) -> SparseState {
    let n = state.n_total();
    SparseState::from_amplitudes(
        3,
        state
            .coeffs()
            .iter()
            .enumerate()
            .map(|(m, c)| (OccupationVector::new(&basis_occupation(n, m)), *c)),
    )
    .expect("basis kets have three modes")
}

/// Reads the reduced coefficients of a 3-mode state back out. Fails if more
/// than `1e-9` of the norm lies outside the block.
pub fn project_from_sparse(state: &SparseState, n_total: usize) -> Result<ReducedState> {
    if state.mode_count() != 3 {
        return Err(Error::ModeCountMismatch {
            left: state.mode_count(),
            right: 3,
        });
    }
    let coeffs: Vec<Complex64> = (0..reduced_dimension(n_total))
        .map(|m| state.amplitude(&basis_occupation(n_total, m)))
        .collect();
    let inside: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (state.norm_sqr() - inside).abs() > NORM_TOLERANCE {
        return Err(Error::contract(format!(
            "state has weight {} outside the N = {n_total} symmetric block",
            state.norm_sqr() - inside
        )));
    }
    Ok(ReducedState { n_total, coeffs })
}
