//! Sparse multimode Fock-space engine.
//!
//! States are maps from occupation vectors to complex amplitudes. Operators
//! are strings of creation/annihilation factors ([`LadderExpression`]) or sums
//! of such strings ([`OperatorSum`]). Everything here works from the bare
//! matrix elements `a|n> = sqrt(n)|n-1>` and `a^dag|n> = sqrt(n+1)|n+1>`, so
//! the rest of the crate can use it as a brute-force reference.

use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::BuildHasherDefault;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Amplitudes at or below this magnitude are dropped from sparse states.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

/// Tolerance on `|t|^2 + |r|^2 = 1` for beam-splitter specs.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Fixed-key hasher: iteration order only depends on the insertion sequence,
// which keeps every reduction over a state reproducible from run to run.
type AmplitudeMap = HashMap<OccupationVector, Complex64, BuildHasherDefault<DefaultHasher>>;

/// Boson counts per mode labelling one Fock basis ket.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(SmallVec<[u32; 4]>);

impl OccupationVector {
    pub fn new(counts: &[u32]) -> Self {
        OccupationVector(SmallVec::from_slice(counts))
    }

    pub fn vacuum(modes: usize) -> Self {
        OccupationVector(SmallVec::from_elem(0, modes))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    fn set(&mut self, mode: usize, n: u32) {
        self.0[mode] = n;
    }
}

impl fmt::Debug for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

impl From<&[u32]> for OccupationVector {
    fn from(counts: &[u32]) -> Self {
        OccupationVector::new(counts)
    }
}

/// A pure state over a fixed number of bosonic modes.
#[derive(Clone, Debug)]
pub struct SparseState {
    modes: usize,
    amplitudes: AmplitudeMap,
    prune_threshold: f64,
}

impl SparseState {
    /// The zero vector.
    pub fn zero(modes: usize) -> Self {
        SparseState {
            modes,
            amplitudes: AmplitudeMap::default(),
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::fock(&vec![0; modes])
    }

    pub fn fock(counts: &[u32]) -> Self {
        let mut state = Self::zero(counts.len());
        state
            .amplitudes
            .insert(OccupationVector::new(counts), Complex64::new(1.0, 0.0));
        state
    }

    /// Builds a state from `(occupation, amplitude)` pairs. Repeated
    /// occupations accumulate.
    pub fn from_amplitudes<I, K>(modes: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, Complex64)>,
        K: Into<OccupationVector>,
    {
        let mut state = Self::zero(modes);
        for (key, amp) in entries {
            let key = key.into();
            if key.len() != modes {
                return Err(Error::ModeCountMismatch {
                    left: key.len(),
                    right: modes,
                });
            }
            state.accumulate(key, amp);
        }
        state.prune();
        Ok(state)
    }

    /// Returns a copy using `threshold` for pruning, re-pruning the current
    /// amplitudes.
    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        assert!(threshold >= 0.0, "prune threshold must be non-negative");
        self.prune_threshold = threshold;
        self.prune();
        self
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    /// Number of stored kets.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, counts: &[u32]) -> Complex64 {
        self.amplitudes
            .get(&OccupationVector::new(counts))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Entries sorted by occupation, for display and stable comparisons.
    pub fn sorted_entries(&self) -> Vec<(OccupationVector, Complex64)> {
        let mut entries: Vec<_> = self
            .amplitudes
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::contract("cannot normalize the zero vector"));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = Self::zero(self.modes);
        out.prune_threshold = self.prune_threshold;
        for (k, a) in &self.amplitudes {
            out.accumulate(k.clone(), a * factor);
        }
        out.prune();
        out
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &SparseState, factor: Complex64) -> Result<Self> {
        check_modes(self.modes, other.modes)?;
        let mut out = self.clone();
        for (k, a) in &other.amplitudes {
            out.accumulate(k.clone(), a * factor);
        }
        out.prune();
        Ok(out)
    }

    /// Appends one mode in the vacuum state.
    pub fn append_vacuum_mode(&self) -> Self {
        let mut out = Self::zero(self.modes + 1);
        out.prune_threshold = self.prune_threshold;
        for (k, a) in &self.amplitudes {
            let mut key = k.0.clone();
            key.push(0);
            out.amplitudes.insert(OccupationVector(key), *a);
        }
        out
    }

    /// Tensor product `self ⊗ other`; the modes of `other` follow those of `self`.
    pub fn tensor(&self, other: &SparseState) -> Self {
        let mut out = Self::zero(self.modes + other.modes);
        out.prune_threshold = self.prune_threshold.min(other.prune_threshold);
        for (ka, a) in self.sorted_entries() {
            for (kb, b) in other.sorted_entries() {
                let mut key = ka.0.clone();
                key.extend_from_slice(&kb.0);
                out.accumulate(OccupationVector(key), a * b);
            }
        }
        out.prune();
        out
    }

    fn accumulate(&mut self, key: OccupationVector, amp: Complex64) {
        match self.amplitudes.entry(key) {
            Entry::Occupied(mut e) => *e.get_mut() += amp,
            Entry::Vacant(e) => {
                e.insert(amp);
            }
        }
    }

    fn prune(&mut self) {
        let th = self.prune_threshold;
        self.amplitudes.retain(|_, a| a.norm() > th);
    }
}

fn check_modes(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::ModeCountMismatch { left, right });
    }
    Ok(())
}

/// `<a|b>`.
pub fn inner_product(a: &SparseState, b: &SparseState) -> Result<Complex64> {
    check_modes(a.modes, b.modes)?;
    let mut sum = ZERO;
    if a.len() <= b.len() {
        for (k, x) in &a.amplitudes {
            if let Some(y) = b.amplitudes.get(k) {
                sum += x.conj() * y;
            }
        }
    } else {
        for (k, y) in &b.amplitudes {
            if let Some(x) = a.amplitudes.get(k) {
                sum += x.conj() * y;
            }
        }
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// A scalar times an ordered product of ladder operators, written left to
/// right and applied right to left.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderExpression {
    factors: Vec<(usize, Ladder)>,
    prefactor: Complex64,
}

impl Default for LadderExpression {
    fn default() -> Self {
        Self::identity()
    }
}

impl LadderExpression {
    pub fn identity() -> Self {
        LadderExpression {
            factors: Vec::new(),
            prefactor: Complex64::new(1.0, 0.0),
        }
    }

    /// Appends `a_mode^dag` on the right.
    pub fn create(mut self, mode: usize) -> Self {
        self.factors.push((mode, Ladder::Create));
        self
    }

    /// Appends `a_mode` on the right.
    pub fn annihilate(mut self, mode: usize) -> Self {
        self.factors.push((mode, Ladder::Annihilate));
        self
    }

    /// `a_mode^dag a_mode`.
    pub fn number(mode: usize) -> Self {
        Self::identity().create(mode).annihilate(mode)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.prefactor *= factor;
        self
    }

    pub fn factors(&self) -> &[(usize, Ladder)] {
        &self.factors
    }

    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    /// Operator product `self * other`.
    pub fn product(&self, other: &LadderExpression) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        LadderExpression {
            factors,
            prefactor: self.prefactor * other.prefactor,
        }
    }

    pub fn adjoint(&self) -> Self {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|&(m, kind)| {
                let flipped = match kind {
                    Ladder::Create => Ladder::Annihilate,
                    Ladder::Annihilate => Ladder::Create,
                };
                (m, flipped)
            })
            .collect();
        LadderExpression {
            factors,
            prefactor: self.prefactor.conj(),
        }
    }

    fn check_modes(&self, modes: usize) -> Result<()> {
        for &(m, _) in &self.factors {
            if m >= modes {
                return Err(Error::ModeOutOfRange { index: m, modes });
            }
        }
        Ok(())
    }

    /// Image of a single basis ket: every ladder string maps a Fock ket to
    /// at most one Fock ket.
    fn act_on(&self, ket: &OccupationVector) -> Option<(OccupationVector, f64)> {
        let mut out = ket.clone();
        let mut coef = 1.0;
        for &(m, kind) in self.factors.iter().rev() {
            let n = out.get(m);
            match kind {
                Ladder::Annihilate => {
                    if n == 0 {
                        return None;
                    }
                    coef *= (n as f64).sqrt();
                    out.set(m, n - 1);
                }
                Ladder::Create => {
                    coef *= (n as f64 + 1.0).sqrt();
                    out.set(m, n + 1);
                }
            }
        }
        Some((out, coef))
    }
}

impl fmt::Display for LadderExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.prefactor)?;
        for &(m, kind) in &self.factors {
            match kind {
                Ladder::Create => write!(f, " a{m}^dag")?,
                Ladder::Annihilate => write!(f, " a{m}")?,
            }
        }
        Ok(())
    }
}

/// `expr |state>`, not normalized.
pub fn apply_ladder(state: &SparseState, expr: &LadderExpression) -> Result<SparseState> {
    expr.check_modes(state.modes)?;
    let mut out = SparseState::zero(state.modes);
    out.prune_threshold = state.prune_threshold;
    for (ket, amp) in &state.amplitudes {
        if let Some((target, coef)) = expr.act_on(ket) {
            out.accumulate(target, amp * coef * expr.prefactor);
        }
    }
    out.prune();
    Ok(out)
}

/// `<state| expr |state>`. Non-Hermitian expressions return the raw complex
/// value.
pub fn expectation(state: &SparseState, expr: &LadderExpression) -> Result<Complex64> {
    expr.check_modes(state.modes)?;
    let mut sum = ZERO;
    for (ket, amp) in &state.amplitudes {
        if let Some((target, coef)) = expr.act_on(ket) {
            if let Some(bra) = state.amplitudes.get(&target) {
                sum += bra.conj() * amp * coef;
            }
        }
    }
    Ok(sum * expr.prefactor)
}

/// A sum of ladder strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorSum {
    terms: Vec<LadderExpression>,
}

impl OperatorSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<LadderExpression>) -> Self {
        OperatorSum { terms }
    }

    pub fn plus(mut self, term: LadderExpression) -> Self {
        self.terms.push(term);
        self
    }

    pub fn terms(&self) -> &[LadderExpression] {
        &self.terms
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        OperatorSum {
            terms: self.terms.iter().map(|t| t.clone().scaled(factor)).collect(),
        }
    }

    pub fn sum(&self, other: &OperatorSum) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        OperatorSum { terms }
    }

    /// Distributes `self * other` into a flat sum of strings.
    pub fn product(&self, other: &OperatorSum) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.product(b));
            }
        }
        OperatorSum { terms }
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &OperatorSum) -> Self {
        self.product(other)
            .sum(&other.product(self).scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        OperatorSum {
            terms: self.terms.iter().map(LadderExpression::adjoint).collect(),
        }
    }

    pub fn apply(&self, state: &SparseState) -> Result<SparseState> {
        let mut out = SparseState::zero(state.modes);
        out.prune_threshold = state.prune_threshold;
        for term in &self.terms {
            term.check_modes(state.modes)?;
            for (ket, amp) in &state.amplitudes {
                if let Some((target, coef)) = term.act_on(ket) {
                    out.accumulate(target, amp * coef * term.prefactor);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn expectation(&self, state: &SparseState) -> Result<Complex64> {
        let mut sum = ZERO;
        for term in &self.terms {
            sum += expectation(state, term)?;
        }
        Ok(sum)
    }

    /// Dense matrix `<basis_i| self |basis_j>`. Images outside the basis are
    /// dropped.
    pub fn matrix_in_basis(&self, basis: &[OccupationVector]) -> Result<DMatrix<Complex64>> {
        let index: HashMap<&OccupationVector, usize> =
            basis.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let dim = basis.len();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (j, ket) in basis.iter().enumerate() {
            for term in &self.terms {
                term.check_modes(ket.len())?;
                if let Some((target, coef)) = term.act_on(ket) {
                    if let Some(&i) = index.get(&target) {
                        m[(i, j)] += term.prefactor * coef;
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Kets reachable from `start` by repeated application of `op`, in
/// breadth-first order. Fails if more than `max_size` kets are found.
pub fn closure_basis(
    start: &SparseState,
    op: &OperatorSum,
    max_size: usize,
) -> Result<Vec<OccupationVector>> {
    let mut seen: HashMap<OccupationVector, ()> = HashMap::new();
    let mut order = Vec::new();
    let mut queue: VecDeque<OccupationVector> = start
        .sorted_entries()
        .into_iter()
        .map(|(k, _)| k)
        .collect();
    for k in &queue {
        seen.insert(k.clone(), ());
    }
    while let Some(ket) = queue.pop_front() {
        order.push(ket.clone());
        if order.len() > max_size {
            return Err(Error::ResourceLimit {
                dimension: order.len(),
                required_bytes: order.len() * order.len() * 16,
                budget_bytes: max_size * max_size * 16,
            });
        }
        for term in op.terms() {
            term.check_modes(ket.len())?;
            if let Some((target, _)) = term.act_on(&ket) {
                if !seen.contains_key(&target) {
                    seen.insert(target.clone(), ());
                    queue.push_back(target);
                }
            }
        }
    }
    Ok(order)
}

/// `exp(-i H t)|state>` by a dense Padé matrix exponential of `H` restricted
/// to the closure of `state` under `H`. Exact up to the exponential's own
/// rounding; intended as a reference for small systems.
pub fn evolve_exact(
    state: &SparseState,
    hamiltonian: &OperatorSum,
    time: f64,
) -> Result<SparseState> {
    let basis = closure_basis(state, hamiltonian, 4096)?;
    let h = hamiltonian.matrix_in_basis(&basis)?;
    let generator = h * Complex64::new(0.0, -time);
    let u = generator.exp();
    let psi = DVector::from_iterator(
        basis.len(),
        basis.iter().map(|k| state.amplitude(k.counts())),
    );
    let out = u * psi;
    let mut result = SparseState::zero(state.modes);
    result.prune_threshold = state.prune_threshold;
    for (k, a) in basis.into_iter().zip(out.iter()) {
        result.accumulate(k, *a);
    }
    result.prune();
    Ok(result)
}

/// Sign convention for the two-mode splitter, written as the Heisenberg map
/// of the input annihilators onto the output ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SplitterConvention {
    /// `a_out = t a + r b`, `b_out = r* a - t* b`.
    #[default]
    Asymmetric,
    /// `a_out = t a - r b`, `b_out = r* a + t* b`.
    Unitary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    pub mode_a: usize,
    pub mode_b: usize,
    pub t: Complex64,
    pub r: Complex64,
    pub convention: SplitterConvention,
}

impl BeamSplitterSpec {
    pub fn new(mode_a: usize, mode_b: usize, t: Complex64, r: Complex64) -> Result<Self> {
        if mode_a == mode_b {
            return Err(Error::contract("beam splitter needs two distinct modes"));
        }
        let defect = t.norm_sqr() + r.norm_sqr() - 1.0;
        if defect.abs() > UNITARITY_TOLERANCE {
            return Err(Error::contract(format!(
                "|t|^2 + |r|^2 = {} is not 1",
                1.0 + defect
            )));
        }
        Ok(BeamSplitterSpec {
            mode_a,
            mode_b,
            t,
            r,
            convention: SplitterConvention::Asymmetric,
        })
    }

    /// 50-50 splitter with `t = r = 1/sqrt(2)`.
    pub fn balanced(mode_a: usize, mode_b: usize) -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        BeamSplitterSpec {
            mode_a,
            mode_b,
            t: h,
            r: h,
            convention: SplitterConvention::Asymmetric,
        }
    }

    pub fn with_convention(mut self, convention: SplitterConvention) -> Self {
        self.convention = convention;
        self
    }

    /// `S` with `(a_out, b_out) = S (a_in, b_in)`.
    pub fn mode_matrix(&self) -> [[Complex64; 2]; 2] {
        let (t, r) = (self.t, self.r);
        match self.convention {
            SplitterConvention::Asymmetric => [[t, r], [r.conj(), -t.conj()]],
            SplitterConvention::Unitary => [[t, -r], [r.conj(), t.conj()]],
        }
    }
}

/// Log-magnitude and phase of `z^e`, `None` when the power vanishes.
fn log_power(z: Complex64, e: u32) -> Option<(f64, f64)> {
    if e == 0 {
        return Some((0.0, 0.0));
    }
    let mag = z.norm();
    if mag == 0.0 {
        return None;
    }
    Some((e as f64 * mag.ln(), e as f64 * z.arg()))
}

struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn up_to(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(acc);
        }
        LogFactorials(table)
    }

    fn ln_fact(&self, n: u32) -> f64 {
        self.0[n as usize]
    }

    fn ln_binom(&self, n: u32, k: u32) -> f64 {
        self.ln_fact(n) - self.ln_fact(k) - self.ln_fact(n - k)
    }
}

/// Output amplitudes on `|p, n_a + n_b - p>` for input `|n_a, n_b>`.
fn splitter_sector(
    n_a: u32,
    n_b: u32,
    s: &[[Complex64; 2]; 2],
    lf: &LogFactorials,
) -> Vec<Complex64> {
    // a^dag -> S00 A^dag + S10 B^dag, b^dag -> S01 A^dag + S11 B^dag
    let (alpha, beta, gamma, delta) = (s[0][0], s[1][0], s[0][1], s[1][1]);
    let total = n_a + n_b;
    let norm = -0.5 * (lf.ln_fact(n_a) + lf.ln_fact(n_b));
    (0..=total)
        .map(|p| {
            let q = total - p;
            let half = 0.5 * (lf.ln_fact(p) + lf.ln_fact(q)) + norm;
            let k_lo = p.saturating_sub(n_b);
            let k_hi = n_a.min(p);
            let mut sum = ZERO;
            for k in k_lo..=k_hi {
                let j = p - k;
                let parts = [
                    log_power(alpha, k),
                    log_power(beta, n_a - k),
                    log_power(gamma, j),
                    log_power(delta, n_b - j),
                ];
                if parts.iter().any(Option::is_none) {
                    continue;
                }
                let (mut lm, mut ph) = (lf.ln_binom(n_a, k) + lf.ln_binom(n_b, j) + half, 0.0);
                for (m, a) in parts.into_iter().flatten() {
                    lm += m;
                    ph += a;
                }
                sum += Complex64::from_polar(lm.exp(), ph);
            }
            sum
        })
        .collect()
}

/// Exact Fock-space image of `state` under the two-mode splitter `spec`.
pub fn apply_beam_splitter(state: &SparseState, spec: &BeamSplitterSpec) -> Result<SparseState> {
    for m in [spec.mode_a, spec.mode_b] {
        if m >= state.modes {
            return Err(Error::ModeOutOfRange {
                index: m,
                modes: state.modes,
            });
        }
    }
    let s = spec.mode_matrix();
    let max_total = state
        .amplitudes
        .keys()
        .map(|k| k.get(spec.mode_a) + k.get(spec.mode_b))
        .max()
        .unwrap_or(0);
    let lf = LogFactorials::up_to(max_total as usize);
    let mut sectors: HashMap<(u32, u32), Vec<Complex64>> = HashMap::new();

    let mut out = SparseState::zero(state.modes);
    out.prune_threshold = state.prune_threshold;
    for (ket, amp) in state.sorted_entries() {
        let (n_a, n_b) = (ket.get(spec.mode_a), ket.get(spec.mode_b));
        let coefs = sectors
            .entry((n_a, n_b))
            .or_insert_with(|| splitter_sector(n_a, n_b, &s, &lf));
        let total = n_a + n_b;
        for (p, c) in coefs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let mut target = ket.clone();
            target.set(spec.mode_a, p as u32);
            target.set(spec.mode_b, total - p as u32);
            out.accumulate(target, amp * c);
        }
    }
    out.prune();
    Ok(out)
}

/// A finite classical mixture of pure states.
#[derive(Clone, Debug, Default)]
pub struct Mixture {
    components: Vec<(f64, SparseState)>,
}

impl Mixture {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, weight: f64, state: SparseState) -> Self {
        self.components.push((weight, state));
        self
    }

    pub fn components(&self) -> &[(f64, SparseState)] {
        &self.components
    }

    /// `Tr(rho expr)`.
    pub fn expectation(&self, expr: &OperatorSum) -> Result<Complex64> {
        let mut sum = ZERO;
        for (w, psi) in &self.components {
            sum += expr.expectation(psi)? * *w;
        }
        Ok(sum)
    }
}
