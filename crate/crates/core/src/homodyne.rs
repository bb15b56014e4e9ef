//! Number-conserving homodyne measurement of the two signal modes against
//! local oscillators carved out of the pump.
//!
//! The measured quadratures are
//! `X_j = (a_j b_j^dag + a_j^dag b_j) / <b_j^dag b_j>^(1/2)` and
//! `Y_j = i (a_j b_j^dag - a_j^dag b_j) / <b_j^dag b_j>^(1/2)`. Moments are
//! first gathered unnormalized ([`RawMoments`]) so mixtures can be combined
//! before dividing by the in-situ LO population.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{coupling, ReducedState};
use crate::error::{Error, Result};
use crate::fock::{
    apply_beam_splitter, BeamSplitterSpec, LadderExpression, OperatorSum, SparseState,
    SplitterConvention,
};

/// Default lower bound on `<b_j^dag b_j>` before normalization is refused.
pub const DEFAULT_LO_FLOOR: f64 = 1e-6;

/// Imaginary parts of Hermitian expectations above this (relative to the
/// magnitude) are treated as a bug.
pub const HERMITIAN_RESIDUE: f64 = 1e-9;

/// Where the signals and local oscillators sit in a 4-mode state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasuredQuadratureSet {
    pub signal: [usize; 2],
    pub lo: [usize; 2],
    pub lo_floor: f64,
}

impl Default for MeasuredQuadratureSet {
    /// Signals in modes 1 and 2; LOs in mode 0 and the auxiliary mode 3.
    fn default() -> Self {
        MeasuredQuadratureSet {
            signal: [1, 2],
            lo: [0, 3],
            lo_floor: DEFAULT_LO_FLOOR,
        }
    }
}

impl MeasuredQuadratureSet {
    /// `a_j b_j^dag + a_j^dag b_j`.
    pub fn d_operator(&self, j: usize) -> OperatorSum {
        let (a, b) = (self.signal[j], self.lo[j]);
        OperatorSum::new()
            .plus(LadderExpression::identity().annihilate(a).create(b))
            .plus(LadderExpression::identity().create(a).annihilate(b))
    }

    /// `i (a_j b_j^dag - a_j^dag b_j)`.
    pub fn e_operator(&self, j: usize) -> OperatorSum {
        let (a, b) = (self.signal[j], self.lo[j]);
        OperatorSum::new()
            .plus(
                LadderExpression::identity()
                    .annihilate(a)
                    .create(b)
                    .scaled(Complex64::new(0.0, 1.0)),
            )
            .plus(
                LadderExpression::identity()
                    .create(a)
                    .annihilate(b)
                    .scaled(Complex64::new(0.0, -1.0)),
            )
    }
}

/// Unnormalized moments of `D_j = a_j b_j^dag + h.c.` and
/// `E_j = i a_j b_j^dag + h.c.` plus the populations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RawMoments {
    pub mean_d: [f64; 2],
    pub mean_e: [f64; 2],
    pub sq_d: [f64; 2],
    pub sq_e: [f64; 2],
    /// `<D_1 D_2>`
    pub cross_d: f64,
    /// `<E_1 E_2>`
    pub cross_e: f64,
    pub pop_signal: [f64; 2],
    pub pop_lo: [f64; 2],
}

impl RawMoments {
    /// `self + weight * other`, entry by entry.
    pub fn add_weighted(&self, weight: f64, other: &RawMoments) -> RawMoments {
        let pair = |a: [f64; 2], b: [f64; 2]| [a[0] + weight * b[0], a[1] + weight * b[1]];
        RawMoments {
            mean_d: pair(self.mean_d, other.mean_d),
            mean_e: pair(self.mean_e, other.mean_e),
            sq_d: pair(self.sq_d, other.sq_d),
            sq_e: pair(self.sq_e, other.sq_e),
            cross_d: self.cross_d + weight * other.cross_d,
            cross_e: self.cross_e + weight * other.cross_e,
            pop_signal: pair(self.pop_signal, other.pop_signal),
            pop_lo: pair(self.pop_lo, other.pop_lo),
        }
    }

    pub fn scaled(&self, factor: f64) -> RawMoments {
        RawMoments::default().add_weighted(factor, self)
    }
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > HERMITIAN_RESIDUE * z.re.abs().max(1.0) {
        return Err(Error::contract(format!(
            "expectation of Hermitian {what} has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Raw moments by direct operator application on a 4-mode state.
pub fn raw_moments_oracle(state: &SparseState, set: &MeasuredQuadratureSet) -> Result<RawMoments> {
    let d = [set.d_operator(0), set.d_operator(1)];
    let e = [set.e_operator(0), set.e_operator(1)];
    let mut raw = RawMoments::default();
    for j in 0..2 {
        raw.mean_d[j] = real_part(d[j].expectation(state)?, "D")?;
        raw.mean_e[j] = real_part(e[j].expectation(state)?, "E")?;
        raw.sq_d[j] = real_part(d[j].product(&d[j]).expectation(state)?, "D^2")?;
        raw.sq_e[j] = real_part(e[j].product(&e[j]).expectation(state)?, "E^2")?;
        let na = OperatorSum::new().plus(LadderExpression::number(set.signal[j]));
        let nb = OperatorSum::new().plus(LadderExpression::number(set.lo[j]));
        raw.pop_signal[j] = real_part(na.expectation(state)?, "n")?;
        raw.pop_lo[j] = real_part(nb.expectation(state)?, "n")?;
    }
    raw.cross_d = real_part(d[0].product(&d[1]).expectation(state)?, "D1 D2")?;
    raw.cross_e = real_part(e[0].product(&e[1]).expectation(state)?, "E1 E2")?;
    Ok(raw)
}

/// Raw moments of the split-LO measurement for a state in the symmetric
/// block `|N-2m, m, m>`, in closed form.
///
/// With `p_m = |c_m|^2` and `K = sum_m conj(c_m) c_{m+1} g_m`:
/// `<b_j^dag b_j> = <n0>/2`, `<D_j^2> = <E_j^2> = <(2 n1 + 1) n0>/2 + <n1>`,
/// `<D_1 D_2> = Re K = -<E_1 E_2>`, and all first moments vanish.
pub fn raw_moments_reduced(state: &ReducedState) -> RawMoments {
    let n = state.n_total();
    let c = state.coeffs();
    let (mut n0, mut n1, mut sq) = (0.0, 0.0, 0.0);
    for (m, cm) in c.iter().enumerate() {
        let p = cm.norm_sqr();
        let k0 = (n - 2 * m) as f64;
        let m = m as f64;
        n0 += p * k0;
        n1 += p * m;
        sq += p * (0.5 * (2.0 * m + 1.0) * k0 + m);
    }
    let k: f64 = c
        .windows(2)
        .enumerate()
        .map(|(m, w)| (w[0].conj() * w[1]).re * coupling(n, m))
        .sum();
    RawMoments {
        mean_d: [0.0; 2],
        mean_e: [0.0; 2],
        sq_d: [sq; 2],
        sq_e: [sq; 2],
        cross_d: k,
        cross_e: -k,
        pop_signal: [n1; 2],
        pop_lo: [0.5 * n0; 2],
    }
}

/// Normalized quadrature moments. `sum`/`diff` refer to `X_1 + X_2` and
/// `X_1 - X_2` (likewise for Y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMoments {
    pub mean_x1: f64,
    pub mean_y1: f64,
    pub mean_x2: f64,
    pub mean_y2: f64,
    pub var_x1: f64,
    pub var_y1: f64,
    pub var_x2: f64,
    pub var_y2: f64,
    pub cov_x: f64,
    pub cov_y: f64,
    pub var_x_sum: f64,
    pub var_x_diff: f64,
    pub var_y_sum: f64,
    pub var_y_diff: f64,
    pub pop_a1: f64,
    pub pop_a2: f64,
    pub pop_b1: f64,
    pub pop_b2: f64,
}

impl QuadratureMoments {
    pub const FIELDS: [&'static str; 18] = [
        "mean_x1", "mean_y1", "mean_x2", "mean_y2", "var_x1", "var_y1", "var_x2", "var_y2",
        "cov_x", "cov_y", "var_x_sum", "var_x_diff", "var_y_sum", "var_y_diff", "pop_a1",
        "pop_a2", "pop_b1", "pop_b2",
    ];

    pub fn values(&self) -> [f64; 18] {
        [
            self.mean_x1,
            self.mean_y1,
            self.mean_x2,
            self.mean_y2,
            self.var_x1,
            self.var_y1,
            self.var_x2,
            self.var_y2,
            self.cov_x,
            self.cov_y,
            self.var_x_sum,
            self.var_x_diff,
            self.var_y_sum,
            self.var_y_diff,
            self.pop_a1,
            self.pop_a2,
            self.pop_b1,
            self.pop_b2,
        ]
    }

    pub fn from_values(v: [f64; 18]) -> Self {
        QuadratureMoments {
            mean_x1: v[0],
            mean_y1: v[1],
            mean_x2: v[2],
            mean_y2: v[3],
            var_x1: v[4],
            var_y1: v[5],
            var_x2: v[6],
            var_y2: v[7],
            cov_x: v[8],
            cov_y: v[9],
            var_x_sum: v[10],
            var_x_diff: v[11],
            var_y_sum: v[12],
            var_y_diff: v[13],
            pop_a1: v[14],
            pop_a2: v[15],
            pop_b1: v[16],
            pop_b2: v[17],
        }
    }

    /// Divides by the LO populations contained in `raw`.
    pub fn from_raw(raw: &RawMoments, lo_floor: f64) -> Result<Self> {
        for j in 0..2 {
            if !(raw.pop_lo[j] >= lo_floor) {
                return Err(Error::DegenerateNormalization {
                    system: j + 1,
                    population: raw.pop_lo[j],
                    floor: lo_floor,
                });
            }
        }
        let s = [raw.pop_lo[0].sqrt(), raw.pop_lo[1].sqrt()];
        let mx = [raw.mean_d[0] / s[0], raw.mean_d[1] / s[1]];
        let my = [raw.mean_e[0] / s[0], raw.mean_e[1] / s[1]];
        let vx = [
            raw.sq_d[0] / raw.pop_lo[0] - mx[0] * mx[0],
            raw.sq_d[1] / raw.pop_lo[1] - mx[1] * mx[1],
        ];
        let vy = [
            raw.sq_e[0] / raw.pop_lo[0] - my[0] * my[0],
            raw.sq_e[1] / raw.pop_lo[1] - my[1] * my[1],
        ];
        let cov_x = raw.cross_d / (s[0] * s[1]) - mx[0] * mx[1];
        let cov_y = raw.cross_e / (s[0] * s[1]) - my[0] * my[1];
        Ok(QuadratureMoments {
            mean_x1: mx[0],
            mean_y1: my[0],
            mean_x2: mx[1],
            mean_y2: my[1],
            var_x1: vx[0],
            var_y1: vy[0],
            var_x2: vx[1],
            var_y2: vy[1],
            cov_x,
            cov_y,
            var_x_sum: vx[0] + vx[1] + 2.0 * cov_x,
            var_x_diff: vx[0] + vx[1] - 2.0 * cov_x,
            var_y_sum: vy[0] + vy[1] + 2.0 * cov_y,
            var_y_diff: vy[0] + vy[1] - 2.0 * cov_y,
            pop_a1: raw.pop_signal[0],
            pop_a2: raw.pop_signal[1],
            pop_b1: raw.pop_lo[0],
            pop_b2: raw.pop_lo[1],
        })
    }

    /// `<a_j^dag a_j> / <b_j^dag b_j>` for `j = 1, 2`.
    pub fn ratios(&self) -> [f64; 2] {
        [self.pop_a1 / self.pop_b1, self.pop_a2 / self.pop_b2]
    }

    /// `Var[X_1 + s X_2] + Var[Y_1 - s Y_2]` for `s = +1` (`plus`) or `-1`.
    pub fn variance_sum(&self, plus: bool) -> f64 {
        if plus {
            self.var_x_sum + self.var_y_diff
        } else {
            self.var_x_diff + self.var_y_sum
        }
    }

    /// The coherent-LO lower bound `r_1 + r_2` on `Var[X_1 +- X_2]`.
    pub fn coherent_lo_floor(&self) -> f64 {
        let r = self.ratios();
        r[0] + r[1]
    }
}

/// Appends a vacuum mode and mixes it with `source_mode` on a balanced
/// splitter. With the default convention the source slot then holds
/// `b_1 = (a_0 + a_3)/sqrt(2)` and the new slot holds `b_2 = (a_0 - a_3)/sqrt(2)`.
pub fn split_local_oscillator(state: &SparseState, source_mode: usize) -> Result<SparseState> {
    split_local_oscillator_with(state, source_mode, SplitterConvention::Asymmetric)
}

pub fn split_local_oscillator_with(
    state: &SparseState,
    source_mode: usize,
    convention: SplitterConvention,
) -> Result<SparseState> {
    if source_mode >= state.mode_count() {
        return Err(Error::ModeOutOfRange {
            index: source_mode,
            modes: state.mode_count(),
        });
    }
    let widened = state.append_vacuum_mode();
    let spec = BeamSplitterSpec::balanced(source_mode, state.mode_count())
        .with_convention(convention);
    apply_beam_splitter(&widened, &spec)
}

/// Every moment via operator application on a 4-mode state.
pub fn quadrature_moments(
    state: &SparseState,
    set: &MeasuredQuadratureSet,
) -> Result<QuadratureMoments> {
    QuadratureMoments::from_raw(&raw_moments_oracle(state, set)?, set.lo_floor)
}

/// `<[X_j, Y_j]>` for both systems, by operator application.
pub fn commutator_expectation(
    state: &SparseState,
    set: &MeasuredQuadratureSet,
) -> Result<[Complex64; 2]> {
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (j, slot) in out.iter_mut().enumerate() {
        let lo = OperatorSum::new()
            .plus(LadderExpression::number(set.lo[j]))
            .expectation(state)?
            .re;
        if !(lo >= set.lo_floor) {
            return Err(Error::DegenerateNormalization {
                system: j + 1,
                population: lo,
                floor: set.lo_floor,
            });
        }
        let c = set.d_operator(j).commutator(&set.e_operator(j));
        *slot = c.expectation(state)? / lo;
    }
    Ok(out)
}

/// `-2i (<b_j^dag b_j> - <a_j^dag a_j>) / <b_j^dag b_j>`.
pub fn commutator_closed_form(moments: &QuadratureMoments) -> [Complex64; 2] {
    let r = moments.ratios();
    [
        Complex64::new(0.0, -2.0 * (1.0 - r[0])),
        Complex64::new(0.0, -2.0 * (1.0 - r[1])),
    ]
}

/// Measured-quadrature variance that an independent coherent LO of the
/// given population would report for a single-mode `signal`:
/// `Var[a + a^dag] + <a^dag a> / lo_population`.
pub fn coherent_lo_reference(signal: &SparseState, lo_population: f64) -> Result<f64> {
    if signal.mode_count() != 1 {
        return Err(Error::ModeCountMismatch {
            left: signal.mode_count(),
            right: 1,
        });
    }
    if !(lo_population > 0.0) {
        return Err(Error::contract(format!(
            "LO population must be positive, got {lo_population}"
        )));
    }
    let x = OperatorSum::new()
        .plus(LadderExpression::identity().annihilate(0))
        .plus(LadderExpression::identity().create(0));
    let mean = real_part(x.expectation(signal)?, "a + a^dag")?;
    let sq = real_part(x.product(&x).expectation(signal)?, "(a + a^dag)^2")?;
    let n = real_part(
        OperatorSum::new()
            .plus(LadderExpression::number(0))
            .expectation(signal)?,
        "n",
    )?;
    Ok(sq - mean * mean + n / lo_population)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, lift_to_sparse, ModelParams, ReducedState};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn split_fock_pump_halves_population() {
        let s = split_local_oscillator(&SparseState::fock(&[6, 0, 0]), 0).unwrap();
        let raw = raw_moments_oracle(&s, &MeasuredQuadratureSet::default()).unwrap();
        assert!(close(raw.pop_lo[0], 3.0, 1e-12));
        assert!(close(raw.pop_lo[1], 3.0, 1e-12));
    }

    #[test]
    fn vacuum_signal_gives_unit_variances() {
        let s = split_local_oscillator(&SparseState::fock(&[10, 0, 0]), 0).unwrap();
        let q = quadrature_moments(&s, &MeasuredQuadratureSet::default()).unwrap();
        for v in [q.var_x1, q.var_y1, q.var_x2, q.var_y2] {
            assert!(close(v, 1.0, 1e-12));
        }
        assert!(q.cov_x.abs() < 1e-12 && q.mean_x1.abs() < 1e-12);
        assert!(close(q.variance_sum(true), 4.0, 1e-12));
        assert!(close(q.variance_sum(false), 4.0, 1e-12));
    }

    #[test]
    fn empty_lo_is_degenerate() {
        let s = split_local_oscillator(&SparseState::vacuum(3), 0).unwrap();
        let err = quadrature_moments(&s, &MeasuredQuadratureSet::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateNormalization { system: 1, .. }));
        assert!(err.to_string().contains("<b^dag b>^(1/2)"));
    }

    #[test]
    fn closed_form_matches_oracle() {
        for n in [2usize, 5, 12] {
            let p = ModelParams::new(1.0, n).unwrap();
            let st = evolve(&ReducedState::fock(n), &p, 0.11).unwrap();
            let oracle = raw_moments_oracle(
                &split_local_oscillator(&lift_to_sparse(&st), 0).unwrap(),
                &MeasuredQuadratureSet::default(),
            )
            .unwrap();
            let fast = raw_moments_reduced(&st);
            let a = serde_json::to_value(oracle).unwrap();
            let b = serde_json::to_value(fast).unwrap();
            let flat = |v: &serde_json::Value| -> Vec<f64> {
                v.as_object()
                    .unwrap()
                    .values()
                    .flat_map(|x| match x {
                        serde_json::Value::Array(a) => a.iter().map(|y| y.as_f64().unwrap()).collect(),
                        other => vec![other.as_f64().unwrap()],
                    })
                    .collect()
            };
            for (x, y) in flat(&a).iter().zip(flat(&b)) {
                assert!((x - y).abs() < 1e-10, "N={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn superposition_lo_population() {
        let c0 = Complex64::new(0.6, 0.0);
        let c1 = Complex64::new(0.0, 0.8);
        let st = ReducedState::new(2, vec![c0, c1]).unwrap();
        let s = split_local_oscillator(&lift_to_sparse(&st), 0).unwrap();
        let raw = raw_moments_oracle(&s, &MeasuredQuadratureSet::default()).unwrap();
        assert!(close(raw.pop_lo[0], 0.36, 1e-12));
        assert!(close(raw.pop_lo[1], 0.36, 1e-12));
    }

    #[test]
    fn commutator_examples() {
        let set = MeasuredQuadratureSet::default();
        let s = split_local_oscillator(&SparseState::fock(&[4, 0, 0]), 0).unwrap();
        let c = commutator_expectation(&s, &set).unwrap();
        for z in c {
            assert!((z - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        }
        // equal signal and LO populations: |1,1> with a one-boson LO each
        let s = SparseState::fock(&[1, 1, 1, 1]);
        let c = commutator_expectation(&s, &set).unwrap();
        assert!(c[0].norm() < 1e-12 && c[1].norm() < 1e-12);
    }

    #[test]
    fn coherent_reference_examples() {
        assert!(close(coherent_lo_reference(&SparseState::vacuum(1), 7.0).unwrap(), 1.0, 1e-12));
        let one = SparseState::fock(&[1]);
        assert!(close(coherent_lo_reference(&one, 100.0).unwrap(), 3.01, 1e-12));
        assert!(coherent_lo_reference(&one, 0.0).is_err());
    }
}
