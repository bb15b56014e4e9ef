//! Separability and EPR inequalities evaluated on measured quadrature
//! moments.
//!
//! Every entry reports `margin = lhs - rhs`, negative meaning the inequality
//! is violated. Where a criterion has a `+-` pairing both branches are tried
//! and the smaller LHS is kept. Criteria that infer system 2 from system 1
//! are also evaluated in the mirrored direction and the smaller margin wins.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homodyne::QuadratureMoments;

/// Below this regressor variance the optimal linear inference degenerates
/// to the uncorrelated guess.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

/// Rescaling denominators below this are treated as zero.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    /// Sum of quadrature-combination variances against
    /// `2|1 - r_1| + 2|1 - r_2|`, `r_j = <a_j^dag a_j>/<b_j^dag b_j>`.
    Separability,
    /// Same LHS against `2|1 - r_2|`.
    EprSum,
    /// Product of optimal linear inference errors against `(1 - r_2)^2`.
    EprReid,
    /// Against `4 + 2 r_1 + 2 r_2`, valid for coherent LOs only.
    CoherentSeparability,
    /// Against `2 + 2 r_1 + 2 r_2`, coherent LOs only.
    CoherentEprSum,
    /// Inference errors with the coherent-LO shot-noise correction, against 1.
    CoherentReid,
    /// Separability LHS over `(|1 - r_1| + |1 - r_2|)/2`, against 4.
    RescaledSeparability,
    /// EPR-sum LHS over `|1 - r_2|`, against 2.
    RescaledEprSum,
    /// Reid product over `(1 - r_2)^2`, against 1.
    RescaledReid,
    /// Unmodified LHS against 4, as if the LOs were ideal.
    ClassicDuan,
    /// Unmodified LHS against 2.
    ClassicEprSum,
    /// Unmodified Reid product against 1.
    ClassicReid,
}

impl CriterionId {
    pub const ALL: [CriterionId; 12] = [
        CriterionId::Separability,
        CriterionId::EprSum,
        CriterionId::EprReid,
        CriterionId::CoherentSeparability,
        CriterionId::CoherentEprSum,
        CriterionId::CoherentReid,
        CriterionId::RescaledSeparability,
        CriterionId::RescaledEprSum,
        CriterionId::RescaledReid,
        CriterionId::ClassicDuan,
        CriterionId::ClassicEprSum,
        CriterionId::ClassicReid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CriterionId::Separability => "separability",
            CriterionId::EprSum => "epr_sum",
            CriterionId::EprReid => "epr_reid",
            CriterionId::CoherentSeparability => "coherent_separability",
            CriterionId::CoherentEprSum => "coherent_epr_sum",
            CriterionId::CoherentReid => "coherent_reid",
            CriterionId::RescaledSeparability => "rescaled_separability",
            CriterionId::RescaledEprSum => "rescaled_epr_sum",
            CriterionId::RescaledReid => "rescaled_reid",
            CriterionId::ClassicDuan => "classic_duan",
            CriterionId::ClassicEprSum => "classic_epr_sum",
            CriterionId::ClassicReid => "classic_reid",
        }
    }

    /// Whether the bound assumes independent coherent local oscillators.
    pub fn assumes_coherent_lo(self) -> bool {
        matches!(
            self,
            CriterionId::CoherentSeparability
                | CriterionId::CoherentEprSum
                | CriterionId::CoherentReid
        )
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CriterionId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config("criteria", format!("unknown criterion `{s}`")))
    }
}

/// Which `+-` pairing gave the reported LHS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignChoice {
    /// `X_1 + X_2` with `Y_1 - Y_2`.
    Plus,
    /// `X_1 - X_2` with `Y_1 + Y_2`.
    Minus,
    /// Not a `+-` criterion.
    None,
}

impl SignChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            SignChoice::Plus => "plus",
            SignChoice::Minus => "minus",
            SignChoice::None => "none",
        }
    }
}

impl FromStr for SignChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(SignChoice::Plus),
            "minus" => Ok(SignChoice::Minus),
            "none" => Ok(SignChoice::None),
            _ => Err(Error::Table(format!("bad sign choice `{s}`"))),
        }
    }
}

/// Direction of inference for the EPR-type criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inference {
    /// The bound does not single out a system.
    Symmetric,
    /// System 2 inferred from measurements on system 1.
    SecondFromFirst,
    /// Mirrored: system 1 inferred from system 2.
    FirstFromSecond,
}

impl Inference {
    pub fn as_str(self) -> &'static str {
        match self {
            Inference::Symmetric => "symmetric",
            Inference::SecondFromFirst => "second_from_first",
            Inference::FirstFromSecond => "first_from_second",
        }
    }
}

impl FromStr for Inference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Inference::Symmetric),
            "second_from_first" => Ok(Inference::SecondFromFirst),
            "first_from_second" => Ok(Inference::FirstFromSecond),
            _ => Err(Error::Table(format!("bad inference direction `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub id: CriterionId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub violated: bool,
    pub sign: SignChoice,
    pub inference: Inference,
    /// False when a denominator vanished; numbers are then NaN.
    pub defined: bool,
}

impl CriterionEntry {
    fn new(id: CriterionId, lhs: f64, rhs: f64, sign: SignChoice, inference: Inference) -> Self {
        let margin = lhs - rhs;
        CriterionEntry {
            id,
            lhs,
            rhs,
            margin,
            violated: margin < 0.0,
            sign,
            inference,
            defined: true,
        }
    }

    fn undefined(id: CriterionId, sign: SignChoice, inference: Inference) -> Self {
        CriterionEntry {
            id,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            violated: false,
            sign,
            inference,
            defined: false,
        }
    }

    /// Picks the defined entry with the smaller margin.
    fn better(self, other: Self) -> Self {
        match (self.defined, other.defined) {
            (true, true) if other.margin < self.margin => other,
            (true, _) => self,
            (false, _) => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub entries: Vec<CriterionEntry>,
    /// Set when any coherent-LO criterion was evaluated; those bounds are
    /// only meaningful if the caller's LOs really are coherent.
    pub coherent_lo_assumed: bool,
}

impl CriteriaReport {
    pub fn get(&self, id: CriterionId) -> Option<&CriterionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// The smaller of the two pairings, with its label.
fn best_pairing(m: &QuadratureMoments) -> (f64, SignChoice) {
    let plus = m.variance_sum(true);
    let minus = m.variance_sum(false);
    if minus <= plus {
        (minus, SignChoice::Minus)
    } else {
        (plus, SignChoice::Plus)
    }
}

/// Systems as `(inferred, measured)` indices for each direction.
const DIRECTIONS: [(Inference, usize, usize); 2] = [
    (Inference::SecondFromFirst, 1, 0),
    (Inference::FirstFromSecond, 0, 1),
];

struct Split {
    var_x: [f64; 2],
    var_y: [f64; 2],
    ratio: [f64; 2],
}

fn split(m: &QuadratureMoments) -> Split {
    Split {
        var_x: [m.var_x1, m.var_x2],
        var_y: [m.var_y1, m.var_y2],
        ratio: m.ratios(),
    }
}

/// Optimal linear inference errors `(Delta^2 X, Delta^2 Y)` of the
/// `inferred` system from the other one.
pub fn reid_inference(m: &QuadratureMoments, inference: Inference) -> (f64, f64) {
    let s = split(m);
    let (inf, meas) = match inference {
        Inference::FirstFromSecond => (0, 1),
        _ => (1, 0),
    };
    let one = |var_inf: f64, var_meas: f64, cov: f64| {
        if var_meas < DEGENERATE_VARIANCE {
            var_inf
        } else {
            var_inf - cov * cov / var_meas
        }
    };
    (
        one(s.var_x[inf], s.var_x[meas], m.cov_x),
        one(s.var_y[inf], s.var_y[meas], m.cov_y),
    )
}

pub fn separability(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    let r = m.ratios();
    let rhs = 2.0 * (1.0 - r[0]).abs() + 2.0 * (1.0 - r[1]).abs();
    CriterionEntry::new(CriterionId::Separability, lhs, rhs, sign, Inference::Symmetric)
}

pub fn epr_sum(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    let s = split(m);
    DIRECTIONS
        .iter()
        .map(|&(dir, inf, _)| {
            let rhs = 2.0 * (1.0 - s.ratio[inf]).abs();
            CriterionEntry::new(CriterionId::EprSum, lhs, rhs, sign, dir)
        })
        .reduce(CriterionEntry::better)
        .expect("two directions")
}

pub fn epr_reid(m: &QuadratureMoments) -> CriterionEntry {
    let s = split(m);
    DIRECTIONS
        .iter()
        .map(|&(dir, inf, _)| {
            let (dx, dy) = reid_inference(m, dir);
            let rhs = (1.0 - s.ratio[inf]).powi(2);
            CriterionEntry::new(CriterionId::EprReid, dx * dy, rhs, SignChoice::None, dir)
        })
        .reduce(CriterionEntry::better)
        .expect("two directions")
}

pub fn coherent_separability(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    let r = m.ratios();
    let rhs = 4.0 + 2.0 * r[0] + 2.0 * r[1];
    CriterionEntry::new(
        CriterionId::CoherentSeparability,
        lhs,
        rhs,
        sign,
        Inference::Symmetric,
    )
}

pub fn coherent_epr_sum(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    let r = m.ratios();
    let rhs = 2.0 + 2.0 * r[0] + 2.0 * r[1];
    CriterionEntry::new(CriterionId::CoherentEprSum, lhs, rhs, sign, Inference::Symmetric)
}

pub fn coherent_reid(m: &QuadratureMoments) -> CriterionEntry {
    let s = split(m);
    let id = CriterionId::CoherentReid;
    DIRECTIONS
        .iter()
        .map(|&(dir, inf, meas)| {
            let den_x = s.var_x[meas] - s.ratio[meas];
            let den_y = s.var_y[meas] - s.ratio[meas];
            if !(den_x > 0.0 && den_y > 0.0) {
                return CriterionEntry::undefined(id, SignChoice::None, dir);
            }
            let dx = s.var_x[inf] - s.ratio[inf] - m.cov_x * m.cov_x / den_x;
            let dy = s.var_y[inf] - s.ratio[inf] - m.cov_y * m.cov_y / den_y;
            CriterionEntry::new(id, dx * dy, 1.0, SignChoice::None, dir)
        })
        .reduce(CriterionEntry::better)
        .expect("two directions")
}

pub fn rescaled_separability(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    let r = m.ratios();
    let den = 0.5 * (1.0 - r[0]).abs() + 0.5 * (1.0 - r[1]).abs();
    let id = CriterionId::RescaledSeparability;
    if !(den >= DEGENERATE_DENOMINATOR) {
        return CriterionEntry::undefined(id, sign, Inference::Symmetric);
    }
    CriterionEntry::new(id, lhs / den, 4.0, sign, Inference::Symmetric)
}

pub fn rescaled_epr_sum(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    let s = split(m);
    let id = CriterionId::RescaledEprSum;
    DIRECTIONS
        .iter()
        .map(|&(dir, inf, _)| {
            let den = (1.0 - s.ratio[inf]).abs();
            if !(den >= DEGENERATE_DENOMINATOR) {
                return CriterionEntry::undefined(id, sign, dir);
            }
            CriterionEntry::new(id, lhs / den, 2.0, sign, dir)
        })
        .reduce(CriterionEntry::better)
        .expect("two directions")
}

pub fn rescaled_reid(m: &QuadratureMoments) -> CriterionEntry {
    let s = split(m);
    let id = CriterionId::RescaledReid;
    DIRECTIONS
        .iter()
        .map(|&(dir, inf, _)| {
            let den = (1.0 - s.ratio[inf]).powi(2);
            if !(den >= DEGENERATE_DENOMINATOR * DEGENERATE_DENOMINATOR) {
                return CriterionEntry::undefined(id, SignChoice::None, dir);
            }
            let (dx, dy) = reid_inference(m, dir);
            CriterionEntry::new(id, dx * dy / den, 1.0, SignChoice::None, dir)
        })
        .reduce(CriterionEntry::better)
        .expect("two directions")
}

pub fn classic_duan(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    CriterionEntry::new(CriterionId::ClassicDuan, lhs, 4.0, sign, Inference::Symmetric)
}

pub fn classic_epr_sum(m: &QuadratureMoments) -> CriterionEntry {
    let (lhs, sign) = best_pairing(m);
    CriterionEntry::new(CriterionId::ClassicEprSum, lhs, 2.0, sign, Inference::Symmetric)
}

pub fn classic_reid(m: &QuadratureMoments) -> CriterionEntry {
    DIRECTIONS
        .iter()
        .map(|&(dir, _, _)| {
            let (dx, dy) = reid_inference(m, dir);
            CriterionEntry::new(CriterionId::ClassicReid, dx * dy, 1.0, SignChoice::None, dir)
        })
        .reduce(CriterionEntry::better)
        .expect("two directions")
}

pub fn evaluate_one(id: CriterionId, m: &QuadratureMoments) -> CriterionEntry {
    match id {
        CriterionId::Separability => separability(m),
        CriterionId::EprSum => epr_sum(m),
        CriterionId::EprReid => epr_reid(m),
        CriterionId::CoherentSeparability => coherent_separability(m),
        CriterionId::CoherentEprSum => coherent_epr_sum(m),
        CriterionId::CoherentReid => coherent_reid(m),
        CriterionId::RescaledSeparability => rescaled_separability(m),
        CriterionId::RescaledEprSum => rescaled_epr_sum(m),
        CriterionId::RescaledReid => rescaled_reid(m),
        CriterionId::ClassicDuan => classic_duan(m),
        CriterionId::ClassicEprSum => classic_epr_sum(m),
        CriterionId::ClassicReid => classic_reid(m),
    }
}

/// Evaluates the selected criteria in the given order.
pub fn evaluate(m: &QuadratureMoments, selection: &[CriterionId]) -> CriteriaReport {
    CriteriaReport {
        entries: selection.iter().map(|&id| evaluate_one(id, m)).collect(),
        coherent_lo_assumed: selection.iter().any(|id| id.assumes_coherent_lo()),
    }
}

pub fn evaluate_all(m: &QuadratureMoments) -> CriteriaReport {
    evaluate(m, &CriterionId::ALL)
}

/// Report for a point whose moments could not be formed.
pub fn undefined_report(selection: &[CriterionId]) -> CriteriaReport {
    CriteriaReport {
        entries: selection
            .iter()
            .map(|&id| CriterionEntry::undefined(id, SignChoice::None, Inference::Symmetric))
            .collect(),
        coherent_lo_assumed: selection.iter().any(|id| id.assumes_coherent_lo()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Moments with unit variances, no correlations, and the given ratios.
    fn vacuum_like(r: f64) -> QuadratureMoments {
        let mut v = [0.0; 18];
        for i in 4..8 {
            v[i] = 1.0;
        }
        for i in 10..14 {
            v[i] = 2.0;
        }
        v[14] = r * 10.0;
        v[15] = r * 10.0;
        v[16] = 10.0;
        v[17] = 10.0;
        QuadratureMoments::from_values(v)
    }

    fn correlated(var: f64, cov: f64, r: f64) -> QuadratureMoments {
        let mut m = vacuum_like(r);
        m.var_x1 = var;
        m.var_x2 = var;
        m.var_y1 = var;
        m.var_y2 = var;
        m.cov_x = cov;
        m.cov_y = -cov;
        m.var_x_sum = 2.0 * var + 2.0 * cov;
        m.var_x_diff = 2.0 * var - 2.0 * cov;
        m.var_y_sum = 2.0 * var - 2.0 * cov;
        m.var_y_diff = 2.0 * var + 2.0 * cov;
        m
    }

    #[test]
    fn initial_point_sits_on_the_boundary() {
        let m = vacuum_like(0.0);
        let s = separability(&m);
        assert_eq!((s.lhs, s.rhs, s.margin), (4.0, 4.0, 0.0));
        assert!(!s.violated);
        let e = epr_sum(&m);
        assert_eq!((e.lhs, e.rhs), (4.0, 2.0));
        assert_eq!(rescaled_separability(&m).lhs, 4.0);
        let c = coherent_separability(&m);
        assert_eq!((c.lhs, c.rhs), (4.0, 4.0));
    }

    #[test]
    fn reid_inference_limits() {
        let m = correlated(2.0, 0.0, 0.1);
        assert_eq!(reid_inference(&m, Inference::SecondFromFirst), (2.0, 2.0));
        let m = correlated(2.0, 2.0, 0.1);
        let (dx, dy) = reid_inference(&m, Inference::SecondFromFirst);
        assert!(dx.abs() < 1e-15 && dy.abs() < 1e-15);
    }

    #[test]
    fn degenerate_regressor_uses_plain_variance() {
        let mut m = correlated(1.0, 0.5, 0.1);
        m.var_x1 = 0.0;
        let (dx, _) = reid_inference(&m, Inference::SecondFromFirst);
        assert_eq!(dx, 1.0);
    }

    #[test]
    fn classic_limit_of_the_bounds() {
        let m = vacuum_like(1e-12);
        assert!((separability(&m).rhs - 4.0).abs() < 1e-9);
        assert!((epr_reid(&m).rhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sign_branch_follows_correlation() {
        assert_eq!(separability(&correlated(2.0, 1.5, 0.1)).sign, SignChoice::Minus);
        assert_eq!(separability(&correlated(2.0, -1.5, 0.1)).sign, SignChoice::Plus);
    }

    #[test]
    fn equal_ratios_share_rescaled_lhs() {
        let m = correlated(1.3, 0.9, 0.3);
        let a = rescaled_separability(&m);
        let b = rescaled_epr_sum(&m);
        assert!((a.lhs - b.lhs).abs() < 1e-12);
    }

    #[test]
    fn undefined_points_are_flagged() {
        let m = correlated(1.3, 0.9, 1.0);
        let e = rescaled_separability(&m);
        assert!(!e.defined && !e.violated && e.margin.is_nan());
        let mut m = correlated(1.3, 0.9, 0.2);
        m.var_x1 = 0.1;
        m.var_x2 = 0.1;
        assert!(!coherent_reid(&m).defined);
    }

    #[test]
    fn mirrored_inference_is_reported_when_smaller() {
        let mut m = correlated(1.5, 1.0, 0.2);
        m.pop_a1 = 1.0; // r_1 = 0.1, r_2 = 0.2
        let e = epr_sum(&m);
        assert_eq!(e.inference, Inference::FirstFromSecond);
        assert!((e.rhs - 1.8).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for id in CriterionId::ALL {
            assert_eq!(id.name().parse::<CriterionId>().unwrap(), id);
        }
        assert!("nope".parse::<CriterionId>().is_err());
    }
}
