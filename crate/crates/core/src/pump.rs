//! Undepleted-pump limit: with mode 0 frozen at `N` bosons the Hamiltonian
//! becomes `i chi N (a1^dag a2^dag - a1 a2)`, a two-mode squeezer with
//! `a_1(t) = cosh(r) a_1 + sinh(r) a_2^dag`, `r = N chi t`.
//!
//! Everything here is in canonical quadratures `X = a + a^dag`,
//! `Y = -i (a - a^dag)`, i.e. for an ideal, infinitely large LO.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpApproxMoments {
    pub r: f64,
    /// `Var[X_j] = Var[Y_j]`
    pub variance: f64,
    /// `Var[X_1, X_2]`
    pub cov_x: f64,
    /// `Var[Y_1, Y_2]`
    pub cov_y: f64,
}

impl PumpApproxMoments {
    pub fn new(r: f64) -> Self {
        let (s, c) = ((2.0 * r).sinh(), (2.0 * r).cosh());
        PumpApproxMoments {
            r,
            variance: c,
            cov_x: s,
            cov_y: -s,
        }
    }

    /// `Var[X_1 - X_2] + Var[Y_1 + Y_2] = 4 e^(-2r)`.
    pub fn duan_lhs(&self) -> f64 {
        (2.0 * self.variance - 2.0 * self.cov_x) + (2.0 * self.variance + 2.0 * self.cov_y)
    }

    /// Product of the optimal linear inference errors, `1 / cosh^2(2r)`.
    pub fn reid_product(&self) -> f64 {
        let dx = self.variance - self.cov_x * self.cov_x / self.variance;
        let dy = self.variance - self.cov_y * self.cov_y / self.variance;
        dx * dy
    }
}

/// Reference curve values at one scaled time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpCurvePoint {
    pub r: f64,
    /// Classic inseparability LHS, compared against 4.
    pub duan_lhs: f64,
    /// Classic Reid product, compared against 1.
    pub reid_product: f64,
}

pub fn pump_criteria_curve(r: f64) -> Result<PumpCurvePoint> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::contract(format!("squeezing parameter must be >= 0, got {r}")));
    }
    Ok(PumpCurvePoint {
        r,
        duan_lhs: 4.0 * (-2.0 * r).exp(),
        reid_product: 1.0 / (2.0 * r).cosh().powi(2),
    })
}

/// One finite-N sample to compare against the pump curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSample {
    pub scaled_time: f64,
    pub rescaled_separability: f64,
    pub n0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyPoint {
    pub scaled_time: f64,
    /// finite-N value minus `4 e^(-2 N chi t)`
    pub deviation: f64,
    /// `|deviation|` over the pump value
    pub relative_deviation: f64,
    /// `|deviation|` over the boundary value 4
    pub scale_deviation: f64,
    /// `1 - n0 / N`
    pub depletion: f64,
}

/// Pairs each finite-N sample with the pump curve on the shared grid `grid`.
pub fn small_time_consistency(
    n_total: usize,
    samples: &[FiniteSample],
    grid: &[f64],
) -> Result<Vec<ConsistencyPoint>> {
    if samples.len() != grid.len() {
        return Err(Error::contract(format!(
            "grid has {} points, samples have {}",
            grid.len(),
            samples.len()
        )));
    }
    samples
        .iter()
        .zip(grid)
        .map(|(s, &g)| {
            if (s.scaled_time - g).abs() > 1e-12 * g.abs().max(1.0) {
                return Err(Error::contract(format!(
                    "sample at N chi t = {} does not sit on grid point {g}",
                    s.scaled_time
                )));
            }
            let pump = pump_criteria_curve(g)?.duan_lhs;
            let deviation = s.rescaled_separability - pump;
            Ok(ConsistencyPoint {
                scaled_time: g,
                deviation,
                relative_deviation: deviation.abs() / pump,
                scale_deviation: deviation.abs() / 4.0,
                depletion: 1.0 - s.n0 / n_total as f64,
            })
        })
        .collect()
}
