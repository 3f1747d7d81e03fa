//! Finite-difference certification of the boundary structure: the Haar
//! density exponent, the four chart axioms and the bracket filtration.
//!
//! Asymptotic claims are measured as log-log slopes over geometric grids.

mod axioms;
mod brackets;
mod haar;
mod velocity;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use axioms::{
    b_transitivity_check, b_transitivity_rank, inversion_diffeo_check, inversion_discrepancy,
    inversion_sample, isotropy_check_all, isotropy_vanishing_check, minimality_check,
    minimality_probe, tau_reversal_defect, D2_SLOPE, D3_RANK_THRESHOLD, D4_SLOPE_TOL,
    INVERSION_TOL, M_FIBER_VELOCITY,
};
pub use brackets::{bracket_filtration_check, commutator_components};
pub use haar::{
    default_haar_grid, haar_check, haar_exponent_fit, HaarSummary, HAAR_RESIDUAL, HAAR_SLOPE_REL,
};
pub use velocity::{chart_velocity, left_flag_velocity, vanishing_exponents, ChartVelocity, Side};

/// Least-squares line through `(log τ, log quantity)` samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub parameter: usize,
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

impl SlopeFit {
    pub fn new(parameter: usize, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::DegenerateGrid(format!(
                "{} samples, at least 4 required",
                samples.len()
            )));
        }
        if samples
            .iter()
            .any(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::DegenerateGrid("non-finite sample".into()));
        }
        let m = samples.len() as f64;
        let mx = samples.iter().map(|s| s.0).sum::<f64>() / m;
        let my = samples.iter().map(|s| s.1).sum::<f64>() / m;
        let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
        let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
        let spread = samples.iter().map(|s| (s.0 - mx).abs()).fold(0.0, f64::max);
        if !(sxx > 0.0) || spread < 1e-12 * (1.0 + mx.abs()) {
            return Err(Error::DegenerateGrid("abscissae do not vary".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let max_residual = samples
            .iter()
            .map(|(x, y)| (y - slope * x - intercept).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            parameter,
            samples,
            slope,
            intercept,
            max_residual,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    D1,
    D2,
    D3,
    D4,
    Haar,
    Brackets,
}

/// Direction in which `worst_case` is compared with `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    AtMost,
    AtLeast,
}

impl Bound {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Bound::AtMost => value <= tolerance,
            Bound::AtLeast => value >= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub label: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Detail {
    pub fn new(label: impl Into<String>, value: f64, tolerance: f64, bound: Bound) -> Self {
        Self {
            label: label.into(),
            value,
            tolerance,
            bound,
            passed: bound.holds(value, tolerance),
        }
    }

    /// `value / tolerance` for lower bounds and `tolerance / value` for upper
    /// bounds, so that one is the pass boundary and larger is better.
    pub fn margin(&self) -> f64 {
        let m = match self.bound {
            Bound::AtLeast => self.value / self.tolerance,
            Bound::AtMost => self.tolerance / self.value,
        };
        if m.is_nan() {
            0.0
        } else {
            m
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub passed: bool,
    pub worst_case: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub details: Vec<Detail>,
}

impl AxiomReport {
    /// Report whose worst case is the extreme detail value; all details must
    /// share `tolerance` and `bound`.
    pub fn from_uniform(axiom: Axiom, tolerance: f64, bound: Bound, details: Vec<Detail>) -> Self {
        let worst_case = match bound {
            Bound::AtMost => details.iter().map(|d| d.value).fold(0.0, nan_max),
            Bound::AtLeast => details.iter().map(|d| d.value).fold(f64::INFINITY, nan_min),
        };
        Self {
            axiom,
            passed: bound.holds(worst_case, tolerance),
            worst_case,
            tolerance,
            bound,
            details,
        }
    }

    /// Report over details with different tolerances: the worst case is the
    /// smallest margin and passing means it is at least one.
    pub fn from_margins(axiom: Axiom, details: Vec<Detail>) -> Self {
        let worst_case = details
            .iter()
            .map(Detail::margin)
            .fold(f64::INFINITY, f64::min);
        Self {
            axiom,
            passed: worst_case >= 1.0,
            worst_case,
            tolerance: 1.0,
            bound: Bound::AtLeast,
            details,
        }
    }

    pub fn merge(axiom: Axiom, reports: Vec<AxiomReport>) -> Self {
        let details = reports.into_iter().flat_map(|r| r.details).collect();
        Self::from_margins(axiom, details)
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

/// `10^{lo}, 10^{lo - 1/2}, …` down to `10^{hi}` with `lo > hi`.
pub fn half_decade_grid(lo: f64, hi: f64) -> Vec<f64> {
    let steps = ((lo - hi) * 2.0).round() as usize;
    (0..=steps)
        .map(|k| 10f64.powf(lo - 0.5 * k as f64))
        .collect()
}
