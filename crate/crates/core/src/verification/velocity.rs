//! Chart-coordinate velocities of one-parameter subgroups acting on the left
//! or the right.

use serde::{Deserialize, Serialize};

use crate::boundary_chart::{chart_decompose_factored_in, BoundaryChartPoint, FactoredElement};
use crate::decompositions::SpecialLinearElement;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::root_datum::{diagonal_from_coweights, NodeSet};

use super::{half_decade_grid, SlopeFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Central-difference speeds of each chart component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartVelocity {
    pub left_flag: f64,
    pub right_flag: f64,
    pub fiber: f64,
    pub tau: f64,
}

impl ChartVelocity {
    pub fn max(&self) -> f64 {
        self.left_flag
            .max(self.right_flag)
            .max(self.fiber)
            .max(self.tau)
    }
}

pub(crate) fn act(f: &FactoredElement, side: Side, y: &Mat, s: f64) -> FactoredElement {
    match side {
        Side::Left => f.act_left(y, s),
        Side::Right => f.act_right(y, s),
    }
}

/// Velocity of the chart point of `f` under `exp(s·Y)`, with `Y` written in
/// the left flag basis for [`Side::Left`] and the right flag basis for
/// [`Side::Right`].
pub fn chart_velocity(
    f: &FactoredElement,
    breaks: &NodeSet,
    y: &Mat,
    side: Side,
    h: f64,
) -> Result<ChartVelocity> {
    let plus = chart_decompose_factored_in(&act(f, side, y, h), breaks)?;
    let minus = chart_decompose_factored_in(&act(f, side, y, -h), breaks)?;
    let w = 2.0 * h;
    let tau = plus
        .tau()
        .iter()
        .zip(minus.tau())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ChartVelocity {
        left_flag: plus.left_flag().distance(minus.left_flag())? / w,
        right_flag: plus.right_flag().distance(minus.right_flag())? / w,
        fiber: linalg::spectral_norm(&(plus.fiber_representative() - minus.fiber_representative()))
            / w,
        tau: tau / w,
    })
}

/// Coordinates in which the chart is a smooth embedding: `log τ`, the
/// projectors of both flags and the fiber representative.
pub(crate) fn log_chart_coordinates(p: &BoundaryChartPoint) -> Vec<f64> {
    let mut out: Vec<f64> = p.tau().iter().map(|t| t.ln()).collect();
    for flag in [p.left_flag(), p.right_flag()] {
        for proj in flag.projectors() {
            out.extend(proj.iter());
        }
    }
    out.extend(p.fiber_representative().iter());
    out
}

pub(crate) fn elementary(n: usize, i: usize, j: usize) -> Mat {
    let mut e = Mat::zeros(n, n);
    e[(i, j)] = 1.0;
    e
}

/// Speed of the left flag of `g` in the complete chart under right
/// multiplication by `exp(h·E_ij)`; indices are 1-based.
pub fn left_flag_velocity(g: &SpecialLinearElement, i: usize, j: usize, h: f64) -> Result<f64> {
    let n = g.n();
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= i < j <= {n}, got ({i}, {j})"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step {h:e} must be positive"
        )));
    }
    let breaks = NodeSet::new(n, 1..n)?;
    let f = FactoredElement::from_matrix(g.matrix());
    let base = chart_decompose_factored_in(&f, &breaks)?;
    let min_tau = base.tau().iter().copied().fold(f64::INFINITY, f64::min);
    if h > 0.01 * min_tau {
        return Err(Error::StepTooLarge { step: h, min_tau });
    }
    let moved =
        chart_decompose_factored_in(&f.act_right(&elementary(n, i - 1, j - 1), h), &breaks)?;
    Ok(base.left_flag().distance(moved.left_flag())? / h)
}

/// Measured vanishing exponent of [`left_flag_velocity`] for `E_ij` in each
/// coordinate `τ_k` at diagonal points of the complete chart. Entry `k − 1`
/// is the log-log slope as `τ_k` alone runs over `10^{-1.5} … 10^{-3.5}`
/// with the other coordinates held at `10^{-2}`.
pub fn vanishing_exponents(n: usize, i: usize, j: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidRank(n));
    }
    let grid = half_decade_grid(-1.5, -3.5);
    (0..n - 1)
        .map(|k| {
            let samples = grid
                .iter()
                .map(|&t| {
                    let mut tau = vec![1e-2; n - 1];
                    tau[k] = t;
                    let g =
                        SpecialLinearElement::new(linalg::diag(&diagonal_from_coweights(&tau)))?;
                    let min_tau = tau.iter().copied().fold(f64::INFINITY, f64::min);
                    let v = left_flag_velocity(&g, i, j, 0.005 * min_tau)?;
                    Ok((t.ln(), v.ln()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SlopeFit::new(k + 1, samples)?.slope)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_left_flag_velocity_is_linear_in_tau() {
        let samples: Vec<(f64, f64)> = [10.0, 10f64.powf(1.5), 100.0, 10f64.powf(2.5)]
            .iter()
            .map(|&t: &f64| {
                let g = SpecialLinearElement::new(linalg::diag(&[t, 1.0 / t])).unwrap();
                let tau = 1.0 / (t * t);
                let v = left_flag_velocity(&g, 1, 2, 0.005 * tau).unwrap();
                (tau.ln(), v.ln())
            })
            .collect();
        let fit = SlopeFit::new(1, samples).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = SpecialLinearElement::new(linalg::diag(&[100.0, 0.01])).unwrap();
        assert!(matches!(
            left_flag_velocity(&g, 1, 2, 1e-3),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn interior_velocity_is_bounded() {
        let g = SpecialLinearElement::new(linalg::diag(&[2.0, 0.5])).unwrap();
        let v = left_flag_velocity(&g, 1, 2, 1e-6).unwrap();
        assert!(v > 0.1 && v < 10.0);
    }
}
