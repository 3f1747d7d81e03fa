//! Exponent of the Haar density near a boundary hypersurface, measured from
//! the Jacobian of Cartan coordinates.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::root_datum::build_root_datum;
use crate::sampling::{haar_special_orthogonal, sample_rng};

use super::{Axiom, AxiomReport, Bound, Detail, SlopeFit};

/// Relative slope tolerance.
pub const HAAR_SLOPE_REL: f64 = 0.02;
/// Largest accepted fit residual in log units.
pub const HAAR_RESIDUAL: f64 = 0.05;

/// `t = ln 10 · {2, 2.5, 3, 3.5, 4}`, so `τ` runs from `10^{-2}` to `10^{-4}`.
pub fn default_haar_grid() -> Vec<f64> {
    (0..5)
        .map(|k| std::f64::consts::LN_10 * (2.0 + 0.5 * k as f64))
        .collect()
}

fn antisymmetric(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = 1.0;
    m[(j, i)] = -1.0;
    m
}

/// Coordinates of a trace-free matrix: off-diagonal entries row by row,
/// then the first `n − 1` diagonal entries.
fn sl_coordinates(z: &Mat) -> Vec<f64> {
    let n = z.nrows();
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(z[(i, j)]);
            }
        }
    }
    out.extend((0..n - 1).map(|i| z[(i, i)]));
    out
}

struct CartanChart {
    n: usize,
    k1: Mat,
    k2: Mat,
    pairs: Vec<(usize, usize)>,
}

impl CartanChart {
    /// `g(0)⁻¹ · g(x)` for the parameter direction `index` moved by `s`,
    /// with `g(x) = k1 · exp(Θ) · a · exp(δH) · exp(Φ) · k2`.
    fn relative(&self, h: &[f64], index: usize, s: f64) -> Mat {
        let n = self.n;
        let m = self.pairs.len();
        let a: Vec<f64> = h.iter().map(|x| x.exp()).collect();
        let a_inv: Vec<f64> = h.iter().map(|x| (-x).exp()).collect();
        let mut rotation = Mat::identity(n, n);
        let mut torus = Mat::identity(n, n);
        let mut right = Mat::identity(n, n);
        if index < m {
            let (i, j) = self.pairs[index];
            let inner =
                self.k1.transpose() * &self.k1 * linalg::matrix_exp(&(antisymmetric(n, i, j) * s));
            rotation = Mat::from_fn(n, n, |r, c| a_inv[r] * inner[(r, c)] * a[c]);
        } else if index < m + n - 1 {
            let c = index - m;
            let mut d = vec![1.0; n];
            d[c] = s.exp();
            d[c + 1] = (-s).exp();
            torus = linalg::diag(&d);
        } else {
            let (i, j) = self.pairs[index - m - (n - 1)];
            right = linalg::matrix_exp(&(antisymmetric(n, i, j) * s));
        }
        self.k2.transpose() * rotation * torus * right * &self.k2
    }

    fn log_jacobian(&self, h: &[f64], step: f64) -> f64 {
        let dim = self.n * self.n - 1;
        let mut jac = Mat::zeros(dim, dim);
        for col in 0..dim {
            let d = (self.relative(h, col, step) - self.relative(h, col, -step)) / (2.0 * step);
            for (row, v) in sl_coordinates(&d).into_iter().enumerate() {
                jac[(row, col)] = v;
            }
        }
        linalg::log_abs_det(&jac)
    }
}

/// Fit of `log |J|` against `log τ_k` along `h = h0 + t·ϖ_k`, where `ϖ_k` is
/// the fundamental coweight of node `k` and `h0` is a seeded dominant point
/// with `α_k(h0) = 0`, so that `τ_k = e^{-t}` and every other simple root
/// value stays fixed in `[0.5, 1.5]`.
pub fn haar_exponent_fit(
    n: usize,
    break_index: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<SlopeFit> {
    if !(2..=5).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must lie in 2..=5"
        )));
    }
    if !(1..n).contains(&break_index) {
        return Err(Error::NodeOutOfRange {
            node: break_index,
            n,
        });
    }
    if t_grid.len() < 4 {
        return Err(Error::DegenerateGrid(format!(
            "{} grid points",
            t_grid.len()
        )));
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite()))
        || t_grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::DegenerateGrid(
            "grid must be positive and increasing".into(),
        ));
    }
    let mut rng = sample_rng(seed, break_index as u64);
    let k1 = haar_special_orthogonal(n, &mut rng);
    let k2 = haar_special_orthogonal(n, &mut rng);
    let alpha0: Vec<f64> = (1..n)
        .map(|i| {
            if i == break_index {
                0.0
            } else {
                rng.random_range(0.5..1.5)
            }
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let chart = CartanChart { n, k1, k2, pairs };
    let nf = n as f64;
    let samples = t_grid
        .iter()
        .map(|&t| {
            let mut alpha = alpha0.clone();
            alpha[break_index - 1] = t;
            let mut h = vec![0.0];
            for a in &alpha {
                let last = *h.last().unwrap();
                h.push(last - a);
            }
            let mean = h.iter().sum::<f64>() / nf;
            let h: Vec<f64> = h.into_iter().map(|x| x - mean).collect();
            let min_tau = alpha
                .iter()
                .map(|a| (-a).exp())
                .fold(f64::INFINITY, f64::min);
            (-t, chart.log_jacobian(&h, 0.01 * min_tau))
        })
        .collect();
    let fit = SlopeFit::new(break_index, samples)?;
    if !(fit.max_residual <= HAAR_RESIDUAL) {
        return Err(Error::UnreliableFit {
            residual: fit.max_residual,
            threshold: HAAR_RESIDUAL,
        });
    }
    Ok(fit)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarSummary {
    pub n: usize,
    pub expected: Vec<i64>,
    pub fits: Vec<SlopeFit>,
    pub report: AxiomReport,
}

/// Fits for every node on the default grid; a node passes when its slope is
/// within [`HAAR_SLOPE_REL`] of `−σ_k`.
pub fn haar_check(n: usize, seed: u64) -> Result<HaarSummary> {
    let datum = build_root_datum(n)?;
    let grid = default_haar_grid();
    let fits = (1..n)
        .into_par_iter()
        .map(|k| haar_exponent_fit(n, k, &grid, seed))
        .collect::<Result<Vec<_>>>()?;
    let expected = datum.sigma.clone();
    let details = fits
        .iter()
        .zip(&expected)
        .map(|(fit, &s)| {
            let rel = (fit.slope + s as f64).abs() / s as f64;
            Detail::new(
                format!("node {} slope {:.6} vs {}", fit.parameter, fit.slope, -s),
                rel,
                HAAR_SLOPE_REL,
                Bound::AtMost,
            )
        })
        .collect();
    Ok(HaarSummary {
        n,
        expected,
        fits,
        report: AxiomReport::from_uniform(Axiom::Haar, HAAR_SLOPE_REL, Bound::AtMost, details),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(matches!(
            haar_exponent_fit(2, 1, &[1.0, 2.0, 3.0], 0),
            Err(Error::DegenerateGrid(_))
        ));
        assert!(matches!(
            haar_exponent_fit(2, 1, &[1.0, 3.0, 2.0, 4.0], 0),
            Err(Error::DegenerateGrid(_))
        ));
        assert!(haar_exponent_fit(6, 1, &default_haar_grid(), 0).is_err());
        assert!(haar_exponent_fit(3, 3, &default_haar_grid(), 0).is_err());
    }

    #[test]
    fn coordinates_cover_trace_free_matrices() {
        let z = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, -1.0]);
        assert_eq!(sl_coordinates(&z), vec![2.0, 3.0, 1.0]);
    }
}
