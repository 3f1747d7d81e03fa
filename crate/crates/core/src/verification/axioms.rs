//! The four chart axioms: inversion (D1), boundary isotropy of the right
//! action (D2), spanning by invariant fields (D3) and minimality of the
//! defining functions (D4).

use rand::Rng;
use rayon::prelude::*;

use crate::boundary_chart::{
    chart_decompose_factored, chart_decompose_factored_in, invert_in_chart, BoundaryChartPoint,
    FactoredElement, Grading, DEFAULT_EPS_BREAK,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::root_datum::{BlockPartition, NodeSet};
use crate::sampling::{log_uniform, random_chart_point, random_subset, sample_rng, SampleRng};

use super::velocity::{act, chart_velocity, elementary, log_chart_coordinates, Side};
use super::{half_decade_grid, Axiom, AxiomReport, Bound, Detail, SlopeFit};

pub const INVERSION_TOL: f64 = 1e-7;
pub const D2_SLOPE: f64 = 0.95;
pub const M_FIBER_VELOCITY: f64 = 0.1;
pub const D3_RANK_THRESHOLD: f64 = 1e-6;
pub const D4_SLOPE_TOL: f64 = 0.05;

const BLOCK_SPREAD: f64 = 0.5;

fn with_tau(p: &BoundaryChartPoint, tau: Vec<f64>) -> Result<BoundaryChartPoint> {
    BoundaryChartPoint::new(
        p.left_flag().clone(),
        p.right_flag().clone(),
        tau,
        p.blocks().to_vec(),
        p.scale(),
    )
}

fn min_tau(p: &BoundaryChartPoint) -> f64 {
    p.tau().iter().copied().fold(f64::INFINITY, f64::min)
}

fn block_inverse(core: &Mat, partition: &BlockPartition) -> Result<Mat> {
    let mut out = Mat::zeros(core.nrows(), core.ncols());
    for (i, r) in partition.ranges().into_iter().enumerate() {
        let b = core
            .view((r.start, r.start), (r.len(), r.len()))
            .clone_owned();
        let inv = b.try_inverse().ok_or(Error::SingularBlock(i))?;
        out.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(&inv);
    }
    Ok(out)
}

/// `g⁻¹ = R · core⁻¹ · Lᵀ` for `g = L · core · Rᵀ`.
fn factored_inverse(p: &BoundaryChartPoint) -> Result<FactoredElement> {
    let core = p.core()?;
    Ok(FactoredElement {
        left: p.right_flag().basis().clone(),
        core: block_inverse(&core, &p.partition())?,
        right: p.left_flag().basis().clone(),
        grading: Grading::Rows,
    })
}

/// Largest componentwise disagreement between [`invert_in_chart`] and the
/// chart coordinates of the inverse matrix: principal angles for the flags,
/// absolute differences for `τ` and the spectral norm for the fiber
/// representative. Infinite when the two land in different charts.
pub fn inversion_discrepancy(p: &BoundaryChartPoint) -> Result<f64> {
    let predicted = invert_in_chart(p)?;
    let measured = chart_decompose_factored(&factored_inverse(p)?, DEFAULT_EPS_BREAK)?.point;
    if predicted.breaks() != measured.breaks() {
        return Ok(f64::INFINITY);
    }
    let tau = predicted
        .tau()
        .iter()
        .zip(measured.tau())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let fiber = linalg::spectral_norm(
        &(predicted.fiber_representative() - measured.fiber_representative()),
    );
    Ok(predicted
        .left_flag()
        .distance(measured.left_flag())?
        .max(predicted.right_flag().distance(measured.right_flag())?)
        .max(tau)
        .max(fiber))
}

/// Largest relative gap between the reversed coordinates `τ_{r+1-i}` and the
/// geometric-mean ratios of the singular values of `g⁻¹`.
pub fn tau_reversal_defect(p: &BoundaryChartPoint) -> Result<f64> {
    let inv = factored_inverse(p)?;
    let sv = linalg::singular_values(&inv.core);
    let n = p.n();
    let reflected: Vec<usize> = p.breaks().iter().rev().map(|c| n - c).collect();
    let partition = BlockPartition::new(n, &reflected)?;
    let log_means: Vec<f64> = partition
        .ranges()
        .into_iter()
        .map(|r| sv[r.clone()].iter().map(|s| s.ln()).sum::<f64>() / r.len() as f64)
        .collect();
    Ok(log_means
        .windows(2)
        .map(|w| (w[1] - w[0]).exp())
        .zip(p.tau().iter().rev())
        .map(|(m, t)| ((m - t) / t).abs())
        .fold(0.0, f64::max))
}

/// Seeded inversion sample: random breaks, `τ` log-uniform in
/// `[10^{-6}, 10^{-4}]`, Haar flags and blocks of spread at most two.
pub fn inversion_sample(n: usize, seed: u64, index: u64) -> BoundaryChartPoint {
    let mut rng = sample_rng(seed, index);
    let breaks = random_subset(n, &mut rng).complement();
    let tau: Vec<f64> = (0..breaks.len())
        .map(|_| log_uniform(1e-6, 1e-4, &mut rng))
        .collect();
    random_chart_point(n, &breaks, &tau, BLOCK_SPREAD, &mut rng)
}

/// D1 over `samples` seeded points.
pub fn inversion_diffeo_check(n: usize, samples: usize, seed: u64) -> Result<AxiomReport> {
    if n < 1 {
        return Err(Error::InvalidRank(n));
    }
    let details = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = inversion_sample(n, seed, i);
            let d = inversion_discrepancy(&p)?;
            Ok(Detail::new(
                format!("sample {i} breaks {:?}", p.breaks()),
                d,
                INVERSION_TOL,
                Bound::AtMost,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport::from_uniform(
        Axiom::D1,
        INVERSION_TOL,
        Bound::AtMost,
        details,
    ))
}

struct Generator {
    label: String,
    matrix: Mat,
}

/// `𝔞_S ⊕ 𝔫_S` in the right flag basis: block-constant trace-free diagonals
/// and elementary matrices below the block diagonal.
fn isotropy_generators(partition: &BlockPartition) -> Vec<Generator> {
    let n = partition.n();
    let nf = n as f64;
    let mut out = Vec::new();
    for &c in partition.breaks() {
        let d: Vec<f64> = (0..n)
            .map(|i| {
                if i < c {
                    (nf - c as f64) / nf
                } else {
                    -(c as f64) / nf
                }
            })
            .collect();
        out.push(Generator {
            label: format!("a coweight {c}"),
            matrix: linalg::diag(&d),
        });
    }
    for a in 0..n {
        for b in 0..n {
            if partition.block_of(a) > partition.block_of(b) {
                out.push(Generator {
                    label: format!("n E_{},{}", a + 1, b + 1),
                    matrix: elementary(n, a, b),
                });
            }
        }
    }
    out
}

/// `𝔪_S`: trace-free matrices inside the diagonal blocks.
fn levi_generators(partition: &BlockPartition) -> Vec<Generator> {
    let n = partition.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && partition.block_of(a) == partition.block_of(b) {
                out.push(Generator {
                    label: format!("m E_{},{}", a + 1, b + 1),
                    matrix: elementary(n, a, b),
                });
            }
        }
        if a + 1 < n && partition.block_of(a) == partition.block_of(a + 1) {
            let mut m = elementary(n, a, a);
            m[(a + 1, a + 1)] = -1.0;
            out.push(Generator {
                label: format!("m H_{}", a + 1),
                matrix: m,
            });
        }
    }
    out
}

/// D2 on the face of `subset`: along `τ_j = b_j · m` for `m` in
/// `tau_magnitudes`, every `𝔞_S ⊕ 𝔫_S` generator must have total chart speed
/// vanishing with log-log slope at least [`D2_SLOPE`] and every `𝔪_S`
/// generator must keep fiber speed at least [`M_FIBER_VELOCITY`].
pub fn isotropy_vanishing_check(
    n: usize,
    subset: &NodeSet,
    tau_magnitudes: &[f64],
    seed: u64,
) -> Result<AxiomReport> {
    if subset.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "subset for n = {} used with n = {n}",
            subset.n()
        )));
    }
    let breaks = subset.complement();
    if breaks.is_empty() {
        return Err(Error::InvalidParameter(
            "S must be a proper subset of D".into(),
        ));
    }
    if tau_magnitudes.iter().any(|m| !(*m > 0.0 && *m < 0.5)) {
        return Err(Error::InvalidParameter(
            "tau magnitudes must lie in (0, 0.5)".into(),
        ));
    }
    let mut rng: SampleRng = sample_rng(seed, subset.bits());
    let multipliers: Vec<f64> = (0..breaks.len())
        .map(|_| rng.random_range(0.5..=1.0))
        .collect();
    let base = random_chart_point(n, &breaks, &multipliers, BLOCK_SPREAD, &mut rng);
    let partition = base.partition();
    let isotropy = isotropy_generators(&partition);
    let levi = levi_generators(&partition);

    let mut iso_samples = vec![Vec::new(); isotropy.len()];
    let mut levi_min = vec![f64::INFINITY; levi.len()];
    for &m in tau_magnitudes {
        let p = with_tau(&base, multipliers.iter().map(|b| b * m).collect())?;
        let f = p.factored()?;
        let h = 0.01 * min_tau(&p);
        for (k, g) in isotropy.iter().enumerate() {
            let v = chart_velocity(&f, &breaks, &g.matrix, Side::Right, h)?;
            iso_samples[k].push((m.ln(), v.max().ln()));
        }
        for (k, g) in levi.iter().enumerate() {
            let v = chart_velocity(&f, &breaks, &g.matrix, Side::Right, h)?;
            levi_min[k] = levi_min[k].min(v.fiber);
        }
    }
    let mut details = Vec::new();
    for (g, samples) in isotropy.iter().zip(iso_samples) {
        let fit = SlopeFit::new(0, samples)?;
        details.push(Detail::new(
            format!("S {:?} {} slope", subset.nodes(), g.label),
            fit.slope,
            D2_SLOPE,
            Bound::AtLeast,
        ));
    }
    for (g, v) in levi.iter().zip(levi_min) {
        details.push(Detail::new(
            format!("S {:?} {} fiber speed", subset.nodes(), g.label),
            v,
            M_FIBER_VELOCITY,
            Bound::AtLeast,
        ));
    }
    Ok(AxiomReport::from_margins(Axiom::D2, details))
}

/// D2 for every proper subset of the nodes on the grid `10^{-1.5} … 10^{-3.5}`.
pub fn isotropy_check_all(n: usize, seed: u64) -> Result<AxiomReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} has no boundary")));
    }
    let grid = half_decade_grid(-1.5, -3.5);
    let full = NodeSet::full(n);
    let subsets: Vec<NodeSet> = NodeSet::all_subsets(n).filter(|s| *s != full).collect();
    let reports = subsets
        .par_iter()
        .map(|s| isotropy_vanishing_check(n, s, &grid, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport::merge(Axiom::D2, reports))
}

fn sl_basis(n: usize) -> Vec<Mat> {
    let mut out = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                out.push(elementary(n, a, b));
            }
        }
    }
    for a in 0..n - 1 {
        let mut m = elementary(n, a, a);
        m[(a + 1, a + 1)] = -1.0;
        out.push(m);
    }
    out
}

/// Numerical rank of the velocities of all left and right generators in
/// coordinates `(log τ, flag projectors, fiber representative)`.
pub fn b_transitivity_rank(p: &BoundaryChartPoint, h: f64) -> Result<usize> {
    if !p.is_interior() {
        return Err(Error::InvalidChart("rank needs every tau positive".into()));
    }
    let min_tau = min_tau(p);
    if !(h > 0.0) || h > 0.01 * min_tau {
        return Err(Error::StepTooLarge { step: h, min_tau });
    }
    let n = p.n();
    let breaks = p.subset().complement();
    let f = p.factored()?;
    let mut columns = Vec::new();
    for side in [Side::Left, Side::Right] {
        for y in sl_basis(n) {
            let plus = chart_decompose_factored_in(&act(&f, side, &y, h), &breaks)?;
            let minus = chart_decompose_factored_in(&act(&f, side, &y, -h), &breaks)?;
            let col: Vec<f64> = log_chart_coordinates(&plus)
                .into_iter()
                .zip(log_chart_coordinates(&minus))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            columns.push(col);
        }
    }
    let rows = columns[0].len();
    let m = Mat::from_fn(rows, columns.len(), |r, c| columns[c][r]);
    let sv = linalg::singular_values(&m);
    let top = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s > D3_RANK_THRESHOLD * top).count())
}

fn near_boundary_sample(n: usize, seed: u64, index: u64) -> BoundaryChartPoint {
    let mut rng = sample_rng(seed, index);
    let mut breaks = random_subset(n, &mut rng).complement();
    if breaks.is_empty() {
        breaks = NodeSet::new(n, [rng.random_range(1..n)]).expect("node in range");
    }
    let tau: Vec<f64> = (0..breaks.len())
        .map(|_| log_uniform(1e-4, 1e-2, &mut rng))
        .collect();
    random_chart_point(n, &breaks, &tau, BLOCK_SPREAD, &mut rng)
}

/// D3 at `samples` seeded points with `10^{-4} ≤ τ ≤ 10^{-2}`.
pub fn b_transitivity_check(n: usize, samples: usize, seed: u64) -> Result<AxiomReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} has no boundary")));
    }
    let target = (n * n - 1) as f64;
    let details = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = near_boundary_sample(n, seed, i);
            let rank = b_transitivity_rank(&p, 0.01 * min_tau(&p))?;
            Ok(Detail::new(
                format!("sample {i} breaks {:?}", p.breaks()),
                rank as f64,
                target,
                Bound::AtLeast,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport::from_uniform(
        Axiom::D3,
        target,
        Bound::AtLeast,
        details,
    ))
}

/// D4 at `p`: for each break `c_j`, `τ_j` alone runs over
/// `10^{-2.5} … 10^{-4.5}` and each upper elementary matrix crossing the break
/// (right flag basis) is fitted for the log-log slope of its left flag speed.
/// The witness is the candidate whose slope is closest to one.
pub fn minimality_probe(p: &BoundaryChartPoint) -> Result<AxiomReport> {
    if p.tau().iter().any(|t| !(*t > 0.0 && *t < 1e-2)) {
        return Err(Error::InvalidParameter(
            "minimality needs 0 < tau < 1e-2".into(),
        ));
    }
    let n = p.n();
    let breaks = p.subset().complement();
    let grid = half_decade_grid(-2.5, -4.5);
    let mut details = Vec::new();
    for (j, &c) in p.breaks().iter().enumerate() {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..c {
            for b in c..n {
                let y = elementary(n, a, b);
                let samples = grid
                    .iter()
                    .map(|&t| {
                        let mut tau = p.tau().to_vec();
                        tau[j] = t;
                        let q = with_tau(p, tau)?;
                        let v = chart_velocity(
                            &q.factored()?,
                            &breaks,
                            &y,
                            Side::Right,
                            0.01 * min_tau(&q),
                        )?;
                        Ok((t.ln(), v.left_flag.ln()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let slope = SlopeFit::new(j + 1, samples)?.slope;
                let better = best.is_none_or(|(s, _, _)| (slope - 1.0).abs() < (s - 1.0).abs());
                if better {
                    best = Some((slope, a, b));
                }
            }
        }
        let (slope, a, b) = best.expect("every break has a crossing pair");
        details.push(Detail::new(
            format!("break {c} witness E_{},{} slope {slope:.6}", a + 1, b + 1),
            (slope - 1.0).abs(),
            D4_SLOPE_TOL,
            Bound::AtMost,
        ));
    }
    Ok(AxiomReport::from_uniform(
        Axiom::D4,
        D4_SLOPE_TOL,
        Bound::AtMost,
        details,
    ))
}

/// D4 at `samples` seeded points.
pub fn minimality_check(n: usize, samples: usize, seed: u64) -> Result<AxiomReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} has no boundary")));
    }
    let reports = (0..samples as u64)
        .into_par_iter()
        .map(|i| minimality_probe(&near_boundary_sample(n, seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let details = reports.into_iter().flat_map(|r| r.details).collect();
    Ok(AxiomReport::from_uniform(
        Axiom::D4,
        D4_SLOPE_TOL,
        Bound::AtMost,
        details,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_chart::PartialFlag;

    #[test]
    fn identity_inverts_exactly() {
        let n = 3;
        let p = BoundaryChartPoint::new(
            PartialFlag::standard(n, vec![]).unwrap(),
            PartialFlag::standard(n, vec![]).unwrap(),
            vec![],
            vec![Mat::identity(n, n) / (n as f64).sqrt()],
            1.0,
        )
        .unwrap();
        assert_eq!(inversion_discrepancy(&p).unwrap(), 0.0);
    }

    #[test]
    fn generator_counts() {
        let part = BlockPartition::new(3, &[1]).unwrap();
        assert_eq!(isotropy_generators(&part).len(), 1 + 2);
        assert_eq!(levi_generators(&part).len(), 3);
        let part = BlockPartition::new(4, &[1, 2, 3]).unwrap();
        assert_eq!(isotropy_generators(&part).len(), 3 + 6);
        assert!(levi_generators(&part).is_empty());
    }

    #[test]
    fn full_subset_is_rejected() {
        let err = isotropy_vanishing_check(2, &NodeSet::full(2), &[1e-2; 5], 0);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn rank_step_is_tied_to_tau() {
        let p = near_boundary_sample(2, 1, 0);
        assert!(matches!(
            b_transitivity_rank(&p, 1.0),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
