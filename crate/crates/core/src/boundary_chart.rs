//! Boundary charts of the compactification of `SL(n, ℝ)`.
//!
//! A chart is fixed by a set of break positions `c_1 < … < c_r`. A point in
//! it is a pair of partial flags with those breaks, one boundary defining
//! function `τ_i ≥ 0` per break, one unit Hilbert–Schmidt block per cluster
//! and a positive scale. For all `τ_i > 0` the group element is
//!
//! ```text
//! g = scale · λ(τ) · Σ_i c_i · ν_i · L_i · B_i · R_iᵀ
//! c_1 = 1,  c_{i+1} = c_i · τ_i,  ν_i = |det B_i|^{-1/d_i},
//! λ(τ) = Π_j τ_j^{-(n - c_j)/n}
//! ```
//!
//! where `L_i`, `R_i` are the columns of the left and right flag bases in
//! cluster `i`. The weights `ν_i` make each cluster's determinant scale
//! equal to `c_i^{d_i}`, so `λ` is exactly the factor that puts `g` on
//! `SL(n, ℝ)` and `τ_i` is the ratio of geometric-mean singular values of
//! adjacent clusters. Setting some `τ_i = 0` leaves the clusters before the
//! first vanishing coordinate; after radial projection that is a point of
//! the boundary.

use serde::{Deserialize, Serialize};

use crate::decompositions::{self, SpecialLinearElement};
use crate::error::{Error, Result};
use crate::face_lattice::FaceDescriptor;
use crate::linalg::{self, Mat, Svd};
use crate::root_datum::{simple_root_values, BlockPartition, CartanVector, NodeSet};

/// Default threshold on successive singular-value ratios that opens a break.
pub const DEFAULT_EPS_BREAK: f64 = 1e-3;
/// Upper bound on boundary coordinates accepted in a chart.
pub const CHART_EPSILON: f64 = 1.0;

const ORTHO_TOL: f64 = 1e-10;
const BLOCK_NORM_TOL: f64 = 1e-10;

/// A partial flag given by an orthonormal basis: subspace `i` is the span of
/// the first `breaks[i]` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialFlag {
    basis: Mat,
    breaks: Vec<usize>,
}

impl PartialFlag {
    pub fn new(basis: Mat, breaks: Vec<usize>) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::DimensionMismatch("flag basis must be square".into()));
        }
        BlockPartition::new(basis.nrows(), &breaks)?;
        let defect = linalg::orthogonality_defect(&basis);
        if !(defect <= ORTHO_TOL) {
            return Err(Error::InvalidParameter(format!(
                "flag basis is not orthogonal (defect {defect:e})"
            )));
        }
        Ok(Self { basis, breaks })
    }

    pub(crate) fn new_unchecked(basis: Mat, breaks: Vec<usize>) -> Self {
        Self { basis, breaks }
    }

    pub fn standard(n: usize, breaks: Vec<usize>) -> Result<Self> {
        Self::new(Mat::identity(n, n), breaks)
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    pub fn partition(&self) -> BlockPartition {
        BlockPartition::new(self.n(), &self.breaks).expect("validated on construction")
    }

    /// Orthonormal basis of subspace `i`.
    pub fn subspace(&self, i: usize) -> Mat {
        self.basis.columns(0, self.breaks[i]).clone_owned()
    }

    pub fn projector(&self, i: usize) -> Mat {
        linalg::leading_projector(&self.basis, self.breaks[i])
    }

    pub fn projectors(&self) -> Vec<Mat> {
        (0..self.breaks.len()).map(|i| self.projector(i)).collect()
    }

    /// Largest principal angle between corresponding subspaces.
    pub fn distance(&self, other: &PartialFlag) -> Result<f64> {
        if self.breaks != other.breaks || self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "flags with breaks {:?} and {:?}",
                self.breaks, other.breaks
            )));
        }
        let worst = (0..self.breaks.len())
            .map(|i| linalg::subspace_sine(&self.subspace(i), &other.subspace(i)))
            .fold(0.0f64, f64::max);
        Ok(worst.asin())
    }

    /// The flag `u · self`.
    pub fn rotated(&self, u: &Mat) -> PartialFlag {
        Self::new_unchecked(u * &self.basis, self.breaks.clone())
    }

    /// Columns of cluster `i` of the basis.
    pub fn cluster(&self, i: usize) -> Mat {
        let r = &self.partition().ranges()[i];
        self.basis.columns(r.start, r.len()).clone_owned()
    }
}

/// A point of the compactification expressed in a boundary chart.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryChartPoint {
    n: usize,
    breaks: Vec<usize>,
    left_flag: PartialFlag,
    right_flag: PartialFlag,
    tau: Vec<f64>,
    blocks: Vec<Mat>,
    scale: f64,
}

impl BoundaryChartPoint {
    pub fn new(
        left_flag: PartialFlag,
        right_flag: PartialFlag,
        tau: Vec<f64>,
        blocks: Vec<Mat>,
        scale: f64,
    ) -> Result<Self> {
        let n = left_flag.n();
        let breaks = left_flag.breaks().to_vec();
        if right_flag.n() != n || right_flag.breaks() != breaks.as_slice() {
            return Err(Error::InvalidChart("left and right flags disagree".into()));
        }
        if tau.len() != breaks.len() {
            return Err(Error::InvalidChart(format!(
                "{} boundary coordinates for {} breaks",
                tau.len(),
                breaks.len()
            )));
        }
        for (index, &value) in tau.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeTau { index, value });
            }
            if !(value < CHART_EPSILON) {
                return Err(Error::InvalidChart(format!(
                    "tau[{index}] = {value:e} outside [0, {CHART_EPSILON})"
                )));
            }
        }
        let sizes = left_flag.partition().sizes();
        if blocks.len() != sizes.len() {
            return Err(Error::InvalidChart(format!(
                "{} blocks for {} clusters",
                blocks.len(),
                sizes.len()
            )));
        }
        for (i, (b, &d)) in blocks.iter().zip(&sizes).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::InvalidChart(format!("block {i} is not {d}x{d}")));
            }
            if (linalg::hs_norm(b) - 1.0).abs() > BLOCK_NORM_TOL {
                return Err(Error::InvalidChart(format!(
                    "block {i} does not have unit norm"
                )));
            }
            if linalg::determinant(b) == 0.0 {
                return Err(Error::SingularBlock(i));
            }
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidChart(format!(
                "scale {scale:e} is not positive"
            )));
        }
        Ok(Self {
            n,
            breaks,
            left_flag,
            right_flag,
            tau,
            blocks,
            scale,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    pub fn left_flag(&self) -> &PartialFlag {
        &self.left_flag
    }

    pub fn right_flag(&self) -> &PartialFlag {
        &self.right_flag
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn partition(&self) -> BlockPartition {
        self.left_flag.partition()
    }

    /// The node subset `S = D ∖ breaks` labelling the face this chart reaches.
    pub fn subset(&self) -> NodeSet {
        NodeSet::new(self.n, self.breaks.iter().copied())
            .expect("validated breaks")
            .complement()
    }

    pub fn face(&self) -> FaceDescriptor {
        FaceDescriptor::new(&self.subset())
    }

    pub fn is_interior(&self) -> bool {
        self.tau.iter().all(|&t| t > 0.0)
    }

    /// `c_i = Π_{j<i} τ_j`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut c = 1.0;
        out.push(c);
        for t in &self.tau {
            c *= t;
            out.push(c);
        }
        out
    }

    /// Blocks rescaled to absolute determinant one.
    pub fn unimodular_blocks(&self) -> Vec<Mat> {
        self.blocks.iter().map(unimodular).collect()
    }

    /// `λ(τ)`, the determinant normalisation; requires all `τ > 0`.
    pub fn normalisation(&self) -> f64 {
        let n = self.n as f64;
        let log: f64 = self
            .tau
            .iter()
            .zip(&self.breaks)
            .map(|(t, &c)| -(n - c as f64) / n * t.ln())
            .sum();
        log.exp()
    }

    /// Block-diagonal middle factor: `g = L · core · Rᵀ` for interior points.
    pub fn core(&self) -> Result<Mat> {
        if !self.is_interior() {
            return Err(Error::InvalidChart(
                "core factor exists only when every tau is positive".into(),
            ));
        }
        let pre = self.scale * self.normalisation();
        let blocks: Vec<Mat> = self
            .unimodular_blocks()
            .into_iter()
            .zip(self.coefficients())
            .map(|(b, c)| b * (pre * c))
            .collect();
        Ok(linalg::block_diag(&blocks))
    }

    /// The element `L · block-diag(ν_i B_i) · Rᵀ`, which maps each subspace of
    /// the right flag onto the matching subspace of the left flag. It is the
    /// coordinate of the point along the fiber of its face over the flag pair.
    pub fn fiber_representative(&self) -> Mat {
        let mid = linalg::block_diag(&self.unimodular_blocks());
        self.left_flag.basis() * mid * self.right_flag.basis().transpose()
    }

    /// Element of the factored form `g = L · core · Rᵀ`.
    pub fn factored(&self) -> Result<FactoredElement> {
        Ok(FactoredElement {
            left: self.left_flag.basis().clone(),
            core: self.core()?,
            right: self.right_flag.basis().clone(),
            grading: Grading::Rows,
        })
    }
}

fn unimodular(b: &Mat) -> Mat {
    let d = b.nrows() as f64;
    let det = linalg::determinant(b).abs();
    b / det.powf(1.0 / d)
}

/// Radial projection onto the unit Hilbert–Schmidt sphere.
pub fn sphere_project(g: &Mat) -> Result<Mat> {
    let norm = linalg::hs_norm(g);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(g / norm)
}

/// Inverse of [`sphere_project`] on matrices of positive determinant.
pub fn sl_normalize(e: &Mat) -> Result<SpecialLinearElement> {
    SpecialLinearElement::new(e.clone())
}

/// Number of singular values below `tol` times the largest.
pub fn corank(e: &Mat, tol: f64) -> usize {
    let s = linalg::singular_values(e);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x < tol * smax).count()
}

/// Which side of the core factor carries the large dynamic range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    /// `core = D · B`.
    Rows,
    /// `core = B · D`.
    Columns,
}

/// `left · core · rightᵀ` with orthogonal `left`, `right`.
///
/// Chart coordinates of a factored element are computed from the singular
/// value decomposition of `core` alone, which keeps them accurate when the
/// core is strongly graded.
#[derive(Clone, Debug)]
pub struct FactoredElement {
    pub left: Mat,
    pub core: Mat,
    pub right: Mat,
    pub grading: Grading,
}

impl FactoredElement {
    pub fn from_matrix(g: &Mat) -> Self {
        let n = g.nrows();
        Self {
            left: Mat::identity(n, n),
            core: g.clone(),
            right: Mat::identity(n, n),
            grading: Grading::Rows,
        }
    }

    pub fn matrix(&self) -> Mat {
        &self.left * &self.core * self.right.transpose()
    }

    /// `self · exp(s · right · y · rightᵀ)`.
    pub fn act_right(&self, y: &Mat, s: f64) -> Self {
        Self {
            left: self.left.clone(),
            core: &self.core * linalg::matrix_exp(&(y * s)),
            right: self.right.clone(),
            grading: Grading::Rows,
        }
    }

    /// `exp(s · left · y · leftᵀ) · self`.
    pub fn act_left(&self, y: &Mat, s: f64) -> Self {
        Self {
            left: self.left.clone(),
            core: linalg::matrix_exp(&(y * s)) * &self.core,
            right: self.right.clone(),
            grading: Grading::Columns,
        }
    }

    fn svd(&self) -> Svd {
        match self.grading {
            Grading::Rows => linalg::svd(&self.core),
            Grading::Columns => linalg::svd_col_graded(&self.core),
        }
    }
}

/// A chart point together with the breaks whose gap ratio fell into the
/// ambiguous band `[eps_break, 2·eps_break)`.
#[derive(Clone, Debug)]
pub struct ChartDecomposition {
    pub point: BoundaryChartPoint,
    pub ambiguous: Vec<usize>,
}

fn check_eps(eps_break: f64) -> Result<()> {
    if !(eps_break > 0.0 && eps_break < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps_break = {eps_break} must lie in (0, 1)"
        )));
    }
    Ok(())
}

fn breaks_from_profile(sv: &[f64], eps_break: f64) -> (Vec<usize>, Vec<usize>) {
    let mut breaks = Vec::new();
    let mut ambiguous = Vec::new();
    for (j, w) in sv.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        if ratio < eps_break {
            breaks.push(j + 1);
        } else if ratio < 2.0 * eps_break {
            ambiguous.push(j + 1);
        }
    }
    (breaks, ambiguous)
}

/// Chart coordinates of `g`, with breaks where successive singular values
/// drop by more than `eps_break`.
pub fn chart_decompose(g: &SpecialLinearElement, eps_break: f64) -> Result<ChartDecomposition> {
    chart_decompose_factored(&FactoredElement::from_matrix(g.matrix()), eps_break)
}

pub fn chart_decompose_factored(f: &FactoredElement, eps_break: f64) -> Result<ChartDecomposition> {
    check_eps(eps_break)?;
    let svd = f.svd();
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let (breaks, ambiguous) = breaks_from_profile(&sv, eps_break);
    let point = point_from_svd(f, svd, breaks)?;
    Ok(ChartDecomposition { point, ambiguous })
}

/// Chart coordinates of `g` in the chart with the given breaks.
pub fn chart_decompose_in(
    g: &SpecialLinearElement,
    breaks: &NodeSet,
) -> Result<BoundaryChartPoint> {
    chart_decompose_factored_in(&FactoredElement::from_matrix(g.matrix()), breaks)
}

pub fn chart_decompose_factored_in(
    f: &FactoredElement,
    breaks: &NodeSet,
) -> Result<BoundaryChartPoint> {
    if breaks.n() != f.core.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "breaks for n = {} applied to n = {}",
            breaks.n(),
            f.core.nrows()
        )));
    }
    let svd = f.svd();
    point_from_svd(f, svd, breaks.nodes().to_vec())
}

fn point_from_svd(f: &FactoredElement, svd: Svd, breaks: Vec<usize>) -> Result<BoundaryChartPoint> {
    let n = f.core.nrows();
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    if sv.last().is_none_or(|&s| !(s > 0.0)) {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let mut left = &f.left * svd.u;
    let mut right = &f.right * svd.v;
    if linalg::determinant(&left) * linalg::determinant(&right) > 0.0 {
        decompositions::repair_orientation(&mut left, &mut right);
    }
    let partition = BlockPartition::new(n, &breaks)?;
    let mut log_means = Vec::with_capacity(partition.block_count());
    let mut blocks = Vec::with_capacity(partition.block_count());
    for r in partition.ranges() {
        let cluster = &sv[r.clone()];
        let log_mean = cluster.iter().map(|s| s.ln()).sum::<f64>() / cluster.len() as f64;
        let norm = cluster.iter().map(|s| s * s).sum::<f64>().sqrt();
        log_means.push(log_mean);
        blocks.push(linalg::diag(
            &cluster.iter().map(|s| s / norm).collect::<Vec<_>>(),
        ));
    }
    let tau: Vec<f64> = log_means.windows(2).map(|w| (w[1] - w[0]).exp()).collect();
    // log(scale) = log μ_1 − log λ(τ)
    let nf = n as f64;
    let log_lambda: f64 = tau
        .iter()
        .zip(&breaks)
        .map(|(t, &c)| -(nf - c as f64) / nf * t.ln())
        .sum();
    let scale = (log_means[0] - log_lambda).exp();
    BoundaryChartPoint::new(
        PartialFlag::new_unchecked(left, breaks.clone()),
        PartialFlag::new_unchecked(right, breaks),
        tau,
        blocks,
        scale,
    )
}

/// Matrix of a chart point: an element of `SL(n, ℝ)` when every `τ > 0`,
/// otherwise the unit-norm boundary representative built from the clusters
/// before the first vanishing coordinate.
pub fn chart_reconstruct(p: &BoundaryChartPoint) -> Result<Mat> {
    if let Some((index, &value)) = p.tau.iter().enumerate().find(|(_, t)| **t < 0.0) {
        return Err(Error::NegativeTau { index, value });
    }
    let left = p.left_flag.basis();
    let right = p.right_flag.basis();
    if p.is_interior() {
        let core = p.core()?;
        return Ok(left * core * right.transpose());
    }
    let first_zero = p
        .tau
        .iter()
        .position(|&t| t == 0.0)
        .expect("some tau vanishes");
    let ranges = p.partition().ranges();
    let coeffs = p.coefficients();
    let mut sum = Mat::zeros(p.n, p.n);
    for (i, b) in p
        .unimodular_blocks()
        .iter()
        .enumerate()
        .take(first_zero + 1)
    {
        let r = &ranges[i];
        let li = left.columns(r.start, r.len());
        let ri = right.columns(r.start, r.len());
        sum += li * (b * coeffs[i]) * ri.transpose();
    }
    sphere_project(&sum)
}

/// Chart point of the inverse element: breaks reflect, coordinates reverse,
/// the flags trade places with their clusters in reverse order and every
/// block is replaced by its normalised inverse.
pub fn invert_in_chart(p: &BoundaryChartPoint) -> Result<BoundaryChartPoint> {
    let n = p.n;
    let ranges = p.partition().ranges();
    let mut new_left = Mat::zeros(n, n);
    let mut new_right = Mat::zeros(n, n);
    let mut col = 0;
    for r in ranges.iter().rev() {
        let d = r.len();
        new_left
            .columns_mut(col, d)
            .copy_from(&p.right_flag.basis().columns(r.start, d));
        new_right
            .columns_mut(col, d)
            .copy_from(&p.left_flag.basis().columns(r.start, d));
        col += d;
    }
    let breaks: Vec<usize> = p.breaks.iter().rev().map(|c| n - c).collect();
    let mut blocks = Vec::with_capacity(p.blocks.len());
    for (i, b) in p.blocks.iter().enumerate().rev() {
        let inv = b.clone().try_inverse().ok_or(Error::SingularBlock(i))?;
        let norm = linalg::hs_norm(&inv);
        blocks.push(inv / norm);
    }
    let tau: Vec<f64> = p.tau.iter().rev().copied().collect();
    BoundaryChartPoint::new(
        PartialFlag::new_unchecked(new_left, breaks.clone()),
        PartialFlag::new_unchecked(new_right, breaks),
        tau,
        blocks,
        1.0 / p.scale,
    )
}

/// Limit point of `k1 · exp(tH) · k2` as `t → ∞`.
#[derive(Clone, Debug)]
pub struct FaceLimit {
    pub face: FaceDescriptor,
    pub left_flag: PartialFlag,
    pub right_flag: PartialFlag,
    pub fiber_representative: Mat,
}

/// Componentwise distance between a chart point and a face limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitDistance {
    pub left_flag: f64,
    pub right_flag: f64,
    pub fiber: f64,
    pub max_tau: f64,
}

impl LimitDistance {
    pub fn max(&self) -> f64 {
        self.left_flag
            .max(self.right_flag)
            .max(self.fiber)
            .max(self.max_tau)
    }

    pub fn flags(&self) -> f64 {
        self.left_flag.max(self.right_flag)
    }
}

impl FaceLimit {
    pub fn distance_to(&self, p: &BoundaryChartPoint) -> Result<LimitDistance> {
        Ok(LimitDistance {
            left_flag: self.left_flag.distance(p.left_flag())?,
            right_flag: self.right_flag.distance(p.right_flag())?,
            fiber: linalg::spectral_norm(&(p.fiber_representative() - &self.fiber_representative)),
            max_tau: p.tau().iter().copied().fold(0.0, f64::max),
        })
    }
}

fn check_special_orthogonal(k: &Mat, name: &str) -> Result<()> {
    let defect = linalg::orthogonality_defect(k);
    if !(defect <= ORTHO_TOL) || linalg::determinant(k) < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} is not special orthogonal (defect {defect:e})"
        )));
    }
    Ok(())
}

pub fn curve_limit(k1: &Mat, h: &CartanVector, k2: &Mat) -> Result<FaceLimit> {
    let n = h.n();
    if k1.shape() != (n, n) || k2.shape() != (n, n) {
        return Err(Error::DimensionMismatch(
            "k1, k2 and H disagree on n".into(),
        ));
    }
    check_special_orthogonal(k1, "k1")?;
    check_special_orthogonal(k2, "k2")?;
    let alpha = simple_root_values(h);
    let scale = h.entries().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidParameter("H must be non-zero".into()));
    }
    let tol = 1e-12 * scale;
    if let Some((i, &v)) = alpha.iter().enumerate().find(|(_, v)| **v < -tol) {
        return Err(Error::OutsideChamber {
            node: i + 1,
            value: v,
        });
    }
    let subset = NodeSet::new(
        n,
        alpha
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= tol)
            .map(|(i, _)| i + 1),
    )?;
    let breaks = subset.complement().nodes().to_vec();
    let left_flag = PartialFlag::new(k1.clone(), breaks.clone())?;
    let right_flag = PartialFlag::new(k2.transpose(), breaks.clone())?;
    // exp(tH) is scalar on every cluster, so its unimodular part is the identity
    let fiber_representative = k1 * k2;
    Ok(FaceLimit {
        face: FaceDescriptor::new(&subset),
        left_flag,
        right_flag,
        fiber_representative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl(m: Mat) -> SpecialLinearElement {
        SpecialLinearElement::new(m).unwrap()
    }

    fn rot3(a: f64, b: f64) -> Mat {
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let x = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca]);
        let z = Mat::from_row_slice(3, 3, &[cb, -sb, 0.0, sb, cb, 0.0, 0.0, 0.0, 1.0]);
        x * z
    }

    #[test]
    fn sphere_projection() {
        let p = sphere_project(&Mat::identity(2, 2)).unwrap();
        assert!((p - Mat::identity(2, 2) / 2f64.sqrt()).amax() < 1e-15);
        let p = sphere_project(&linalg::diag(&[3.0, 0.0])).unwrap();
        assert_eq!(p, linalg::diag(&[1.0, 0.0]));
        let g = Mat::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 3.0]);
        let a = sphere_project(&g).unwrap();
        let b = sphere_project(&(&g * 17.0)).unwrap();
        assert!((a - b).amax() < 1e-15);
        assert_eq!(sphere_project(&Mat::zeros(2, 2)), Err(Error::ZeroMatrix));
    }

    #[test]
    fn sl_normalization() {
        let e = Mat::identity(2, 2) / 2f64.sqrt();
        assert!((sl_normalize(&e).unwrap().matrix() - Mat::identity(2, 2)).amax() < 1e-15);
        let e = Mat::from_row_slice(2, 2, &[8.0, 4.0, 0.0, 2.0]);
        assert!((sl_normalize(&e).unwrap().matrix() - &e / 4.0).amax() < 1e-15);
        assert!(matches!(
            sl_normalize(&linalg::diag(&[1.0, -1.0])),
            Err(Error::WrongComponent(_))
        ));
    }

    #[test]
    fn corank_examples() {
        let i3 = Mat::identity(3, 3) / 3f64.sqrt();
        assert_eq!(corank(&i3, 1e-8), 0);
        let mut r1 = Mat::zeros(3, 3);
        r1[(0, 1)] = 1.0;
        assert_eq!(corank(&r1, 1e-8), 2);
        let d = linalg::diag(&[1.0, 1e-12, 1e-12]);
        let d = sphere_project(&d).unwrap();
        assert_eq!(corank(&d, 1e-8), 2);
    }

    #[test]
    fn identity_is_an_interior_point() {
        let c = chart_decompose(&SpecialLinearElement::identity(3), DEFAULT_EPS_BREAK).unwrap();
        let p = c.point;
        assert!(p.breaks().is_empty() && p.tau().is_empty());
        assert_eq!(p.blocks().len(), 1);
        assert!((&p.blocks()[0] - Mat::identity(3, 3) / 3f64.sqrt()).amax() < 1e-15);
        assert!((p.scale() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_two_by_two() {
        let g = sl(linalg::diag(&[10.0, 0.1]));
        let p = chart_decompose(&g, 0.05).unwrap().point;
        assert_eq!(p.breaks(), &[1]);
        assert!((p.tau()[0] - 0.01).abs() < 1e-16);
        assert!((p.left_flag().basis().abs() - Mat::identity(2, 2)).amax() < 1e-15);
        assert!((p.right_flag().basis().abs() - Mat::identity(2, 2)).amax() < 1e-15);
        for b in p.blocks() {
            assert_eq!(b[(0, 0)], 1.0);
        }
        let back = chart_reconstruct(&p).unwrap();
        assert!((back - g.matrix()).amax() < 1e-14);
    }

    #[test]
    fn rotated_three_by_three() {
        let k1 = rot3(0.3, 1.1);
        let k2 = rot3(-0.7, 0.4);
        let g = sl(&k1 * linalg::diag(&[100.0, 1.0, 0.01]) * &k2);
        let p = chart_decompose(&g, 0.05).unwrap().point;
        assert_eq!(p.breaks(), &[1, 2]);
        assert!((p.tau()[0] - 0.01).abs() < 1e-14 && (p.tau()[1] - 0.01).abs() < 1e-14);
        let expect_left = PartialFlag::new(k1.clone(), vec![1, 2]).unwrap();
        let expect_right = PartialFlag::new(k2.transpose(), vec![1, 2]).unwrap();
        assert!(p.left_flag().distance(&expect_left).unwrap() < 1e-12);
        assert!(p.right_flag().distance(&expect_right).unwrap() < 1e-12);
        let back = chart_reconstruct(&p).unwrap();
        assert!((back - g.matrix()).norm() / g.matrix().norm() < 1e-13);
    }

    #[test]
    fn ambiguous_band_is_reported() {
        let g = sl(linalg::diag(&[1.0, 1.5e-3]));
        let c = chart_decompose(&g, 1e-3).unwrap();
        assert!(c.point.breaks().is_empty());
        assert_eq!(c.ambiguous, vec![1]);
        assert!(chart_decompose(&g, 1.5).is_err());
    }

    #[test]
    fn degenerate_limit_is_rank_one() {
        let k1 = rot3(0.2, 0.9);
        let k2 = rot3(1.3, -0.2);
        let left = PartialFlag::new(k1.clone(), vec![1, 2]).unwrap();
        let right = PartialFlag::new(k2.clone(), vec![1, 2]).unwrap();
        let ones = Mat::identity(1, 1);
        let p = BoundaryChartPoint::new(left, right, vec![0.0, 0.0], vec![ones.clone(); 3], 1.0)
            .unwrap();
        let rep = chart_reconstruct(&p).unwrap();
        let expected = k1.column(0) * k2.column(0).transpose();
        assert!((rep - expected).amax() < 1e-15);
    }

    #[test]
    fn two_by_two_chart_with_given_tau() {
        let left = PartialFlag::standard(2, vec![1]).unwrap();
        let right = PartialFlag::standard(2, vec![1]).unwrap();
        let one = Mat::identity(1, 1);
        let p =
            BoundaryChartPoint::new(left, right, vec![1e-4], vec![one.clone(), one], 1.0).unwrap();
        let g = chart_reconstruct(&p).unwrap();
        assert!((linalg::determinant(&g) - 1.0).abs() < 1e-12);
        assert!((g[(1, 1)] / g[(0, 0)] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn negative_tau_is_rejected() {
        let f = PartialFlag::standard(2, vec![1]).unwrap();
        let one = Mat::identity(1, 1);
        let e = BoundaryChartPoint::new(f.clone(), f, vec![-0.1], vec![one.clone(), one], 1.0);
        assert!(matches!(e, Err(Error::NegativeTau { index: 0, .. })));
    }

    #[test]
    fn inversion_examples() {
        let id = chart_decompose(&SpecialLinearElement::identity(3), DEFAULT_EPS_BREAK)
            .unwrap()
            .point;
        let inv = invert_in_chart(&id).unwrap();
        assert_eq!(inv.breaks(), id.breaks());
        assert_eq!(inv.left_flag(), id.left_flag());
        assert_eq!(inv.right_flag(), id.right_flag());
        assert!((&inv.blocks()[0] - &id.blocks()[0]).amax() < 1e-15);

        let g = sl(linalg::diag(&[10.0, 0.1]));
        let p = chart_decompose(&g, 0.05).unwrap().point;
        let q = invert_in_chart(&p).unwrap();
        assert_eq!(q.tau(), p.tau());
        let direct = chart_decompose(&g.inverse(), 0.05).unwrap().point;
        assert!(q.left_flag().distance(direct.left_flag()).unwrap() < 1e-15);
        assert!(q.right_flag().distance(direct.right_flag()).unwrap() < 1e-15);

        let g = sl(rot3(0.4, 0.1) * linalg::diag(&[1e3, 1.0, 1e-3 / 5.0]) * rot3(1.0, 2.0));
        let p = chart_decompose(&g, DEFAULT_EPS_BREAK).unwrap().point;
        let q = invert_in_chart(&p).unwrap();
        assert_eq!(q.tau(), &[p.tau()[1], p.tau()[0]]);
        let back = chart_reconstruct(&q).unwrap();
        let inv = g.inverse();
        assert!((back - inv.matrix()).norm() / inv.matrix().norm() < 1e-10);
    }

    #[test]
    fn curve_limit_examples() {
        let h = CartanVector::new(vec![0.5, -0.5]).unwrap();
        let lim = curve_limit(&Mat::identity(2, 2), &h, &Mat::identity(2, 2)).unwrap();
        assert!(lim.face.subset.is_empty());
        assert_eq!(lim.left_flag.breaks(), &[1]);
        assert!((&lim.fiber_representative - Mat::identity(2, 2)).amax() < 1e-15);
        let t: f64 = 20.0;
        let g = sl(linalg::diag(&[(t / 2.0).exp(), (-t / 2.0).exp()]));
        let p = chart_decompose(&g, DEFAULT_EPS_BREAK).unwrap().point;
        assert!((p.tau()[0] / (-t).exp() - 1.0).abs() < 1e-12);

        let h = CartanVector::coroot(3, 1).unwrap();
        let lim = curve_limit(&Mat::identity(3, 3), &h, &Mat::identity(3, 3)).unwrap();
        assert_eq!(lim.face.subset.nodes(), &[2]);
        assert_eq!(lim.left_flag.breaks(), &[1]);

        assert!(curve_limit(
            &Mat::identity(3, 3),
            &CartanVector::zero(3),
            &Mat::identity(3, 3)
        )
        .is_err());
        let bad = CartanVector::new(vec![-1.0, 1.0]).unwrap();
        assert!(matches!(
            curve_limit(&Mat::identity(2, 2), &bad, &Mat::identity(2, 2)),
            Err(Error::OutsideChamber { node: 1, .. })
        ));
    }
}
