//! Polar, Cartan (`K A K`), Iwasawa (`K A N`) and horospherical
//! (`K M_S A_S N_S`) decompositions of elements of `SL(n, ℝ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::root_datum::{BlockPartition, NodeSet};

/// Condition number above which `polar` refuses the input.
pub const MAX_CONDITION: f64 = 1e14;

/// Tolerances used when checking factorizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative Frobenius reconstruction error.
    pub reconstruction: f64,
    /// Max-entry deviation of `qᵀq` from the identity.
    pub orthogonality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            reconstruction: 1e-10,
            orthogonality: 1e-10,
        }
    }
}

/// An `n × n` real matrix of determinant one.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialLinearElement(Mat);

impl SpecialLinearElement {
    /// Rescales a matrix of positive determinant onto `SL(n, ℝ)`.
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let det = linalg::determinant(&m);
        if !(det > 0.0) {
            return Err(Error::WrongComponent(det));
        }
        let n = m.nrows() as f64;
        Ok(Self(m / det.powf(1.0 / n)))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn inverse(&self) -> Self {
        let inv = self
            .0
            .clone()
            .try_inverse()
            .expect("determinant-one matrix is invertible");
        Self(inv)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }
}

fn relative_residual(approx: &Mat, exact: &Mat) -> f64 {
    (approx - exact).norm() / exact.norm().max(f64::MIN_POSITIVE)
}

/// `g = orthogonal · positive` with `positive` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct PolarFactorization {
    pub orthogonal: Mat,
    pub positive: Mat,
}

impl PolarFactorization {
    pub fn reconstruct(&self) -> Mat {
        &self.orthogonal * &self.positive
    }
}

pub fn polar(g: &SpecialLinearElement) -> Result<PolarFactorization> {
    let svd = linalg::svd(g.matrix());
    let cond = svd.condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let orthogonal = &svd.u * svd.v.transpose();
    let mut vs = svd.v.clone();
    for (j, s) in svd.singular_values.iter().enumerate() {
        vs.column_mut(j).scale_mut(*s);
    }
    let mut positive = vs * svd.v.transpose();
    positive = (&positive + positive.transpose()) * 0.5;
    Ok(PolarFactorization {
        orthogonal,
        positive,
    })
}

/// `g = k1 · diag(a) · k2` with `k1, k2 ∈ SO(n)` and `a` non-increasing.
#[derive(Clone, Debug)]
pub struct CartanFactorization {
    pub k1: Mat,
    pub a: Vec<f64>,
    pub k2: Mat,
    /// Set when two singular values coincide, so `k1`, `k2` are not unique.
    pub non_unique: bool,
}

impl CartanFactorization {
    pub fn a_matrix(&self) -> Mat {
        linalg::diag(&self.a)
    }

    pub fn reconstruct(&self) -> Mat {
        &self.k1 * self.a_matrix() * &self.k2
    }

    pub fn check(&self, g: &SpecialLinearElement, tol: &Tolerances) -> bool {
        relative_residual(&self.reconstruct(), g.matrix()) <= tol.reconstruction
            && linalg::orthogonality_defect(&self.k1) <= tol.orthogonality
            && linalg::orthogonality_defect(&self.k2) <= tol.orthogonality
    }
}

/// Orthogonal factors of a singular value decomposition, repaired so both
/// have determinant `+1` when `det(u·vᵀ) > 0`. The repair negates the last
/// column of `u` and of `v` together, which leaves the product unchanged.
pub(crate) fn repair_orientation(u: &mut Mat, v: &mut Mat) {
    let n = u.ncols();
    if n == 0 {
        return;
    }
    if linalg::determinant(u) < 0.0 {
        u.column_mut(n - 1).neg_mut();
        v.column_mut(n - 1).neg_mut();
    }
}

fn has_repeats(values: &[f64]) -> bool {
    values
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() <= 1e-12 * w[0].abs().max(f64::MIN_POSITIVE))
}

pub fn cartan_kak(g: &SpecialLinearElement) -> CartanFactorization {
    let svd = linalg::svd(g.matrix());
    let (mut u, mut v) = (svd.u, svd.v);
    repair_orientation(&mut u, &mut v);
    let a: Vec<f64> = svd.singular_values.iter().copied().collect();
    CartanFactorization {
        k1: u,
        non_unique: has_repeats(&a),
        a,
        k2: v.transpose(),
    }
}

/// `m = q · r` with `r` upper triangular with positive diagonal.
pub(crate) fn qr_positive(m: &Mat) -> (Mat, Mat) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows() {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// `g = k · diag(a) · n_upper`.
#[derive(Clone, Debug)]
pub struct IwasawaFactorization {
    pub k: Mat,
    pub a: Vec<f64>,
    pub n_upper: Mat,
}

impl IwasawaFactorization {
    pub fn reconstruct(&self) -> Mat {
        &self.k * linalg::diag(&self.a) * &self.n_upper
    }

    pub fn check(&self, g: &SpecialLinearElement, tol: &Tolerances) -> bool {
        let n = self.a.len();
        let unit = (0..n).all(|i| (self.n_upper[(i, i)] - 1.0).abs() <= tol.orthogonality);
        unit && relative_residual(&self.reconstruct(), g.matrix()) <= tol.reconstruction
            && linalg::orthogonality_defect(&self.k) <= tol.orthogonality
    }
}

pub fn iwasawa_kan(g: &SpecialLinearElement) -> IwasawaFactorization {
    let (k, r) = qr_positive(g.matrix());
    let n = g.n();
    let a: Vec<f64> = (0..n).map(|i| r[(i, i)]).collect();
    let mut n_upper = r;
    for i in 0..n {
        let d = a[i];
        n_upper.row_mut(i).unscale_mut(d);
        n_upper[(i, i)] = 1.0;
    }
    IwasawaFactorization { k, a, n_upper }
}

/// `g = k · m · a_s · n_s` relative to the standard parabolic of a node subset.
#[derive(Clone, Debug)]
pub struct HorosphericalFactorization {
    pub subset: NodeSet,
    pub k: Mat,
    /// Block diagonal, each block of absolute determinant one.
    pub m: Mat,
    /// Full diagonal of `A_S`: constant on each block.
    pub a_s: Vec<f64>,
    /// Block unipotent upper triangular.
    pub n_s: Mat,
}

impl HorosphericalFactorization {
    pub fn partition(&self) -> BlockPartition {
        BlockPartition::for_subset(&self.subset)
    }

    pub fn a_matrix(&self) -> Mat {
        linalg::diag(&self.a_s)
    }

    pub fn reconstruct(&self) -> Mat {
        &self.k * &self.m * self.a_matrix() * &self.n_s
    }

    /// One positive scale per block.
    pub fn block_scales(&self) -> Vec<f64> {
        self.partition()
            .ranges()
            .iter()
            .map(|r| self.a_s[r.start])
            .collect()
    }

    /// Ratios `τ_b = scale_{b+1} / scale_b` across each break.
    pub fn block_ratios(&self) -> Vec<f64> {
        self.block_scales()
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Factor by which `a_s · x · a_s⁻¹` scales entry `(i, j)` (0-based),
    /// written as the product of `1/τ_b` over the breaks between `i` and `j`.
    pub fn conjugation_factor(&self, i: usize, j: usize) -> f64 {
        let p = self.partition();
        let (bi, bj) = (p.block_of(i), p.block_of(j));
        let ratios = self.block_ratios();
        if bi <= bj {
            ratios[bi..bj].iter().map(|t| 1.0 / t).product()
        } else {
            ratios[bj..bi].iter().product()
        }
    }

    pub fn check(&self, g: &SpecialLinearElement, tol: &Tolerances) -> bool {
        relative_residual(&self.reconstruct(), g.matrix()) <= tol.reconstruction
            && linalg::orthogonality_defect(&self.k) <= tol.orthogonality
    }
}

/// Horospherical factorization of any matrix of positive determinant.
pub(crate) fn horospherical_matrix(g: &Mat, subset: &NodeSet) -> HorosphericalFactorization {
    let n = g.nrows();
    let (k, u) = qr_positive(g);
    let partition = BlockPartition::for_subset(subset);
    let mut m = Mat::zeros(n, n);
    let mut levi = Mat::zeros(n, n);
    let mut a_s = vec![0.0; n];
    for r in partition.ranges() {
        let d = r.len();
        let block = u.view((r.start, r.start), (d, d)).clone_owned();
        let det: f64 = (0..d).map(|i| block[(i, i)]).product();
        let scale = det.powf(1.0 / d as f64);
        m.view_mut((r.start, r.start), (d, d))
            .copy_from(&(&block / scale));
        levi.view_mut((r.start, r.start), (d, d)).copy_from(&block);
        for x in &mut a_s[r.clone()] {
            *x = scale;
        }
    }
    // (m · a_s) is block-diag(u_i) and upper triangular
    let n_s = levi
        .solve_upper_triangular(&u)
        .expect("positive diagonal blocks are invertible");
    HorosphericalFactorization {
        subset: subset.clone(),
        k,
        m,
        a_s,
        n_s,
    }
}

pub fn horospherical(
    g: &SpecialLinearElement,
    subset: &NodeSet,
) -> Result<HorosphericalFactorization> {
    if subset.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "subset for n = {} applied to a {}x{} matrix",
            subset.n(),
            g.n(),
            g.n()
        )));
    }
    Ok(horospherical_matrix(g.matrix(), subset))
}
