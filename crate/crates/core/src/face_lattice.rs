//! Boundary faces `F̄_S`, indexed by subsets `S ⊆ D` of the Dynkin nodes,
//! and the parabolic data attached to them.
//!
//! Parabolics are represented by the flags they stabilise; every membership
//! test below is phrased with orthogonal projectors onto flag subspaces.

use serde::{Deserialize, Serialize};

use crate::boundary_chart::PartialFlag;
use crate::decompositions::{horospherical_matrix, SpecialLinearElement};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::root_datum::{BlockPartition, NodeSet};

/// Dimension bookkeeping for the face `F̄_S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceDescriptor {
    pub subset: NodeSet,
    pub block_sizes: Vec<usize>,
    /// Number of breaks `|D ∖ S|`.
    pub codim: usize,
    /// Dimension of one flag variety factor, `Σ_{i<j} d_i d_j`.
    pub dim_flag: usize,
    /// Dimension of the fiber, `Σ d_i² - 1 - r`.
    pub dim_levi: usize,
    pub dim_face: usize,
}

impl FaceDescriptor {
    pub fn new(subset: &NodeSet) -> Self {
        let partition = BlockPartition::for_subset(subset);
        let block_sizes = partition.sizes();
        let r = partition.breaks().len();
        let mut dim_flag = 0;
        for (i, di) in block_sizes.iter().enumerate() {
            for dj in &block_sizes[i + 1..] {
                dim_flag += di * dj;
            }
        }
        let squares: usize = block_sizes.iter().map(|d| d * d).sum();
        let dim_levi = squares - 1 - r;
        Self {
            subset: subset.clone(),
            block_sizes,
            codim: r,
            dim_flag,
            dim_levi,
            dim_face: 2 * dim_flag + dim_levi,
        }
    }

    pub fn n(&self) -> usize {
        self.subset.n()
    }

    pub fn is_interior(&self) -> bool {
        self.codim == 0
    }
}

/// One descriptor per subset `S ⊆ D`, the interior (`S = D`) included.
pub fn enumerate_faces(n: usize) -> Result<Vec<FaceDescriptor>> {
    if n < 1 {
        return Err(Error::InvalidRank(n));
    }
    Ok(NodeSet::all_subsets(n)
        .map(|s| FaceDescriptor::new(&s))
        .collect())
}

/// `F̄_{s1}` is a face of `F̄_{s2}`.
pub fn face_partial_order(s1: &NodeSet, s2: &NodeSet) -> bool {
    s1.is_subset(s2)
}

/// `g` lies in the standard block upper-triangular parabolic `P_S`.
pub fn standard_parabolic_membership(g: &SpecialLinearElement, subset: &NodeSet, tol: f64) -> bool {
    let m = g.matrix();
    let p = BlockPartition::for_subset(subset);
    (0..m.nrows())
        .all(|i| (0..m.ncols()).all(|j| p.block_of(i) <= p.block_of(j) || m[(i, j)].abs() <= tol))
}

/// Spectral norm of the part of `g · U_i` leaving `U'_i`, maximised over
/// the subspaces of two flags with the same breaks.
fn intertwining_defect(g: &Mat, from: &PartialFlag, to: &PartialFlag) -> f64 {
    (0..from.breaks().len())
        .map(|i| {
            let q = from.subspace(i);
            let qp = to.subspace(i);
            let image = g * q;
            let resid = &image - &qp * (qp.transpose() * &image);
            linalg::spectral_norm(&resid)
        })
        .fold(0.0, f64::max)
}

/// `g` maps every subspace of `flag` into itself.
pub fn flag_stabilizer_check(g: &SpecialLinearElement, flag: &PartialFlag, tol: f64) -> bool {
    intertwining_defect(g.matrix(), flag, flag) <= tol
}

/// A parabolic subgroup, given as the stabiliser of a flag.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicDescriptor {
    pub flag: PartialFlag,
    pub subset: NodeSet,
}

impl ParabolicDescriptor {
    pub fn new(flag: PartialFlag, subset: NodeSet) -> Result<Self> {
        if subset.n() != flag.n() || subset.complement().nodes() != flag.breaks() {
            return Err(Error::InvalidParameter(format!(
                "flag breaks {:?} are not D minus {:?}",
                flag.breaks(),
                subset.nodes()
            )));
        }
        Ok(Self { flag, subset })
    }

    /// Parabolic stabilising `flag`; the subset is read off its breaks.
    pub fn of_flag(flag: PartialFlag) -> Self {
        let subset = NodeSet::new(flag.n(), flag.breaks().iter().copied())
            .expect("flag breaks are valid nodes")
            .complement();
        Self { flag, subset }
    }

    pub fn standard(subset: &NodeSet) -> Self {
        let breaks = subset.complement().nodes().to_vec();
        let flag = PartialFlag::standard(subset.n(), breaks).expect("standard flag");
        Self {
            flag,
            subset: subset.clone(),
        }
    }
}

/// `g` lies in the fiber space `F(P, P')`: it carries the flag of `p` onto
/// the flag of `p_prime`, and in those flag bases its horospherical
/// factorization has trivial `A_S` and `N_S` parts.
pub fn is_fiber_element(
    g: &Mat,
    p: &ParabolicDescriptor,
    p_prime: &ParabolicDescriptor,
    tol: f64,
) -> Result<bool> {
    if p.subset != p_prime.subset {
        return Err(Error::MismatchedSubsets);
    }
    let n = p.flag.n();
    if g.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} element for n = {n}",
            g.nrows(),
            g.ncols()
        )));
    }
    if intertwining_defect(g, &p.flag, &p_prime.flag) > tol {
        return Ok(false);
    }
    let mut in_bases = p_prime.flag.basis().transpose() * g * p.flag.basis();
    let det = linalg::determinant(&in_bases);
    if det == 0.0 || !det.is_finite() {
        return Ok(false);
    }
    if det < 0.0 {
        // reorienting the last basis vector of P's flag leaves its subspaces fixed
        in_bases.column_mut(n - 1).neg_mut();
    }
    let f = horospherical_matrix(&in_bases, &p.subset);
    let a_ok = f.a_s.iter().all(|a| (a - 1.0).abs() <= tol);
    let n_ok = (&f.n_s - Mat::identity(n, n)).amax() <= tol;
    Ok(a_ok && n_ok)
}

pub fn opposite_face(subset: &NodeSet) -> NodeSet {
    subset.reflect()
}

/// Flag of orthocomplements in reversed order: the basis columns are
/// reversed and each break `c` becomes `n - c`.
pub fn opposite_flag(flag: &PartialFlag) -> PartialFlag {
    let n = flag.n();
    let mut basis = Mat::zeros(n, n);
    for j in 0..n {
        basis.set_column(j, &flag.basis().column(n - 1 - j));
    }
    let breaks = flag.breaks().iter().rev().map(|c| n - c).collect();
    PartialFlag::new_unchecked(basis, breaks)
}
