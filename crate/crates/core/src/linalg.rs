//! Dense linear-algebra helpers shared by the decomposition and chart code.
//!
//! The singular value decomposition here is a one-sided (Hestenes) Jacobi
//! iteration. Applied to the columns of `B·D` with `B` well conditioned and
//! `D` diagonal it resolves singular values and vectors to relative accuracy
//! independent of the spread of `D`, which is the regime of chart points close
//! to a corner of the compactification. [`svd`] orthogonalises rows and is
//! the right choice for row-graded input `D·B`; [`svd_col_graded`]
//! orthogonalises columns.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;

const MAX_SWEEPS: usize = 80;

/// `a = u · diag(singular_values) · vᵀ`, singular values non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub singular_values: DVector<f64>,
    pub v: Mat,
}

impl Svd {
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    pub fn condition_number(&self) -> f64 {
        let n = self.singular_values.len();
        if n == 0 {
            return 1.0;
        }
        let smin = self.singular_values[n - 1];
        if smin == 0.0 {
            f64::INFINITY
        } else {
            self.singular_values[0] / smin
        }
    }
}

/// Orthogonalise the columns of `g` by plane rotations. Returns `(w, v)` with
/// `g·v = w`, the columns of `w` mutually orthogonal and `v` orthogonal.
fn jacobi_columns(g: &Mat) -> (Mat, Mat) {
    let m = g.nrows();
    let k = g.ncols();
    let mut w = g.clone();
    let mut v = Mat::identity(k, k);
    let tol = f64::EPSILON * (m.max(1) as f64);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..k {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Fill columns flagged in `missing` with unit vectors orthogonal to every
/// other column.
fn complete_orthonormal(u: &mut Mat, missing: &[bool]) {
    let m = u.nrows();
    for j in 0..u.ncols() {
        if !missing[j] {
            continue;
        }
        let mut best: Option<DVector<f64>> = None;
        for e in 0..m {
            let mut cand = DVector::zeros(m);
            cand[e] = 1.0;
            for other in 0..u.ncols() {
                if other == j || (missing[other] && other > j) {
                    continue;
                }
                let col = u.column(other).clone_owned();
                let d = col.dot(&cand);
                cand -= col * d;
            }
            let norm = cand.norm();
            if best.as_ref().is_none_or(|b| norm > b.norm()) {
                best = Some(cand);
            }
        }
        let b = best.expect("non-empty basis");
        let norm = b.norm();
        u.set_column(j, &(b / norm));
    }
}

fn finish(w: Mat, v: Mat) -> (Mat, DVector<f64>, Mat) {
    let k = w.ncols();
    let mut sv: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // stable: ties keep the input ordering
    order.sort_by(|&a, &b| {
        sv[b]
            .partial_cmp(&sv[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let smax = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let mut u = Mat::zeros(w.nrows(), k);
    let mut vs = Mat::zeros(v.nrows(), k);
    let mut missing = vec![false; k];
    let mut sorted = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let s = sv[src];
        if s > 0.0 && s > smax * f64::EPSILON * 1e-3 {
            u.set_column(dst, &(w.column(src) / s));
        } else {
            missing[dst] = true;
        }
        vs.set_column(dst, &v.column(src));
        sorted.push(s);
    }
    if missing.iter().any(|&m| m) {
        complete_orthonormal(&mut u, &missing);
    }
    sv.clear();
    (u, DVector::from_vec(sorted), vs)
}

/// Singular value decomposition accurate for row-graded matrices.
pub fn svd(a: &Mat) -> Svd {
    assert_eq!(a.nrows(), a.ncols(), "svd expects a square matrix");
    let (w, v) = jacobi_columns(&a.transpose());
    // aᵀ v = w = uw Σ  ⇒  a = v Σ uwᵀ
    let (uw, s, v) = finish(w, v);
    Svd {
        u: v,
        singular_values: s,
        v: uw,
    }
}

/// Singular value decomposition accurate for column-graded matrices.
pub fn svd_col_graded(a: &Mat) -> Svd {
    assert_eq!(a.nrows(), a.ncols(), "svd expects a square matrix");
    let (w, v) = jacobi_columns(a);
    let (u, s, v) = finish(w, v);
    Svd {
        u,
        singular_values: s,
        v,
    }
}

/// Singular values of an arbitrary (possibly rectangular) matrix, non-increasing.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let g = if a.nrows() >= a.ncols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (w, _) = jacobi_columns(&g);
    let mut s: Vec<f64> = (0..w.ncols()).map(|j| w.column(j).norm()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn spectral_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(a: &Mat) -> f64 {
    a.norm()
}

pub fn orthogonality_defect(q: &Mat) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - Mat::identity(n, n)).amax()
}

/// Orthogonal projector onto the span of the first `k` columns of `basis`.
pub fn leading_projector(basis: &Mat, k: usize) -> Mat {
    let q = basis.columns(0, k);
    q * q.transpose()
}

/// Sine of the largest principal angle between the column spans of two
/// matrices with orthonormal columns and the same column count. Computed from
/// the residual `qa - qb·qbᵀ·qa`, which keeps full accuracy for small angles.
pub fn subspace_sine(qa: &Mat, qb: &Mat) -> f64 {
    debug_assert_eq!(qa.shape(), qb.shape());
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = qa - qb * (qb.transpose() * qa);
    spectral_norm(&resid).min(1.0)
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((off, off), (d, d)).copy_from(b);
        off += d;
    }
    out
}

pub fn determinant(a: &Mat) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    a.clone().lu().determinant()
}

/// `log |det a|` via LU; `-inf` for singular input.
pub fn log_abs_det(a: &Mat) -> f64 {
    let lu = a.clone().lu();
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].abs().ln()).sum()
}

pub fn matrix_exp(a: &Mat) -> Mat {
    a.clone().exp()
}

pub fn diag(entries: &[f64]) -> Mat {
    Mat::from_diagonal(&DVector::from_column_slice(entries))
}
