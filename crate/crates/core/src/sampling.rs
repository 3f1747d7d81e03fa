//! Seeded random elements: Haar-distributed rotations, Gaussian `SL(n)`
//! elements and chart points with prescribed boundary coordinates.
//!
//! Every sweep derives one independent ChaCha stream per sample index, so
//! results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::boundary_chart::{BoundaryChartPoint, PartialFlag};
use crate::decompositions::{qr_positive, SpecialLinearElement};
use crate::linalg::{self, Mat};
use crate::root_datum::NodeSet;

pub type SampleRng = ChaCha8Rng;

/// Stream `index` of the generator seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_matrix(n: usize, rng: &mut SampleRng) -> Mat {
    Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed element of `SO(n)`.
pub fn haar_special_orthogonal(n: usize, rng: &mut SampleRng) -> Mat {
    let (mut q, _) = qr_positive(&gaussian_matrix(n, rng));
    if n > 0 && linalg::determinant(&q) < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Gaussian matrix, first row negated if needed, rescaled to determinant one.
pub fn gaussian_sl(n: usize, rng: &mut SampleRng) -> SpecialLinearElement {
    loop {
        let mut m = gaussian_matrix(n, rng);
        let det = linalg::determinant(&m);
        if det == 0.0 {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
        }
        if let Ok(g) = SpecialLinearElement::new(m) {
            return g;
        }
    }
}

/// Unit-norm `d × d` block `q1 · diag(s) · q2` with `q1, q2 ∈ SO(d)` and
/// singular values drawn from `[spread, 1]`, so `det > 0`.
pub fn random_block(d: usize, spread: f64, rng: &mut SampleRng) -> Mat {
    if d == 1 {
        return Mat::identity(1, 1);
    }
    let s: Vec<f64> = (0..d).map(|_| rng.random_range(spread..=1.0)).collect();
    let b = haar_special_orthogonal(d, rng) * linalg::diag(&s) * haar_special_orthogonal(d, rng);
    let norm = linalg::hs_norm(&b);
    b / norm
}

/// Chart point with random flags and blocks and the given coordinates.
pub fn random_chart_point(
    n: usize,
    breaks: &NodeSet,
    tau: &[f64],
    spread: f64,
    rng: &mut SampleRng,
) -> BoundaryChartPoint {
    let left = PartialFlag::new(haar_special_orthogonal(n, rng), breaks.nodes().to_vec())
        .expect("orthogonal basis");
    let right = PartialFlag::new(haar_special_orthogonal(n, rng), breaks.nodes().to_vec())
        .expect("orthogonal basis");
    let blocks = left
        .partition()
        .sizes()
        .into_iter()
        .map(|d| random_block(d, spread, rng))
        .collect();
    BoundaryChartPoint::new(left, right, tau.to_vec(), blocks, 1.0).expect("valid chart point")
}

/// Value drawn log-uniformly from `[lo, hi]`.
pub fn log_uniform(lo: f64, hi: f64, rng: &mut SampleRng) -> f64 {
    rng.random_range(lo.ln()..=hi.ln()).exp()
}

/// Random subset of the nodes, each kept with probability one half.
pub fn random_subset(n: usize, rng: &mut SampleRng) -> NodeSet {
    let bits = if n > 1 {
        rng.random_range(0..(1u64 << (n - 1)))
    } else {
        0
    };
    NodeSet::from_bits(n, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_rotation_is_special_orthogonal() {
        let mut rng = sample_rng(7, 0);
        for n in 1..7 {
            let q = haar_special_orthogonal(n, &mut rng);
            assert!(linalg::orthogonality_defect(&q) < 1e-13);
            assert!((linalg::determinant(&q) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = gaussian_matrix(3, &mut sample_rng(11, 4));
        let b = gaussian_matrix(3, &mut sample_rng(11, 4));
        let c = gaussian_matrix(3, &mut sample_rng(11, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_elements_have_unit_determinant() {
        let mut rng = sample_rng(3, 0);
        for n in 1..7 {
            let g = gaussian_sl(n, &mut rng);
            assert!((linalg::determinant(g.matrix()) - 1.0).abs() < 1e-10);
        }
    }
}
