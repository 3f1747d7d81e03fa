use hdc_core::boundary_chart::PartialFlag;
use hdc_core::boundary_chart::{
    chart_decompose_in, chart_reconstruct, invert_in_chart, sl_normalize, BoundaryChartPoint,
};
use hdc_core::decompositions::SpecialLinearElement;
use hdc_core::documents::{from_json, to_json};
use hdc_core::face_lattice::{
    enumerate_faces, face_partial_order, is_fiber_element, opposite_face, opposite_flag,
    ParabolicDescriptor,
};
use hdc_core::linalg::{self, Mat};
use hdc_core::root_datum::NodeSet;
use hdc_core::sampling::{
    haar_special_orthogonal, log_uniform, random_block, random_chart_point, sample_rng, SampleRng,
};
use proptest::prelude::*;

fn rel(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm()
}

/// Seeded chart point with at most three breaks and τ in [1e-4, 1e-2].
fn point(n: usize, bits: u64, seed: u64) -> BoundaryChartPoint {
    let mut rng = sample_rng(seed, n as u64);
    let mut nodes: Vec<usize> = (1..n).filter(|k| bits >> k & 1 == 1).collect();
    nodes.truncate(3);
    let breaks = NodeSet::new(n, nodes).unwrap();
    let tau: Vec<f64> = (0..breaks.len())
        .map(|_| log_uniform(1e-4, 1e-2, &mut rng))
        .collect();
    random_chart_point(n, &breaks, &tau, 0.5, &mut rng)
}

fn breaks_of(p: &BoundaryChartPoint) -> NodeSet {
    NodeSet::new(p.n(), p.breaks().iter().copied()).unwrap()
}

/// Relative accuracy available for the smallest singular values of `g`.
fn tau_tol(g: &SpecialLinearElement) -> f64 {
    let sv = g.matrix().singular_values();
    1e-13 * sv.max() / sv.min()
}

fn element(p: &BoundaryChartPoint) -> SpecialLinearElement {
    sl_normalize(&chart_reconstruct(p).unwrap()).unwrap()
}

/// `basis · blockdiag(m_i) · basisᵀ` with `|det m_i| = 1`, i.e. an element of the
/// Levi factor attached to `flag`.
fn levi_element(flag: &PartialFlag, rng: &mut SampleRng) -> Mat {
    let blocks: Vec<Mat> = flag
        .partition()
        .sizes()
        .into_iter()
        .map(|d| {
            let b = random_block(d, 0.5, rng);
            let det = linalg::determinant(&b).abs();
            b / det.powf(1.0 / d as f64)
        })
        .collect();
    flag.basis() * linalg::block_diag(&blocks) * flag.basis().transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn chart_roundtrip_in_fixed_chart(n in 2usize..=6, bits: u64, seed: u64) {
        let p = point(n, bits, seed);
        let g = element(&p);
        let q = chart_decompose_in(&g, &breaks_of(&p)).unwrap();
        prop_assert!(rel(&chart_reconstruct(&q).unwrap(), g.matrix()) <= 1e-9);
        for (a, b) in q.tau().iter().zip(p.tau()) {
            prop_assert!((a / b - 1.0).abs() <= tau_tol(&g), "{a} vs {b}");
        }
    }

    #[test]
    fn inversion_is_an_involution(n in 2usize..=5, bits: u64, seed: u64) {
        let p = point(n, bits, seed);
        let q = invert_in_chart(&p).unwrap();
        let back = invert_in_chart(&q).unwrap();
        prop_assert_eq!(back.breaks(), p.breaks());
        prop_assert!(rel(&chart_reconstruct(&back).unwrap(), &chart_reconstruct(&p).unwrap()) <= 1e-10);
        let reversed: Vec<f64> = p.tau().iter().rev().copied().collect();
        for (a, b) in q.tau().iter().zip(&reversed) {
            prop_assert!((a / b - 1.0).abs() <= 1e-10);
        }
        let mirrored: Vec<usize> = p.breaks().iter().rev().map(|c| n - c).collect();
        prop_assert_eq!(q.breaks(), mirrored.as_slice());
    }

    #[test]
    fn orthogonal_equivariance(n in 2usize..=5, bits: u64, seed: u64) {
        let p = point(n, bits, seed);
        let g = element(&p);
        let mut rng = sample_rng(seed ^ 0x5eed, 1);
        let k = haar_special_orthogonal(n, &mut rng);
        let k2 = haar_special_orthogonal(n, &mut rng);
        let moved = SpecialLinearElement::new(&k * g.matrix() * k2.transpose()).unwrap();
        let breaks = breaks_of(&p);
        let base = chart_decompose_in(&g, &breaks).unwrap();
        let q = chart_decompose_in(&moved, &breaks).unwrap();
        prop_assert!(q.left_flag().distance(&base.left_flag().rotated(&k)).unwrap() <= 1e-9);
        prop_assert!(q.right_flag().distance(&base.right_flag().rotated(&k2)).unwrap() <= 1e-9);
        for (a, b) in q.tau().iter().zip(base.tau()) {
            prop_assert!((a / b - 1.0).abs() <= tau_tol(&g));
        }
    }

    #[test]
    fn fiber_representative_intertwines_flags(n in 2usize..=5, bits: u64, seed: u64) {
        let p = point(n, bits, seed);
        let ok = is_fiber_element(
            &p.fiber_representative(),
            &ParabolicDescriptor::of_flag(p.right_flag().clone()),
            &ParabolicDescriptor::of_flag(p.left_flag().clone()),
            1e-9,
        )
        .unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn fiber_elements_absorb_levi_factors(n in 2usize..=5, bits: u64, seed: u64) {
        let p = point(n, bits, seed);
        let right = ParabolicDescriptor::of_flag(p.right_flag().clone());
        let left = ParabolicDescriptor::of_flag(p.left_flag().clone());
        let g = p.fiber_representative();
        let mut rng = sample_rng(seed, 99);
        let m = levi_element(p.right_flag(), &mut rng);
        let m_prime = levi_element(p.left_flag(), &mut rng);
        prop_assert!(is_fiber_element(&(&g * &m), &right, &left, 1e-8).unwrap());
        prop_assert!(is_fiber_element(&(&m_prime * &g), &right, &left, 1e-8).unwrap());
    }

    #[test]
    fn opposite_flag_is_an_involution(n in 2usize..=6, bits: u64, seed: u64) {
        let p = point(n, bits, seed);
        let f = p.left_flag();
        let o = opposite_flag(f);
        prop_assert_eq!(o.breaks().len(), f.breaks().len());
        prop_assert_eq!(&opposite_flag(&o), f);
    }

    #[test]
    fn json_floats_roundtrip_bitwise(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let back: Vec<f64> = from_json(&to_json(&vec![x])).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }

    #[test]
    fn opposite_face_preserves_codimension(n in 1usize..=8, bits: u64) {
        let s = NodeSet::from_bits(n, bits);
        let o = opposite_face(&s);
        prop_assert_eq!(o.len(), s.len());
        prop_assert_eq!(opposite_face(&o), s);
    }
}

#[test]
fn face_order_is_graded_by_codimension() {
    for n in 1..=5 {
        let faces = enumerate_faces(n).unwrap();
        assert_eq!(faces.len(), 1 << (n - 1));
        for a in &faces {
            for b in &faces {
                if face_partial_order(&a.subset, &b.subset) {
                    assert!(a.codim >= b.codim);
                    assert!(a.dim_face <= b.dim_face);
                }
            }
        }
    }
}
