//! Degree filtration of `𝔰𝔬(n)` spanned by `κ_ij = E_ij − E_ji`, checked in
//! integer arithmetic.

use crate::root_datum::root_degree;

type IntMat = Vec<Vec<i64>>;

fn kappa(n: usize, i: usize, j: usize) -> IntMat {
    let mut m = vec![vec![0; n]; n];
    m[i][j] = 1;
    m[j][i] = -1;
    m
}

fn commutator(x: &IntMat, y: &IntMat) -> IntMat {
    let n = x.len();
    let mut out = vec![vec![0; n]; n];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..n).map(|k| x[r][k] * y[k][c] - y[r][k] * x[k][c]).sum();
        }
    }
    out
}

/// Nonzero coefficients keyed by 1-based root pair.
pub type Components = Vec<((usize, usize), i64)>;

/// Coefficients of `[κ_ij, κ_kl]` along `κ_ab` (`a < b`, 1-based pairs) and
/// the largest entry of its symmetric part, which must vanish.
pub fn commutator_components(
    n: usize,
    (i, j): (usize, usize),
    (k, l): (usize, usize),
) -> (Components, i64) {
    let c = commutator(&kappa(n, i - 1, j - 1), &kappa(n, k - 1, l - 1));
    let mut components = Vec::new();
    let mut symmetric = 0;
    for a in 0..n {
        symmetric = symmetric.max(c[a][a].abs());
        for b in a + 1..n {
            symmetric = symmetric.max((c[a][b] + c[b][a]).abs());
            if c[a][b] != 0 {
                components.push(((a + 1, b + 1), c[a][b]));
            }
        }
    }
    (components, symmetric)
}

/// Every component of every commutator `[κ_ij, κ_kl]` has degree at most
/// `deg(i, j) + deg(k, l)` componentwise.
pub fn bracket_filtration_check(n: usize) -> bool {
    assert!(n <= 8, "bracket filtration is checked for n <= 8");
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect();
    for &p in &pairs {
        for &q in &pairs {
            let (components, symmetric) = commutator_components(n, p, q);
            if symmetric != 0 {
                return false;
            }
            let bound: Vec<u32> = root_degree(n, p)
                .iter()
                .zip(root_degree(n, q))
                .map(|(a, b)| a + b)
                .collect();
            for (r, _) in components {
                if root_degree(n, r).iter().zip(&bound).any(|(d, b)| d > b) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_generators_bracket_to_the_long_one() {
        let (c, sym) = commutator_components(3, (1, 2), (2, 3));
        assert_eq!(sym, 0);
        assert_eq!(c, vec![((1, 3), 1)]);
        assert_eq!(root_degree(3, (1, 3)), vec![1, 1]);
    }

    #[test]
    fn self_bracket_vanishes() {
        let (c, sym) = commutator_components(4, (1, 2), (1, 2));
        assert!(c.is_empty());
        assert_eq!(sym, 0);
    }

    #[test]
    fn small_ranks_pass() {
        for n in 1..=6 {
            assert!(bracket_filtration_check(n));
        }
    }
}
