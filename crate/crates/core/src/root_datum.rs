//! Root combinatorics of type `A_{n-1}`: the Dynkin nodes `D = {1, …, n-1}`,
//! positive roots `e_i - e_j` stored as index pairs, coroots, coweight
//! coordinates and the Haar-exponent multiindex `σ`.
//!
//! Everything here is exact integer arithmetic except the Cartan-vector and
//! coweight helpers, which work on `f64` diagonals.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

const TRACE_TOL: f64 = 1e-12;

/// A subset of the Dynkin nodes `{1, …, n-1}` of `SL(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeSet {
    n: usize,
    nodes: Vec<usize>,
}

impl NodeSet {
    pub fn new(n: usize, nodes: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidRank(n));
        }
        let mut v: Vec<usize> = nodes.into_iter().collect();
        for &node in &v {
            if node < 1 || node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self { n, nodes: v })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            nodes: Vec::new(),
        }
    }

    /// All of `D`.
    pub fn full(n: usize) -> Self {
        Self {
            n,
            nodes: (1..n.max(1)).collect(),
        }
    }

    /// The subset encoded by bit `k-1` of `bits` for node `k`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        let nodes = (1..n.max(1)).filter(|k| bits >> (k - 1) & 1 == 1).collect();
        Self { n, nodes }
    }

    pub fn bits(&self) -> u64 {
        self.nodes.iter().fold(0, |acc, k| acc | 1 << (k - 1))
    }

    /// Every subset of `D`, ordered by bit pattern.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = NodeSet> {
        let count = 1u64 << n.saturating_sub(1);
        (0..count).map(move |b| NodeSet::from_bits(n, b))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.nodes.iter().all(|k| other.contains(*k))
    }

    /// `D ∖ self`.
    pub fn complement(&self) -> NodeSet {
        NodeSet {
            n: self.n,
            nodes: (1..self.n.max(1)).filter(|k| !self.contains(*k)).collect(),
        }
    }

    /// Image under the diagram flip `k ↦ n - k`.
    pub fn reflect(&self) -> NodeSet {
        let mut nodes: Vec<usize> = self.nodes.iter().map(|k| self.n - k).collect();
        nodes.sort_unstable();
        NodeSet { n: self.n, nodes }
    }
}

/// The partition of `{0, …, n-1}` into consecutive blocks cut after each break
/// position `c` (a block boundary sits between index `c-1` and `c`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    breaks: Vec<usize>,
}

impl BlockPartition {
    pub fn new(n: usize, breaks: &[usize]) -> Result<Self> {
        let set = NodeSet::new(n, breaks.iter().copied())?;
        if set.len() != breaks.len() || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "break positions must be strictly increasing: {breaks:?}"
            )));
        }
        Ok(Self {
            n,
            breaks: breaks.to_vec(),
        })
    }

    pub fn from_breaks(breaks: &NodeSet) -> Self {
        Self {
            n: breaks.n(),
            breaks: breaks.nodes().to_vec(),
        }
    }

    /// Partition whose breaks are `D ∖ subset`.
    pub fn for_subset(subset: &NodeSet) -> Self {
        Self::from_breaks(&subset.complement())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    pub fn block_count(&self) -> usize {
        self.breaks.len() + 1
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.breaks.len() + 1);
        let mut start = 0;
        for &c in &self.breaks {
            out.push(start..c);
            start = c;
        }
        out.push(start..self.n);
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges().iter().map(|r| r.len()).collect()
    }

    /// Index of the block containing the 0-based position `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.breaks.iter().take_while(|&&c| c <= i).count()
    }
}

/// A trace-free diagonal element of the Cartan subalgebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    entries: Vec<f64>,
}

impl CartanVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidRank(0));
        }
        let trace: f64 = entries.iter().sum();
        let scale = entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if trace.abs() > TRACE_TOL * scale {
            return Err(Error::NotTraceFree(trace));
        }
        Ok(Self { entries })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            entries: vec![0.0; n],
        }
    }

    /// The `k`-th coroot as a Cartan vector.
    pub fn coroot(n: usize, k: usize) -> Result<Self> {
        let m = coroot_matrix(n, k)?;
        Ok(Self {
            entries: (0..n).map(|i| m[(i, i)]).collect(),
        })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn to_matrix(&self) -> Mat {
        crate::linalg::diag(&self.entries)
    }
}

/// Type `A_{n-1}` root datum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootDatumA {
    pub n: usize,
    pub nodes: Vec<usize>,
    /// `(i, j)`, 1-based, `i < j`, for the root `e_i - e_j`.
    pub positive_roots: Vec<(usize, usize)>,
    /// `sigma[k-1]` = value of the sum of positive roots on coroot `k`.
    pub sigma: Vec<i64>,
}

/// `n · (value of e_i - e_j on coroot k)`, exact.
fn scaled_root_on_coroot(n: usize, (i, j): (usize, usize), k: usize) -> i64 {
    let entry = |p: usize| -> i64 {
        if p <= k {
            (n - k) as i64
        } else {
            -(k as i64)
        }
    };
    entry(i) - entry(j)
}

pub fn build_root_datum(n: usize) -> Result<RootDatumA> {
    if n < 1 {
        return Err(Error::InvalidRank(n));
    }
    let nodes: Vec<usize> = (1..n).collect();
    let positive_roots: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)))
        .collect();
    let sigma = nodes
        .iter()
        .map(|&k| {
            let scaled: i64 = positive_roots
                .iter()
                .map(|&r| scaled_root_on_coroot(n, r, k))
                .sum();
            debug_assert_eq!(scaled % n as i64, 0);
            scaled / n as i64
        })
        .collect();
    Ok(RootDatumA {
        n,
        nodes,
        positive_roots,
        sigma,
    })
}

impl RootDatumA {
    /// Degree vector of the root `(i, j)`: indicator of nodes `i..j-1`.
    pub fn degree(&self, root: (usize, usize)) -> Vec<u32> {
        root_degree(self.n, root)
    }
}

pub fn root_degree(n: usize, (i, j): (usize, usize)) -> Vec<u32> {
    (1..n).map(|k| u32::from(i <= k && k < j)).collect()
}

/// Diagonal matrix of coroot `k`: first `k` entries `1 - k/n`, the rest `-k/n`.
pub fn coroot_matrix(n: usize, k: usize) -> Result<Mat> {
    if n < 1 {
        return Err(Error::InvalidRank(n));
    }
    if k < 1 || k >= n {
        return Err(Error::NodeOutOfRange { node: k, n });
    }
    let hi = 1.0 - k as f64 / n as f64;
    let lo = -(k as f64) / n as f64;
    let entries: Vec<f64> = (0..n).map(|p| if p < k { hi } else { lo }).collect();
    Ok(crate::linalg::diag(&entries))
}

/// Values of the simple roots `α_i = e_i - e_{i+1}` on `h`.
pub fn simple_root_values(h: &CartanVector) -> Vec<f64> {
    h.entries().windows(2).map(|w| w[0] - w[1]).collect()
}

/// `τ_j = a[j+1] / a[j]` for a positive, non-increasing diagonal of
/// determinant one. The coweight coordinates are `t_j = 1/τ_j`.
pub fn coweight_coordinates(diagonal: &[f64]) -> Result<Vec<f64>> {
    if diagonal.is_empty() {
        return Err(Error::InvalidRank(0));
    }
    if let Some(x) = diagonal.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDiagonal(format!("non-positive entry {x:e}")));
    }
    if diagonal.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidDiagonal("entries not non-increasing".into()));
    }
    let log_det: f64 = diagonal.iter().map(|x| x.ln()).sum();
    if log_det.abs() > 1e-9 {
        return Err(Error::InvalidDiagonal(format!(
            "determinant {:e} is not one",
            log_det.exp()
        )));
    }
    Ok(diagonal.windows(2).map(|w| w[1] / w[0]).collect())
}

/// Positive non-increasing diagonal of determinant one with the given
/// successive ratios.
pub fn diagonal_from_coweights(tau: &[f64]) -> Vec<f64> {
    let mut logs = vec![0.0f64];
    for t in tau {
        let last = *logs.last().unwrap();
        logs.push(last + t.ln());
    }
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    logs.iter().map(|l| (l - mean).exp()).collect()
}

/// Number of positive roots whose degree vector is dominated by `alpha`.
pub fn filtration_rank(n: usize, alpha: &[i64]) -> Result<usize> {
    if n < 1 {
        return Err(Error::InvalidRank(n));
    }
    if alpha.len() != n - 1 {
        return Err(Error::DimensionMismatch(format!(
            "multiindex has length {}, expected {}",
            alpha.len(),
            n - 1
        )));
    }
    if let Some(pos) = alpha.iter().position(|&a| a < 0) {
        return Err(Error::NegativeComponent(pos));
    }
    let datum = build_root_datum(n)?;
    Ok(datum
        .positive_roots
        .iter()
        .filter(|&&r| {
            datum
                .degree(r)
                .iter()
                .zip(alpha)
                .all(|(&d, &a)| i64::from(d) <= a)
        })
        .count())
}
