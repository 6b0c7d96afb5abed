use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::seed;

/// An `(ℓ,s)`-partition `V₀, V₁, …, V_ℓ` of `0..n` with `|V₀| = s` and
/// `|Vᵢ| = m` for `i ≥ 1`.
///
/// Stored as a permutation `order` so that every block is a contiguous range:
/// block 0 is `order[0..s]`, block `j ≥ 1` is `order[s+(j-1)m .. s+jm]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    ell: usize,
    s: usize,
    m: usize,
    order: Vec<usize>,
    block_of: Vec<u32>,
}

impl PartitionScheme {
    fn check_shape(n: usize, ell: usize, s: usize) -> Result<usize> {
        if ell < 2 {
            return Err(Error::InvalidParameter(format!("ell must be at least 2, got {ell}")));
        }
        if s < 1 {
            return Err(Error::InvalidParameter("s must be at least 1".into()));
        }
        if s >= n {
            return Err(Error::InvalidParameter(format!("s={s} leaves no vertices outside V0 (n={n})")));
        }
        if !(n - s).is_multiple_of(ell) {
            return Err(Error::InvalidParameter(format!(
                "n - s = {} is not divisible by ell = {ell}",
                n - s
            )));
        }
        Ok((n - s) / ell)
    }

    fn from_order(ell: usize, s: usize, m: usize, order: Vec<usize>) -> Self {
        let n = order.len();
        let mut block_of = vec![0u32; n];
        for (k, &v) in order.iter().enumerate() {
            block_of[v] = if k < s { 0 } else { (1 + (k - s) / m) as u32 };
        }
        PartitionScheme {
            ell,
            s,
            m,
            order,
            block_of,
        }
    }

    /// Builds a partition from explicit blocks `[V₀, V₁, …, V_ℓ]`.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        if blocks.len() < 3 {
            return Err(Error::InvalidParameter("need V0 and at least two further blocks".into()));
        }
        let ell = blocks.len() - 1;
        let s = blocks[0].len();
        let m = blocks[1].len();
        let n = s + ell * m;
        if blocks[1..].iter().any(|b| b.len() != m) {
            return Err(Error::InvalidInput("blocks 1..ell must have equal size".into()));
        }
        Self::check_shape(n, ell, s)?;
        let order: Vec<usize> = blocks.iter().flatten().copied().collect();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidInput(format!("blocks are not a partition of 0..{n}")));
            }
        }
        Ok(Self::from_order(ell, s, m, order))
    }

    /// Uniform `(ℓ,s)`-partition with a prescribed `V₀`; the rest is shuffled.
    pub fn with_fixed_v0(n: usize, ell: usize, v0: &[usize], seed: u64) -> Result<Self> {
        let s = v0.len();
        let m = Self::check_shape(n, ell, s)?;
        let mut in_v0 = vec![false; n];
        for &v in v0 {
            if v >= n || std::mem::replace(&mut in_v0[v], true) {
                return Err(Error::InvalidInput("V0 has repeated or out-of-range vertices".into()));
            }
        }
        let mut rest: Vec<usize> = (0..n).filter(|&v| !in_v0[v]).collect();
        rest.shuffle(&mut seed::rng(seed));
        let mut order = v0.to_vec();
        order.extend(rest);
        Ok(Self::from_order(ell, s, m, order))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[inline]
    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Vertices of block `j` (`0 ≤ j ≤ ℓ`).
    pub fn block(&self, j: usize) -> &[usize] {
        assert!(j <= self.ell);
        if j == 0 {
            &self.order[..self.s]
        } else {
            let a = self.s + (j - 1) * self.m;
            &self.order[a..a + self.m]
        }
    }

    #[inline]
    pub fn block_index(&self, v: usize) -> usize {
        self.block_of[v] as usize
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        (0..=self.ell).map(|j| self.block(j).len()).collect()
    }

    pub fn v0_set(&self) -> BitSet {
        BitSet::from_iter_with_len(self.n(), self.block(0).iter().copied())
    }

    /// Arcs of the template `D_n(V)` that are interior: `(ℓ-1)m²`.
    pub fn interior_arc_count(&self) -> usize {
        (self.ell - 1) * self.m * self.m
    }

    /// Arcs of the template that are exterior: `m² + 2sm + s(s-1)`.
    pub fn exterior_arc_count(&self) -> usize {
        self.m * self.m + 2 * self.s * self.m + self.s * (self.s - 1)
    }
}

/// Uniformly random `(ℓ,s)`-partition of `0..n`.
pub fn make_partition(n: usize, ell: usize, s: usize, seed: u64) -> Result<PartitionScheme> {
    let m = PartitionScheme::check_shape(n, ell, s)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    Ok(PartitionScheme::from_order(ell, s, m, order))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    Interior,
    Exterior,
    Absent,
}

/// Classifies the arc `u → v` relative to the template `D_n(V)`.
pub fn classify_edge(v: &PartitionScheme, a: usize, b: usize) -> EdgeClass {
    if a == b {
        return EdgeClass::Absent;
    }
    let (i, j) = (v.block_index(a), v.block_index(b));
    let ell = v.ell();
    if i >= 1 && i < ell && j == i + 1 {
        EdgeClass::Interior
    } else if (i == 0 || i == ell) && j <= 1 {
        EdgeClass::Exterior
    } else {
        EdgeClass::Absent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sizes() {
        assert_eq!(make_partition(10, 2, 2, 0).unwrap().block_sizes(), vec![2, 4, 4]);
        let p = make_partition(13, 3, 4, 1).unwrap();
        assert_eq!(p.m(), 3);
        assert_eq!(p.block_sizes(), vec![4, 3, 3, 3]);
        assert!(matches!(make_partition(12, 5, 1, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn blocks_agree_with_index() {
        let p = make_partition(31, 4, 3, 9).unwrap();
        for j in 0..=4 {
            for &v in p.block(j) {
                assert_eq!(p.block_index(v), j);
            }
        }
    }

    #[test]
    fn fixed_v0_is_kept() {
        let p = PartitionScheme::with_fixed_v0(13, 3, &[5, 2, 9, 11], 4).unwrap();
        assert_eq!(p.block(0), &[5, 2, 9, 11]);
        assert_eq!(p.m(), 3);
    }

    #[test]
    fn from_blocks_validates() {
        assert!(PartitionScheme::from_blocks(&[vec![0], vec![1, 2], vec![3, 4]]).is_ok());
        assert!(PartitionScheme::from_blocks(&[vec![0], vec![1, 2], vec![3, 3]]).is_err());
        assert!(PartitionScheme::from_blocks(&[vec![0], vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn examples_of_each_class() {
        let p = PartitionScheme::from_blocks(&[vec![0], vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        assert_eq!(classify_edge(&p, 1, 3), EdgeClass::Interior);
        assert_eq!(classify_edge(&p, 5, 1), EdgeClass::Exterior);
        assert_eq!(classify_edge(&p, 5, 0), EdgeClass::Exterior);
        assert_eq!(classify_edge(&p, 0, 2), EdgeClass::Exterior);
        assert_eq!(classify_edge(&p, 3, 1), EdgeClass::Absent);
        assert_eq!(classify_edge(&p, 0, 3), EdgeClass::Absent);
        assert_eq!(classify_edge(&p, 1, 5), EdgeClass::Absent);
    }
}
