//! Unordered set partitions and the structured families of the six-state model.
//!
//! A partition of `{0, .., n-1}` is stored as its restricted-growth string:
//! state `i` carries the label of its cell, and labels appear in first-use
//! order (`labels[0] = 0`, each new label is one more than the largest seen so
//! far). Two partitions are equal exactly when their label strings are equal,
//! so reordering cells never produces a different value.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{BlockIndex, NUM_BLOCKS, NUM_STATES};
use crate::{Error, Result};

pub const MAX_STATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetPartition {
    labels: Vec<u8>,
    cells: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Canonicalizes an arbitrary labelling (any label values, any order).
    pub fn from_labels<L: Copy + PartialEq>(labels: &[L]) -> Result<Self> {
        if labels.is_empty() || labels.len() > MAX_STATES {
            return Err(Error::Argument(format!(
                "partition must cover 1..={MAX_STATES} states, got {}",
                labels.len()
            )));
        }
        let mut seen: Vec<L> = Vec::new();
        let canonical = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i as u8,
                None => {
                    seen.push(*l);
                    (seen.len() - 1) as u8
                }
            })
            .collect();
        Ok(Self::from_canonical(canonical))
    }

    /// Builds a partition from cells given in any order.
    pub fn from_cells<C: AsRef<[usize]>>(n: usize, cells: &[C]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, cell) in cells.iter().enumerate() {
            let cell = cell.as_ref();
            if cell.is_empty() {
                return Err(Error::Argument("empty cell".into()));
            }
            for &s in cell {
                if s >= n {
                    return Err(Error::Argument(format!("state {s} out of range for n = {n}")));
                }
                if labels[s] != usize::MAX {
                    return Err(Error::Argument(format!("state {s} appears in two cells")));
                }
                labels[s] = c;
            }
        }
        if let Some(s) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Argument(format!("state {s} is not covered")));
        }
        Self::from_labels(&labels)
    }

    fn from_canonical(labels: Vec<u8>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m as usize + 1);
        let mut cells = vec![Vec::new(); k];
        for (s, &l) in labels.iter().enumerate() {
            cells[l as usize].push(s);
        }
        Self { labels, cells }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    /// Restricted-growth string.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Cells ordered by smallest element, states ascending within each cell.
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Cell sizes sorted ascending.
    pub fn size_type(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.cells.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        sizes
    }

    /// The true block partition `{{0,1},{2,3},{4,5}}`.
    pub fn block_partition() -> Self {
        Self::from_canonical(vec![0, 0, 1, 1, 2, 2])
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, cell) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (j, s) in cell.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl Serialize for SetPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.cells.serialize(s)
    }
}

/// All partitions of `{0, .., n-1}` into exactly `k` nonempty cells, in
/// lexicographic order of their restricted-growth strings.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Vec<SetPartition>> {
    if k < 1 || k > n || n > MAX_STATES {
        return Err(Error::Argument(format!(
            "need 1 <= k <= n <= {MAX_STATES}, got n = {n}, k = {k}"
        )));
    }
    let mut out = Vec::new();
    let mut labels = vec![0u8; n];
    extend(&mut labels, 1, 1, k, &mut out);
    Ok(out)
}

/// Fills `labels[pos..]` given that `used` labels appear in `labels[..pos]`.
fn extend(labels: &mut [u8], pos: usize, used: usize, k: usize, out: &mut Vec<SetPartition>) {
    let n = labels.len();
    if pos == n {
        if used == k {
            out.push(SetPartition::from_canonical(labels.to_vec()));
        }
        return;
    }
    let remaining = n - pos;
    for l in 0..=used.min(k - 1) {
        let now_used = if l == used { used + 1 } else { used };
        // Every still-missing label needs a position of its own.
        if k - now_used > remaining - 1 {
            continue;
        }
        labels[pos] = l as u8;
        extend(labels, pos + 1, now_used, k, out);
    }
}

/// `n_{iα} = |B_i ∩ A_α|` with rows indexed by true block and columns by
/// canonical cell order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountMatrix(pub [[u8; 3]; 3]);

impl CountMatrix {
    pub fn row_sums(&self) -> [u8; 3] {
        self.0.map(|r| r.iter().sum())
    }

    pub fn column_sums(&self) -> [u8; 3] {
        std::array::from_fn(|a| self.0.iter().map(|r| r[a]).sum())
    }
}

fn require_six_three(p: &SetPartition) -> Result<()> {
    if p.n() != NUM_STATES || p.k() != NUM_BLOCKS {
        return Err(Error::Argument(format!(
            "expected a partition of 6 states into 3 cells, got n = {}, k = {}",
            p.n(),
            p.k()
        )));
    }
    Ok(())
}

pub fn count_matrix(p: &SetPartition) -> Result<CountMatrix> {
    require_six_three(p)?;
    let mut m = [[0u8; 3]; 3];
    for (s, &l) in p.labels().iter().enumerate() {
        m[s / 2][l as usize] += 1;
    }
    Ok(CountMatrix(m))
}

/// Which structured family a partition of the six-state model belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    /// `B_r` split into two singletons, the other two blocks merged.
    Structured114 { r: BlockIndex },
    /// `B_p` intact, one singleton of `B_r`, and `B_q` joined with the other
    /// singleton of `B_r`.
    Structured123 {
        p: BlockIndex,
        q: BlockIndex,
        r: BlockIndex,
    },
    /// The true block partition.
    Block,
    /// Anything else, with its ascending size type.
    Other(Vec<usize>),
}

impl FamilyTag {
    pub fn is_structured(&self) -> bool {
        matches!(self, Self::Structured114 { .. } | Self::Structured123 { .. })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Structured114 { r } => write!(f, "Structured114(r={r})"),
            Self::Structured123 { p, q, r } => write!(f, "Structured123(p={p},q={q},r={r})"),
            Self::Block => f.write_str("Block"),
            Self::Other(sizes) => {
                let s: Vec<String> = sizes.iter().map(usize::to_string).collect();
                write!(f, "Other({})", s.join(","))
            }
        }
    }
}

impl Serialize for FamilyTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn classify(p: &SetPartition) -> Result<FamilyTag> {
    require_six_three(p)?;
    if *p == SetPartition::block_partition() {
        return Ok(FamilyTag::Block);
    }
    let block_of = |s: usize| BlockIndex::from_zero_based(s / 2);
    let cells = p.cells();
    let of_size = |n: usize| cells.iter().filter(move |c| c.len() == n);
    let sizes = p.size_type();

    if sizes == [1, 1, 4] {
        let singles: Vec<usize> = of_size(1).map(|c| c[0]).collect();
        let r = block_of(singles[0]);
        if block_of(singles[1]) == r {
            return Ok(FamilyTag::Structured114 { r });
        }
    } else if sizes == [1, 2, 3] {
        let pair = of_size(2).next().unwrap();
        let single = of_size(1).next().unwrap()[0];
        let pb = block_of(pair[0]);
        if block_of(pair[1]) == pb {
            // The pair is an intact block and the singleton comes from a
            // different block; the three-cell is then forced.
            let r = block_of(single);
            let q = BlockIndex::ALL
                .into_iter()
                .find(|&b| b != pb && b != r)
                .unwrap();
            return Ok(FamilyTag::Structured123 { p: pb, q, r });
        }
    }
    Ok(FamilyTag::Other(sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn b(r: usize) -> BlockIndex {
        BlockIndex::new(r).unwrap()
    }

    /// Stirling numbers of the second kind by inclusion-exclusion.
    fn stirling2(n: u32, k: u32) -> u64 {
        let mut sum: i128 = 0;
        let mut binom: i128 = 1;
        for j in 0..=k {
            let term = binom * ((k - j) as i128).pow(n);
            sum += if j % 2 == 0 { term } else { -term };
            binom = binom * (k - j) as i128 / (j + 1) as i128;
        }
        let fact: i128 = (1..=k as i128).product();
        (sum / fact) as u64
    }

    /// Every surjective label function, canonicalized and deduplicated.
    fn brute_force(n: usize, k: usize) -> BTreeSet<Vec<u8>> {
        let mut out = BTreeSet::new();
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let labels: Vec<usize> = (0..n)
                .map(|_| {
                    let l = c % k;
                    c /= k;
                    l
                })
                .collect();
            let distinct: BTreeSet<_> = labels.iter().collect();
            if distinct.len() == k {
                out.insert(SetPartition::from_labels(&labels).unwrap().labels().to_vec());
            }
        }
        out
    }

    #[test]
    fn six_into_three_has_ninety() {
        assert_eq!(enumerate_partitions(6, 3).unwrap().len(), 90);
        assert_eq!(stirling2(6, 3), 90);
    }

    #[test]
    fn forced_singletons() {
        let all = enumerate_partitions(3, 3).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].cells(), &[vec![0], vec![1], vec![2]]);
        assert_eq!(all[0].to_string(), "[[0],[1],[2]]");
    }

    #[test]
    fn four_into_two_matches_brute_force() {
        let all = enumerate_partitions(4, 2).unwrap();
        let oracle = brute_force(4, 2);
        assert_eq!(oracle.len(), 7);
        let got: BTreeSet<Vec<u8>> = all.iter().map(|p| p.labels().to_vec()).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn six_three_matches_brute_force() {
        let got: Vec<Vec<u8>> = enumerate_partitions(6, 3)
            .unwrap()
            .iter()
            .map(|p| p.labels().to_vec())
            .collect();
        let oracle: Vec<Vec<u8>> = brute_force(6, 3).into_iter().collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn counts_match_stirling_numbers() {
        for n in 1..=8 {
            for k in 1..=n {
                let all = enumerate_partitions(n, k).unwrap();
                assert_eq!(all.len() as u64, stirling2(n as u32, k as u32), "S({n},{k})");
                for w in all.windows(2) {
                    assert!(w[0].labels() < w[1].labels());
                }
            }
        }
    }

    #[test]
    fn argument_errors() {
        assert!(enumerate_partitions(3, 4).is_err());
        assert!(enumerate_partitions(3, 0).is_err());
        assert!(enumerate_partitions(13, 3).is_err());
        assert!(enumerate_partitions(12, 12).is_ok());
    }

    #[test]
    fn from_cells_canonicalizes() {
        let p = SetPartition::from_cells(6, &[vec![3], vec![5, 4, 1, 0], vec![2]]).unwrap();
        assert_eq!(p.to_string(), "[[0,1,4,5],[2],[3]]");
        assert_eq!(p.labels(), &[0, 0, 1, 2, 0, 0]);
        assert!(SetPartition::from_cells(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(SetPartition::from_cells(3, &[vec![0, 1]]).is_err());
        assert!(SetPartition::from_cells(3, &[vec![0, 1, 2], vec![]]).is_err());
    }

    #[test]
    fn size_types() {
        let all = enumerate_partitions(6, 3).unwrap();
        let count = |t: &[usize]| all.iter().filter(|p| p.size_type() == t).count();
        assert_eq!(count(&[1, 1, 4]), 15);
        assert_eq!(count(&[1, 2, 3]), 60);
        assert_eq!(count(&[2, 2, 2]), 15);
    }

    #[test]
    fn count_matrix_examples() {
        let block = SetPartition::block_partition();
        assert_eq!(count_matrix(&block).unwrap().0, [[2, 0, 0], [0, 2, 0], [0, 0, 2]]);

        let best = SetPartition::from_cells(6, &[vec![0, 1, 4, 5], vec![2], vec![3]]).unwrap();
        assert_eq!(count_matrix(&best).unwrap().0, [[2, 0, 0], [0, 1, 1], [2, 0, 0]]);

        let split = SetPartition::from_cells(6, &[vec![0], vec![1], vec![2, 3, 4, 5]]).unwrap();
        assert_eq!(count_matrix(&split).unwrap().0[0], [1, 1, 0]);

        let wrong = enumerate_partitions(5, 3).unwrap().remove(0);
        assert!(count_matrix(&wrong).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = SetPartition::from_cells(6, &[vec![2], vec![3], vec![0, 1, 4, 5]]).unwrap();
        assert_eq!(classify(&p).unwrap(), FamilyTag::Structured114 { r: b(2) });

        let p = SetPartition::from_cells(6, &[vec![0, 1], vec![2], vec![3, 4, 5]]).unwrap();
        assert_eq!(
            classify(&p).unwrap(),
            FamilyTag::Structured123 { p: b(1), q: b(3), r: b(2) }
        );

        let p = SetPartition::from_cells(6, &[vec![0, 2], vec![1, 3], vec![4, 5]]).unwrap();
        assert_eq!(classify(&p).unwrap(), FamilyTag::Other(vec![2, 2, 2]));
        assert_eq!(classify(&p).unwrap().to_string(), "Other(2,2,2)");

        assert_eq!(classify(&SetPartition::block_partition()).unwrap(), FamilyTag::Block);
    }

    #[test]
    fn family_totals() {
        let mut n114 = 0;
        let mut n123 = 0;
        let mut nblock = 0;
        let mut nother = 0;
        let mut seen = BTreeSet::new();
        for p in enumerate_partitions(6, 3).unwrap() {
            let tag = classify(&p).unwrap();
            match &tag {
                FamilyTag::Structured114 { .. } => n114 += 1,
                FamilyTag::Structured123 { .. } => n123 += 1,
                FamilyTag::Block => nblock += 1,
                FamilyTag::Other(_) => nother += 1,
            }
            if tag.is_structured() {
                seen.insert(tag.to_string());
            }
        }
        assert_eq!((n114, n123, nblock, nother), (3, 12, 1, 74));
        // Each (p,q,r) is realized by two partitions (either singleton of B_r).
        assert_eq!(seen.len(), 3 + 6);
    }

    proptest! {
        #[test]
        fn relabeling_never_changes_tag(idx in 0usize..90, perm in Just([0usize, 1, 2]).prop_shuffle()) {
            let p = enumerate_partitions(6, 3).unwrap().swap_remove(idx);
            let shuffled: Vec<Vec<usize>> = perm.iter().map(|&i| p.cells()[i].clone()).collect();
            let q = SetPartition::from_cells(6, &shuffled).unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(classify(&q).unwrap(), classify(&p).unwrap());
        }

        #[test]
        fn count_matrix_margins(idx in 0usize..90) {
            let p = enumerate_partitions(6, 3).unwrap().swap_remove(idx);
            let m = count_matrix(&p).unwrap();
            prop_assert_eq!(m.row_sums(), [2, 2, 2]);
            let sizes: Vec<u8> = p.cells().iter().map(|c| c.len() as u8).collect();
            prop_assert_eq!(m.column_sums().to_vec(), sizes);
        }
    }
}
