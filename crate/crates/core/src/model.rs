//! The symmetric six-state chain built from three two-state blocks.
//!
//! States `2i` and `2i + 1` (zero-based) form block `B_{i+1}`. Inside block
//! `i` the transition matrix is `[[a_i, b_i], [b_i, a_i]]`; between blocks `i`
//! and `j` every entry equals `c_ij`. The block indicators span an invariant
//! subspace on which `P` acts as the 3×3 quotient `K`, and each antisymmetric
//! within-block vector is an eigenvector with eigenvalue `β_r = a_r - b_r`.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::linalg::{Matrix, SymMatrix};
use crate::{Error, Result};

/// Row-sum residual accepted by [`BlockModelParams::validate`].
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Two squared local modes closer than this count as tied for `t_*`.
pub const TIE_TOL: f64 = 1e-12;

pub const NUM_STATES: usize = 6;
pub const NUM_BLOCKS: usize = 3;

/// One-based index of a true block `B_1`, `B_2` or `B_3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BlockIndex(u8);

impl BlockIndex {
    pub const ALL: [BlockIndex; 3] = [BlockIndex(1), BlockIndex(2), BlockIndex(3)];

    pub fn new(r: usize) -> Result<Self> {
        if (1..=NUM_BLOCKS).contains(&r) {
            Ok(Self(r as u8))
        } else {
            Err(Error::Argument(format!("block index {r} not in 1..=3")))
        }
    }

    pub fn from_zero_based(i: usize) -> Self {
        assert!(i < NUM_BLOCKS, "block offset {i} out of range");
        Self(i as u8 + 1)
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Position in zero-based arrays such as `t` or the rows of `L`.
    pub fn offset(self) -> usize {
        self.0 as usize - 1
    }

    /// The two states of this block, zero-based.
    pub fn states(self) -> [usize; 2] {
        let first = 2 * self.offset();
        [first, first + 1]
    }

    /// The other two blocks in increasing order.
    pub fn others(self) -> [BlockIndex; 2] {
        let mut out = [self; 2];
        let mut k = 0;
        for b in Self::ALL {
            if b != self {
                out[k] = b;
                k += 1;
            }
        }
        out
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The nine scalars defining `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockModelParams {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
}

impl BlockModelParams {
    /// The explicit six-state model with a certified strict gap.
    pub fn reference_model() -> Self {
        Self {
            a: [0.536022, 0.5780345, 0.389373],
            b: [0.218244, 0.1813515, 0.138991],
            c12: 0.003678,
            c13: 0.119189,
            c23: 0.116629,
        }
    }

    /// `a_i = 1`, everything else zero, so `P = I`.
    pub fn identity_chain() -> Self {
        Self {
            a: [1.0; 3],
            b: [0.0; 3],
            c12: 0.0,
            c13: 0.0,
            c23: 0.0,
        }
    }

    /// Draws a valid model uniformly-ish: couplings in `[0, 1/4]`, then `b_i`
    /// uniform in the remaining mass and `a_i` taking what is left.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let c12 = rng.gen_range(0.0..=0.25);
        let c13 = rng.gen_range(0.0..=0.25);
        let c23 = rng.gen_range(0.0..=0.25);
        let mut p = Self {
            a: [0.0; 3],
            b: [0.0; 3],
            c12,
            c13,
            c23,
        };
        for i in 0..3 {
            let mass = 1.0 - 2.0 * p.outflow(i);
            p.b[i] = rng.gen_range(0.0..=1.0) * mass;
            p.a[i] = mass - p.b[i];
        }
        p
    }

    /// Coupling between blocks at zero-based offsets `i != j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.c12,
            (0, 2) => self.c13,
            (1, 2) => self.c23,
            _ => panic!("no coupling between blocks {i} and {j}"),
        }
    }

    /// `c_ij + c_ik` for the two blocks other than `i`.
    fn outflow(&self, i: usize) -> f64 {
        (0..3).filter(|&j| j != i).map(|j| self.coupling(i, j)).sum()
    }

    /// `a_i + b_i + 2c_ij + 2c_ik - 1` for each block.
    pub fn residuals(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.a[i] + self.b[i] + 2.0 * self.outflow(i) - 1.0)
    }

    pub fn named_values(&self) -> [(&'static str, f64); 9] {
        [
            ("a1", self.a[0]),
            ("b1", self.b[0]),
            ("a2", self.a[1]),
            ("b2", self.b[1]),
            ("a3", self.a[2]),
            ("b3", self.b[2]),
            ("c12", self.c12),
            ("c13", self.c13),
            ("c23", self.c23),
        ]
    }

    pub fn validate(self) -> Result<Self> {
        for (name, value) in self.named_values() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { name, value });
            }
        }
        for (i, residual) in self.residuals().into_iter().enumerate() {
            if residual.abs() > ROW_SUM_TOL {
                return Err(Error::ConstraintViolation {
                    row: i + 1,
                    residual,
                });
            }
        }
        Ok(self)
    }

    /// The 6×6 transition matrix.
    pub fn build_p(&self) -> SymMatrix {
        let mut m = Matrix::zeros(NUM_STATES, NUM_STATES);
        for bi in 0..3 {
            for bj in 0..3 {
                for si in 0..2 {
                    for sj in 0..2 {
                        m[(2 * bi + si, 2 * bj + sj)] = if bi != bj {
                            self.coupling(bi, bj)
                        } else if si == sj {
                            self.a[bi]
                        } else {
                            self.b[bi]
                        };
                    }
                }
            }
        }
        SymMatrix::new(m).expect("block layout is symmetric")
    }

    /// `T = P²`.
    pub fn build_t(&self) -> SymMatrix {
        self.build_p().square()
    }

    /// The quotient matrix `K` on the block-indicator subspace.
    pub fn quotient_k(&self) -> SymMatrix {
        let mut k = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                k[(i, j)] = if i == j {
                    self.a[i] + self.b[i]
                } else {
                    2.0 * self.coupling(i, j)
                };
            }
        }
        SymMatrix::new(k).expect("K is symmetric")
    }

    /// `L = K²`.
    pub fn build_l(&self) -> SymMatrix {
        self.quotient_k().square()
    }

    /// `β_r = a_r - b_r`.
    pub fn beta(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.a[i] - self.b[i])
    }

    pub fn derive_spectral(&self) -> Result<SpectralSummary> {
        SpectralSummary::derive(self)
    }
}

/// Macro and local spectral data of a block model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub kappa2: f64,
    pub kappa3: f64,
    pub beta: [f64; 3],
    pub t: [f64; 3],
    pub t_star: f64,
    /// Every block whose `t_r` lies within `TIE_TOL` of `t_*`.
    pub argmax: Vec<BlockIndex>,
    /// Eigenvalues of `T`, descending.
    pub t_spectrum: Vec<f64>,
    /// Product of the three largest eigenvalues of `T`.
    pub relaxed_benchmark: f64,
    /// `κ₂² t_*`, present only when the A1 ordering holds.
    pub shortcut_benchmark: Option<f64>,
}

impl SpectralSummary {
    pub fn derive(params: &BlockModelParams) -> Result<Self> {
        let (kappa2, kappa3) = macro_eigenvalues(&params.quotient_k())?;
        let beta = params.beta();
        let t = beta.map(|b| b * b);
        let t_star = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax = BlockIndex::ALL
            .into_iter()
            .filter(|r| (t[r.offset()] - t_star).abs() < TIE_TOL)
            .collect();

        let t_mat = params.build_t();
        let t_spectrum = t_mat.eigen()?.eigenvalues;
        let relaxed_benchmark = crate::compression::relaxed_benchmark(&t_mat, 3)?;

        let k2 = kappa2 * kappa2;
        let k3 = kappa3 * kappa3;
        let shortcut_benchmark = (k2 > t_star && t_star > k3).then_some(k2 * t_star);
        Ok(Self {
            kappa2,
            kappa3,
            beta,
            t,
            t_star,
            argmax,
            t_spectrum,
            relaxed_benchmark,
            shortcut_benchmark,
        })
    }

    pub fn kappa2_sq(&self) -> f64 {
        self.kappa2 * self.kappa2
    }

    pub fn kappa3_sq(&self) -> f64 {
        self.kappa3 * self.kappa3
    }

    pub fn t_of(&self, r: BlockIndex) -> f64 {
        self.t[r.offset()]
    }
}

/// The two eigenvalues of a symmetric stochastic 3×3 `K` on `1^⊥`, descending.
///
/// `K` maps `1^⊥` to itself, so compressing onto a fixed orthonormal basis of
/// that plane isolates `κ₂, κ₃` without having to identify which computed
/// eigenvalue is the trivial one.
pub fn macro_eigenvalues(k: &SymMatrix) -> Result<(f64, f64)> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let basis = Matrix::from_rows(&[[s2, s6], [-s2, s6], [0.0, -2.0 * s6]])?;
    let restricted = k.congruence(&basis)?;
    let ev = restricted.eigen()?.eigenvalues;
    Ok((ev[0], ev[1]))
}

/// Status of the ordering and nondegeneracy conditions of the family gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    /// `κ₂² > t_* > κ₃²`.
    pub a1: bool,
    /// `κ₂² - t_*`.
    pub a1_upper_margin: f64,
    /// `t_* - κ₃²`.
    pub a1_lower_margin: f64,
    /// `(3ℓ_rr - 1)/2 < κ₂²` for every `r` attaining `t_*`.
    pub a2: bool,
    /// `κ₂² - (3ℓ_rr - 1)/2` for each `r` attaining `t_*`.
    pub a2_margins: Vec<(BlockIndex, f64)>,
}

pub fn check_regime(s: &SpectralSummary, l: &SymMatrix) -> RegimeReport {
    let k2 = s.kappa2_sq();
    let k3 = s.kappa3_sq();
    let a1_upper_margin = k2 - s.t_star;
    let a1_lower_margin = s.t_star - k3;
    let a2_margins: Vec<_> = s
        .argmax
        .iter()
        .map(|&r| {
            let lrr = l[(r.offset(), r.offset())];
            (r, k2 - (3.0 * lrr - 1.0) / 2.0)
        })
        .collect();
    RegimeReport {
        a1: a1_upper_margin > 0.0 && a1_lower_margin > 0.0,
        a1_upper_margin,
        a1_lower_margin,
        a2: a2_margins.iter().all(|&(_, m)| m > 0.0),
        a2_margins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() <= tol, "got {got}, want {want} ± {tol}");
    }

    #[test]
    fn reference_model_is_valid() {
        let p = BlockModelParams::reference_model().validate().unwrap();
        for r in p.residuals() {
            assert!(r.abs() < 1e-15);
        }
    }

    #[test]
    fn absorbing_block_is_valid() {
        let mut p = BlockModelParams::identity_chain();
        p.a[1] = 0.5;
        p.b[1] = 0.5;
        p.validate().unwrap();
    }

    #[test]
    fn perturbed_coupling_violates_row_one() {
        let mut p = BlockModelParams::reference_model();
        p.c12 += 1e-6;
        match p.validate() {
            Err(Error::ConstraintViolation { row, residual }) => {
                assert_eq!(row, 1);
                assert_close(residual, 2e-6, 1e-12);
            }
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_entry_is_named() {
        let mut p = BlockModelParams::identity_chain();
        p.a[0] = 1.5;
        p.b[0] = -0.5;
        assert!(matches!(p.validate(), Err(Error::OutOfRange { name: "a1", .. })));
    }

    #[test]
    fn p_entries_match_parameters() {
        let p = BlockModelParams::reference_model().build_p();
        assert_eq!(p[(0, 0)], 0.536022);
        assert_eq!(p[(0, 1)], 0.218244);
        assert_eq!(p[(0, 2)], 0.003678);
        assert_eq!(p[(0, 3)], 0.003678);
        assert_eq!(p[(0, 4)], 0.119189);
        assert_eq!(p[(0, 5)], 0.119189);
        for s in p.row_sums() {
            assert_close(s, 1.0, 1e-12);
        }
    }

    #[test]
    fn t_first_entry_expands_row_one() {
        let m = BlockModelParams::reference_model();
        let t = m.build_t();
        let (a1, b1, c12, c13) = (m.a[0], m.b[0], m.c12, m.c13);
        let expected = a1 * a1 + b1 * b1 + 2.0 * c12 * c12 + 2.0 * c13 * c13;
        assert_close(t[(0, 0)], expected, 1e-15);
    }

    #[test]
    fn identity_chain_matrices() {
        let m = BlockModelParams::identity_chain();
        assert_eq!(m.build_p(), SymMatrix::identity(6));
        assert_eq!(m.quotient_k(), SymMatrix::identity(3));
    }

    #[test]
    fn quotient_entries() {
        let k = BlockModelParams::reference_model().quotient_k();
        assert_close(k[(0, 0)], 0.754266, 1e-15);
        assert_close(k[(0, 1)], 0.007356, 1e-15);
        assert_close(k[(0, 2)], 0.238378, 1e-15);
        for s in k.row_sums() {
            assert_close(s, 1.0, 1e-12);
        }
    }

    #[test]
    fn reference_spectrum() {
        let m = BlockModelParams::reference_model();
        let ev = m.build_p().eigen().unwrap().eigenvalues;
        for want in [1.0, 0.749513, 0.292503, 0.317778, 0.396683, 0.250382] {
            assert!(
                ev.iter().any(|&x| (x - want).abs() < 1e-6),
                "{want} missing from {ev:?}"
            );
        }
        let s = m.derive_spectral().unwrap();
        assert_close(s.kappa2, 0.749513, 1e-6);
        assert_close(s.kappa3, 0.292503, 1e-6);
        assert_eq!(s.beta, [0.536022 - 0.218244, 0.5780345 - 0.1813515, 0.389373 - 0.138991]);
        assert_close(s.beta[0], 0.317778, 1e-12);
        assert_close(s.beta[1], 0.396683, 1e-12);
        assert_close(s.beta[2], 0.250382, 1e-12);
        assert_eq!(s.argmax, vec![BlockIndex(2)]);
        assert_close(s.relaxed_benchmark, 0.0883986324, 1e-9);
        let shortcut = s.shortcut_benchmark.unwrap();
        assert_close(shortcut, s.relaxed_benchmark, 1e-10);
    }

    #[test]
    fn identity_spectrum() {
        let s = BlockModelParams::identity_chain().derive_spectral().unwrap();
        assert_close(s.kappa2, 1.0, 1e-14);
        assert_close(s.kappa3, 1.0, 1e-14);
        assert_eq!(s.t, [1.0; 3]);
        assert_eq!(s.argmax.len(), 3);
        assert_close(s.relaxed_benchmark, 1.0, 1e-14);
        assert_eq!(s.shortcut_benchmark, None);
        let l = BlockModelParams::identity_chain().build_l();
        assert!(!check_regime(&s, &l).a1);
    }

    #[test]
    fn reference_regime_holds() {
        let m = BlockModelParams::reference_model();
        let s = m.derive_spectral().unwrap();
        let rep = check_regime(&s, &m.build_l());
        assert!(rep.a1);
        assert_close(s.kappa2_sq(), 0.749513f64.powi(2), 2e-6);
        assert_close(s.t_star, 0.396683f64.powi(2), 1e-12);
        assert_close(s.kappa3_sq(), 0.292503f64.powi(2), 2e-6);

        // ℓ₂₂ is the squared norm of row 2 of K.
        let k = m.quotient_k();
        let l22 = (0..3).map(|j| k[(1, j)] * k[(1, j)]).sum::<f64>();
        assert_eq!(rep.a2_margins.len(), 1);
        assert_eq!(rep.a2_margins[0].0, BlockIndex(2));
        assert_close(rep.a2_margins[0].1, s.kappa2_sq() - (3.0 * l22 - 1.0) / 2.0, 1e-14);
        assert!(rep.a2);
    }

    #[test]
    fn block_index_helpers() {
        let b2 = BlockIndex::new(2).unwrap();
        assert_eq!(b2.states(), [2, 3]);
        assert_eq!(b2.others(), [BlockIndex(1), BlockIndex(3)]);
        assert!(BlockIndex::new(0).is_err());
        assert!(BlockIndex::new(4).is_err());
    }

    proptest! {
        #[test]
        fn macro_local_split(seed in any::<u64>()) {
            let m = BlockModelParams::sample(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(m.validate().is_ok());
            let s = m.derive_spectral().unwrap();
            let mut want = vec![1.0, s.kappa2, s.kappa3, s.beta[0], s.beta[1], s.beta[2]];
            want.sort_by(|a, b| b.total_cmp(a));
            let got = m.build_p().eigen().unwrap().eigenvalues;
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
            }
            prop_assert!(s.kappa2 >= s.kappa3 && s.kappa2.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn l_is_symmetric_stochastic(seed in any::<u64>()) {
            let m = BlockModelParams::sample(&mut ChaCha8Rng::seed_from_u64(seed));
            for s in m.build_l().row_sums() {
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn relaxed_benchmark_matches_t_spectrum(seed in any::<u64>()) {
            let m = BlockModelParams::sample(&mut ChaCha8Rng::seed_from_u64(seed));
            let s = m.derive_spectral().unwrap();
            let top3: f64 = s.t_spectrum[..3].iter().product();
            prop_assert!((s.relaxed_benchmark - top3).abs() < 1e-10);
            if let Some(shortcut) = s.shortcut_benchmark {
                prop_assert!((shortcut - s.relaxed_benchmark).abs() < 1e-10);
            }
        }
    }
}
