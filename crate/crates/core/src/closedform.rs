//! Closed determinant formulas for the structured partition families.
//!
//! With `L = K²` and `t_r = β_r²`:
//!
//! * split `B_r` into singletons and merge the other blocks:
//!   `det Q = t_r (3ℓ_rr − 1) / 2`;
//! * keep `B_p`, split `B_r`, attach one singleton to `B_q`:
//!   `det Q = (det L + t_r (3ℓ_pp − 1)) / 3`.
//!
//! Block indices are one-based throughout this module. The explicit 3×3
//! compression matrices are also built directly from `L` and `t` so that the
//! reductions themselves are checked, not only their end results.

use serde::Serialize;

use crate::compression::det_compression;
use crate::linalg::SymMatrix;
use crate::model::{check_regime, BlockIndex, BlockModelParams, RegimeReport, SpectralSummary};
use crate::partitions::{classify, enumerate_partitions, FamilyTag, SetPartition};
use crate::{Error, Result};

/// Bound checks allow this much slack.
pub const BOUND_TOL: f64 = 1e-12;

/// Margins below this are reported as not numerically strict.
pub const STRICT_TOL: f64 = 1e-12;

fn entry(l: &SymMatrix, i: BlockIndex, j: BlockIndex) -> f64 {
    l[(i.offset(), j.offset())]
}

fn check_permutation(p: BlockIndex, q: BlockIndex, r: BlockIndex) -> Result<()> {
    if p == q || q == r || p == r {
        return Err(Error::Argument(format!(
            "(p, q, r) = ({p}, {q}, {r}) is not a permutation of (1, 2, 3)"
        )));
    }
    Ok(())
}

/// `t_r (3ℓ_rr − 1) / 2`.
pub fn det_114(r: BlockIndex, l: &SymMatrix, t: &[f64; 3]) -> f64 {
    t[r.offset()] * (3.0 * entry(l, r, r) - 1.0) / 2.0
}

/// `(det L + t_r (3ℓ_pp − 1)) / 3`.
pub fn det_123(p: BlockIndex, q: BlockIndex, r: BlockIndex, l: &SymMatrix, t: &[f64; 3]) -> Result<f64> {
    check_permutation(p, q, r)?;
    Ok((l.determinant() + t[r.offset()] * (3.0 * entry(l, p, p) - 1.0)) / 3.0)
}

/// Closed-form determinant for a structured tag, `None` otherwise.
pub fn closed_form(tag: &FamilyTag, l: &SymMatrix, t: &[f64; 3]) -> Option<f64> {
    match *tag {
        FamilyTag::Structured114 { r } => Some(det_114(r, l, t)),
        FamilyTag::Structured123 { p, q, r } => det_123(p, q, r, l, t).ok(),
        _ => None,
    }
}

/// `(A_r, B_r)` with `A_r = (ℓ_pp + ℓ_qq + 2ℓ_pq)/2` and `B_r = (ℓ_pr + ℓ_qr)/2`.
pub fn merged_cell_coefficients(r: BlockIndex, l: &SymMatrix) -> (f64, f64) {
    let [p, q] = r.others();
    let a = (entry(l, p, p) + entry(l, q, q) + 2.0 * entry(l, p, q)) / 2.0;
    let b = (entry(l, p, r) + entry(l, q, r)) / 2.0;
    (a, b)
}

/// Compression for the (1,1,4) family in the cell order
/// `(B_p ∪ B_q, first state of B_r, second state of B_r)`.
pub fn explicit_q_114(r: BlockIndex, l: &SymMatrix, t: &[f64; 3]) -> SymMatrix {
    let (a, b) = merged_cell_coefficients(r, l);
    let lrr = entry(l, r, r);
    let tr = t[r.offset()];
    let d = (lrr + tr) / 2.0;
    let o = (lrr - tr) / 2.0;
    SymMatrix::from_rows(&[[a, b, b], [b, d, o], [b, o, d]]).expect("symmetric by construction")
}

/// Compression for the (1,2,3) family in the cell order
/// `(B_p, one state of B_r, B_q ∪ other state of B_r)`.
pub fn explicit_q_123(
    p: BlockIndex,
    q: BlockIndex,
    r: BlockIndex,
    l: &SymMatrix,
    t: &[f64; 3],
) -> Result<SymMatrix> {
    check_permutation(p, q, r)?;
    let (s2, s3, s6, s12) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt(), 12f64.sqrt());
    let lpp = entry(l, p, p);
    let lpq = entry(l, p, q);
    let lpr = entry(l, p, r);
    let lqq = entry(l, q, q);
    let lqr = entry(l, q, r);
    let lrr = entry(l, r, r);
    let tr = t[r.offset()];

    let m01 = lpr / s2;
    let m02 = (2.0 * lpq + lpr) / s6;
    let m11 = (lrr + tr) / 2.0;
    let m12 = lqr / s3 + (lrr - tr) / s12;
    let m22 = 2.0 * (lqq + lqr) / 3.0 + (lrr + tr) / 6.0;
    SymMatrix::from_rows(&[[lpp, m01, m02], [m01, m11, m12], [m02, m12, m22]])
}

/// `(det L + t_r [ℓ_pp (ℓ_qq + 2ℓ_qr + ℓ_rr) − (ℓ_pq + ℓ_pr)²]) / 3`, the
/// expansion before the row-sum reduction.
pub fn det_123_unreduced(
    p: BlockIndex,
    q: BlockIndex,
    r: BlockIndex,
    l: &SymMatrix,
    t: &[f64; 3],
) -> Result<f64> {
    check_permutation(p, q, r)?;
    let s = entry(l, p, q) + entry(l, p, r);
    let bracket = entry(l, p, p) * (entry(l, q, q) + 2.0 * entry(l, q, r) + entry(l, r, r)) - s * s;
    Ok((l.determinant() + t[r.offset()] * bracket) / 3.0)
}

/// `t_r (A_r ℓ_rr − 2B_r²)`, the expansion before the row-sum reduction.
pub fn det_114_unreduced(r: BlockIndex, l: &SymMatrix, t: &[f64; 3]) -> f64 {
    let (a, b) = merged_cell_coefficients(r, l);
    t[r.offset()] * (a * entry(l, r, r) - 2.0 * b * b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagBoundRow {
    pub index: BlockIndex,
    /// `(3ℓ_ii − 1) / 2`.
    pub value: f64,
    /// Convex weight on `κ₂²`; undefined when `κ₂² = κ₃²`.
    pub weight: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagBoundReport {
    pub kappa2_sq: f64,
    pub kappa3_sq: f64,
    pub rows: Vec<DiagBoundRow>,
}

impl DiagBoundReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Checks `κ₃² ≤ (3ℓ_ii − 1)/2 ≤ κ₂²` for each diagonal entry of `L = K²`.
///
/// The interval is taken between the smaller and the larger of the two
/// squares, since a negative `κ₃` may have the larger square.
pub fn diag_bound_check(l: &SymMatrix, kappa2: f64, kappa3: f64) -> DiagBoundReport {
    let k2 = kappa2 * kappa2;
    let k3 = kappa3 * kappa3;
    let (lo, hi) = (k2.min(k3), k2.max(k3));
    let rows = BlockIndex::ALL
        .into_iter()
        .map(|i| {
            let value = (3.0 * entry(l, i, i) - 1.0) / 2.0;
            let weight = ((k2 - k3).abs() > BOUND_TOL).then(|| (value - k3) / (k2 - k3));
            DiagBoundRow {
                index: i,
                value,
                weight,
                pass: value >= lo - BOUND_TOL && value <= hi + BOUND_TOL,
            }
        })
        .collect();
    DiagBoundReport {
        kappa2_sq: k2,
        kappa3_sq: k3,
        rows,
    }
}

/// One structured partition evaluated three ways.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEntry {
    pub partition: SetPartition,
    pub tag: FamilyTag,
    pub closed_form: f64,
    /// Determinant of the explicit 3×3 matrix built from `L` and `t`.
    pub explicit: f64,
    /// Determinant of `HᵀTH` from the full 6×6 model.
    pub generic: f64,
    /// Largest of `|closed − generic|` and `|explicit − generic|`.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyDeterminants {
    pub det_l: f64,
    pub l: SymMatrix,
    pub t: [f64; 3],
    pub entries: Vec<FamilyEntry>,
}

impl FamilyDeterminants {
    pub fn max_discrepancy(&self) -> f64 {
        self.entries.iter().map(|e| e.discrepancy).fold(0.0, f64::max)
    }
}

/// All structured partitions of the six-state model, in enumeration order.
pub fn structured_partitions() -> Vec<(SetPartition, FamilyTag)> {
    enumerate_partitions(6, 3)
        .expect("6 into 3")
        .into_iter()
        .filter_map(|p| {
            let tag = classify(&p).expect("six-state partition");
            tag.is_structured().then_some((p, tag))
        })
        .collect()
}

fn explicit_det(tag: &FamilyTag, l: &SymMatrix, t: &[f64; 3]) -> Result<f64> {
    match *tag {
        FamilyTag::Structured114 { r } => Ok(explicit_q_114(r, l, t).determinant()),
        FamilyTag::Structured123 { p, q, r } => Ok(explicit_q_123(p, q, r, l, t)?.determinant()),
        _ => Err(Error::Argument(format!("{tag} has no explicit compression"))),
    }
}

pub fn closed_forms(params: &BlockModelParams) -> Result<FamilyDeterminants> {
    let l = params.build_l();
    let t = params.beta().map(|b| b * b);
    let tm = params.build_t();
    let entries = structured_partitions()
        .into_iter()
        .map(|(partition, tag)| {
            let closed_form = closed_form(&tag, &l, &t).expect("structured");
            let explicit = explicit_det(&tag, &l, &t)?;
            let generic = det_compression(&tm, &partition)?;
            let discrepancy = (closed_form - generic).abs().max((explicit - generic).abs());
            Ok(FamilyEntry {
                partition,
                tag,
                closed_form,
                explicit,
                generic,
                discrepancy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyDeterminants {
        det_l: l.determinant(),
        l,
        t,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub partition: SetPartition,
    pub tag: FamilyTag,
    pub value: f64,
    /// `κ₂² t_* − value`.
    pub margin: f64,
    pub strict: bool,
    /// `(κ₂²κ₃² + 2κ₂² t_r)/3` for the (1,2,3) family.
    pub chain_bound: Option<f64>,
    /// `value ≤ chain_bound < κ₂² t_*`.
    pub chain_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub regime: RegimeReport,
    /// Both ordering conditions hold, so the family gap applies.
    pub applicable: bool,
    /// `κ₂² t_*`.
    pub bound: f64,
    pub rows: Vec<GapRow>,
}

impl GapReport {
    /// Applicable and every structured margin numerically strict.
    pub fn holds(&self) -> bool {
        self.applicable && self.rows.iter().all(|r| r.strict && r.chain_holds != Some(false))
    }

    /// The structured partition closest to the bound.
    pub fn tightest(&self) -> Option<&GapRow> {
        self.rows.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Evaluates every structured determinant against `κ₂² t_*`.
pub fn family_gap_check(params: &BlockModelParams) -> Result<GapReport> {
    let summary = SpectralSummary::derive(params)?;
    let l = params.build_l();
    gap_report(&summary, &l)
}

pub fn gap_report(s: &SpectralSummary, l: &SymMatrix) -> Result<GapReport> {
    let regime = check_regime(s, l);
    let k2 = s.kappa2_sq();
    let k3 = s.kappa3_sq();
    let bound = k2 * s.t_star;
    let rows = structured_partitions()
        .into_iter()
        .map(|(partition, tag)| {
            let value = closed_form(&tag, l, &s.t).expect("structured");
            let margin = bound - value;
            let chain_bound = match tag {
                FamilyTag::Structured123 { r, .. } => Some((k2 * k3 + 2.0 * k2 * s.t_of(r)) / 3.0),
                _ => None,
            };
            GapRow {
                partition,
                tag,
                value,
                margin,
                strict: margin >= STRICT_TOL,
                chain_bound,
                chain_holds: chain_bound.map(|c| value <= c + BOUND_TOL && c < bound),
            }
        })
        .collect();
    Ok(GapReport {
        applicable: regime.a1 && regime.a2,
        regime,
        bound,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(r: usize) -> BlockIndex {
        BlockIndex::new(r).unwrap()
    }

    fn reference() -> (BlockModelParams, SymMatrix, [f64; 3]) {
        let m = BlockModelParams::reference_model();
        let t = m.beta().map(|x| x * x);
        (m, m.build_l(), t)
    }

    #[test]
    fn det_114_reference_value() {
        let (m, l, t) = reference();
        let v = det_114(b(2), &l, &t);
        assert!((v - 0.0702908835).abs() < 1e-9, "{v}");
        assert!((explicit_q_114(b(2), &l, &t).determinant() - 0.0702908835).abs() < 1e-9);

        let split1 = SetPartition::from_cells(6, &[vec![0], vec![1], vec![2, 3, 4, 5]]).unwrap();
        let generic = det_compression(&m.build_t(), &split1).unwrap();
        assert!((det_114(b(1), &l, &t) - generic).abs() < 1e-12);
    }

    #[test]
    fn identity_cases() {
        let l = SymMatrix::identity(3);
        let t = [1.0; 3];
        assert_eq!(det_114(b(1), &l, &t), 1.0);
        assert_eq!(det_123(b(1), b(2), b(3), &l, &t).unwrap(), 1.0);
        let q = explicit_q_114(b(3), &l, &t);
        assert_eq!(q, SymMatrix::identity(3));
        assert_eq!(q.determinant(), 1.0);
    }

    #[test]
    fn det_123_requires_permutation() {
        let l = SymMatrix::identity(3);
        assert!(det_123(b(1), b(1), b(2), &l, &[1.0; 3]).is_err());
        assert!(explicit_q_123(b(2), b(3), b(2), &l, &[1.0; 3]).is_err());
    }

    #[test]
    fn det_123_matches_generic_on_reference_model() {
        let (m, l, t) = reference();
        let tm = m.build_t();
        let p = SetPartition::from_cells(6, &[vec![0, 1], vec![2], vec![3, 4, 5]]).unwrap();
        let generic = det_compression(&tm, &p).unwrap();
        assert!((det_123(b(1), b(3), b(2), &l, &t).unwrap() - generic).abs() < 1e-12);

        let fd = closed_forms(&m).unwrap();
        assert_eq!(fd.entries.len(), 15);
        assert!(fd.max_discrepancy() < 1e-12, "{}", fd.max_discrepancy());
    }

    #[test]
    fn explicit_123_matches_frame_compression() {
        // Cell order (B_1, {2}, {3,4,5}) realizes (p,q,r) = (1,3,2).
        let (m, l, t) = reference();
        let f = crate::compression::IndicatorFrame::from_ordered_cells(6, &[vec![0, 1], vec![2], vec![3, 4, 5]])
            .unwrap();
        let q = crate::compression::compress(&m.build_t(), &f).unwrap();
        let e = explicit_q_123(b(1), b(3), b(2), &l, &t).unwrap();
        assert!(q.as_matrix().max_abs_diff(e.as_matrix()) < 1e-14);

        let f = crate::compression::IndicatorFrame::from_ordered_cells(6, &[vec![0, 1, 4, 5], vec![2], vec![3]])
            .unwrap();
        let q = crate::compression::compress(&m.build_t(), &f).unwrap();
        assert!(q.as_matrix().max_abs_diff(explicit_q_114(b(2), &l, &t).as_matrix()) < 1e-14);
    }

    #[test]
    fn diag_bound_cases() {
        let (m, l, _) = reference();
        let s = m.derive_spectral().unwrap();
        let rep = diag_bound_check(&l, s.kappa2, s.kappa3);
        assert!(rep.passed());
        let row2 = &rep.rows[1];
        assert!(s.kappa2_sq() - row2.value > 0.0);

        let rep = diag_bound_check(&SymMatrix::identity(3), 1.0, 1.0);
        assert!(rep.passed());
        assert!(rep.rows.iter().all(|r| r.value == 1.0 && r.weight.is_none()));

        let third = SymMatrix::from_rows(&[[1.0 / 3.0; 3]; 3]).unwrap();
        let l = third.square();
        let rep = diag_bound_check(&l, 0.0, 0.0);
        assert!(rep.passed());
        assert!(rep.rows.iter().all(|r| r.value.abs() < 1e-15 && r.weight.is_none()));
    }

    #[test]
    fn reference_family_gap() {
        let rep = family_gap_check(&BlockModelParams::reference_model()).unwrap();
        assert!(rep.applicable);
        assert!(rep.holds());
        assert_eq!(rep.rows.len(), 15);
        for row in &rep.rows {
            assert!(row.value < 0.0883986324);
        }
        let tight = rep.tightest().unwrap();
        assert_eq!(tight.partition.to_string(), "[[0,1,4,5],[2],[3]]");
        assert!((tight.value - 0.0702908835).abs() < 1e-9);
        assert_eq!(rep.rows.iter().filter(|r| r.chain_holds == Some(true)).count(), 12);
    }

    #[test]
    fn identity_gap_not_applicable() {
        let rep = family_gap_check(&BlockModelParams::identity_chain()).unwrap();
        assert!(!rep.regime.a1);
        assert!(!rep.applicable);
        assert!(!rep.holds());
    }

    #[test]
    fn merged_cell_reduction_algebra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let br: f64 = rng.gen_range(-1.0..1.0);
            let lhs = (1.0 - br) * (1.0 - 2.0 * br) - 2.0 * br * br;
            assert!((lhs - (1.0 - 3.0 * br)).abs() < 1e-14);
        }
    }
}
