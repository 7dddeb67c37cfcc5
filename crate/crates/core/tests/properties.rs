//! Randomized checks over many valid block models.

use lumpgap::closedform::{
    closed_form, det_114_unreduced, det_123_unreduced, diag_bound_check, explicit_q_114, explicit_q_123,
    merged_cell_coefficients, structured_partitions,
};
use lumpgap::compression::{det_compression, relaxed_benchmark};
use lumpgap::model::{BlockIndex, BlockModelParams};
use lumpgap::partitions::{enumerate_partitions, FamilyTag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODELS: usize = 1000;

fn models(seed: u64) -> impl Iterator<Item = BlockModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..MODELS).map(move |_| BlockModelParams::sample(&mut rng))
}

#[test]
fn closed_forms_match_generic_compression() {
    let structured = structured_partitions();
    assert_eq!(structured.len(), 15);
    for m in models(1) {
        let t = m.build_t();
        let l = m.build_l();
        let tr = m.beta().map(|b| b * b);
        for (p, tag) in &structured {
            let generic = det_compression(&t, p).unwrap();
            let closed = closed_form(tag, &l, &tr).unwrap();
            assert!((closed - generic).abs() < 1e-11, "{p} {tag}: {closed} vs {generic}");
            let explicit = match *tag {
                FamilyTag::Structured114 { r } => explicit_q_114(r, &l, &tr).determinant(),
                FamilyTag::Structured123 { p, q, r } => explicit_q_123(p, q, r, &l, &tr).unwrap().determinant(),
                _ => unreachable!(),
            };
            assert!((explicit - generic).abs() < 1e-11, "{p} {tag}: explicit {explicit} vs {generic}");
        }
    }
}

#[test]
fn unreduced_expansions_match_reduced_forms() {
    for m in models(2) {
        let l = m.build_l();
        let tr = m.beta().map(|b| b * b);
        let e = |i: BlockIndex, j: BlockIndex| l[(i.offset(), j.offset())];
        for r in BlockIndex::ALL {
            let (a, b) = merged_cell_coefficients(r, &l);
            assert!((a - (1.0 - b)).abs() < 1e-12);
            assert!((e(r, r) - (1.0 - 2.0 * b)).abs() < 1e-12);
            let reduced = closed_form(&FamilyTag::Structured114 { r }, &l, &tr).unwrap();
            assert!((det_114_unreduced(r, &l, &tr) - reduced).abs() < 1e-12);
        }
        for p in BlockIndex::ALL {
            for r in BlockIndex::ALL.into_iter().filter(|&r| r != p) {
                let q = BlockIndex::ALL.into_iter().find(|&q| q != p && q != r).unwrap();
                let s = e(p, q) + e(p, r);
                assert!((e(q, q) + 2.0 * e(q, r) + e(r, r) - (2.0 - s)).abs() < 1e-12);
                assert!((e(p, p) - (1.0 - s)).abs() < 1e-12);
                let reduced = closed_form(&FamilyTag::Structured123 { p, q, r }, &l, &tr).unwrap();
                assert!((det_123_unreduced(p, q, r, &l, &tr).unwrap() - reduced).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn diagonal_bound_holds() {
    for m in models(3) {
        let s = m.derive_spectral().unwrap();
        let rep = diag_bound_check(&m.build_l(), s.kappa2, s.kappa3);
        assert!(rep.passed(), "{m:?}: {rep:?}");
        for row in &rep.rows {
            if let Some(w) = row.weight {
                assert!((-1e-12..=1.0 + 1e-12).contains(&w), "weight {w}");
            }
        }
    }
}

#[test]
fn partitions_never_beat_relaxed_benchmark() {
    let partitions = enumerate_partitions(6, 3).unwrap();
    for m in models(4).take(200) {
        let t = m.build_t();
        let relaxed = relaxed_benchmark(&t, 3).unwrap();
        for p in &partitions {
            assert!(det_compression(&t, p).unwrap() <= relaxed + 1e-12);
        }
    }
}
