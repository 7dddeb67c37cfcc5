//! Exhaustive certificate over all 90 partitions of the six-state model.

use serde::Serialize;

use crate::closedform::closed_form;
use crate::compression::{det_compression, relaxed_benchmark};
use crate::model::{check_regime, BlockModelParams, SpectralSummary};
use crate::partitions::{classify, enumerate_partitions, FamilyTag, SetPartition};
use crate::{Error, Result};

/// Default absolute tolerance for certified comparisons (values are
/// reported to 10 decimal places).
pub const CERT_TOL: f64 = 1e-9;

/// Largest allowed gap between a closed form and the generic determinant.
pub const CONSISTENCY_TOL: f64 = 1e-11;

/// Determinants within this distance of the maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertEntry {
    pub partition: SetPartition,
    pub family: FamilyTag,
    pub determinant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub params: BlockModelParams,
    pub relaxed_benchmark: f64,
    /// Descending by determinant, then ascending by restricted-growth string.
    pub entries: Vec<CertEntry>,
    /// Lexicographically smallest partition among the tied maxima.
    pub maximizer: CertEntry,
    /// Every partition within `TIE_TOL` of the maximum.
    pub tied_maximizers: Vec<SetPartition>,
    pub block_partition_value: f64,
    /// `relaxed_benchmark − maximizer.determinant`.
    pub gap: f64,
    /// `gap > tolerance`.
    pub strict_gap: bool,
    pub tolerance: f64,
    pub structured_checked: usize,
    pub max_closed_form_discrepancy: f64,
}

impl CertificateReport {
    pub fn count_family(&self, pred: impl Fn(&FamilyTag) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(&e.family)).count()
    }
}

pub fn run_certificate(params: &BlockModelParams) -> Result<CertificateReport> {
    run_certificate_with_tol(params, CERT_TOL)
}

/// Evaluates every partition, cross-checks the structured ones against their
/// closed forms, and compares the best against the relaxed benchmark.
pub fn run_certificate_with_tol(params: &BlockModelParams, tolerance: f64) -> Result<CertificateReport> {
    let params = params.validate()?;
    let t = params.build_t();
    let l = params.build_l();
    let tr = params.beta().map(|b| b * b);
    let relaxed = relaxed_benchmark(&t, 3)?;

    let mut entries = Vec::with_capacity(90);
    let mut structured_checked = 0;
    let mut max_discrepancy: f64 = 0.0;
    for partition in enumerate_partitions(6, 3)? {
        let family = classify(&partition)?;
        let determinant = det_compression(&t, &partition)?;
        if let Some(closed) = closed_form(&family, &l, &tr) {
            let discrepancy = (closed - determinant).abs();
            if !(discrepancy < CONSISTENCY_TOL) {
                return Err(Error::Inconsistent {
                    partition: partition.to_string(),
                    closed,
                    generic: determinant,
                    discrepancy,
                });
            }
            structured_checked += 1;
            max_discrepancy = max_discrepancy.max(discrepancy);
        }
        entries.push(CertEntry {
            partition,
            family,
            determinant,
        });
    }

    let block_partition_value = entries
        .iter()
        .find(|e| e.family == FamilyTag::Block)
        .map(|e| e.determinant)
        .expect("block partition is enumerated");

    let best = entries
        .iter()
        .map(|e| e.determinant)
        .fold(f64::NEG_INFINITY, f64::max);
    // Enumeration order is lexicographic, so the first tied entry is the
    // smallest encoding.
    let tied: Vec<&CertEntry> = entries
        .iter()
        .filter(|e| e.determinant >= best - TIE_TOL)
        .collect();
    let maximizer = tied[0].clone();
    let tied_maximizers = tied.iter().map(|e| e.partition.clone()).collect();

    entries.sort_by(|a, b| {
        b.determinant
            .total_cmp(&a.determinant)
            .then_with(|| a.partition.labels().cmp(b.partition.labels()))
    });

    let gap = relaxed - maximizer.determinant;
    Ok(CertificateReport {
        params,
        relaxed_benchmark: relaxed,
        entries,
        maximizer,
        tied_maximizers,
        block_partition_value,
        gap,
        strict_gap: gap > tolerance,
        tolerance,
        structured_checked,
        max_closed_form_discrepancy: max_discrepancy,
    })
}

/// A symmetric grid around the base couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSpec {
    /// Half-width of the grid on each coupling.
    pub radius: f64,
    /// Points per coupling; the grid has `steps³` points.
    pub steps: usize,
}

impl ScanSpec {
    pub fn validate(self) -> Result<Self> {
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::Argument(format!("radius {} must be finite and >= 0", self.radius)));
        }
        if self.steps == 0 {
            return Err(Error::Argument("steps must be at least 1".into()));
        }
        Ok(self)
    }

    /// Offsets applied to one coupling. A zero radius or a single step
    /// collapses to the base value.
    pub fn offsets(&self) -> Vec<f64> {
        if self.radius == 0.0 || self.steps == 1 {
            return vec![0.0];
        }
        let h = 2.0 * self.radius / (self.steps - 1) as f64;
        (0..self.steps).map(|i| -self.radius + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    /// `None` when the point was skipped.
    pub params: Option<BlockModelParams>,
    pub skipped_reason: Option<String>,
    pub a1: Option<bool>,
    pub a2: Option<bool>,
    pub gap: Option<f64>,
    pub strict_gap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub note: &'static str,
    pub spec: ScanSpec,
    pub total: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub a1_holds: usize,
    pub a2_holds: usize,
    pub strict_gap: usize,
    pub points: Vec<ScanPoint>,
}

/// Moves the couplings over the grid, refits each `a_i` so the row sums stay
/// at one, and records the regime and certificate verdict per point.
pub fn scan_grid(base: &BlockModelParams, spec: ScanSpec, tolerance: f64) -> Result<ScanSummary> {
    let spec = spec.validate()?;
    let base = base.validate()?;
    let offsets = spec.offsets();
    let mut points = Vec::new();
    for &d12 in &offsets {
        for &d13 in &offsets {
            for &d23 in &offsets {
                let mut p = base;
                p.c12 += d12;
                p.c13 += d13;
                p.c23 += d23;
                points.push(evaluate_point(p, tolerance)?);
            }
        }
    }
    let count = |f: fn(&ScanPoint) -> bool| points.iter().filter(|p| f(p)).count();
    Ok(ScanSummary {
        note: "exploratory grid scan; no claims about parameter regions",
        spec,
        total: points.len(),
        evaluated: count(|p| p.params.is_some()),
        skipped: count(|p| p.params.is_none()),
        a1_holds: count(|p| p.a1 == Some(true)),
        a2_holds: count(|p| p.a2 == Some(true)),
        strict_gap: count(|p| p.strict_gap == Some(true)),
        points,
    })
}

fn evaluate_point(mut p: BlockModelParams, tolerance: f64) -> Result<ScanPoint> {
    for i in 0..3 {
        let outflow: f64 = (0..3).filter(|&j| j != i).map(|j| p.coupling(i, j)).sum();
        p.a[i] = 1.0 - p.b[i] - 2.0 * outflow;
    }
    let mut point = ScanPoint {
        c12: p.c12,
        c13: p.c13,
        c23: p.c23,
        params: None,
        skipped_reason: None,
        a1: None,
        a2: None,
        gap: None,
        strict_gap: None,
    };
    let p = match p.validate() {
        Ok(p) => p,
        Err(e) => {
            point.skipped_reason = Some(e.to_string());
            return Ok(point);
        }
    };
    let summary = SpectralSummary::derive(&p)?;
    let regime = check_regime(&summary, &p.build_l());
    let cert = run_certificate_with_tol(&p, tolerance)?;
    point.params = Some(p);
    point.a1 = Some(regime.a1);
    point.a2 = Some(regime.a2);
    point.gap = Some(cert.gap);
    point.strict_gap = Some(cert.strict_gap);
    Ok(point)
}
