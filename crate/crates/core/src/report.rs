//! Text and JSON rendering.
//!
//! Every real number is printed with exactly ten decimals. JSON numbers are
//! rounded to the same ten decimals before serialization, so the two formats
//! of one run carry identical values.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::certify::{CertificateReport, ScanSummary};
use crate::closedform::{diag_bound_check, gap_report, DiagBoundReport, FamilyDeterminants, GapReport};
use crate::model::{check_regime, BlockModelParams, RegimeReport, SpectralSummary};
use crate::modelfile::ValidationReport;
use crate::partitions::{classify, FamilyTag, SetPartition};
use crate::Result;

/// Fixed ten-decimal rendering; ties round half to even, and negative zero
/// prints as zero.
pub fn fmt10(x: f64) -> String {
    let s = format!("{x:.10}");
    if s.starts_with('-') && s[1..].bytes().all(|c| c == b'0' || c == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn round10(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = fmt10(x).parse().expect("formatted float");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round10).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with all floats rounded to ten decimals.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable report");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

pub fn certificate_text(rep: &CertificateReport) -> String {
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "certificate: six-state block model, all partitions into 3 cells").unwrap();
    write_params(w, &rep.params);
    writeln!(w, "relaxed benchmark      {}", fmt10(rep.relaxed_benchmark)).unwrap();
    writeln!(
        w,
        "best partition         {}  {}",
        rep.maximizer.partition, rep.maximizer.family
    )
    .unwrap();
    writeln!(w, "best determinant       {}", fmt10(rep.maximizer.determinant)).unwrap();
    writeln!(w, "block partition        {}", fmt10(rep.block_partition_value)).unwrap();
    writeln!(w, "gap                    {}", fmt10(rep.gap)).unwrap();
    writeln!(w, "tolerance              {}", fmt10(rep.tolerance)).unwrap();
    writeln!(
        w,
        "verdict                {}",
        if rep.strict_gap {
            "strict gap"
        } else {
            "no strict gap"
        }
    )
    .unwrap();
    writeln!(
        w,
        "closed-form checks     {} structured, max discrepancy {}",
        rep.structured_checked,
        fmt10(rep.max_closed_form_discrepancy)
    )
    .unwrap();
    let tied: Vec<String> = rep.tied_maximizers.iter().map(|p| p.to_string()).collect();
    writeln!(w, "tied maximizers        {}", tied.len()).unwrap();
    if tied.len() > 1 {
        for p in &tied {
            writeln!(w, "  {p}").unwrap();
        }
    }
    writeln!(w).unwrap();
    writeln!(w, "{:>4}  {:<22}  {:<28}  {}", "rank", "partition", "family", "determinant").unwrap();
    for (i, e) in rep.entries.iter().enumerate() {
        writeln!(
            w,
            "{:>4}  {:<22}  {:<28}  {}",
            i + 1,
            e.partition.to_string(),
            e.family.to_string(),
            fmt10(e.determinant)
        )
        .unwrap();
    }
    s
}

fn write_params(w: &mut String, p: &BlockModelParams) {
    writeln!(w, "parameters").unwrap();
    for (name, value) in p.named_values() {
        writeln!(w, "  {name:<4} {}", fmt10(value)).unwrap();
    }
}

/// Spectral data, regime conditions and the diagonal bound table.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub params: BlockModelParams,
    pub spectral: SpectralSummary,
    pub regime: RegimeReport,
    pub diagonal_bound: DiagBoundReport,
}

impl SpectrumReport {
    pub fn build(params: &BlockModelParams) -> Result<Self> {
        let params = params.validate()?;
        let spectral = SpectralSummary::derive(&params)?;
        let l = params.build_l();
        let regime = check_regime(&spectral, &l);
        let diagonal_bound = diag_bound_check(&l, spectral.kappa2, spectral.kappa3);
        Ok(Self {
            params,
            spectral,
            regime,
            diagonal_bound,
        })
    }
}

pub fn spectrum_text(rep: &SpectrumReport) -> String {
    let s = &rep.spectral;
    let mut out = String::new();
    let w = &mut out;
    write_params(w, &rep.params);
    writeln!(w, "kappa2                 {}", fmt10(s.kappa2)).unwrap();
    writeln!(w, "kappa3                 {}", fmt10(s.kappa3)).unwrap();
    for r in 0..3 {
        writeln!(w, "beta{}                  {}", r + 1, fmt10(s.beta[r])).unwrap();
    }
    for r in 0..3 {
        writeln!(w, "t{}                     {}", r + 1, fmt10(s.t[r])).unwrap();
    }
    writeln!(w, "t_star                 {}", fmt10(s.t_star)).unwrap();
    let argmax: Vec<String> = s.argmax.iter().map(|r| r.to_string()).collect();
    writeln!(w, "t_star attained at     {{{}}}", argmax.join(",")).unwrap();
    let spec: Vec<String> = s.t_spectrum.iter().map(|&x| fmt10(x)).collect();
    writeln!(w, "spectrum of T          {}", spec.join(" ")).unwrap();
    writeln!(w, "relaxed benchmark      {}", fmt10(s.relaxed_benchmark)).unwrap();
    match s.shortcut_benchmark {
        Some(v) => writeln!(w, "kappa2^2 * t_star      {}", fmt10(v)).unwrap(),
        None => writeln!(w, "kappa2^2 * t_star      n/a (A1 fails)").unwrap(),
    }

    let g = &rep.regime;
    writeln!(
        w,
        "A1 kappa2^2 > t_star > kappa3^2: {}  (upper margin {}, lower margin {})",
        g.a1,
        fmt10(g.a1_upper_margin),
        fmt10(g.a1_lower_margin)
    )
    .unwrap();
    writeln!(w, "A2 (3 l_rr - 1)/2 < kappa2^2:    {}", g.a2).unwrap();
    for (r, m) in &g.a2_margins {
        writeln!(w, "  r={r}  margin {}", fmt10(*m)).unwrap();
    }

    let d = &rep.diagonal_bound;
    writeln!(w).unwrap();
    writeln!(
        w,
        "diagonal bound  kappa3^2 = {}  kappa2^2 = {}",
        fmt10(d.kappa3_sq),
        fmt10(d.kappa2_sq)
    )
    .unwrap();
    writeln!(w, "{:>3}  {:>14}  {:>14}  {}", "i", "(3l_ii-1)/2", "weight", "pass").unwrap();
    for row in &d.rows {
        let weight = row.weight.map_or_else(|| "undefined".to_string(), fmt10);
        writeln!(w, "{:>3}  {:>14}  {:>14}  {}", row.index.get(), fmt10(row.value), weight, row.pass).unwrap();
    }
    out
}

pub fn validation_text(rep: &ValidationReport) -> String {
    let mut s = String::new();
    let w = &mut s;
    let rows = [
        "a1 + b1 + 2 c12 + 2 c13 - 1",
        "a2 + b2 + 2 c12 + 2 c23 - 1",
        "a3 + b3 + 2 c13 + 2 c23 - 1",
    ];
    for (check, label) in rep.rows.iter().zip(rows) {
        writeln!(
            w,
            "row {}  {label} = {}  {}",
            check.row,
            check.residual,
            if check.pass { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    for r in rep.ranges.iter().filter(|r| !r.pass) {
        writeln!(w, "range  {} = {} outside [0, 1]  FAIL", r.key, r.value).unwrap();
    }
    writeln!(w, "result {}", if rep.passed() { "pass" } else { "FAIL" }).unwrap();
    s
}

/// Closed-form table plus the family gap check.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormReport {
    pub determinants: FamilyDeterminants,
    pub gap: GapReport,
}

impl ClosedFormReport {
    pub fn build(params: &BlockModelParams) -> Result<Self> {
        let params = params.validate()?;
        let determinants = crate::closedform::closed_forms(&params)?;
        let summary = SpectralSummary::derive(&params)?;
        let gap = gap_report(&summary, &determinants.l)?;
        Ok(Self { determinants, gap })
    }
}

pub fn closed_form_text(rep: &ClosedFormReport) -> String {
    let d = &rep.determinants;
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "det L                  {}", fmt10(d.det_l)).unwrap();
    for i in 0..3 {
        let row: Vec<String> = d.l.as_matrix().row(i).iter().map(|&x| fmt10(x)).collect();
        writeln!(w, "L row {}                {}", i + 1, row.join(" ")).unwrap();
    }
    let t: Vec<String> = d.t.iter().map(|&x| fmt10(x)).collect();
    writeln!(w, "t                      {}", t.join(" ")).unwrap();
    writeln!(w, "max discrepancy        {}", fmt10(d.max_discrepancy())).unwrap();
    writeln!(w).unwrap();
    writeln!(
        w,
        "{:<22}  {:<28}  {:>12}  {:>12}  {:>12}",
        "partition", "family", "closed", "explicit", "generic"
    )
    .unwrap();
    for e in &d.entries {
        writeln!(
            w,
            "{:<22}  {:<28}  {:>12}  {:>12}  {:>12}",
            e.partition.to_string(),
            e.tag.to_string(),
            fmt10(e.closed_form),
            fmt10(e.explicit),
            fmt10(e.generic)
        )
        .unwrap();
    }

    let g = &rep.gap;
    writeln!(w).unwrap();
    writeln!(w, "family gap: A1 {}  A2 {}", g.regime.a1, g.regime.a2).unwrap();
    if !g.applicable {
        writeln!(w, "ordering conditions fail; the family gap does not apply to this model").unwrap();
    }
    writeln!(w, "bound kappa2^2 * t_star {}", fmt10(g.bound)).unwrap();
    writeln!(
        w,
        "{:<22}  {:>12}  {:>12}  {:<18}  {:>12}",
        "partition", "value", "margin", "strict", "chain bound"
    )
    .unwrap();
    for row in &g.rows {
        let strict = if row.strict {
            "strict"
        } else {
            "not numerically strict"
        };
        let chain = row.chain_bound.map_or_else(|| "-".to_string(), fmt10);
        writeln!(
            w,
            "{:<22}  {:>12}  {:>12}  {:<18}  {:>12}",
            row.partition.to_string(),
            fmt10(row.value),
            fmt10(row.margin),
            strict,
            chain
        )
        .unwrap();
    }
    writeln!(
        w,
        "family gap holds       {}",
        if g.holds() { "yes" } else { "no" }
    )
    .unwrap();
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumeratedPartition {
    pub partition: SetPartition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyTag>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub n: usize,
    pub k: usize,
    pub count: usize,
    pub partitions: Vec<EnumeratedPartition>,
}

impl Enumeration {
    pub fn build(n: usize, k: usize) -> Result<Self> {
        let partitions = crate::partitions::enumerate_partitions(n, k)?
            .into_iter()
            .map(|partition| {
                let family = (n == 6 && k == 3).then(|| classify(&partition).expect("6 into 3"));
                EnumeratedPartition { partition, family }
            })
            .collect::<Vec<_>>();
        Ok(Self {
            n,
            k,
            count: partitions.len(),
            partitions,
        })
    }
}

pub fn enumeration_text(e: &Enumeration) -> String {
    let mut s = String::new();
    let w = &mut s;
    let mut totals = [0usize; 4];
    for p in &e.partitions {
        match &p.family {
            Some(tag) => {
                writeln!(w, "{:<22}  {tag}", p.partition.to_string()).unwrap();
                let slot = match tag {
                    FamilyTag::Structured114 { .. } => 0,
                    FamilyTag::Structured123 { .. } => 1,
                    FamilyTag::Block => 2,
                    FamilyTag::Other(_) => 3,
                };
                totals[slot] += 1;
            }
            None => writeln!(w, "{}", p.partition).unwrap(),
        }
    }
    if e.n == 6 && e.k == 3 {
        writeln!(
            w,
            "families Structured114={} Structured123={} Block={} Other={}",
            totals[0], totals[1], totals[2], totals[3]
        )
        .unwrap();
    }
    writeln!(w, "count {}", e.count).unwrap();
    s
}

pub fn scan_text(s: &ScanSummary) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "{}", s.note).unwrap();
    writeln!(w, "radius {}  steps {}", fmt10(s.spec.radius), s.spec.steps).unwrap();
    writeln!(
        w,
        "points {}  evaluated {}  skipped {}  A1 {}  A2 {}  strict gap {}",
        s.total, s.evaluated, s.skipped, s.a1_holds, s.a2_holds, s.strict_gap
    )
    .unwrap();
    writeln!(w).unwrap();
    writeln!(
        w,
        "{:>13}  {:>13}  {:>13}  {:<5}  {:<5}  {:>13}  {}",
        "c12", "c13", "c23", "A1", "A2", "gap", "status"
    )
    .unwrap();
    for p in &s.points {
        match (&p.skipped_reason, p.gap) {
            (Some(reason), _) => writeln!(
                w,
                "{:>13}  {:>13}  {:>13}  {:<5}  {:<5}  {:>13}  skipped: {reason}",
                fmt10(p.c12),
                fmt10(p.c13),
                fmt10(p.c23),
                "-",
                "-",
                "-"
            )
            .unwrap(),
            (None, gap) => writeln!(
                w,
                "{:>13}  {:>13}  {:>13}  {:<5}  {:<5}  {:>13}  {}",
                fmt10(p.c12),
                fmt10(p.c13),
                fmt10(p.c23),
                p.a1.unwrap_or(false),
                p.a2.unwrap_or(false),
                fmt10(gap.unwrap_or(f64::NAN)),
                if p.strict_gap == Some(true) {
                    "strict gap"
                } else {
                    "no strict gap"
                }
            )
            .unwrap(),
        }
    }
    out
}
