//! Flat key-value model files.
//!
//! ```text
//! # comment
//! a1 = 0.536022
//! b1 = 0.218244
//! ...
//! c23 = 0.116629
//! ```
//!
//! Every one of the nine keys `a1 b1 a2 b2 a3 b3 c12 c13 c23` must appear
//! exactly once. Values are plain decimal literals (optionally quoted). They
//! are kept as exact decimals so that the row-sum residuals can be reported
//! without binary rounding, and converted to `f64` once.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::model::{BlockModelParams, ROW_SUM_TOL};
use crate::{Error, Result};

pub const KEYS: [&str; 9] = ["a1", "b1", "a2", "b2", "a3", "b3", "c12", "c13", "c23"];

const MAX_SCALE: u32 = 30;

/// An exact decimal `mantissa · 10^(-scale)`.
#[derive(Debug, Clone, Copy)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

impl Decimal {
    pub const ZERO: Decimal = Decimal {
        mantissa: 0,
        scale: 0,
    };

    pub fn parse(s: &str) -> Option<Self> {
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let scale = frac.len() as u32;
        if scale > MAX_SCALE {
            return None;
        }
        let mut mantissa: i128 = 0;
        for c in int.bytes().chain(frac.bytes()) {
            mantissa = mantissa.checked_mul(10)?.checked_add((c - b'0') as i128)?;
        }
        Some(Self {
            mantissa: if neg { -mantissa } else { mantissa },
            scale,
        })
    }

    fn rescaled(self, scale: u32) -> i128 {
        debug_assert!(scale >= self.scale);
        self.mantissa * 10i128.pow(scale - self.scale)
    }

    pub fn to_f64(self) -> f64 {
        // Round-trips through the shortest decimal text, which `str::parse`
        // converts with correct rounding.
        self.to_string().parse().expect("decimal text")
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0
    }

    fn sum(terms: &[(i128, Decimal)]) -> Decimal {
        let scale = terms.iter().map(|(_, d)| d.scale).max().unwrap_or(0);
        let mantissa = terms.iter().map(|&(k, d)| k * d.rescaled(scale)).sum();
        Decimal { mantissa, scale }
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Decimal {}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.rescaled(scale).cmp(&other.rescaled(scale))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let sign = if self.mantissa < 0 { "-" } else { "" };
        if scale == 0 {
            return write!(f, "{sign}{digits}");
        }
        let padded = format!("{digits:0>width$}", width = scale + 1);
        let (int, frac) = padded.split_at(padded.len() - scale);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            write!(f, "{sign}{int}")
        } else {
            write!(f, "{sign}{int}.{frac}")
        }
    }
}

impl Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    /// Values in `KEYS` order.
    values: [Decimal; 9],
}

/// Outcome of one row-sum constraint.
#[derive(Debug, Clone, Serialize)]
pub struct RowCheck {
    pub row: usize,
    /// `a_i + b_i + 2c_ij + 2c_ik - 1`, exact.
    pub residual: Decimal,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeCheck {
    pub key: &'static str,
    pub value: Decimal,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<RowCheck>,
    pub ranges: Vec<RangeCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.ranges.iter().all(|r| r.pass)
    }

    /// The first failing check as an error.
    pub fn first_error(&self) -> Option<Error> {
        if let Some(r) = self.ranges.iter().find(|r| !r.pass) {
            return Some(Error::OutOfRange {
                name: r.key,
                value: r.value.to_f64(),
            });
        }
        self.rows
            .iter()
            .find(|r| !r.pass)
            .map(|r| Error::ConstraintViolation {
                row: r.row,
                residual: r.residual.to_f64(),
            })
    }
}

impl ModelFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: [Option<Decimal>; 9] = [None; 9];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let slot = KEYS.iter().position(|&k| k == key).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            })?;
            if values[slot].is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            let value = value.trim();
            let unquoted = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            let dec = Decimal::parse(unquoted).ok_or_else(|| Error::Parse {
                line,
                message: format!("value for `{key}` is not a decimal literal: `{value}`"),
            })?;
            values[slot] = Some(dec);
        }
        let mut out = [Decimal::ZERO; 9];
        for (i, v) in values.into_iter().enumerate() {
            out[i] = v.ok_or(Error::MissingKey(KEYS[i]))?;
        }
        Ok(Self { values: out })
    }

    pub fn get(&self, key: &str) -> Option<Decimal> {
        KEYS.iter().position(|&k| k == key).map(|i| self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, Decimal)> + '_ {
        KEYS.iter().copied().zip(self.values.iter().copied())
    }

    /// Exact residuals of the three row-sum constraints.
    pub fn residuals(&self) -> [Decimal; 3] {
        let v = &self.values;
        let one = Decimal {
            mantissa: 1,
            scale: 0,
        };
        let (c12, c13, c23) = (v[6], v[7], v[8]);
        [
            Decimal::sum(&[(1, v[0]), (1, v[1]), (2, c12), (2, c13), (-1, one)]),
            Decimal::sum(&[(1, v[2]), (1, v[3]), (2, c12), (2, c23), (-1, one)]),
            Decimal::sum(&[(1, v[4]), (1, v[5]), (2, c13), (2, c23), (-1, one)]),
        ]
    }

    pub fn validation(&self) -> ValidationReport {
        let one = Decimal {
            mantissa: 1,
            scale: 0,
        };
        let ranges = self
            .entries()
            .map(|(key, value)| RangeCheck {
                key,
                value,
                pass: value >= Decimal::ZERO && value <= one,
            })
            .collect();
        let rows = self
            .residuals()
            .into_iter()
            .enumerate()
            .map(|(i, residual)| RowCheck {
                row: i + 1,
                residual,
                pass: residual.to_f64().abs() <= ROW_SUM_TOL,
            })
            .collect();
        ValidationReport { rows, ranges }
    }

    /// Converts to `f64` parameters, failing on the first violated constraint.
    pub fn params(&self) -> Result<BlockModelParams> {
        if let Some(e) = self.validation().first_error() {
            return Err(e);
        }
        let f = self.values.map(Decimal::to_f64);
        BlockModelParams {
            a: [f[0], f[2], f[4]],
            b: [f[1], f[3], f[5]],
            c12: f[6],
            c13: f[7],
            c23: f[8],
        }
        .validate()
    }
}
