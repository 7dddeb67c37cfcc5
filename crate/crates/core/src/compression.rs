//! Indicator frames and partition-constrained compressions `Q = HᵀTH`.

use crate::linalg::{Matrix, SymMatrix};
use crate::partitions::SetPartition;
use crate::{Error, Result};

/// Smallest eigenvalue tolerated by [`relaxed_benchmark`].
pub const PSD_TOL: f64 = 1e-10;

/// Columns `1_{A_α} / √|A_α|`, one per cell, in the given cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorFrame {
    h: Matrix,
}

impl IndicatorFrame {
    /// Frame for a canonical partition; columns follow the canonical cell order.
    pub fn build(p: &SetPartition) -> Self {
        Self::from_ordered_cells(p.n(), p.cells()).expect("canonical partition is valid")
    }

    /// Frame for cells in an arbitrary order. The cells must partition `0..n`.
    pub fn from_ordered_cells<C: AsRef<[usize]>>(n: usize, cells: &[C]) -> Result<Self> {
        SetPartition::from_cells(n, cells)?;
        let mut h = Matrix::zeros(n, cells.len());
        for (col, cell) in cells.iter().enumerate() {
            let cell = cell.as_ref();
            let w = 1.0 / (cell.len() as f64).sqrt();
            for &s in cell {
                h[(s, col)] = w;
            }
        }
        Ok(Self { h })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn gram(&self) -> Matrix {
        crate::linalg::multiply(&self.h.transpose(), &self.h).expect("frame")
    }
}

pub fn compress(t: &SymMatrix, h: &IndicatorFrame) -> Result<SymMatrix> {
    t.congruence(&h.h)
}

/// `det(HᵀTH)` for the canonical frame of `p`.
pub fn det_compression(t: &SymMatrix, p: &SetPartition) -> Result<f64> {
    Ok(compress(t, &IndicatorFrame::build(p))?.determinant())
}

/// Product of the `k` largest eigenvalues of a positive semidefinite `t`.
pub fn relaxed_benchmark(t: &SymMatrix, k: usize) -> Result<f64> {
    if k == 0 || k > t.dim() {
        return Err(Error::Argument(format!(
            "k = {k} must lie in 1..={}",
            t.dim()
        )));
    }
    let ev = t.eigen()?.eigenvalues;
    let min = *ev.last().unwrap();
    if min < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(ev[..k].iter().product())
}
