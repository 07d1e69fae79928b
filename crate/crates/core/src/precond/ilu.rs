//! Zero-fill incomplete factorizations on the pattern of `A`.

use super::Preconditioner;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Pattern of `A` with the diagonal forced into every row.
fn with_diagonal(a: &CsrMatrix, shift: f64) -> Result<CsrMatrix> {
    let n = a.nrows();
    let shifted = a.add(1.0, &CsrMatrix::from_diagonal(&vec![shift; n]), 1.0)?;
    Ok(shifted)
}

fn pivot_tolerance(a: &CsrMatrix) -> f64 {
    let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    scale * 1e-14
}

/// ILU(0): `L` unit lower and `U` upper triangular sharing the pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_shift(a, 0.0)
    }

    /// On a zero pivot, retries once with `A + shift·I` when `shift > 0`.
    pub fn with_shift(a: &CsrMatrix, shift: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("ilu (square)", a.nrows(), a.ncols()));
        }
        match Self::factor(&with_diagonal(a, 0.0)?) {
            Err(e) if shift > 0.0 => {
                log::warn!("{e}; retrying with diagonal shift {shift}");
                Self::factor(&with_diagonal(a, shift)?)
            }
            other => other,
        }
    }

    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let offsets = a.row_offsets().to_vec();
        let cols = a.col_indices().to_vec();
        let mut vals = a.values().to_vec();
        let tiny = pivot_tolerance(a);
        let diag_pos: Vec<usize> = (0..n)
            .map(|i| offsets[i] + cols[offsets[i]..offsets[i + 1]].binary_search(&i).unwrap())
            .collect();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let row = offsets[i]..offsets[i + 1];
            for p in row.clone() {
                pos[cols[p]] = p;
            }
            for p in offsets[i]..diag_pos[i] {
                let k = cols[p];
                let factor = vals[p] / vals[diag_pos[k]];
                vals[p] = factor;
                for q in diag_pos[k] + 1..offsets[k + 1] {
                    let target = pos[cols[q]];
                    if target != usize::MAX {
                        vals[target] -= factor * vals[q];
                    }
                }
            }
            let d = vals[diag_pos[i]];
            for p in row {
                pos[cols[p]] = usize::MAX;
            }
            if d.abs() <= tiny || !d.is_finite() {
                return Err(Error::Setup(format!("zero pivot in ILU(0) at row {i}")));
            }
        }
        let lu = CsrMatrix::new(n, n, offsets, cols, vals)?;
        Ok(Self { lu, diag_pos })
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        let (off, cols, vals) = (self.lu.row_offsets(), self.lu.col_indices(), self.lu.values());
        for i in 0..n {
            let mut s = r[i];
            for p in off[i]..self.diag_pos[i] {
                s -= vals[p] * z[cols[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag_pos[i] + 1..off[i + 1] {
                s -= vals[p] * z[cols[p]];
            }
            z[i] = s / vals[self.diag_pos[i]];
        }
    }
}

/// IC(0): `A ≈ L·Lᵀ` on the lower-triangular pattern of a symmetric-pattern `A`.
#[derive(Debug, Clone)]
pub struct Ic0 {
    /// Lower triangle, diagonal last in each row.
    l: CsrMatrix,
}

impl Ic0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_shift(a, 0.0)
    }

    pub fn with_shift(a: &CsrMatrix, shift: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("icc (square)", a.nrows(), a.ncols()));
        }
        let a = with_diagonal(a, 0.0)?;
        if !a.has_symmetric_pattern() {
            return Err(Error::Setup("IC(0) requires a symmetric sparsity pattern".into()));
        }
        match Self::factor(&a) {
            Err(e) if shift > 0.0 => {
                log::warn!("{e}; retrying with diagonal shift {shift}");
                Self::factor(&with_diagonal(&a, shift)?)
            }
            other => other,
        }
    }

    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut off = vec![0];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j <= i {
                    cols.push(j);
                    vals.push(x);
                }
            }
            off.push(cols.len());
        }
        for i in 0..n {
            for p in off[i]..off[i + 1] {
                let k = cols[p];
                // sparse dot of rows i and k over columns < k
                let (mut s, mut a_ptr, mut b_ptr) = (vals[p], off[i], off[k]);
                while a_ptr < p && b_ptr < off[k + 1] - 1 {
                    match cols[a_ptr].cmp(&cols[b_ptr]) {
                        std::cmp::Ordering::Less => a_ptr += 1,
                        std::cmp::Ordering::Greater => b_ptr += 1,
                        std::cmp::Ordering::Equal => {
                            s -= vals[a_ptr] * vals[b_ptr];
                            a_ptr += 1;
                            b_ptr += 1;
                        }
                    }
                }
                if k == i {
                    if !(s > 0.0) {
                        return Err(Error::Setup(format!("non-positive pivot in IC(0) at row {i}")));
                    }
                    vals[p] = s.sqrt();
                } else {
                    vals[p] = s / vals[off[k + 1] - 1];
                }
            }
        }
        Ok(Self {
            l: CsrMatrix::new(n, n, off, cols, vals)?,
        })
    }
}

impl Preconditioner for Ic0 {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        let (off, cols, vals) = (self.l.row_offsets(), self.l.col_indices(), self.l.values());
        for i in 0..n {
            let last = off[i + 1] - 1;
            let mut s = r[i];
            for p in off[i]..last {
                s -= vals[p] * z[cols[p]];
            }
            z[i] = s / vals[last];
        }
        for i in (0..n).rev() {
            let last = off[i + 1] - 1;
            z[i] /= vals[last];
            let zi = z[i];
            for p in off[i]..last {
                z[cols[p]] -= vals[p] * zi;
            }
        }
    }
}
