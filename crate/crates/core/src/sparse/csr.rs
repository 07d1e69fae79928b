use crate::dense::DenseMatrix;
use crate::{Error, Result};

/// Canonical CSR matrix: rows sorted by column, no duplicate entries.
///
/// Explicit zeros are allowed in the pattern. Instances are immutable once
/// built; every constructor canonicalizes its input.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw CSR arrays. Columns within a row may be unsorted and
    /// may repeat; repeated entries are summed.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::dims("CsrMatrix::new (row_offsets)", nrows + 1, row_offsets.len()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::dims("CsrMatrix::new (values)", col_indices.len(), values.len()));
        }
        if row_offsets[0] != 0 || row_offsets[nrows] != values.len() {
            return Err(Error::Parse {
                location: "CsrMatrix::new".into(),
                msg: "row_offsets must start at 0 and end at nnz".into(),
            });
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parse {
                location: "CsrMatrix::new".into(),
                msg: "row_offsets must be non-decreasing".into(),
            });
        }
        if let Some(&c) = col_indices.iter().find(|&&c| c >= ncols) {
            return Err(Error::IndexOutOfRange { index: c, bound: ncols });
        }
        let mut offsets = Vec::with_capacity(nrows + 1);
        let mut cols = Vec::with_capacity(col_indices.len());
        let mut vals = Vec::with_capacity(values.len());
        offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            let range = row_offsets[i]..row_offsets[i + 1];
            let sorted = col_indices[range.clone()].windows(2).all(|w| w[0] < w[1]);
            if sorted {
                cols.extend_from_slice(&col_indices[range.clone()]);
                vals.extend_from_slice(&values[range]);
            } else {
                scratch.clear();
                scratch.extend(range.map(|k| (col_indices[k], values[k])));
                push_sorted_row(&mut scratch, &mut cols, &mut vals);
            }
            offsets.push(cols.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        })
    }

    /// Builds from (row, col, value) triplets in any order; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            if i >= nrows {
                return Err(Error::IndexOutOfRange { index: i, bound: nrows });
            }
            if j >= ncols {
                return Err(Error::IndexOutOfRange { index: j, bound: ncols });
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        Self::new(nrows, ncols, counts, cols, vals)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// Keeps only the nonzero entries of a dense matrix.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..a.nrows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Self {
            nrows: a.nrows(),
            ncols: a.ncols(),
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] += v;
            }
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Entry lookup by binary search; structural zeros read as 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::dims("spmv", self.ncols, x.len()));
        }
        if y.len() != self.nrows {
            return Err(Error::dims("spmv (output)", self.nrows, y.len()));
        }
        self.spmv_unchecked(x, y);
        Ok(())
    }

    pub(crate) fn spmv_unchecked(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_offsets[i]..self.row_offsets[i + 1];
            *yi = self.col_indices[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    /// `y = Aᵀx` without forming the transpose.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::dims("spmv_transpose", self.nrows, x.len()));
        }
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut cols = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        // Rows are visited in order, so each transposed row comes out sorted.
        for i in 0..self.nrows {
            let (rc, rv) = self.row(i);
            for (&j, &v) in rc.iter().zip(rv) {
                cols[next[j]] = i;
                vals[next[j]] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
        }
    }

    /// Sparse product `self · other` (Gustavson row-by-row with a dense accumulator).
    /// Entries that cancel to zero stay in the pattern.
    pub fn matmat(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::dims("matmat", self.ncols, other.nrows));
        }
        let mut acc = vec![0.0; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut row_cols: Vec<usize> = Vec::new();
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.nrows {
            row_cols.clear();
            let (ac, av) = self.row(i);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k);
                for (&j, &b) in bc.iter().zip(bv) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        row_cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            row_cols.sort_unstable();
            for &j in &row_cols {
                cols.push(j);
                vals.push(acc[j]);
            }
            offsets.push(cols.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        })
    }

    /// `alpha·self + beta·other` over the union pattern.
    pub fn add(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<CsrMatrix> {
        if self.nrows != other.nrows {
            return Err(Error::dims("add (rows)", self.nrows, other.nrows));
        }
        if self.ncols != other.ncols {
            return Err(Error::dims("add (cols)", self.ncols, other.ncols));
        }
        let mut offsets = vec![0];
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            loop {
                let (j, v) = match (ac.get(p), bc.get(q)) {
                    (None, None) => break,
                    (Some(&ja), None) => {
                        p += 1;
                        (ja, alpha * av[p - 1])
                    }
                    (None, Some(&jb)) => {
                        q += 1;
                        (jb, beta * bv[q - 1])
                    }
                    (Some(&ja), Some(&jb)) => match ja.cmp(&jb) {
                        std::cmp::Ordering::Less => {
                            p += 1;
                            (ja, alpha * av[p - 1])
                        }
                        std::cmp::Ordering::Greater => {
                            q += 1;
                            (jb, beta * bv[q - 1])
                        }
                        std::cmp::Ordering::Equal => {
                            p += 1;
                            q += 1;
                            (ja, alpha * av[p - 1] + beta * bv[q - 1])
                        }
                    },
                };
                cols.push(j);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        })
    }

    pub fn scale(&self, alpha: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `diag(d) · self`
    pub fn scale_rows(&self, d: &[f64]) -> Result<CsrMatrix> {
        if d.len() != self.nrows {
            return Err(Error::dims("scale_rows", self.nrows, d.len()));
        }
        let mut out = self.clone();
        for i in 0..self.nrows {
            let r = self.row_offsets[i]..self.row_offsets[i + 1];
            out.values[r].iter_mut().for_each(|v| *v *= d[i]);
        }
        Ok(out)
    }

    /// Submatrix `A[rows, cols]`, taken in the given orders. `cols` must be
    /// duplicate-free; `rows` may repeat.
    pub fn extract_submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<CsrMatrix> {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (local, &j) in cols.iter().enumerate() {
            if j >= self.ncols {
                return Err(Error::IndexOutOfRange { index: j, bound: self.ncols });
            }
            if col_map[j] != usize::MAX {
                return Err(Error::Layout(format!("duplicate column index {j} in extraction")));
            }
            col_map[j] = local;
        }
        if let Some(&i) = rows.iter().find(|&&i| i >= self.nrows) {
            return Err(Error::IndexOutOfRange { index: i, bound: self.nrows });
        }
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut out_cols = Vec::new();
        let mut out_vals = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for &i in rows {
            scratch.clear();
            let (rc, rv) = self.row(i);
            scratch.extend(
                rc.iter()
                    .zip(rv)
                    .filter(|(&j, _)| col_map[j] != usize::MAX)
                    .map(|(&j, &v)| (col_map[j], v)),
            );
            push_sorted_row(&mut scratch, &mut out_cols, &mut out_vals);
            offsets.push(out_cols.len());
        }
        Ok(CsrMatrix {
            nrows: rows.len(),
            ncols: cols.len(),
            row_offsets: offsets,
            col_indices: out_cols,
            values: out_vals,
        })
    }

    /// Main diagonal; structurally absent entries read as 0.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::dims("diagonal (non-square)", self.nrows, self.ncols));
        }
        Ok((0..self.nrows).map(|i| self.get(i, i)).collect())
    }

    /// Dense-image symmetry check with an absolute tolerance.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let t = self.transpose();
        match self.add(1.0, &t, -1.0) {
            Ok(d) => d.values.iter().all(|v| v.abs() <= tol),
            Err(_) => false,
        }
    }

    pub fn has_symmetric_pattern(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let t = self.transpose();
        self.row_offsets == t.row_offsets && self.col_indices == t.col_indices
    }
}

fn push_sorted_row(scratch: &mut [(usize, f64)], cols: &mut Vec<usize>, vals: &mut Vec<f64>) {
    scratch.sort_unstable_by_key(|e| e.0);
    let start = cols.len();
    for &(j, v) in scratch.iter() {
        if cols.len() > start && *cols.last().unwrap() == j {
            *vals.last_mut().unwrap() += v;
        } else {
            cols.push(j);
            vals.push(v);
        }
    }
}

impl crate::krylov::LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_unchecked(x, y);
    }
}
