//! Field metadata for monolithic matrices.
//!
//! A [`BlockLayout`] partitions the global degree-of-freedom range into named
//! fields. Index-set order is significant everywhere: it fixes the layout of
//! extracted sub-vectors and sub-matrices, and concatenation never sorts.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Ordered, duplicate-free list of global indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(indices.len());
        if let Some(d) = indices.iter().find(|&&i| !seen.insert(i)) {
            return Err(Error::Layout(format!("duplicate index {d} in index set")));
        }
        Ok(Self(indices))
    }

    pub fn range(start: usize, len: usize) -> Self {
        Self((start..start + len).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(start)` when the set is `start, start+1, ...`.
    pub fn contiguous_start(&self) -> Option<usize> {
        let start = *self.0.first()?;
        self.0
            .iter()
            .enumerate()
            .all(|(k, &i)| i == start + k)
            .then_some(start)
    }

    /// Concatenation in argument order. Fails if the parts overlap.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a IndexSet>) -> Result<IndexSet> {
        let mut all = Vec::new();
        for p in parts {
            all.extend_from_slice(&p.0);
        }
        IndexSet::new(all)
    }
}

impl std::ops::Deref for IndexSet {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: String,
    pub indices: IndexSet,
}

/// Named, disjoint fields whose union is exactly `0..global_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    fields: Vec<FieldSpec>,
    global_size: usize,
}

impl BlockLayout {
    pub fn new(fields: Vec<FieldSpec>, global_size: usize) -> Result<Self> {
        let mut names = HashSet::new();
        let mut owner = vec![false; global_size];
        for f in &fields {
            if f.name.is_empty() {
                return Err(Error::Layout("field name must be non-empty".into()));
            }
            if !names.insert(f.name.as_str()) {
                return Err(Error::Layout(format!("duplicate field name '{}'", f.name)));
            }
            for &i in f.indices.as_slice() {
                if i >= global_size {
                    return Err(Error::Layout(format!(
                        "field '{}' index {i} exceeds global size {global_size}",
                        f.name
                    )));
                }
                if std::mem::replace(&mut owner[i], true) {
                    return Err(Error::Layout(format!("index {i} owned by more than one field")));
                }
            }
        }
        if let Some(i) = owner.iter().position(|&o| !o) {
            return Err(Error::Layout(format!("index {i} not covered by any field")));
        }
        Ok(Self { fields, global_size })
    }

    /// Each field owns a contiguous range following the previous field.
    pub fn contiguous<S: AsRef<str>>(field_sizes: &[(S, usize)]) -> Result<Self> {
        let mut offset = 0;
        let mut fields = Vec::with_capacity(field_sizes.len());
        for (name, size) in field_sizes {
            if *size == 0 {
                return Err(Error::Layout(format!("field '{}' has zero size", name.as_ref())));
            }
            fields.push(FieldSpec {
                name: name.as_ref().to_string(),
                indices: IndexSet::range(offset, *size),
            });
            offset += size;
        }
        Self::new(fields, offset)
    }

    /// Node-interleaved numbering: every node stores `per_node[k]` consecutive
    /// dofs of field `k`, fields in order. Field sizes must equal
    /// `per_node[k] * nodes` for a common node count.
    pub fn interleaved<S: AsRef<str>>(field_sizes: &[(S, usize)], per_node: &[usize]) -> Result<Self> {
        if field_sizes.len() != per_node.len() || field_sizes.is_empty() {
            return Err(Error::Layout("one multiplicity per field is required".into()));
        }
        if per_node.contains(&0) {
            return Err(Error::Layout("per-node multiplicities must be positive".into()));
        }
        let nodes = field_sizes[0].1 / per_node[0];
        for ((name, size), &m) in field_sizes.iter().zip(per_node) {
            if *size != m * nodes || nodes == 0 {
                return Err(Error::Layout(format!(
                    "field '{}' size {size} inconsistent with {m} dofs per node",
                    name.as_ref()
                )));
            }
        }
        let stride: usize = per_node.iter().sum();
        let mut fields = Vec::with_capacity(per_node.len());
        let mut local_offset = 0;
        for ((name, _), &m) in field_sizes.iter().zip(per_node) {
            let idx = (0..nodes)
                .flat_map(|node| (0..m).map(move |k| node * stride + local_offset + k))
                .collect();
            fields.push(FieldSpec {
                name: name.as_ref().to_string(),
                indices: IndexSet::new(idx)?,
            });
            local_offset += m;
        }
        Self::new(fields, stride * nodes)
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn global_size(&self) -> usize {
        self.global_size
    }

    pub fn field_names(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.name == name)
    }

    fn require(&self, name: &str) -> Result<&FieldSpec> {
        self.field(name)
            .ok_or_else(|| Error::Layout(format!("unknown field '{name}'")))
    }

    /// Concatenated index set of the named fields, in the given order.
    pub fn group_indices<S: AsRef<str>>(&self, group: &[S]) -> Result<IndexSet> {
        let parts = group
            .iter()
            .map(|n| self.require(n.as_ref()).map(|f| &f.indices))
            .collect::<Result<Vec<_>>>()?;
        IndexSet::concat(parts)
    }

    /// Merges fields into named groups. Every field must appear in exactly one group.
    pub fn group_fields<S: AsRef<str>, T: AsRef<str>>(&self, groups: &[(S, Vec<T>)]) -> Result<Self> {
        let mut used = HashSet::new();
        let mut fields = Vec::with_capacity(groups.len());
        for (gname, members) in groups {
            for m in members {
                self.require(m.as_ref())?;
                if !used.insert(m.as_ref().to_string()) {
                    return Err(Error::Layout(format!(
                        "field '{}' assigned to more than one group",
                        m.as_ref()
                    )));
                }
            }
            fields.push(FieldSpec {
                name: gname.as_ref().to_string(),
                indices: self.group_indices(members)?,
            });
        }
        if let Some(f) = self.fields.iter().find(|f| !used.contains(&f.name)) {
            return Err(Error::Layout(format!("field '{}' not assigned to any group", f.name)));
        }
        Self::new(fields, self.global_size)
    }

    /// Layout of the sub-vector obtained by restricting to `group`: the
    /// selected fields, renumbered contiguously in concatenation order.
    pub fn local_layout<S: AsRef<str>>(&self, group: &[S]) -> Result<Self> {
        let sizes = group
            .iter()
            .map(|n| self.require(n.as_ref()).map(|f| (f.name.as_str(), f.indices.len())))
            .collect::<Result<Vec<_>>>()?;
        Self::contiguous(&sizes)
    }

    pub fn restrict_vector<S: AsRef<str>>(&self, x: &[f64], group: &[S]) -> Result<Vec<f64>> {
        if x.len() != self.global_size {
            return Err(Error::dims("restrict_vector", self.global_size, x.len()));
        }
        let idx = self.group_indices(group)?;
        Ok(idx.iter().map(|&i| x[i]).collect())
    }

    pub fn prolong_vector<S: AsRef<str>>(
        &self,
        sub: &[f64],
        group: &[S],
        x: &mut [f64],
        mode: ProlongMode,
    ) -> Result<()> {
        if x.len() != self.global_size {
            return Err(Error::dims("prolong_vector", self.global_size, x.len()));
        }
        let idx = self.group_indices(group)?;
        if sub.len() != idx.len() {
            return Err(Error::dims("prolong_vector (sub-vector)", idx.len(), sub.len()));
        }
        for (&i, &v) in idx.iter().zip(sub) {
            match mode {
                ProlongMode::Overwrite => x[i] = v,
                ProlongMode::Add => x[i] += v,
            }
        }
        Ok(())
    }

    /// Permutation matrix `P` with `P[k, idx[k]] = 1`, where `idx` lists
    /// the fields' indices in layout order. `P·A·Pᵀ` reorders a matrix so
    /// that each field is contiguous.
    pub fn field_order_permutation(&self) -> DenseMatrix {
        let mut p = DenseMatrix::zeros(self.global_size, self.global_size);
        let order = self.fields.iter().flat_map(|f| f.indices.iter().copied());
        for (k, i) in order.enumerate() {
            p[(k, i)] = 1.0;
        }
        p
    }

    pub fn to_json(&self) -> String {
        let file = LayoutFile {
            global_size: self.global_size,
            fields: self
                .fields
                .iter()
                .map(|f| match f.indices.contiguous_start() {
                    Some(start) => LayoutEntry {
                        name: f.name.clone(),
                        indices: None,
                        range: Some([start, f.indices.len()]),
                    },
                    None => LayoutEntry {
                        name: f.name.clone(),
                        indices: Some(f.indices.to_vec()),
                        range: None,
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(text)?;
        let fields = file
            .fields
            .into_iter()
            .map(|e| {
                let indices = match (e.indices, e.range) {
                    (Some(idx), None) => IndexSet::new(idx)?,
                    (None, Some([start, len])) => IndexSet::range(start, len),
                    _ => {
                        return Err(Error::Layout(format!(
                            "field '{}' needs exactly one of \"indices\" or \"range\"",
                            e.name
                        )))
                    }
                };
                Ok(FieldSpec { name: e.name, indices })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(fields, file.global_size)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProlongMode {
    Overwrite,
    Add,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    global_size: usize,
    fields: Vec<LayoutEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutEntry {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    indices: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    range: Option<[usize; 2]>,
}

/// A monolithic matrix plus independent row and column field layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittableMatrix {
    matrix: CsrMatrix,
    row_layout: BlockLayout,
    col_layout: BlockLayout,
}

impl SplittableMatrix {
    pub fn new(matrix: CsrMatrix, row_layout: BlockLayout, col_layout: BlockLayout) -> Result<Self> {
        if matrix.nrows() != row_layout.global_size() {
            return Err(Error::dims("SplittableMatrix rows", row_layout.global_size(), matrix.nrows()));
        }
        if matrix.ncols() != col_layout.global_size() {
            return Err(Error::dims("SplittableMatrix cols", col_layout.global_size(), matrix.ncols()));
        }
        Ok(Self {
            matrix,
            row_layout,
            col_layout,
        })
    }

    /// Square matrix sharing one layout for rows and columns.
    pub fn square(matrix: CsrMatrix, layout: BlockLayout) -> Result<Self> {
        Self::new(matrix, layout.clone(), layout)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn row_layout(&self) -> &BlockLayout {
        &self.row_layout
    }

    pub fn col_layout(&self) -> &BlockLayout {
        &self.col_layout
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    /// Copies out the block over the concatenated row and column groups. The
    /// result carries local layouts of the selected fields, so it can be
    /// split again.
    pub fn extract_block<S: AsRef<str>, T: AsRef<str>>(&self, row_group: &[S], col_group: &[T]) -> Result<Self> {
        let rows = self.row_layout.group_indices(row_group)?;
        let cols = self.col_layout.group_indices(col_group)?;
        let matrix = self.matrix.extract_submatrix(&rows, &cols)?;
        Self::new(
            matrix,
            self.row_layout.local_layout(row_group)?,
            self.col_layout.local_layout(col_group)?,
        )
    }

    /// Same matrix with both layouts regrouped.
    pub fn regroup<S: AsRef<str>, T: AsRef<str>>(&self, groups: &[(S, Vec<T>)]) -> Result<Self> {
        Self::new(
            self.matrix.clone(),
            self.row_layout.group_fields(groups)?,
            self.col_layout.group_fields(groups)?,
        )
    }
}
