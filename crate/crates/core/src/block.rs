//! Matrix and vector containers, row-block partitioning, and the
//! matrix-vector kernels every other module runs on.
//!
//! A [`DataMatrix`] is either dense (row-major) or compressed sparse row.
//! Both representations answer the same queries and produce bit-identical
//! products for the same logical matrix, because the sparse kernel visits
//! the nonzeros of a row in the same left-to-right order the dense kernel
//! does and skipping an exact zero term never changes a float sum.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockError {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyShape { rows: usize, cols: usize },
    #[error("dense storage holds {got} values, expected {expected}")]
    StorageLength { expected: usize, got: usize },
    #[error("row {row}: column indices must be strictly increasing and < {cols}")]
    BadColumnIndex { row: usize, cols: usize },
    #[error("row pointer array is malformed")]
    BadRowPointer,
    #[error("more blocks than rows: {blocks} blocks for {rows} rows")]
    MoreBlocksThanRows { blocks: usize, rows: usize },
    #[error("block count must be at least 1")]
    ZeroBlocks,
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BlockError {
    fn from(e: std::io::Error) -> Self {
        BlockError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BlockError>;

/// A real vector. Dereferences to `[f64]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(values: Vec<f64>) -> Self {
        Vector(values)
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self += coef * other`
    pub fn axpy(&mut self, coef: f64, other: &[f64]) {
        debug_assert_eq!(self.0.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += coef * b;
        }
    }

    /// Concatenate vectors in order.
    pub fn concat<'a, I: IntoIterator<Item = &'a Vector>>(parts: I) -> Vector {
        let mut out = Vec::new();
        for p in parts {
            out.extend_from_slice(&p.0);
        }
        Vector(out)
    }

    /// Largest absolute entrywise difference divided by `max(1e-300, ‖other‖∞)`.
    pub fn relative_error(&self, reference: &[f64]) -> f64 {
        assert_eq!(self.0.len(), reference.len(), "relative_error length mismatch");
        let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self
            .0
            .iter()
            .zip(reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.0 {
            writeln!(w, "{v:?}")?;
        }
        Ok(())
    }

    /// Reads one value per line (or comma separated values on any line).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Vector> {
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for tok in line.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                values.push(tok.parse::<f64>().map_err(|e| BlockError::Parse {
                    line: lineno + 1,
                    msg: e.to_string(),
                })?);
            }
        }
        Ok(Vector(values))
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Storage {
    Dense(Vec<f64>),
    Csr {
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

/// An `rows x cols` real matrix with dense or CSR storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl DataMatrix {
    /// Dense row-major matrix.
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if data.len() != rows * cols {
            return Err(BlockError::StorageLength {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(DataMatrix {
            rows,
            cols,
            storage: Storage::Dense(data),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        check_shape(r, c)?;
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(BlockError::DimensionMismatch {
                    what: "row length",
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        DataMatrix::dense(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        DataMatrix::dense(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut m = vec![0.0; size * size];
        for i in 0..size {
            m[i * size + i] = 1.0;
        }
        DataMatrix::dense(size, size, m)
    }

    /// CSR matrix from raw arrays. Column indices must be strictly
    /// increasing within each row.
    pub fn csr(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_shape(rows, cols)?;
        if row_ptr.len() != rows + 1
            || row_ptr[0] != 0
            || *row_ptr.last().unwrap() != col_idx.len()
            || col_idx.len() != values.len()
            || row_ptr.windows(2).any(|w| w[0] > w[1])
        {
            return Err(BlockError::BadRowPointer);
        }
        for row in 0..rows {
            let idx = &col_idx[row_ptr[row]..row_ptr[row + 1]];
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&c| c >= cols) {
                return Err(BlockError::BadColumnIndex { row, cols });
            }
        }
        Ok(DataMatrix {
            rows,
            cols,
            storage: Storage::Csr {
                row_ptr,
                col_idx,
                values,
            },
        })
    }

    /// CSR matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and explicit zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows {
                return Err(BlockError::DimensionMismatch {
                    what: "triplet row index",
                    expected: rows,
                    got: r,
                });
            }
            if c >= cols {
                return Err(BlockError::BadColumnIndex { row: r, cols });
            }
        }
        sorted.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        // drop explicit zeros after summation
        let mut keep_c = Vec::with_capacity(col_idx.len());
        let mut keep_v = Vec::with_capacity(values.len());
        for ((c, v), r) in col_idx.into_iter().zip(values).zip(row_of) {
            if v != 0.0 {
                keep_c.push(c);
                keep_v.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        DataMatrix::csr(rows, cols, row_ptr, keep_c, keep_v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Csr { .. })
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| **v != 0.0).count(),
            Storage::Csr { values, .. } => values.iter().filter(|v| **v != 0.0).count(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        match &self.storage {
            Storage::Dense(d) => d[row * self.cols + col],
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => {
                let idx = &col_idx[row_ptr[row]..row_ptr[row + 1]];
                match idx.binary_search(&col) {
                    Ok(k) => values[row_ptr[row] + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Visit the nonzeros of one row in increasing column order.
    pub fn for_each_in_row<F: FnMut(usize, f64)>(&self, row: usize, mut f: F) {
        match &self.storage {
            Storage::Dense(d) => {
                for (c, &v) in d[row * self.cols..(row + 1) * self.cols].iter().enumerate() {
                    if v != 0.0 {
                        f(c, v);
                    }
                }
            }
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => {
                for k in row_ptr[row]..row_ptr[row + 1] {
                    if values[k] != 0.0 {
                        f(col_idx[k], values[k]);
                    }
                }
            }
        }
    }

    pub fn to_dense(&self) -> DataMatrix {
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Csr { .. } => {
                let mut d = vec![0.0; self.rows * self.cols];
                for r in 0..self.rows {
                    self.for_each_in_row(r, |c, v| d[r * self.cols + c] = v);
                }
                DataMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    storage: Storage::Dense(d),
                }
            }
        }
    }

    pub fn to_sparse(&self) -> DataMatrix {
        match &self.storage {
            Storage::Csr { .. } => self.clone(),
            Storage::Dense(_) => {
                let mut row_ptr = Vec::with_capacity(self.rows + 1);
                let mut col_idx = Vec::new();
                let mut values = Vec::new();
                row_ptr.push(0);
                for r in 0..self.rows {
                    self.for_each_in_row(r, |c, v| {
                        col_idx.push(c);
                        values.push(v);
                    });
                    row_ptr.push(col_idx.len());
                }
                DataMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    storage: Storage::Csr {
                        row_ptr,
                        col_idx,
                        values,
                    },
                }
            }
        }
    }

    /// Row-major dense copy of the values.
    pub fn to_row_major(&self) -> Vec<f64> {
        match self.to_dense().storage {
            Storage::Dense(d) => d,
            Storage::Csr { .. } => unreachable!(),
        }
    }

    /// `y = self * x`
    pub fn multiply(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(BlockError::DimensionMismatch {
                what: "vector length vs matrix columns",
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            self.for_each_in_row(r, |c, v| acc += v * x[c]);
            *out = acc;
        }
        Ok(Vector(y))
    }

    /// `y = selfᵀ * x`
    pub fn transpose_multiply(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.rows {
            return Err(BlockError::DimensionMismatch {
                what: "vector length vs matrix rows",
                expected: self.rows,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            self.for_each_in_row(r, |c, v| y[c] += v * xr);
        }
        Ok(Vector(y))
    }

    /// Rows `start..end` as a new matrix with the same storage kind.
    pub fn row_slice(&self, start: usize, end: usize) -> Result<DataMatrix> {
        assert!(start < end && end <= self.rows, "bad row range");
        match &self.storage {
            Storage::Dense(d) => DataMatrix::dense(
                end - start,
                self.cols,
                d[start * self.cols..end * self.cols].to_vec(),
            ),
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => {
                let base = row_ptr[start];
                let rp = row_ptr[start..=end].iter().map(|p| p - base).collect();
                DataMatrix::csr(
                    end - start,
                    self.cols,
                    rp,
                    col_idx[base..row_ptr[end]].to_vec(),
                    values[base..row_ptr[end]].to_vec(),
                )
            }
        }
    }

    /// Stack matrices vertically. The result is sparse if any part is.
    pub fn vstack(parts: &[DataMatrix]) -> Result<DataMatrix> {
        let first = parts.first().ok_or(BlockError::EmptyShape { rows: 0, cols: 0 })?;
        let cols = first.cols;
        for p in parts {
            if p.cols != cols {
                return Err(BlockError::DimensionMismatch {
                    what: "column count in vstack",
                    expected: cols,
                    got: p.cols,
                });
            }
        }
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        if parts.iter().any(DataMatrix::is_sparse) {
            let mut row_ptr = vec![0];
            let mut col_idx = Vec::new();
            let mut values = Vec::new();
            for p in parts {
                for r in 0..p.rows {
                    p.for_each_in_row(r, |c, v| {
                        col_idx.push(c);
                        values.push(v);
                    });
                    row_ptr.push(col_idx.len());
                }
            }
            DataMatrix::csr(rows, cols, row_ptr, col_idx, values)
        } else {
            let mut data = Vec::with_capacity(rows * cols);
            for p in parts {
                data.extend(p.to_row_major());
            }
            DataMatrix::dense(rows, cols, data)
        }
    }

    /// `Σ coef_k · parts_k` for equally shaped matrices. Sparse if any
    /// part is sparse. Terms are accumulated in the given order.
    pub fn linear_combination(terms: &[(f64, &DataMatrix)], rows: usize, cols: usize) -> Result<DataMatrix> {
        for (_, m) in terms {
            if m.rows != rows || m.cols != cols {
                return Err(BlockError::DimensionMismatch {
                    what: "block shape in linear combination",
                    expected: rows * cols,
                    got: m.rows * m.cols,
                });
            }
        }
        if terms.iter().any(|(_, m)| m.is_sparse()) {
            let mut row_ptr = vec![0];
            let mut col_idx = Vec::new();
            let mut values = Vec::new();
            let mut acc: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
            for r in 0..rows {
                acc.clear();
                for (coef, m) in terms {
                    m.for_each_in_row(r, |c, v| *acc.entry(c).or_insert(0.0) += coef * v);
                }
                for (&c, &v) in &acc {
                    if v != 0.0 {
                        col_idx.push(c);
                        values.push(v);
                    }
                }
                row_ptr.push(col_idx.len());
            }
            DataMatrix::csr(rows, cols, row_ptr, col_idx, values)
        } else {
            let mut data = vec![0.0; rows * cols];
            for (coef, m) in terms {
                if let Storage::Dense(d) = &m.storage {
                    for (a, b) in data.iter_mut().zip(d) {
                        *a += coef * b;
                    }
                }
            }
            DataMatrix::dense(rows, cols, data)
        }
    }

    /// Parse a Matrix Market file (`coordinate` or `array`; `real`,
    /// `integer` or `pattern`; `general`, `symmetric` or `skew-symmetric`).
    /// Coordinate files load as CSR, array files as dense.
    pub fn read_matrix_market<R: BufRead>(r: R) -> Result<DataMatrix> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(BlockError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let header = header?.to_lowercase();
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
            return Err(BlockError::Parse {
                line: 1,
                msg: "missing %%MatrixMarket matrix header".into(),
            });
        }
        let format = fields[2];
        let field = fields[3];
        let symmetry = fields[4];
        if field == "complex" {
            return Err(BlockError::Parse {
                line: 1,
                msg: "complex matrices are not supported".into(),
            });
        }
        let pattern = field == "pattern";
        let (sym, skew) = match symmetry {
            "general" => (false, false),
            "symmetric" => (true, false),
            "skew-symmetric" => (true, true),
            other => {
                return Err(BlockError::Parse {
                    line: 1,
                    msg: format!("unsupported symmetry '{other}'"),
                })
            }
        };

        let mut body = Vec::new();
        for (no, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            body.push((no + 1, t.to_string()));
        }
        let mut body = body.into_iter();
        let (size_line, size) = body.next().ok_or(BlockError::Parse {
            line: 1,
            msg: "missing size line".into(),
        })?;
        let dims: Vec<usize> = size
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| BlockError::Parse {
                line: size_line,
                msg: e.to_string(),
            })?;
        let parse_f = |line: usize, t: &str| {
            t.parse::<f64>().map_err(|e| BlockError::Parse {
                line,
                msg: e.to_string(),
            })
        };
        match format {
            "coordinate" => {
                if dims.len() != 3 {
                    return Err(BlockError::Parse {
                        line: size_line,
                        msg: "coordinate size line needs rows cols nnz".into(),
                    });
                }
                let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
                let mut trip = Vec::with_capacity(nnz);
                for (line, text) in body.by_ref().take(nnz) {
                    let tok: Vec<&str> = text.split_whitespace().collect();
                    if tok.len() < if pattern { 2 } else { 3 } {
                        return Err(BlockError::Parse {
                            line,
                            msg: "short coordinate entry".into(),
                        });
                    }
                    let i: usize = tok[0].parse().map_err(|_| BlockError::Parse {
                        line,
                        msg: "bad row index".into(),
                    })?;
                    let j: usize = tok[1].parse().map_err(|_| BlockError::Parse {
                        line,
                        msg: "bad column index".into(),
                    })?;
                    if i == 0 || j == 0 || i > rows || j > cols {
                        return Err(BlockError::Parse {
                            line,
                            msg: "index out of range".into(),
                        });
                    }
                    let v = if pattern { 1.0 } else { parse_f(line, tok[2])? };
                    trip.push((i - 1, j - 1, v));
                    if sym && i != j {
                        trip.push((j - 1, i - 1, if skew { -v } else { v }));
                    }
                }
                if trip.len() < nnz {
                    return Err(BlockError::Parse {
                        line: size_line,
                        msg: "fewer entries than declared".into(),
                    });
                }
                DataMatrix::from_triplets(rows, cols, &trip)
            }
            "array" => {
                if dims.len() != 2 || pattern {
                    return Err(BlockError::Parse {
                        line: size_line,
                        msg: "array size line needs rows cols".into(),
                    });
                }
                let (rows, cols) = (dims[0], dims[1]);
                check_shape(rows, cols)?;
                let mut data = vec![0.0; rows * cols];
                // column-major; symmetric arrays list the lower triangle only
                let mut positions = Vec::new();
                for j in 0..cols {
                    let start = if sym { j + usize::from(skew) } else { 0 };
                    for i in start..rows {
                        positions.push((i, j));
                    }
                }
                let mut count = 0;
                for ((line, text), &(i, j)) in body.by_ref().zip(positions.iter()) {
                    let v = parse_f(line, text.split_whitespace().next().unwrap_or(""))?;
                    data[i * cols + j] = v;
                    if sym && i != j {
                        data[j * cols + i] = if skew { -v } else { v };
                    }
                    count += 1;
                }
                if count < positions.len() {
                    return Err(BlockError::Parse {
                        line: size_line,
                        msg: "fewer values than declared".into(),
                    });
                }
                DataMatrix::dense(rows, cols, data)
            }
            other => Err(BlockError::Parse {
                line: 1,
                msg: format!("unsupported format '{other}'"),
            }),
        }
    }

    /// Write as a `coordinate real general` Matrix Market file.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for r in 0..self.rows {
            let mut err = Ok(());
            self.for_each_in_row(r, |c, v| {
                if err.is_ok() {
                    err = writeln!(w, "{} {} {:?}", r + 1, c + 1, v);
                }
            });
            err?;
        }
        Ok(())
    }

    /// Dense matrix from comma separated rows (blank and `#` lines skipped).
    pub fn read_csv<R: BufRead>(r: R) -> Result<DataMatrix> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let row = t
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| BlockError::Parse {
                        line: no + 1,
                        msg: e.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        DataMatrix::from_rows(&rows)
    }
}

impl fmt::Display for DataMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("{}", self.get(r, c))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        Err(BlockError::EmptyShape { rows, cols })
    } else {
        Ok(())
    }
}

/// A matrix split row-wise into `n` equally tall blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    source_rows: usize,
    blocks: Vec<DataMatrix>,
    pad_rows: usize,
}

impl BlockPartition {
    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[DataMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &DataMatrix {
        &self.blocks[j]
    }

    pub fn pad_rows(&self) -> usize {
        self.pad_rows
    }

    pub fn block_rows(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.blocks[0].cols()
    }

    /// Vertical concatenation of the blocks with the padding removed.
    pub fn reassemble(&self) -> Result<DataMatrix> {
        let stacked = DataMatrix::vstack(&self.blocks)?;
        if self.pad_rows == 0 {
            Ok(stacked)
        } else {
            stacked.row_slice(0, self.source_rows)
        }
    }

    /// `A_j x` for every block.
    pub fn block_products(&self, x: &[f64]) -> Result<Vec<Vector>> {
        self.blocks.iter().map(|b| block_multiply(b, x)).collect()
    }
}

/// Split `a` into `n` row blocks of `ceil(r/n)` rows each; the last block
/// is zero padded when `n` does not divide `r`.
pub fn partition(a: &DataMatrix, n: usize) -> Result<BlockPartition> {
    if n == 0 {
        return Err(BlockError::ZeroBlocks);
    }
    let r = a.rows();
    if n > r {
        return Err(BlockError::MoreBlocksThanRows { blocks: n, rows: r });
    }
    let height = r.div_ceil(n);
    let pad_rows = height * n - r;
    let padded = if pad_rows == 0 {
        a.clone()
    } else {
        let pad = if a.is_sparse() {
            DataMatrix::csr(pad_rows, a.cols(), vec![0; pad_rows + 1], vec![], vec![])?
        } else {
            DataMatrix::zeros(pad_rows, a.cols())?
        };
        DataMatrix::vstack(&[a.clone(), pad])?
    };
    let blocks = (0..n)
        .map(|j| padded.row_slice(j * height, (j + 1) * height))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockPartition {
        source_rows: r,
        blocks,
        pad_rows,
    })
}

/// Partial linear transform of one (possibly coded) block.
pub fn block_multiply(block: &DataMatrix, x: &[f64]) -> Result<Vector> {
    block.multiply(x)
}
