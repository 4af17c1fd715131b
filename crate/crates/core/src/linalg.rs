//! Dense matrices over a [`FieldCtx`] and the rank/kernel primitives used by
//! the safety conditions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};

/// Row-major dense matrix. Entries are interpreted in a field passed to each
/// operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![FieldElem::ZERO; rows * cols] }
    }

    pub fn ones(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![FieldElem::ONE; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<FieldElem>) -> Result<Mat> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    /// Builds a matrix from rows of raw integers. All rows must have equal length.
    pub fn from_rows<R: AsRef<[u32]>>(ctx: &FieldCtx, rows: &[R]) -> Result<Mat> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            for &v in r {
                data.push(ctx.elem(v)?);
            }
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn has_zero_entry(&self) -> bool {
        self.data.iter().any(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Submatrix on the given row and column index lists (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c));
            }
        }
        Mat { rows: rows.len(), cols: cols.len(), data }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_range(&self, start: usize, end: usize) -> Mat {
        Mat {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// `M * P` for the selection matrix `P`: the selected columns, in order.
    pub fn select_cols(&self, sel: &Selection) -> Result<Mat> {
        if let Some(&bad) = sel.indices().iter().find(|&&i| i >= self.cols) {
            return Err(Error::IndexOutOfRange { index: bad, cols: self.cols });
        }
        Ok(self.submatrix(&(0..self.rows).collect::<Vec<_>>(), sel.indices()))
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + ctx.mul(a, other.get(k, c));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, ctx: &FieldCtx, v: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(FieldElem::ZERO, |acc, (&a, &b)| acc + ctx.mul(a, b))
            })
            .collect())
    }

    /// `J - A` with `J` the all-ones matrix; in characteristic 2 this is `J + A`.
    pub fn sub_from_ones(&self) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&e| FieldElem::ONE - e).collect(),
        }
    }

    /// Reduced row echelon form. Pivots are taken column by column, on the
    /// first row at or below the current one with a non-zero entry, swapped
    /// upward and scaled to 1. Returns the form and its pivot columns.
    pub fn rref(&self, ctx: &FieldCtx) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = ctx.inv(m.get(row, col)).expect("pivot is non-zero");
            for c in col..m.cols {
                let v = ctx.mul(m.get(row, c), inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m.get(r, col);
                if f.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = m.get(r, c) - ctx.mul(f, m.get(row, c));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self, ctx: &FieldCtx) -> usize {
        self.rref(ctx).1.len()
    }

    pub fn is_invertible(&self, ctx: &FieldCtx) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.rank(ctx) == self.rows)
    }

    /// Basis of the right kernel, one vector per column.
    ///
    /// Each basis vector carries a 1 at its free-variable position and 0 at
    /// every other free position, so the output is canonical.
    pub fn kernel_basis(&self, ctx: &FieldCtx) -> Mat {
        let (r, pivots) = self.rref(ctx);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Mat::zeros(self.cols, free.len());
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, FieldElem::ONE);
            for (pr, &pc) in pivots.iter().enumerate() {
                k.set(pc, j, -r.get(pr, f));
            }
        }
        k
    }

    /// Parses the whitespace-separated hex text layout, one row per line.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_text(ctx: &FieldCtx, text: &str) -> Result<Mat> {
        let mut rows: Vec<Vec<FieldElem>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| ctx.parse_elem(t))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("rows have different lengths".into()));
        }
        Mat::from_vec(rows.len(), cols, rows.concat())
    }

    /// Hex text layout with right-aligned columns.
    pub fn to_text(&self) -> String {
        let width = self.data.iter().map(|e| format!("{e}").len()).max().unwrap_or(1);
        let mut s = String::new();
        for r in 0..self.rows {
            let line: Vec<String> =
                self.row(r).iter().map(|e| format!("{:>width$}", format!("{e}"))).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> MatJson {
        MatJson {
            k: ctx.degree(),
            rows: self.rows,
            cols: self.cols,
            data: (0..self.rows)
                .map(|r| self.row(r).iter().map(|e| format!("{e}")).collect())
                .collect(),
        }
    }

    pub fn from_json(ctx: &FieldCtx, j: &MatJson) -> Result<Mat> {
        if j.k != ctx.degree() {
            return Err(Error::Parse(format!("matrix is over GF(2^{}), expected GF(2^{})", j.k, ctx.degree())));
        }
        if j.data.len() != j.rows || j.data.iter().any(|r| r.len() != j.cols) {
            return Err(Error::DimensionMismatch("JSON data does not match rows/cols".into()));
        }
        let data = j
            .data
            .iter()
            .flatten()
            .map(|t| ctx.parse_elem(t))
            .collect::<Result<Vec<_>>>()?;
        Mat::from_vec(j.rows, j.cols, data)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// JSON form of a matrix: `{"k":8,"rows":4,"cols":3,"data":[["e3","b7","50"],...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatJson {
    pub k: u32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<String>>,
}

/// A selection of distinct columns, stored as strictly increasing indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selection {
    indices: Vec<usize>,
}

impl Selection {
    pub fn new(indices: Vec<usize>) -> Result<Selection> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSelection(format!(
                "indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(Selection { indices })
    }

    /// Selection of at most `bound` columns.
    pub fn with_bound(indices: Vec<usize>, bound: usize) -> Result<Selection> {
        if indices.len() > bound {
            return Err(Error::InvalidSelection(format!(
                "{} columns selected, at most {bound} allowed",
                indices.len()
            )));
        }
        Selection::new(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}
