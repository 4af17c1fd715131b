//! Instantiation matrices in unified form and the probe systems `M'` / `L`
//! (or `L'`) derived from them.
//!
//! Columns of a probe system built from a `(d+1) x n` matrix are laid out in
//! blocks, 0-based:
//!
//! | columns                  | `M'` block          | `L` block (`L'` tag)        |
//! |--------------------------|---------------------|-----------------------------|
//! | `0`                      | zero                | `[1; 0]`                    |
//! | `1 ..= n`                | zero                | `[0; I]`                    |
//! | `n+1 ..= 2n`             | `I`                 | zero                        |
//! | `2n+1 + j*n ..`          | `diag(gamma, j)`    | `[0; I]` (`omega_j`)        |
//! | `(d+3)n+1 + j*n ..`      | `T(gamma, j)`       | `[1; T]` (`omega_j`)        |
//!
//! for `j = 0..=d`, giving `2dn + 4n + 1` columns in total.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::Mat;

/// Which of the two masking schemes a matrix instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Linear number of bilinear multiplications; `gamma` has an all-ones row 0.
    Alg4,
    /// Linear randomness; the rows of `gamma` sum to zero.
    Alg5,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Alg4 => "alg4",
            Scheme::Alg5 => "alg5",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "alg4" | "4" => Ok(Scheme::Alg4),
            "alg5" | "5" => Ok(Scheme::Alg5),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A matrix `gamma` in `K^{(d+1) x n}` (row index from 0) tagged with its scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaCandidate {
    scheme: Scheme,
    gamma: Mat,
    ctx: Arc<FieldCtx>,
}

impl GammaCandidate {
    /// Wraps a unified-form matrix, checking the scheme's correctness
    /// constraint (ones row 0 for Alg4, zero column sums for Alg5).
    pub fn new(scheme: Scheme, ctx: Arc<FieldCtx>, gamma: Mat) -> Result<GammaCandidate> {
        let c = GammaCandidate::new_unchecked(scheme, ctx, gamma)?;
        c.check_correctness()?;
        Ok(c)
    }

    /// Wraps a matrix without checking the correctness constraint; only
    /// the shape is validated.
    pub fn new_unchecked(scheme: Scheme, ctx: Arc<FieldCtx>, gamma: Mat) -> Result<GammaCandidate> {
        if gamma.rows() < 2 || gamma.cols() == 0 || gamma.cols() > gamma.rows() - 1 {
            return Err(Error::MalformedCandidate(format!(
                "expected (d+1) x n with 1 <= n <= d, got {}x{}",
                gamma.rows(),
                gamma.cols()
            )));
        }
        if gamma.data().iter().any(|&e| !ctx.contains(e)) {
            return Err(Error::MalformedCandidate("entry outside the field".into()));
        }
        Ok(GammaCandidate { scheme, gamma, ctx })
    }

    /// Alg4 candidate from its `d x d` part `A`, prepending the ones row.
    pub fn from_alg4_part(ctx: Arc<FieldCtx>, a: &Mat) -> Result<GammaCandidate> {
        let gamma = Mat::ones(1, a.cols()).vstack(a)?;
        GammaCandidate::new(Scheme::Alg4, ctx, gamma)
    }

    fn check_correctness(&self) -> Result<()> {
        match self.scheme {
            Scheme::Alg4 => {
                if self.gamma.row(0).iter().any(|&e| e != FieldElem::ONE) {
                    return Err(Error::MalformedCandidate("Alg4 row 0 must be all ones".into()));
                }
            }
            Scheme::Alg5 => {
                if !self.column_sums_zero() {
                    return Err(Error::MalformedCandidate("Alg5 rows must sum to zero".into()));
                }
            }
        }
        Ok(())
    }

    pub fn column_sums_zero(&self) -> bool {
        (0..self.gamma.cols()).all(|c| {
            (0..self.gamma.rows())
                .fold(FieldElem::ZERO, |acc, r| acc + self.gamma.get(r, c))
                .is_zero()
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Masking order `d` (number of rows minus one).
    pub fn d(&self) -> usize {
        self.gamma.rows() - 1
    }

    /// Number of columns `n`.
    pub fn n(&self) -> usize {
        self.gamma.cols()
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn ctx_arc(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    /// The `A` part (rows 1..=d).
    pub fn lower_part(&self) -> Mat {
        self.gamma.row_range(1, self.gamma.rows())
    }

    /// For Alg4, the companion matrix `delta = (2; J) - gamma`, which in
    /// characteristic 2 keeps the ones row and complements the rest.
    pub fn delta(&self) -> Result<GammaCandidate> {
        if self.scheme != Scheme::Alg4 {
            return Err(Error::Unsupported("delta is only defined for Alg4".into()));
        }
        let gamma = Mat::ones(1, self.n()).vstack(&self.lower_part().sub_from_ones())?;
        GammaCandidate::new(Scheme::Alg4, self.ctx.clone(), gamma)
    }

    /// The matrices whose safety decides the scheme: `[gamma, delta]` for
    /// Alg4 and `[gamma]` for Alg5.
    pub fn targets(&self) -> Result<Vec<(Target, GammaCandidate)>> {
        match self.scheme {
            Scheme::Alg4 => Ok(vec![(Target::Gamma, self.clone()), (Target::Delta, self.delta()?)]),
            Scheme::Alg5 => Ok(vec![(Target::Gamma, self.clone())]),
        }
    }

    /// The candidate restricted to the given columns of `gamma`.
    pub fn select_columns(&self, cols: &[usize]) -> Result<GammaCandidate> {
        let rows: Vec<usize> = (0..self.gamma.rows()).collect();
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n()) {
            return Err(Error::IndexOutOfRange { index: bad, cols: self.n() });
        }
        GammaCandidate::new_unchecked(self.scheme, self.ctx.clone(), self.gamma.submatrix(&rows, cols))
    }

    /// Hex text of the full unified matrix.
    pub fn to_text(&self) -> String {
        self.gamma.to_text()
    }
}

/// Which matrix of an Alg4 pair a result refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Gamma,
    Delta,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::Gamma => "gamma",
            Target::Delta => "delta",
        })
    }
}

/// Symbolic entry of `L` / `L'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LEntry {
    Zero,
    One,
    /// The indeterminate `omega_j`, `j` in `0..=d`.
    Omega(u8),
}

impl LEntry {
    /// Coefficient slot of a non-zero entry: 0 for constants, `j + 1` for `omega_j`.
    pub fn slot(self) -> Option<usize> {
        match self {
            LEntry::Zero => None,
            LEntry::One => Some(0),
            LEntry::Omega(j) => Some(j as usize + 1),
        }
    }
}

/// Column block kinds, in layout order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// Column 0.
    Lead,
    /// Zero in `M'`, identity below row 0 in `L`.
    Shares,
    /// Identity in `M'`, zero in `L`.
    Masks,
    Diag(usize),
    Trig(usize),
}

/// `M'` together with the support and tags of `L` (or of a triangular part).
///
/// Every non-zero entry of a given `L` column carries the same tag, so the
/// symbolic matrix is stored as one tag and one row-support bitmask per column.
#[derive(Clone, Debug)]
pub struct ProbeSystem {
    scheme: Scheme,
    d: usize,
    n: usize,
    m: Mat,
    b_rows: usize,
    col_tag: Vec<LEntry>,
    col_support: Vec<u32>,
    ctx: Arc<FieldCtx>,
    triangular: bool,
}

impl ProbeSystem {
    /// Builds `M'_gamma` and `L` (Alg4) or `L'` (Alg5).
    pub fn build(g: &GammaCandidate) -> ProbeSystem {
        let (d, n) = (g.d(), g.n());
        let ell = 2 * d * n + 4 * n + 1;
        let mut m = Mat::zeros(n, ell);
        let mut col_tag = vec![LEntry::Zero; ell];
        let mut col_support = vec![0u32; ell];
        let tag = |j: usize| match g.scheme() {
            Scheme::Alg4 => LEntry::One,
            Scheme::Alg5 => LEntry::Omega(j as u8),
        };
        let gamma = g.gamma();

        col_tag[0] = LEntry::One;
        col_support[0] = 1;
        for i in 0..n {
            let c = 1 + i;
            col_tag[c] = LEntry::One;
            col_support[c] = 1 << (i + 1);
            m.set(i, 1 + n + i, FieldElem::ONE);
        }
        for j in 0..=d {
            for i in 0..n {
                let c = 1 + 2 * n + j * n + i;
                m.set(i, c, gamma.get(j, i));
                col_tag[c] = tag(j);
                col_support[c] = 1 << (i + 1);
            }
        }
        for j in 0..=d {
            for cc in 0..n {
                let c = 1 + (d + 3) * n + j * n + cc;
                for i in 0..=cc {
                    m.set(i, c, gamma.get(j, i));
                }
                col_tag[c] = tag(j);
                col_support[c] = (1u32 << (cc + 2)) - 1;
            }
        }
        ProbeSystem {
            scheme: g.scheme(),
            d,
            n,
            m,
            b_rows: n + 1,
            col_tag,
            col_support,
            ctx: g.ctx_arc().clone(),
            triangular: false,
        }
    }

    /// Restriction to the triangular parts: the last `(d+1)n` columns, and
    /// for `L` the bottom `n` rows.
    pub fn tpart(&self) -> ProbeSystem {
        assert!(!self.triangular, "already a triangular part");
        let start = self.ell() - (self.d + 1) * self.n;
        let cols: Vec<usize> = (start..self.ell()).collect();
        let rows: Vec<usize> = (0..self.n).collect();
        ProbeSystem {
            scheme: self.scheme,
            d: self.d,
            n: self.n,
            m: self.m.submatrix(&rows, &cols),
            b_rows: self.n,
            col_tag: self.col_tag[start..].to_vec(),
            col_support: self.col_support[start..].iter().map(|s| s >> 1).collect(),
            ctx: self.ctx.clone(),
            triangular: true,
        }
    }

    /// The triangular parts as an explicit matrix and tag grid.
    pub fn tpart_views(&self) -> (Mat, Vec<Vec<LEntry>>) {
        let t = if self.triangular { self.clone() } else { self.tpart() };
        let grid = t.tag_grid();
        (t.m, grid)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.m.cols()
    }

    pub fn is_triangular(&self) -> bool {
        self.triangular
    }

    /// `M'` (or its triangular part).
    pub fn m(&self) -> &Mat {
        &self.m
    }

    /// Weight bound for the safety predicate: the row count of `M'`.
    pub fn bound(&self) -> usize {
        self.m.rows()
    }

    /// Row count of `L` (or its triangular part).
    pub fn b_rows(&self) -> usize {
        self.b_rows
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.b_rows) - 1
    }

    /// Number of coefficient slots in a symbolic product: the constant plus
    /// one per `omega_j`.
    pub fn slots(&self) -> usize {
        self.d + 2
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    #[inline]
    pub fn col_support(&self, c: usize) -> u32 {
        self.col_support[c]
    }

    pub fn supports(&self) -> &[u32] {
        &self.col_support
    }

    #[inline]
    pub fn col_tag(&self, c: usize) -> LEntry {
        self.col_tag[c]
    }

    /// Slot index of column `c`'s tag (0 when the column is zero in `L`).
    #[inline]
    pub fn col_slot(&self, c: usize) -> usize {
        self.col_tag[c].slot().unwrap_or(0)
    }

    pub fn tag(&self, row: usize, col: usize) -> LEntry {
        if self.col_support[col] >> row & 1 == 1 {
            self.col_tag[col]
        } else {
            LEntry::Zero
        }
    }

    pub fn tag_grid(&self) -> Vec<Vec<LEntry>> {
        (0..self.b_rows).map(|r| (0..self.ell()).map(|c| self.tag(r, c)).collect()).collect()
    }

    /// `L` with `One` tags read as 1 (and `omega` tags read as 1 too).
    pub fn l_evaluated(&self) -> Mat {
        let mut l = Mat::zeros(self.b_rows, self.ell());
        for r in 0..self.b_rows {
            for c in 0..self.ell() {
                if self.tag(r, c) != LEntry::Zero {
                    l.set(r, c, FieldElem::ONE);
                }
            }
        }
        l
    }

    /// Which block a column belongs to (full systems only).
    pub fn block_of(&self, col: usize) -> (Block, usize) {
        assert!(!self.triangular);
        let n = self.n;
        if col == 0 {
            (Block::Lead, 0)
        } else if col <= n {
            (Block::Shares, col - 1)
        } else if col <= 2 * n {
            (Block::Masks, col - 1 - n)
        } else if col < 1 + (self.d + 3) * n {
            let off = col - 1 - 2 * n;
            (Block::Diag(off / n), off % n)
        } else {
            let off = col - 1 - (self.d + 3) * n;
            (Block::Trig(off / n), off % n)
        }
    }

    /// Column index of `(block, i)` in a full system.
    pub fn column_of(&self, block: Block, i: usize) -> usize {
        let (n, d) = (self.n, self.d);
        match block {
            Block::Lead => 0,
            Block::Shares => 1 + i,
            Block::Masks => 1 + n + i,
            Block::Diag(j) => 1 + 2 * n + j * n + i,
            Block::Trig(j) => 1 + (d + 3) * n + j * n + i,
        }
    }

    /// Symbolic value of row `row` of `L * v` restricted to the selected
    /// columns: one coefficient per slot.
    pub fn symbolic_product_entry(&self, row: usize, cols: &[usize], kvec: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(cols.len(), kvec.len());
        let mut slots = vec![FieldElem::ZERO; self.slots()];
        for (&c, &v) in cols.iter().zip(kvec) {
            if self.col_support[c] >> row & 1 == 1 {
                slots[self.col_slot(c)] += v;
            }
        }
        slots
    }

    /// Bitmask of the `L` rows that are non-zero (as polynomials) in `L * v`
    /// for the sparse vector `v` given by `cols`/`vals`.
    pub fn nonzero_rows(&self, cols: &[usize], vals: &[FieldElem]) -> u32 {
        let slots = self.slots();
        let mut acc = [[FieldElem::ZERO; 16]; 16];
        debug_assert!(slots <= 16 && self.b_rows <= 16);
        for (&c, &v) in cols.iter().zip(vals) {
            let s = self.col_slot(c);
            let mut sup = self.col_support[c];
            while sup != 0 {
                let r = sup.trailing_zeros() as usize;
                acc[r][s] += v;
                sup &= sup - 1;
            }
        }
        let mut mask = 0;
        for (r, row) in acc.iter().enumerate().take(self.b_rows) {
            if row[..slots].iter().any(|e| !e.is_zero()) {
                mask |= 1 << r;
            }
        }
        mask
    }

    /// Human-readable dump of the block layout.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "probe system: scheme={} d={} n={} ell={} {}",
            self.scheme,
            self.d,
            self.n,
            self.ell(),
            if self.triangular { "(triangular part)" } else { "" }
        );
        let label = |c: usize| -> String {
            if self.triangular {
                format!("T{}", c / self.n)
            } else {
                match self.block_of(c).0 {
                    Block::Lead => "0".into(),
                    Block::Shares => "Z".into(),
                    Block::Masks => "I".into(),
                    Block::Diag(j) => format!("D{j}"),
                    Block::Trig(j) => format!("T{j}"),
                }
            }
        };
        let cell = |e: &str| format!("{e:>4}");
        let _ = writeln!(s, "blocks {}", (0..self.ell()).map(|c| cell(&label(c))).collect::<String>());
        for r in 0..self.m.rows() {
            let _ = writeln!(
                s,
                "M'[{r}]  {}",
                self.m.row(r).iter().map(|e| cell(&format!("{e}"))).collect::<String>()
            );
        }
        for r in 0..self.b_rows {
            let row: String = (0..self.ell())
                .map(|c| match self.tag(r, c) {
                    LEntry::Zero => cell("."),
                    LEntry::One => cell("1"),
                    LEntry::Omega(j) => cell(&format!("w{j}")),
                })
                .collect();
            let _ = writeln!(s, "L[{r}]   {row}");
        }
        s
    }
}
