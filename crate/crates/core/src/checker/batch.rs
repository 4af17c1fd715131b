//! Incremental selection checker.
//!
//! Selections of size `m - 1` are enumerated depth-first in lexicographic
//! order while an echelon form of their `M'` columns is maintained. Each
//! selection `S` is then extended by every column `c > max(S)`: one
//! reduction step tells whether `c` adds a kernel vector, and the rows of
//! `N` already made non-zero by kernel vectors inside `S` are carried over.

use std::time::Instant;

use super::{binomial, ensure_supported, search_witness, CheckReport, Counters, Method, Verdict, Witness};
use crate::error::Result;
use crate::field::{FieldCtx, FieldElem};
use crate::probes::{GammaCandidate, ProbeSystem};

const R: usize = super::MAX_ORDER + 1;

type Col = [FieldElem; R];

#[derive(Clone, Copy)]
struct BasisVec {
    pivot: usize,
    vec: Col,
    expr: Col,
}

/// Per-depth state along the DFS path.
#[derive(Clone, Copy)]
struct Frame {
    nbasis: usize,
    nkernel: usize,
    covered: u32,
    support: u32,
    /// Whether a witness search over this prefix's kernel already failed.
    searched_full: bool,
}

pub(crate) struct Batch<'a> {
    ps: &'a ProbeSystem,
    ctx: &'a FieldCtx,
    m: usize,
    rows: usize,
    full: u32,
    cols: Vec<Col>,
    sel: Vec<usize>,
    basis: Vec<BasisVec>,
    kernel: Vec<Col>,
    pub counters: Counters,
}

enum Reduced {
    Independent(BasisVec),
    Dependent(Col),
}

impl<'a> Batch<'a> {
    pub(crate) fn new(ps: &'a ProbeSystem) -> Batch<'a> {
        let rows = ps.m().rows();
        assert!(rows < R, "probe system too large for the batch checker");
        let cols = (0..ps.ell())
            .map(|c| {
                let mut a = [FieldElem::ZERO; R];
                for (r, x) in a.iter_mut().enumerate().take(rows) {
                    *x = ps.m().get(r, c);
                }
                a
            })
            .collect();
        Batch {
            ps,
            ctx: ps.ctx(),
            m: ps.bound(),
            rows,
            full: ps.full_mask(),
            cols,
            sel: Vec::with_capacity(R),
            basis: Vec::with_capacity(R),
            kernel: Vec::with_capacity(R),
            counters: Counters { total: binomial(ps.ell(), ps.bound()), ..Default::default() },
        }
    }

    /// Reduces column `c` placed at selection position `pos` against the
    /// current basis.
    #[inline]
    fn reduce(&self, c: usize, pos: usize) -> Reduced {
        let ctx = self.ctx;
        let mut x = self.cols[c];
        let mut expr = [FieldElem::ZERO; R];
        expr[pos] = FieldElem::ONE;
        for b in &self.basis {
            let f = x[b.pivot];
            if f.is_zero() {
                continue;
            }
            for r in 0..self.rows {
                x[r] += ctx.mul(f, b.vec[r]);
            }
            for p in 0..pos {
                expr[p] += ctx.mul(f, b.expr[p]);
            }
        }
        match (0..self.rows).find(|&r| !x[r].is_zero()) {
            None => Reduced::Dependent(expr),
            Some(pivot) => {
                let inv = ctx.inv(x[pivot]).expect("pivot is non-zero");
                for r in 0..self.rows {
                    x[r] = ctx.mul(inv, x[r]);
                }
                for e in expr.iter_mut().take(pos + 1) {
                    *e = ctx.mul(inv, *e);
                }
                Reduced::Independent(BasisVec { pivot, vec: x, expr })
            }
        }
    }

    #[inline]
    fn rows_of(&self, sel: &[usize], k: &Col) -> u32 {
        self.ps.nonzero_rows(sel, &k[..sel.len()])
    }

    fn witness(&self, sel: &[usize], extra: Option<&Col>) -> Option<(Vec<usize>, Vec<FieldElem>)> {
        let len = sel.len();
        let kernel: Vec<Vec<FieldElem>> =
            self.kernel.iter().chain(extra).map(|k| k[..len].to_vec()).collect();
        search_witness(self.ps, sel, &kernel)
    }

    pub(crate) fn run(&mut self) -> Option<(Vec<usize>, Vec<FieldElem>)> {
        let root = Frame { nbasis: 0, nkernel: 0, covered: 0, support: 0, searched_full: false };
        self.descend(0, root)
    }

    fn descend(&mut self, start: usize, frame: Frame) -> Option<(Vec<usize>, Vec<FieldElem>)> {
        let ell = self.cols.len();
        let depth = self.sel.len();
        if depth + 1 == self.m {
            return self.extend(start, frame);
        }
        let remaining = self.m - depth;
        for c in start..=(ell - remaining) {
            self.sel.push(c);
            let mut next = Frame { support: frame.support | self.ps.col_support(c), ..frame };
            match self.reduce(c, depth) {
                Reduced::Independent(b) => {
                    self.basis.push(b);
                    next.nbasis += 1;
                }
                Reduced::Dependent(k) => {
                    let rows = self.rows_of(&self.sel, &k);
                    self.kernel.push(k);
                    next.nkernel += 1;
                    next.covered |= rows;
                    if next.covered == self.full {
                        // Smaller selections are admissible too; the first full
                        // cover along this path is searched here once.
                        let sel = self.sel.clone();
                        if let Some(w) = self.witness(&sel, None) {
                            return Some(w);
                        }
                        next.searched_full = true;
                    }
                }
            }
            let out = self.descend(c + 1, next);
            self.sel.pop();
            self.basis.truncate(frame.nbasis);
            self.kernel.truncate(frame.nkernel);
            if out.is_some() {
                return out;
            }
        }
        None
    }

    fn extend(&mut self, start: usize, frame: Frame) -> Option<(Vec<usize>, Vec<FieldElem>)> {
        let ell = self.cols.len();
        let pos = self.sel.len();
        for c in start..ell {
            if frame.support | self.ps.col_support(c) != self.full {
                self.counters.skipped += 1;
                continue;
            }
            self.counters.checked += 1;
            match self.reduce(c, pos) {
                Reduced::Independent(_) => {
                    if frame.covered == self.full && !frame.searched_full {
                        self.sel.push(c);
                        let w = self.witness(&self.sel.clone(), None);
                        self.sel.pop();
                        if w.is_some() {
                            return w;
                        }
                    }
                }
                Reduced::Dependent(k) => {
                    self.sel.push(c);
                    let rows = self.rows_of(&self.sel, &k);
                    let w = if frame.covered | rows == self.full {
                        self.witness(&self.sel.clone(), Some(&k))
                    } else {
                        None
                    };
                    self.sel.pop();
                    if w.is_some() {
                        return w;
                    }
                }
            }
        }
        None
    }
}

/// Incremental selection checker; same verdict as [`super::check_subsets`].
pub fn check_batch(g: &GammaCandidate) -> Result<CheckReport> {
    ensure_supported(g)?;
    let start = Instant::now();
    let mut report = CheckReport::new(Method::Batch);
    for (target, cand) in g.targets()? {
        let ps = ProbeSystem::build(&cand);
        let mut b = Batch::new(&ps);
        let found = b.run();
        report.absorb(&b.counters);
        if let Some((columns, values)) = found {
            report.verdict = Verdict::Unsafe;
            report.witness = Some(Witness { target, columns, values });
            return Ok(report.finish(start));
        }
    }
    Ok(report.finish(start))
}

/// Runs the incremental checker on an arbitrary (possibly triangular) system.
pub(crate) fn run_on_system(ps: &ProbeSystem, counters: &mut Counters) -> Option<(Vec<usize>, Vec<FieldElem>)> {
    let mut b = Batch::new(ps);
    let out = b.run();
    counters.total += b.counters.total;
    counters.skipped += b.counters.skipped;
    counters.checked += b.counters.checked;
    out
}
