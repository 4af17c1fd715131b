//! Safety checkers for probe systems.
//!
//! A probe system `(M', N)` with `m` rows in `M'` is *safe* when no vector
//! `v` of weight at most `m` with `M' v = 0` makes every row of `N v`
//! non-zero. The checkers below decide this predicate in different ways and
//! always return the same verdict:
//!
//! * [`check_oracle`] enumerates low-weight vectors directly;
//! * [`check_subsets`] inspects the kernel of every `m`-column selection;
//! * [`check_batch`] grows selections one column at a time, reusing an
//!   incremental echelon form;
//! * [`check_safepp`] runs the selection test on the triangular parts of
//!   every column subset of `gamma`;
//! * [`check_fast_small`] applies the sufficient conditions for `n <= 3`.
//!
//! Unsafe reports always carry a witness that can be re-checked with
//! [`verify_witness`].

mod batch;
mod oracle;
mod safepp;
mod small;
mod subsets;

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::probes::{GammaCandidate, ProbeSystem, Target};

pub use batch::check_batch;
pub use oracle::{check_oracle, oracle_work};
pub use safepp::{check_safepp, lift_tpart_witness};
pub use small::{check_fast_small, dim3_lemma_holds};
pub use subsets::{check_subsets, check_subsets_with_cache, filter_counts, FilterCounts, PriorityCache};

/// Largest order supported by the fixed-size checker state.
pub const MAX_ORDER: usize = 7;

/// Default oracle work bound, in candidate vectors.
pub const DEFAULT_WORK_BOUND: u128 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Safe,
    Unsafe,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "safe",
            Verdict::Unsafe => "unsafe",
        })
    }
}

/// Checking algorithm. `Auto` picks `Analytic` for `n <= 3` when its
/// sufficient condition holds and `Batch` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Oracle,
    Subsets,
    Batch,
    Analytic,
    Safepp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Oracle => "oracle",
            Method::Subsets => "subsets",
            Method::Batch => "batch",
            Method::Analytic => "analytic",
            Method::Safepp => "safepp",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        Ok(match s {
            "auto" => Method::Auto,
            "oracle" => Method::Oracle,
            "subsets" => Method::Subsets,
            "batch" => Method::Batch,
            "analytic" => Method::Analytic,
            "safepp" => Method::Safepp,
            other => return Err(Error::Parse(format!("unknown method {other:?}"))),
        })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A violating vector for the full probe system of `gamma` or `delta`.
///
/// `columns` are 0-based and strictly increasing; `values` are the
/// corresponding non-zero entries of `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub target: Target,
    pub columns: Vec<usize>,
    pub values: Vec<FieldElem>,
}

impl Witness {
    /// Dense vector of length `ell`.
    pub fn dense(&self, ell: usize) -> Vec<FieldElem> {
        let mut v = vec![FieldElem::ZERO; ell];
        for (&c, &x) in self.columns.iter().zip(&self.values) {
            v[c] = x;
        }
        v
    }
}

#[derive(Serialize, Deserialize)]
struct WitnessJson {
    matrix: Target,
    columns: Vec<usize>,
    v: Vec<String>,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WitnessJson {
            matrix: self.target,
            columns: self.columns.iter().map(|c| c + 1).collect(),
            v: self.values.iter().map(|x| format!("{x}")).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Witness {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Witness, D::Error> {
        use serde::de::Error as _;
        let j = WitnessJson::deserialize(d)?;
        let columns = j
            .columns
            .iter()
            .map(|&c| c.checked_sub(1).ok_or_else(|| D::Error::custom("columns are 1-based")))
            .collect::<std::result::Result<_, _>>()?;
        let values = j
            .v
            .iter()
            .map(|t| u16::from_str_radix(t.trim(), 16).map(FieldElem).map_err(D::Error::custom))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Witness { target: j.matrix, columns, values })
    }
}

/// Outcome of one safety check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub method: Method,
    pub subsets_total: u64,
    pub subsets_skipped: u64,
    pub subsets_checked: u64,
    pub elapsed_ms: f64,
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }

    pub(crate) fn new(method: Method) -> CheckReport {
        CheckReport {
            verdict: Verdict::Safe,
            method,
            subsets_total: 0,
            subsets_skipped: 0,
            subsets_checked: 0,
            elapsed_ms: 0.0,
            witness: None,
        }
    }

    pub(crate) fn absorb(&mut self, c: &Counters) {
        self.subsets_total += c.total;
        self.subsets_skipped += c.skipped;
        self.subsets_checked += c.checked;
    }

    pub(crate) fn finish(mut self, start: Instant) -> CheckReport {
        self.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Options shared by the checkers.
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Oracle refusal threshold, in candidate vectors.
    pub work_bound: u128,
    /// Oracle weight bound; defaults to the system bound.
    pub max_weight: Option<usize>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { work_bound: DEFAULT_WORK_BOUND, max_weight: None }
    }
}

/// Runs the requested method on `g` (both `gamma` and `delta` for Alg4).
pub fn check(g: &GammaCandidate, method: Method, opts: &CheckOptions) -> Result<CheckReport> {
    match method {
        Method::Auto => check_auto(g),
        Method::Oracle => check_oracle(g, opts),
        Method::Subsets => check_subsets(g),
        Method::Batch => check_batch(g),
        Method::Safepp => check_safepp(g),
        Method::Analytic => check_fast_small(g)?.ok_or_else(|| {
            Error::Unsupported("the sufficient small-order condition does not hold; use another method".into())
        }),
    }
}

/// Analytic fast path for `n <= 3`, batch otherwise or when inconclusive.
pub fn check_auto(g: &GammaCandidate) -> Result<CheckReport> {
    if g.n() <= 3 {
        if let Some(r) = check_fast_small(g)? {
            return Ok(r);
        }
    }
    check_batch(g)
}

pub(crate) fn ensure_supported(g: &GammaCandidate) -> Result<()> {
    if g.d() > MAX_ORDER {
        return Err(Error::Unsupported(format!("order {} exceeds {MAX_ORDER}", g.d())));
    }
    Ok(())
}

/// Subset counters for one probe system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Counters {
    pub total: u64,
    pub skipped: u64,
    pub checked: u64,
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as u64
}

/// Looks for `v = sum_i w_i kernel[i]` making every row of `N v` non-zero.
///
/// `kernel` holds coefficient vectors over `cols`. Coefficients are drawn
/// from a fixed set of `min(q, b + 1)` field elements, `b` being the number
/// of `N` rows; a product of `b` non-zero linear forms cannot vanish on such
/// a grid, so the search is exhaustive in effect. The first hit in
/// odometer order is returned, restricted to its non-zero entries.
pub(crate) fn search_witness(
    ps: &ProbeSystem,
    cols: &[usize],
    kernel: &[Vec<FieldElem>],
) -> Option<(Vec<usize>, Vec<FieldElem>)> {
    let t = kernel.len();
    if t == 0 {
        return None;
    }
    let ctx = ps.ctx();
    let q = ctx.size();
    let s = q.min(ps.b_rows() + 1);
    // Non-zero values first so that the common single-vector case is tried early.
    let grid: Vec<FieldElem> = (1..s).map(|x| FieldElem(x as u16)).chain(std::iter::once(FieldElem::ZERO)).collect();
    let full = ps.full_mask();
    let mut idx = vec![0usize; t];
    let mut v = vec![FieldElem::ZERO; cols.len()];
    loop {
        v.iter_mut().for_each(|x| *x = FieldElem::ZERO);
        for (i, kv) in kernel.iter().enumerate() {
            let w = grid[idx[i]];
            if !w.is_zero() {
                for (x, &y) in v.iter_mut().zip(kv) {
                    *x += ctx.mul(w, y);
                }
            }
        }
        if ps.nonzero_rows(cols, &v) == full {
            let (c, x): (Vec<usize>, Vec<FieldElem>) =
                cols.iter().zip(&v).filter(|(_, x)| !x.is_zero()).map(|(&c, &x)| (c, x)).unzip();
            return Some((c, x));
        }
        let mut p = 0;
        loop {
            if p == t {
                return None;
            }
            idx[p] += 1;
            if idx[p] < grid.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Outcome of an independent witness re-check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessCheck {
    pub in_kernel: bool,
    pub weight_ok: bool,
    pub full_weight_product: bool,
}

impl WitnessCheck {
    pub fn valid(&self) -> bool {
        self.in_kernel && self.weight_ok && self.full_weight_product
    }
}

/// Re-checks a witness against the full probe system of its target matrix:
/// `M' v = 0`, `wt(v) <= n`, and every row of `N v` non-zero.
pub fn verify_witness(g: &GammaCandidate, w: &Witness) -> Result<WitnessCheck> {
    let target = match w.target {
        Target::Gamma => g.clone(),
        Target::Delta => g.delta()?,
    };
    let ps = ProbeSystem::build(&target);
    verify_on_system(&ps, &w.columns, &w.values)
}

pub(crate) fn verify_on_system(ps: &ProbeSystem, cols: &[usize], vals: &[FieldElem]) -> Result<WitnessCheck> {
    if cols.len() != vals.len() {
        return Err(Error::DimensionMismatch("witness columns and values differ in length".into()));
    }
    if let Some(&c) = cols.iter().find(|&&c| c >= ps.ell()) {
        return Err(Error::IndexOutOfRange { index: c, cols: ps.ell() });
    }
    let mut v = vec![FieldElem::ZERO; ps.ell()];
    for (&c, &x) in cols.iter().zip(vals) {
        v[c] += x;
    }
    let ctx: &FieldCtx = ps.ctx();
    let mv = ps.m().mul_vec(ctx, &v)?;
    let weight = v.iter().filter(|x| !x.is_zero()).count();
    let all: Vec<usize> = (0..ps.ell()).collect();
    let full = (0..ps.b_rows()).all(|r| ps.symbolic_product_entry(r, &all, &v).iter().any(|x| !x.is_zero()));
    Ok(WitnessCheck {
        in_kernel: mv.iter().all(|x| x.is_zero()),
        weight_ok: weight >= 1 && weight <= ps.bound(),
        full_weight_product: full,
    })
}
