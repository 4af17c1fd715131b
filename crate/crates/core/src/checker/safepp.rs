use std::collections::BTreeMap;
use std::time::Instant;

use itertools::Itertools;

use super::batch::run_on_system;
use super::{ensure_supported, verify_on_system, CheckReport, Counters, Method, Verdict, Witness};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::probes::{Block, GammaCandidate, ProbeSystem};

/// Runs the selection test on the triangular parts of every column subset
/// of `gamma` (and of `delta` for Alg4). Unsafe results are lifted back to
/// a witness on the full probe system.
pub fn check_safepp(g: &GammaCandidate) -> Result<CheckReport> {
    ensure_supported(g)?;
    let n = g.n();
    if g.ctx().size() <= n + 1 {
        return Err(Error::FieldTooSmall(format!(
            "the triangular-part test needs more than {} field elements",
            n + 1
        )));
    }
    let start = Instant::now();
    let mut report = CheckReport::new(Method::Safepp);
    for (target, cand) in g.targets()? {
        let mut counters = Counters::default();
        let mut found = None;
        'outer: for k in 1..=n {
            for p in (0..n).combinations(k) {
                let sub = cand.select_columns(&p)?;
                let tp = ProbeSystem::build(&sub).tpart();
                if let Some(w) = run_on_system(&tp, &mut counters) {
                    found = Some((p, w));
                    break 'outer;
                }
            }
        }
        report.absorb(&counters);
        if let Some((p, (tcols, tvals))) = found {
            let (columns, values) = lift_tpart_witness(&cand, &p, &tcols, &tvals)?;
            report.verdict = Verdict::Unsafe;
            report.witness = Some(Witness { target, columns, values });
            return Ok(report.finish(start));
        }
    }
    Ok(report.finish(start))
}

/// Turns a violating vector for the triangular part of `gamma P` (columns
/// `p` of `gamma`) into one for the full probe system of `gamma`.
///
/// The vector is first padded with zeros, then the missing columns of
/// `gamma` are added one at a time. Each addition can break at most the new
/// `M'` row (value `a`) and the new `N` row (value `b`), which one extra
/// entry repairs:
///
/// * `a = 0, b != 0`: nothing to do;
/// * `a = 0, b = 0`: the share column, which only touches `N`;
/// * `a != 0, b != 0`: the mask column, which only touches `M'`;
/// * `a != 0, b = 0`: a diagonal column, which touches both.
pub fn lift_tpart_witness(
    gamma: &GammaCandidate,
    p: &[usize],
    tcols: &[usize],
    tvals: &[FieldElem],
) -> Result<(Vec<usize>, Vec<FieldElem>)> {
    let k = p.len();
    if k == 0 || p.windows(2).any(|w| w[0] >= w[1]) || p[k - 1] >= gamma.n() {
        return Err(Error::InvalidSelection("column subset must be strictly increasing and in range".into()));
    }
    let ctx = gamma.ctx();
    // Entries keyed by (block, gamma column), independent of the current subset.
    let mut entries: BTreeMap<(BlockKey, usize), FieldElem> = BTreeMap::new();
    for (&t, &x) in tcols.iter().zip(tvals) {
        if t >= (gamma.d() + 1) * k {
            return Err(Error::IndexOutOfRange { index: t, cols: (gamma.d() + 1) * k });
        }
        entries.insert((BlockKey::Trig(t / k), p[t % k]), x);
    }

    let mut q: Vec<usize> = p.to_vec();
    for i in 0..gamma.n() {
        if q.contains(&i) {
            continue;
        }
        q.push(i);
        q.sort_unstable();
        let zeta = gamma.select_columns(&q)?;
        let ps = ProbeSystem::build(&zeta);
        let (cols, vals) = materialize(&ps, &q, &entries);
        let pos = q.iter().position(|&c| c == i).expect("just inserted");
        let mut v = vec![FieldElem::ZERO; ps.ell()];
        for (&c, &x) in cols.iter().zip(&vals) {
            v[c] = x;
        }
        let a = ps.m().mul_vec(ctx, &v)?[pos];
        let b_nonzero = ps.symbolic_product_entry(pos + 1, &cols, &vals).iter().any(|x| !x.is_zero());
        match (a.is_zero(), b_nonzero) {
            (true, true) => {}
            (true, false) => {
                entries.insert((BlockKey::Shares, i), FieldElem::ONE);
            }
            (false, true) => {
                entries.insert((BlockKey::Masks, i), -a);
            }
            (false, false) => {
                let j = (0..=gamma.d())
                    .find(|&j| !zeta.gamma().get(j, pos).is_zero())
                    .expect("a non-zero row entry exists whenever a != 0");
                entries.insert((BlockKey::Diag(j), i), ctx.div(-a, zeta.gamma().get(j, pos))?);
            }
        }
    }
    let ps = ProbeSystem::build(gamma);
    let (cols, vals) = materialize(&ps, &q, &entries);
    debug_assert!(verify_on_system(&ps, &cols, &vals).map(|c| c.valid()).unwrap_or(false));
    Ok((cols, vals))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum BlockKey {
    Shares,
    Masks,
    Diag(usize),
    Trig(usize),
}

fn materialize(
    ps: &ProbeSystem,
    q: &[usize],
    entries: &BTreeMap<(BlockKey, usize), FieldElem>,
) -> (Vec<usize>, Vec<FieldElem>) {
    let mut out: Vec<(usize, FieldElem)> = entries
        .iter()
        .map(|(&(b, gc), &x)| {
            let pos = q.iter().position(|&c| c == gc).expect("entry column is selected");
            let block = match b {
                BlockKey::Shares => Block::Shares,
                BlockKey::Masks => Block::Masks,
                BlockKey::Diag(j) => Block::Diag(j),
                BlockKey::Trig(j) => Block::Trig(j),
            };
            (ps.column_of(block, pos), x)
        })
        .filter(|(_, x)| !x.is_zero())
        .collect();
    out.sort_unstable_by_key(|e| e.0);
    out.into_iter().unzip()
}
