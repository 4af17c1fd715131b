use std::time::Instant;

use itertools::Itertools;

use super::{binomial, ensure_supported, CheckOptions, CheckReport, Counters, Method, Verdict, Witness};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::probes::{GammaCandidate, ProbeSystem};

/// Number of vectors the oracle enumerates for one probe system: supports
/// of size `1..=w`, first coordinate fixed to 1, the others non-zero.
pub fn oracle_work(ell: usize, w: usize, q: usize) -> u128 {
    (1..=w).map(|s| binomial(ell, s) as u128 * ((q - 1) as u128).pow(s as u32 - 1)).sum()
}

/// Exhaustive low-weight kernel enumeration.
///
/// Vectors are visited by support size, then supports in lexicographic
/// order, then values in odometer order. Both conditions are invariant
/// under scaling, so the first non-zero coordinate is fixed to 1.
pub fn check_oracle(g: &GammaCandidate, opts: &CheckOptions) -> Result<CheckReport> {
    ensure_supported(g)?;
    let start = Instant::now();
    let targets = g.targets()?;
    let q = g.ctx().size();
    let systems: Vec<_> = targets.iter().map(|(t, c)| (*t, ProbeSystem::build(c))).collect();
    let mut needed = 0u128;
    for (_, ps) in &systems {
        let w = opts.max_weight.unwrap_or(ps.bound()).min(ps.bound());
        needed += oracle_work(ps.ell(), w, q);
    }
    if needed > opts.work_bound {
        return Err(Error::WorkBoundExceeded { needed, bound: opts.work_bound });
    }

    let mut report = CheckReport::new(Method::Oracle);
    for (target, ps) in &systems {
        let w = opts.max_weight.unwrap_or(ps.bound()).min(ps.bound());
        let mut counters = Counters { total: (1..=w).map(|s| binomial(ps.ell(), s)).sum(), ..Default::default() };
        let found = scan(ps, w, &mut counters);
        report.absorb(&counters);
        if let Some((columns, values)) = found {
            report.verdict = Verdict::Unsafe;
            report.witness = Some(Witness { target: *target, columns, values });
            return Ok(report.finish(start));
        }
    }
    Ok(report.finish(start))
}

fn scan(ps: &ProbeSystem, w: usize, counters: &mut Counters) -> Option<(Vec<usize>, Vec<FieldElem>)> {
    let ctx = ps.ctx();
    let q = ctx.size();
    let rows = ps.m().rows();
    let full = ps.full_mask();
    let mcol = |c: usize| ps.m().col(c);
    let cols_m: Vec<Vec<FieldElem>> = (0..ps.ell()).map(mcol).collect();
    for s in 1..=w {
        for support in (0..ps.ell()).combinations(s) {
            counters.checked += 1;
            let mut vals = vec![FieldElem::ONE; s];
            loop {
                let mut zero = true;
                for r in 0..rows {
                    let mut acc = FieldElem::ZERO;
                    for (&c, &x) in support.iter().zip(&vals) {
                        acc += ctx.mul(cols_m[c][r], x);
                    }
                    if !acc.is_zero() {
                        zero = false;
                        break;
                    }
                }
                if zero && ps.nonzero_rows(&support, &vals) == full {
                    return Some((support, vals));
                }
                // Odometer over positions 1..s with values 1..q-1.
                let mut p = 1;
                loop {
                    if p >= s {
                        break;
                    }
                    if (vals[p].0 as usize) + 1 < q {
                        vals[p].0 += 1;
                        break;
                    }
                    vals[p] = FieldElem::ONE;
                    p += 1;
                }
                if p >= s {
                    break;
                }
            }
        }
    }
    None
}
