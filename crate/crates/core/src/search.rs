//! Randomized search for safe instantiations.
//!
//! Candidate `i` is drawn from a ChaCha8 stream selected by `i` under the
//! master seed, so results do not depend on the number of workers or on
//! scheduling.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checker::{self, CheckOptions, Method, PriorityCache};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::Mat;
use crate::probes::{GammaCandidate, Scheme};
use crate::structures::{construct_precond41, construct_precond51, CauchySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Cauchy-based constructions satisfying the scheme's precondition.
    Cauchy,
    /// Uniform entries, then the correctness constraint is forced.
    Uniform,
}

impl std::str::FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sampler> {
        match s {
            "cauchy" => Ok(Sampler::Cauchy),
            "uniform" => Ok(Sampler::Uniform),
            other => Err(Error::Parse(format!("unknown sampler {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub scheme: Scheme,
    pub ctx: Arc<FieldCtx>,
    pub d: usize,
    /// Number of `gamma` columns; equals `d` except for sub-runs.
    pub n: usize,
    pub sampler: Sampler,
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub early_stop: Option<u64>,
    pub method: Method,
}

impl SearchConfig {
    pub fn new(scheme: Scheme, ctx: Arc<FieldCtx>, d: usize) -> SearchConfig {
        SearchConfig {
            scheme,
            ctx,
            d,
            n: d,
            sampler: Sampler::Cauchy,
            samples: 1000,
            seed: 0,
            workers: 0,
            early_stop: None,
            method: Method::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameters("samples must be at least 1".into()));
        }
        if self.d == 0 || self.n == 0 || self.n > self.d {
            return Err(Error::InvalidParameters("need 1 <= n <= d".into()));
        }
        if self.sampler == Sampler::Cauchy {
            let q = self.ctx.size();
            let (need, avail) = match self.scheme {
                Scheme::Alg4 => (2 * self.d, q - 1),
                Scheme::Alg5 => (2 * self.d + 1, q),
            };
            if need > avail {
                return Err(Error::FieldTooSmall(format!(
                    "{} distinct parameters needed, only {avail} available in GF(2^{})",
                    need,
                    self.ctx.degree()
                )));
            }
        }
        Ok(())
    }
}

fn candidate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Ordered tuple of `count` distinct elements, uniform by rejection.
fn distinct<R: Rng>(ctx: &FieldCtx, count: usize, nonzero: bool, rng: &mut R) -> Vec<FieldElem> {
    let mut out: Vec<FieldElem> = Vec::with_capacity(count);
    while out.len() < count {
        let e = if nonzero { ctx.random_nonzero(rng) } else { ctx.random(rng) };
        if !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

/// Candidate number `index` of the configured stream. Cauchy sub-runs with
/// `n < d` keep the first `n` columns of a full construction.
pub fn sample_candidate(cfg: &SearchConfig, index: u64) -> Result<GammaCandidate> {
    cfg.validate()?;
    if cfg.sampler == Sampler::Cauchy && cfg.n < cfg.d {
        let full = sample_candidate(&SearchConfig { n: cfg.d, ..cfg.clone() }, index)?;
        return full.select_columns(&(0..cfg.n).collect::<Vec<_>>());
    }
    let mut rng = candidate_rng(cfg.seed, index);
    let ctx = &cfg.ctx;
    let (d, n) = (cfg.d, cfg.n);
    match (cfg.sampler, cfg.scheme) {
        (Sampler::Cauchy, Scheme::Alg4) => {
            let p = distinct(ctx, 2 * d, true, &mut rng);
            construct_precond41(ctx.clone(), &CauchySpec::new(p[..d].to_vec(), p[d..].to_vec()))
        }
        (Sampler::Cauchy, Scheme::Alg5) => {
            let p = distinct(ctx, 2 * d + 1, false, &mut rng);
            construct_precond51(ctx.clone(), &CauchySpec::new(p[..=d].to_vec(), p[d + 1..].to_vec()))
        }
        (Sampler::Uniform, scheme) => {
            let mut gm = Mat::from_vec(d + 1, n, (0..(d + 1) * n).map(|_| ctx.random(&mut rng)).collect())?;
            for c in 0..n {
                match scheme {
                    Scheme::Alg4 => gm.set(0, c, FieldElem::ONE),
                    Scheme::Alg5 => {
                        let s = (0..d).fold(FieldElem::ZERO, |acc, r| acc + gm.get(r, c));
                        gm.set(d, c, s);
                    }
                }
            }
            GammaCandidate::new(scheme, ctx.clone(), gm)
        }
    }
}

/// A safe candidate found during a search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundMatrix {
    pub index: u64,
    /// Hex rows of the unified matrix.
    pub gamma: Vec<Vec<String>>,
}

impl FoundMatrix {
    fn new(index: u64, g: &GammaCandidate) -> FoundMatrix {
        let m = g.gamma();
        FoundMatrix { index, gamma: (0..m.rows()).map(|r| m.row(r).iter().map(|e| format!("{e}")).collect()).collect() }
    }

    pub fn to_mat(&self, ctx: &FieldCtx) -> Result<Mat> {
        let text: String = self.gamma.iter().map(|r| r.join(" ") + "\n").collect();
        Mat::parse_text(ctx, &text)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl Timing {
    fn from_samples(mut v: Vec<f64>) -> Timing {
        if v.is_empty() {
            return Timing::default();
        }
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        Timing {
            mean_ms: v.iter().sum::<f64>() / v.len() as f64,
            p50_ms: q(0.5),
            p90_ms: q(0.9),
            p99_ms: q(0.99),
            max_ms: v[v.len() - 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub tried: u64,
    pub safe_count: u64,
    pub fraction: f64,
    /// `log2(fraction)`, absent when nothing was found.
    pub log2_fraction: Option<f64>,
    pub timing: Timing,
    pub safe: Vec<FoundMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub scheme: Scheme,
    pub k: u32,
    pub d: usize,
    pub n: usize,
    pub sampler: Sampler,
    pub samples: u64,
    pub seed: u64,
    pub early_stop: Option<u64>,
    pub method: Method,
}

/// Full search output as written by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: ConfigEcho,
    pub stats: SearchStats,
}

impl SearchReport {
    pub fn new(cfg: &SearchConfig, stats: SearchStats) -> SearchReport {
        SearchReport {
            config: ConfigEcho {
                scheme: cfg.scheme,
                k: cfg.ctx.degree(),
                d: cfg.d,
                n: cfg.n,
                sampler: cfg.sampler,
                samples: cfg.samples,
                seed: cfg.seed,
                early_stop: cfg.early_stop,
                method: cfg.method,
            },
            stats,
        }
    }
}

struct Outcome {
    index: u64,
    safe: Option<FoundMatrix>,
    ms: f64,
}

fn evaluate(cfg: &SearchConfig, index: u64, cache: &mut PriorityCache) -> Result<Outcome> {
    let start = Instant::now();
    let g = sample_candidate(cfg, index)?;
    let report = match cfg.method {
        Method::Subsets => checker::check_subsets_with_cache(&g, cache)?,
        m => checker::check(&g, m, &CheckOptions::default())?,
    };
    Ok(Outcome {
        index,
        safe: report.is_safe().then(|| FoundMatrix::new(index, &g)),
        ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the search. With `early_stop`, candidates are processed in ordered
/// chunks and the run ends right after the candidate that reaches the target,
/// so the result stays independent of the worker count.
pub fn run_search(cfg: &SearchConfig) -> Result<SearchStats> {
    run_search_streaming(cfg, None)
}

/// [`run_search`] that also writes one JSON line per safe matrix to `sink`,
/// in candidate order.
pub fn run_search_streaming(cfg: &SearchConfig, mut sink: Option<&mut dyn Write>) -> Result<SearchStats> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
    let chunk = match cfg.early_stop {
        Some(_) => (pool.current_num_threads() as u64 * 8).max(8),
        None => cfg.samples,
    };
    let mut tried = 0u64;
    let mut found = Vec::new();
    let mut times = Vec::new();
    let mut next = 0u64;
    'outer: while next < cfg.samples {
        let end = (next + chunk).min(cfg.samples);
        let outcomes: Vec<Outcome> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map_init(PriorityCache::new, |cache, i| evaluate(cfg, i, cache))
                .collect::<Result<Vec<_>>>()
        })?;
        for o in outcomes {
            tried += 1;
            times.push(o.ms);
            if let Some(f) = o.safe {
                if let Some(w) = sink.as_deref_mut() {
                    let line = serde_json::to_string(&f)?;
                    writeln!(w, "{line}").map_err(|e| Error::InvalidParameters(format!("write failed: {e}")))?;
                }
                found.push(f);
                if cfg.early_stop.is_some_and(|t| found.len() as u64 >= t) {
                    break 'outer;
                }
            }
            debug_assert!(o.index < cfg.samples);
        }
        next = end;
    }
    let safe_count = found.len() as u64;
    let fraction = safe_count as f64 / tried as f64;
    Ok(SearchStats {
        tried,
        safe_count,
        fraction,
        log2_fraction: (safe_count > 0).then(|| fraction.log2()),
        timing: Timing::from_samples(times),
        safe: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_subsets;
    use crate::structures::check_precondition;

    fn cfg(scheme: Scheme, k: u32, d: usize) -> SearchConfig {
        SearchConfig::new(scheme, Arc::new(FieldCtx::with_degree(k).unwrap()), d)
    }

    #[test]
    fn sampler_needs_room() {
        assert!(sample_candidate(&cfg(Scheme::Alg4, 4, 4), 0).is_ok());
        assert!(matches!(sample_candidate(&cfg(Scheme::Alg4, 3, 4), 0), Err(Error::FieldTooSmall(_))));
        assert!(matches!(sample_candidate(&cfg(Scheme::Alg5, 3, 4), 0), Err(Error::FieldTooSmall(_))));
        let mut c = cfg(Scheme::Alg5, 8, 3);
        c.samples = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_sampling() {
        for sampler in [Sampler::Cauchy, Sampler::Uniform] {
            for scheme in [Scheme::Alg4, Scheme::Alg5] {
                let mut c = cfg(scheme, 8, 4);
                c.sampler = sampler;
                c.seed = 77;
                let a = sample_candidate(&c, 5).unwrap();
                assert_eq!(a, sample_candidate(&c, 5).unwrap());
                assert_ne!(a, sample_candidate(&c, 6).unwrap());
            }
        }
    }

    #[test]
    fn cauchy_samples_meet_preconditions() {
        for scheme in [Scheme::Alg4, Scheme::Alg5] {
            let c = cfg(scheme, 5, 3);
            for i in 0..50 {
                assert!(check_precondition(&sample_candidate(&c, i).unwrap()));
            }
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let mut c = cfg(Scheme::Alg5, 6, 4);
        c.samples = 60;
        c.seed = 3;
        c.workers = 1;
        let one = run_search(&c).unwrap();
        c.workers = 4;
        let four = run_search(&c).unwrap();
        assert_eq!((one.tried, one.safe_count, &one.safe), (four.tried, four.safe_count, &four.safe));
        assert_eq!(one.fraction, one.safe_count as f64 / one.tried as f64);
    }

    #[test]
    fn early_stop_is_deterministic() {
        let mut c = cfg(Scheme::Alg4, 6, 3);
        c.samples = 500;
        c.early_stop = Some(3);
        c.workers = 1;
        let a = run_search(&c).unwrap();
        c.workers = 3;
        let b = run_search(&c).unwrap();
        assert_eq!(a.safe_count, 3);
        assert_eq!((a.tried, &a.safe), (b.tried, &b.safe));
        assert_eq!(a.safe.last().unwrap().index + 1, a.tried);
    }

    #[test]
    fn found_matrices_reverify_and_stream() {
        let mut c = cfg(Scheme::Alg5, 8, 4);
        c.samples = 40;
        let mut buf: Vec<u8> = Vec::new();
        let stats = run_search_streaming(&c, Some(&mut buf)).unwrap();
        assert!(stats.safe_count > 0);
        let lines: Vec<&str> = std::str::from_utf8(&buf).unwrap().lines().collect();
        assert_eq!(lines.len() as u64, stats.safe_count);
        for f in &stats.safe {
            let m = f.to_mat(&c.ctx).unwrap();
            let g = GammaCandidate::new(Scheme::Alg5, c.ctx.clone(), m).unwrap();
            assert!(check_subsets(&g).unwrap().is_safe());
        }
    }

    #[test]
    fn two_column_subrun_always_safe() {
        for scheme in [Scheme::Alg4, Scheme::Alg5] {
            let mut c = cfg(scheme, 4, 3);
            c.n = 2;
            c.samples = 100;
            let s = run_search(&c).unwrap();
            assert_eq!(s.fraction, 1.0);
        }
    }
}
