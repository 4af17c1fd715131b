//! Embedded catalog of known safe instantiations.
//!
//! The data files hold blocks of the form
//!
//! ```text
//! [d=3 k=3]
//! 3 5 4
//! 3 6 7
//! 3 5 4
//! ```
//!
//! Alg4 blocks store the `d x d` part below the ones row; Alg5 blocks store
//! the full `(d+1) x d` matrix.

use std::sync::Arc;

use rayon::prelude::*;

use crate::checker::{self, CheckOptions, CheckReport, Method};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::linalg::Mat;
use crate::probes::{GammaCandidate, Scheme};

pub const ALG4_DATA: &str = include_str!("../data/alg4.txt");
pub const ALG5_DATA: &str = include_str!("../data/alg5.txt");

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub scheme: Scheme,
    pub d: usize,
    pub k: u32,
    /// Rows exactly as stored (the `A` part for Alg4).
    pub stored: Mat,
    pub label: String,
}

impl CatalogEntry {
    pub fn ctx(&self) -> Result<Arc<FieldCtx>> {
        Ok(Arc::new(FieldCtx::with_degree(self.k)?))
    }

    /// The entry in unified form.
    pub fn candidate(&self) -> Result<GammaCandidate> {
        let ctx = self.ctx()?;
        match self.scheme {
            Scheme::Alg4 => GammaCandidate::from_alg4_part(ctx, &self.stored),
            Scheme::Alg5 => GammaCandidate::new(Scheme::Alg5, ctx, self.stored.clone()),
        }
    }

    /// The block text as it would appear in a data file.
    pub fn to_block(&self) -> String {
        format!("[d={} k={}]\n{}", self.d, self.k, self.stored.to_text())
    }
}

/// Parses one data file.
pub fn parse_catalog(scheme: Scheme, text: &str) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    let mut header: Option<(usize, u32)> = None;
    let mut body = String::new();
    let flush = |header: Option<(usize, u32)>, body: &str, out: &mut Vec<CatalogEntry>| -> Result<()> {
        if let Some((d, k)) = header {
            let ctx = FieldCtx::with_degree(k)?;
            let stored = Mat::parse_text(&ctx, body)?;
            let want_rows = match scheme {
                Scheme::Alg4 => d,
                Scheme::Alg5 => d + 1,
            };
            if stored.rows() != want_rows || stored.cols() != d {
                return Err(Error::Parse(format!(
                    "{scheme} d={d} k={k}: expected {want_rows}x{d}, got {}x{}",
                    stored.rows(),
                    stored.cols()
                )));
            }
            out.push(CatalogEntry { scheme, d, k, stored, label: format!("{scheme} d={d} GF(2^{k})") });
        }
        Ok(())
    };
    for line in text.lines() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            flush(header, &body, &mut out)?;
            body.clear();
            header = Some(parse_header(h)?);
        } else if !t.is_empty() && !t.starts_with('#') {
            if header.is_none() {
                return Err(Error::Parse(format!("matrix row before any header: {t:?}")));
            }
            body.push_str(line);
            body.push('\n');
        }
    }
    flush(header, &body, &mut out)?;
    Ok(out)
}

fn parse_header(h: &str) -> Result<(usize, u32)> {
    let mut d = None;
    let mut k = None;
    for part in h.split_whitespace() {
        let (key, val) = part.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field {part:?}")))?;
        let v: u32 = val.parse().map_err(|_| Error::Parse(format!("bad header value {part:?}")))?;
        match key {
            "d" => d = Some(v as usize),
            "k" => k = Some(v),
            _ => return Err(Error::Parse(format!("unknown header field {key:?}"))),
        }
    }
    match (d, k) {
        (Some(d), Some(k)) => Ok((d, k)),
        _ => Err(Error::Parse(format!("header needs d and k: {h:?}"))),
    }
}

/// All embedded entries, Alg4 first.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut v = parse_catalog(Scheme::Alg4, ALG4_DATA).expect("embedded Alg4 data parses");
    v.extend(parse_catalog(Scheme::Alg5, ALG5_DATA).expect("embedded Alg5 data parses"));
    v
}

/// Selection of catalog entries.
#[derive(Clone, Copy, Debug, Default)]
pub struct CatalogFilter {
    pub scheme: Option<Scheme>,
    pub d: Option<usize>,
    pub k: Option<u32>,
    pub max_d: Option<usize>,
}

impl CatalogFilter {
    pub fn matches(&self, e: &CatalogEntry) -> bool {
        self.scheme.is_none_or(|s| s == e.scheme)
            && self.d.is_none_or(|d| d == e.d)
            && self.k.is_none_or(|k| k == e.k)
            && self.max_d.is_none_or(|m| e.d <= m)
    }
}

/// Result for one catalog entry.
#[derive(Debug)]
pub struct EntryResult {
    pub entry: CatalogEntry,
    pub report: Result<CheckReport>,
}

impl EntryResult {
    pub fn is_safe(&self) -> bool {
        matches!(&self.report, Ok(r) if r.is_safe())
    }
}

/// Checks every matching entry, in parallel across entries. Results keep
/// catalog order.
pub fn catalog_verify(filter: &CatalogFilter, method: Method) -> Vec<EntryResult> {
    let opts = CheckOptions::default();
    catalog()
        .into_iter()
        .filter(|e| filter.matches(e))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|entry| {
            let report = entry.candidate().and_then(|g| checker::check(&g, method, &opts));
            EntryResult { entry, report }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn counts(scheme: Scheme) -> BTreeMap<usize, Vec<u32>> {
        let mut m: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for e in catalog().into_iter().filter(|e| e.scheme == scheme) {
            m.entry(e.d).or_default().push(e.k);
        }
        m
    }

    #[test]
    fn entry_counts() {
        let a4 = counts(Scheme::Alg4);
        assert_eq!(a4[&3], (3..=16).collect::<Vec<_>>());
        assert_eq!(a4[&4], (5..=16).collect::<Vec<_>>());
        assert_eq!(a4[&5], (10..=16).collect::<Vec<_>>());
        assert_eq!(a4[&6], vec![15, 16]);
        let a5 = counts(Scheme::Alg5);
        assert_eq!(a5[&3], (3..=16).collect::<Vec<_>>());
        assert_eq!(a5[&4], (5..=16).collect::<Vec<_>>());
        assert_eq!(a5[&5], (9..=16).collect::<Vec<_>>());
        assert_eq!(a5[&6], vec![15, 16]);
    }

    #[test]
    fn every_entry_is_well_formed() {
        for e in catalog() {
            let g = e.candidate().unwrap();
            assert_eq!((g.d(), g.n()), (e.d, e.d), "{}", e.label);
        }
    }

    #[test]
    fn round_trip() {
        for scheme in [Scheme::Alg4, Scheme::Alg5] {
            let entries: Vec<_> = catalog().into_iter().filter(|e| e.scheme == scheme).collect();
            let text: String = entries.iter().map(|e| e.to_block() + "\n").collect();
            let back = parse_catalog(scheme, &text).unwrap();
            assert_eq!(back.len(), entries.len());
            for (a, b) in entries.iter().zip(&back) {
                assert_eq!((a.d, a.k, &a.stored), (b.d, b.k, &b.stored));
            }
        }
    }

    #[test]
    fn known_small_entries() {
        let all = catalog();
        let find = |s: Scheme, d: usize, k: u32| all.iter().find(|e| e.scheme == s && e.d == d && e.k == k).unwrap();
        let ctx = FieldCtx::with_degree(3).unwrap();
        assert_eq!(find(Scheme::Alg4, 3, 3).stored, Mat::from_rows(&ctx, &[[3, 5, 4], [3, 6, 7], [3, 5, 4]]).unwrap());
        assert_eq!(
            find(Scheme::Alg5, 3, 3).stored,
            Mat::from_rows(&ctx, &[[1, 7, 4], [4, 4, 4], [2, 1, 4], [7, 2, 4]]).unwrap()
        );
    }

    #[test]
    fn malformed_blocks() {
        assert!(parse_catalog(Scheme::Alg4, "1 2\n").is_err());
        assert!(parse_catalog(Scheme::Alg4, "[d=2 k=3]\n1 2\n").is_err());
        assert!(parse_catalog(Scheme::Alg4, "[d=2]\n1 2\n3 4\n").is_err());
        assert!(parse_catalog(Scheme::Alg5, "[d=1 k=2]\n1\n1\n").is_ok());
    }

    #[test]
    fn filter_matching() {
        let f = CatalogFilter { scheme: Some(Scheme::Alg5), max_d: Some(3), ..Default::default() };
        assert_eq!(catalog().iter().filter(|e| f.matches(e)).count(), 14);
    }
}
