use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;

use maskmat::analytic::{self, PolySystem};
use maskmat::catalog::{catalog, catalog_verify, CatalogFilter};
use maskmat::checker::{self, filter_counts, CheckOptions, CheckReport, Method};
use maskmat::gadgets::{identity_holds, SharedInput};
use maskmat::linalg::MatJson;
use maskmat::search::{run_search_streaming, Sampler, SearchConfig, SearchReport};
use maskmat::structures::{check_precondition, construct_precond41, construct_precond51, parse_hex_list, CauchySpec};
use maskmat::{FieldCtx, GammaCandidate, Mat, Scheme};

#[derive(Parser)]
#[command(name = "maskmat", version, about = "Safe instantiation matrices for linear-randomness masked multiplication")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a matrix read from a file or stdin.
    Verify(VerifyArgs),
    /// Build a matrix from Cauchy parameters, print it and check it.
    Construct(ConstructArgs),
    /// Randomized search with statistics.
    Search(SearchArgs),
    /// Order-3 polynomial conditions.
    #[command(subcommand)]
    Analytic(AnalyticCmd),
    /// Embedded catalog of known safe matrices.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Print kept / total selection counts of the support filter.
    FilterCount {
        #[arg(short = 'd')]
        d: usize,
    },
    /// Check the gadget share identities on random inputs.
    Selftest {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, env = "MASKMAT_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    /// Field degree: GF(2^k).
    #[arg(long)]
    k: u32,
    /// Reduction polynomial in hex, including the leading term.
    #[arg(long, value_parser = parse_hex_u32)]
    poly: Option<u32>,
}

impl FieldArgs {
    fn ctx(&self) -> Result<Arc<FieldCtx>> {
        Ok(Arc::new(FieldCtx::new(self.k, self.poly)?))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Hex,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(short = 'd')]
    d: usize,
    /// Matrix file; stdin when absent or `-`.
    #[arg(long)]
    gamma: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hex")]
    format: Format,
    #[arg(long, value_parser = parse_method, default_value = "auto")]
    method: Method,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Comma-separated hex x values.
    #[arg(long)]
    xs: String,
    #[arg(long)]
    ys: String,
    /// Row scaling for Alg4; defaults to the x values.
    #[arg(long)]
    cs: Option<String>,
    #[arg(long, value_parser = parse_method, default_value = "auto")]
    method: Method,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(short = 'd')]
    d: usize,
    /// Number of columns for sub-runs; defaults to d.
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(long, value_parser = parse_sampler, default_value = "cauchy")]
    sampler: Sampler,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, env = "MASKMAT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "MASKMAT_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Stop after this many safe matrices.
    #[arg(long)]
    early_stop: Option<u64>,
    #[arg(long, value_parser = parse_method, default_value = "auto")]
    method: Method,
    /// Write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stream one JSON line per safe matrix to this file.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyticCmd {
    /// Evaluate the polynomial list at a point.
    Check {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        xs: String,
        #[arg(long)]
        ys: String,
    },
    /// Build and check the fixed order-3 instantiation.
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Check catalog entries.
    Verify {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        #[arg(short = 'd')]
        d: Option<usize>,
        #[arg(long)]
        k: Option<u32>,
        /// Largest order to include; order 6 takes minutes per entry.
        #[arg(long, default_value_t = 4)]
        max_d: usize,
        #[arg(long, value_parser = parse_method, default_value = "auto")]
        method: Method,
    },
    /// Print catalog entries.
    List {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        #[arg(short = 'd')]
        d: Option<usize>,
        #[arg(long)]
        k: Option<u32>,
    },
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: maskmat::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: maskmat::Error| e.to_string())
}

fn parse_sampler(s: &str) -> Result<Sampler, String> {
    s.parse().map_err(|e: maskmat::Error| e.to_string())
}

fn parse_hex_u32(s: &str) -> Result<u32, String> {
    u32::from_str_radix(s.trim_start_matches("0x"), 16).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn verdict_code(safe: bool) -> ExitCode {
    if safe {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify(a) => verify(a),
        Cmd::Construct(a) => construct(a),
        Cmd::Search(a) => search(a),
        Cmd::Analytic(c) => analytic_cmd(c),
        Cmd::Catalog(CatalogCmd::Verify { scheme, d, k, max_d, method }) => {
            let filter = CatalogFilter { scheme, d, k, max_d: Some(max_d) };
            let results = catalog_verify(&filter, method);
            let mut failures = 0;
            for r in &results {
                match &r.report {
                    Ok(rep) => println!(
                        "{:<24} {:<6} checked={} {:.1} ms",
                        r.entry.label,
                        rep.verdict.to_string(),
                        rep.subsets_checked,
                        rep.elapsed_ms
                    ),
                    Err(e) => println!("{:<24} error: {e}", r.entry.label),
                }
                if !r.is_safe() {
                    failures += 1;
                }
            }
            println!("{} entries, {failures} failures", results.len());
            if results.iter().any(|r| r.report.is_err()) {
                return Ok(ExitCode::from(2));
            }
            Ok(verdict_code(failures == 0))
        }
        Cmd::Catalog(CatalogCmd::List { scheme, d, k }) => {
            let filter = CatalogFilter { scheme, d, k, max_d: None };
            for e in catalog().iter().filter(|e| filter.matches(e)) {
                println!("# {}\n{}", e.label, e.to_block());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::FilterCount { d } => {
            let c = filter_counts(d)?;
            println!("{} / {}", c.kept, c.total);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest { trials, seed } => selftest(trials, seed),
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        }
        _ => {
            io::stdin().read_to_string(&mut text).context("reading stdin")?;
        }
    }
    Ok(text)
}

/// Accepts the unified `(d+1) x d` form, or the `d x d` part for Alg4.
fn load_candidate(scheme: Scheme, ctx: Arc<FieldCtx>, d: usize, m: Mat) -> Result<GammaCandidate> {
    if m.cols() != d {
        bail!("expected {d} columns, got {}", m.cols());
    }
    match (scheme, m.rows()) {
        (Scheme::Alg4, r) if r == d => Ok(GammaCandidate::from_alg4_part(ctx, &m)?),
        (_, r) if r == d + 1 => Ok(GammaCandidate::new(scheme, ctx, m)?),
        (_, r) => bail!("expected {} rows for {scheme} with d = {d}, got {r}", d + 1),
    }
}

fn print_report(g: &GammaCandidate, report: &CheckReport, json: bool) {
    if json {
        println!("{}", report.to_json());
        return;
    }
    println!(
        "{}: {} (method {}, checked {}, skipped {}, {:.1} ms)",
        g.scheme(),
        report.verdict,
        report.method,
        report.subsets_checked,
        report.subsets_skipped,
        report.elapsed_ms
    );
    if let Some(w) = &report.witness {
        let cols: Vec<String> = w.columns.iter().map(|c| (c + 1).to_string()).collect();
        let vals: Vec<String> = w.values.iter().map(|v| v.to_string()).collect();
        println!("witness on {}: columns [{}] values [{}]", w.target, cols.join(", "), vals.join(", "));
    }
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let ctx = a.field.ctx()?;
    let text = read_input(a.gamma.as_ref())?;
    let m = match a.format {
        Format::Hex => Mat::parse_text(&ctx, &text)?,
        Format::Json => {
            let j: MatJson = serde_json::from_str(&text).context("parsing JSON matrix")?;
            Mat::from_json(&ctx, &j)?
        }
    };
    let g = load_candidate(a.field.scheme, ctx, a.d, m)?;
    let report = checker::check(&g, a.method, &CheckOptions::default())?;
    print_report(&g, &report, a.json);
    Ok(verdict_code(report.is_safe()))
}

fn construct(a: ConstructArgs) -> Result<ExitCode> {
    let ctx = a.field.ctx()?;
    let spec = CauchySpec::parse(&ctx, &a.xs, &a.ys)?;
    let g = match (a.field.scheme, &a.cs) {
        (Scheme::Alg4, None) => construct_precond41(ctx.clone(), &spec)?,
        (Scheme::Alg4, Some(cs)) => {
            let spec = CauchySpec { row_scale: Some(parse_hex_list(&ctx, cs)?), ..spec };
            GammaCandidate::from_alg4_part(ctx.clone(), &spec.matrix(&ctx)?)?
        }
        (Scheme::Alg5, None) => construct_precond51(ctx.clone(), &spec)?,
        (Scheme::Alg5, Some(_)) => bail!("--cs applies to alg4 only; alg5 scaling is determined by the kernel"),
    };
    let report = checker::check(&g, a.method, &CheckOptions::default())?;
    if a.json {
        let out = serde_json::json!({
            "gamma": g.gamma().to_json(&ctx),
            "precondition": check_precondition(&g),
            "report": report,
        });
        println!("{out}");
    } else {
        print!("{}", g.to_text());
        println!("precondition: {}", if check_precondition(&g) { "holds" } else { "fails" });
        print_report(&g, &report, false);
    }
    Ok(verdict_code(report.is_safe()))
}

fn search(a: SearchArgs) -> Result<ExitCode> {
    let ctx = a.field.ctx()?;
    let mut cfg = SearchConfig::new(a.field.scheme, ctx, a.d);
    cfg.n = a.n.unwrap_or(a.d);
    cfg.sampler = a.sampler;
    cfg.samples = a.samples;
    cfg.seed = a.seed;
    cfg.workers = a.workers;
    cfg.early_stop = a.early_stop;
    cfg.method = a.method;
    let mut sink = match &a.jsonl {
        Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => None,
    };
    let stats = run_search_streaming(&cfg, sink.as_mut().map(|w| w as &mut dyn Write))?;
    if let Some(mut w) = sink {
        w.flush()?;
    }
    let report = SearchReport::new(&cfg, stats);
    if let Some(p) = &a.out {
        std::fs::write(p, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", p.display()))?;
    }
    let s = &report.stats;
    let log2 = s.log2_fraction.map_or("-inf".to_string(), |l| format!("{l:.2}"));
    println!(
        "tried {} safe {} fraction {:.4} (log2 {log2}) mean {:.2} ms p99 {:.2} ms",
        s.tried, s.safe_count, s.fraction, s.timing.mean_ms, s.timing.p99_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn analytic_cmd(c: AnalyticCmd) -> Result<ExitCode> {
    match c {
        AnalyticCmd::Check { field, xs, ys } => {
            let ctx = field.ctx()?;
            let sys = PolySystem::embedded(field.scheme);
            let (x, y) = (parse_hex_list(&ctx, &xs)?, parse_hex_list(&ctx, &ys)?);
            let vals = sys.evaluate(&ctx, &x, &y)?;
            let zeros: Vec<usize> = vals.iter().enumerate().filter(|(_, v)| v.is_zero()).map(|(i, _)| i + 1).collect();
            if zeros.is_empty() {
                println!("all {} polynomials non-zero", vals.len());
            } else {
                println!("zero polynomials: {zeros:?}");
            }
            Ok(verdict_code(zeros.is_empty()))
        }
        AnalyticCmd::Construct { field, json } => {
            let ctx = field.ctx()?;
            let g = analytic::explicit_construct(field.scheme, ctx.clone())?;
            let report = checker::check_subsets(&g)?;
            if !json {
                print!("{}", g.to_text());
            }
            print_report(&g, &report, json);
            Ok(verdict_code(report.is_safe()))
        }
    }
}

/// Random identity checks on every catalog entry up to order 4.
fn selftest(trials: usize, seed: u64) -> Result<ExitCode> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut total = 0usize;
    for e in catalog().into_iter().filter(|e| e.d <= 4) {
        let g = e.candidate()?;
        for _ in 0..trials {
            let input = SharedInput::random(g.ctx(), g.d(), &mut rng);
            total += 1;
            if !identity_holds(&g, &input)? {
                failures += 1;
            }
        }
    }
    println!("{total} gadget evaluations, {failures} failures");
    Ok(verdict_code(failures == 0))
}
