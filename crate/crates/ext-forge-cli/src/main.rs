use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ext_forge::arith2::TwoAdic;
use ext_forge::axial;
use ext_forge::certify::{self, ChartCache, ChartSettings, Variant};
use ext_forge::charts::{self, ChartFixture, ExtChart, Format};
use ext_forge::expr;
use ext_forge::fdmodule::verify_action;
use ext_forge::resolution::{stable_window, Window};
use ext_forge::steenrod::Profile;
use ext_forge::Error;

macro_rules! out {
    ($($arg:tt)*) => {
        emit(format_args!($($arg)*))
    };
}

#[derive(Parser)]
#[command(name = "ext-forge", version, about = "Ext charts over A(1)/A(2), axial-class arithmetic and nonimmersion certificates")]
struct Cli {
    /// Run the resolution kernel on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimal resolution of a module; writes the Ext chart as JSON.
    Resolve(ResolveArgs),
    /// Render or compare charts.
    #[command(subcommand)]
    Chart(ChartCmd),
    /// Series computations for the axial class.
    #[command(subcommand)]
    Axial(AxialCmd),
    /// Nonimmersion certificates.
    Certify(CertifyArgs),
    /// Module inspection.
    #[command(subcommand)]
    Module(ModuleCmd),
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long, default_value = "A2")]
    algebra: String,
    /// Module expression, e.g. "tensor(P[-3..],P[3..])".
    #[arg(long)]
    module: String,
    #[arg(long)]
    max_s: i64,
    #[arg(long, allow_hyphen_values = true)]
    max_t: i64,
    /// Trusted stem range "lo,hi"; defaults to all stems up to max_t.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    stems: Option<(i64, i64)>,
    /// Truncation window "lo,hi" for semi-infinite modules.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a fixture with this name and provenance note instead of a bare chart.
    #[arg(long, requires = "provenance")]
    fixture_name: Option<String>,
    #[arg(long)]
    provenance: Option<String>,
}

#[derive(Subcommand)]
enum ChartCmd {
    /// ASCII or SVG rendering of a chart or fixture file.
    Render {
        file: PathBuf,
        #[arg(long, default_value = "ascii")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank and line differences between a chart and a fixture.
    Diff { chart: PathBuf, fixture: PathBuf },
}

#[derive(Subcommand)]
enum AxialCmd {
    /// Fixed point θ of the c4 relation.
    Theta {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gammas: Vec<i64>,
        #[arg(long = "J", default_value_t = axial::DEFAULT_J)]
        j: usize,
        #[arg(long = "K", default_value_t = axial::DEFAULT_K)]
        k: u32,
        /// Leading coefficient, a multiple of 16.
        #[arg(long, default_value_t = 16, allow_hyphen_values = true)]
        lead: i64,
    },
    /// Unit factor of the axial class and its inverse.
    Decompose {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        kappas: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gammas: Vec<i64>,
        #[arg(long = "J", default_value_t = axial::DEFAULT_J)]
        j: usize,
        #[arg(long = "K", default_value_t = axial::DEFAULT_K)]
        k: u32,
        #[arg(long, default_value_t = 16, allow_hyphen_values = true)]
        lead: i64,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct CertifyArgs {
    #[command(subcommand)]
    table: Option<CertifyCmd>,
    #[arg(long = "M")]
    m: Option<u64>,
    #[arg(long, default_value_t = 1)]
    h: u32,
    /// a: alpha(M) = 3, b: alpha(M) = 2. Chosen from M when omitted.
    #[arg(long)]
    variant: Option<String>,
    /// Write the certificate JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// Applicable statements for every M below max-M.
    Table {
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long = "max-M")]
        max_m: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ModuleCmd {
    /// Dimensions per degree and a check of the algebra relations.
    Info {
        #[arg(long)]
        module: String,
        #[arg(long, default_value = "A2")]
        algebra: String,
        /// Degree window "lo,hi" for semi-infinite modules.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(i64, i64)>,
    },
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

fn profile(s: &str) -> anyhow::Result<Profile> {
    let n = s
        .strip_prefix(['A', 'a'])
        .and_then(|d| d.parse().ok())
        .with_context(|| format!("algebra must be A0, A1 or A2, got {s:?}"))?;
    Ok(Profile::new(n)?)
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn twoadics(v: &[i64], k: u32) -> Vec<TwoAdic> {
    v.iter().map(|&x| TwoAdic::new(x, k)).collect()
}

fn series_json(s: &axial::PSeries) -> serde_json::Value {
    let coeffs: Vec<_> = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| json!({ "index": i, "value": c.signed().to_string(), "valuation": c.valuation().to_string() }))
        .collect();
    json!({ "J": s.max_index(), "K": s.precision(), "overflow": s.overflowed(), "coefficients": coeffs })
}

fn load_chart(path: &PathBuf) -> anyhow::Result<ExtChart> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(f) = serde_json::from_str::<ChartFixture>(&text) {
        let mut c = f.chart;
        c.normalize();
        return Ok(c);
    }
    Ok(ExtChart::from_json(&text)?)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    ext_forge::par::set_sequential(cli.sequential);
    match cli.cmd {
        Cmd::Resolve(a) => {
            let p = profile(&a.algebra)?;
            let e = expr::parse(&a.module)?;
            let stems = a.stems.unwrap_or((e.bottom().unwrap_or(a.max_t - 24 * (a.max_s + 1)), a.max_t));
            let window = a.window.map(|(lo, hi)| Window { lo, hi });
            let w = window.unwrap_or_else(|| stable_window(e.bottom(), a.max_s, a.max_t, stems));
            let res = expr::resolve(&e, p, a.max_s, a.max_t, stems, window)?;
            res.check_d_squared()?;
            let chart = res.ext_chart()?;
            let text = match a.fixture_name {
                Some(name) => {
                    let command = format!(
                        "ext-forge resolve --algebra {} --module '{}' --max-s {} --max-t {} --stems {},{} --window {},{}",
                        a.algebra, a.module, a.max_s, a.max_t, stems.0, stems.1, w.lo, w.hi
                    );
                    let provenance = a.provenance.unwrap_or_default();
                    ChartFixture { name, provenance, command, chart: chart.clone() }.to_json()?
                }
                None => chart.to_json()?,
            };
            write_or_print(a.out.as_ref(), &text)?;
            if a.out.is_some() {
                let total: usize = chart.entries.iter().map(|e| e.2).sum();
                eprintln!("{}: {} generators, window [{}, {}]", chart.module, total, w.lo, w.hi);
            }
        }
        Cmd::Chart(ChartCmd::Render { file, format, out }) => {
            let c = load_chart(&file)?;
            write_or_print(out.as_ref(), &charts::render(&c, Format::parse(&format)?))?;
        }
        Cmd::Chart(ChartCmd::Diff { chart, fixture }) => {
            let r = charts::compare(&load_chart(&chart)?, &load_chart(&fixture)?)?;
            out!("{}", serde_json::to_string_pretty(&r)?);
            if !r.is_match() {
                eprintln!("{} differences", r.entries.len());
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Axial(AxialCmd::Theta { gammas, j, k, lead }) => {
            let t = axial::solve_theta_with_lead(&twoadics(&gammas, k), lead, j, k)?;
            let residual = axial::theta_residual(&t, j)?;
            let out = json!({
                "gammas": gammas, "lead": lead, "iterations": t.iterations,
                "theta": series_json(&t.series), "residual_zero": residual.is_zero(),
            });
            out!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::Axial(AxialCmd::Decompose { kappas, gammas, j, k, lead }) => {
            let d = axial::axial_decompose_with_lead(&twoadics(&kappas, k), &twoadics(&gammas, k), lead, j, k)?;
            let (u2, a2) = axial::invert_unit(d.u, &d.alphas, j, k)?;
            let show = |v: &[TwoAdic]| -> Vec<serde_json::Value> {
                v.iter()
                    .enumerate()
                    .map(|(i, c)| json!({ "j": i + 1, "value": c.signed().to_string(), "valuation": c.valuation().to_string() }))
                    .collect()
            };
            let out = json!({
                "u": d.u.signed().to_string(),
                "alphas": show(&d.alphas),
                "betas": show(&d.betas),
                "inverse": { "u": u2.signed().to_string(), "alphas": show(&a2) },
            });
            out!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::Certify(a) => {
            let cache = ChartCache::new();
            let settings = ChartSettings::default();
            if let Some(CertifyCmd::Table { h, max_m, json }) = a.table {
                let rows = certify::table(h, max_m, &cache, settings)?;
                for r in &rows {
                    out!("M={:<5} variant {}  {}  [{}]", r.m, r.variant, r.claim, verdict_str(&r.verdict));
                }
                if let Some(p) = json {
                    std::fs::write(&p, serde_json::to_string_pretty(&rows)?)?;
                }
                return Ok(ExitCode::SUCCESS);
            }
            let Some(m) = a.m else { bail!("--M is required") };
            let cert = match a.variant {
                Some(v) if a.h == 1 => certify::certify_h1(m, Variant::parse(&v)?, &cache, settings)?,
                Some(_) => bail!("--variant applies to h = 1 only"),
                None => certify::emit_statement(m, a.h, &cache, settings)?,
            };
            out!("{}  [{}]", cert.claim, verdict_str(&cert.verdict));
            if let Some(w) = cert.witnesses.first() {
                out!("witness X1^{} X2^{}: nu = {} < order exponent {}", w.i, w.j, w.nu, w.exponent);
            }
            match a.json {
                Some(p) => std::fs::write(&p, cert.to_json()?)?,
                None => out!("{}", cert.to_json()?),
            }
        }
        Cmd::Module(ModuleCmd::Info { module, algebra, window }) => {
            let e = expr::parse(&module)?;
            let (lo, hi) = match (window, e.bounds()) {
                (Some(w), _) => w,
                (None, (Some(b), Some(t))) => (b, t),
                _ => bail!("{module} is infinite; pass --window lo,hi"),
            };
            let m = e.instantiate(profile(&algebra)?, lo, hi)?;
            out!("{} over {algebra}: total dimension {}", m.name(), m.total_dim());
            for (d, n) in m.dims_by_degree() {
                out!("  degree {d:>4}: {n}");
            }
            let report = verify_action(&m);
            out!("relations: {}", if report.passed() { "ok" } else { "FAILED" });
            if !report.passed() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict_str(v: &certify::Verdict) -> &'static str {
    match v {
        certify::Verdict::Certified => "certified",
        certify::Verdict::StatementOnly => "statement-only",
    }
}

/// Writes a line to stdout, exiting quietly when the reader has gone away.
fn emit(args: std::fmt::Arguments) {
    use std::io::Write;
    if let Err(e) = writeln!(std::io::stdout(), "{args}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
        std::process::exit(0);
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Hypothesis(_)) => ExitCode::from(2),
                Some(Error::Internal(_)) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
