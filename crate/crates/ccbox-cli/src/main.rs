//! `ccbox` — command-line surface for the no-signalling box toolkit.
//!
//! Six commands: `compare` decides the conversion relation between boxes
//! (with an all-pairs `--matrix` mode), `monotone` evaluates one of the
//! five nonclassicality monotones, `catalog` writes named boxes as JSON,
//! `analyze` runs the structural probes (sensitivity, equivalence class,
//! family grid, chain/antichain certification), `plotdata` emits CSV for
//! the family and tilted-family level plots, and `verify` runs a named
//! self-check suite.
//!
//! Conventions: machine-readable payloads go to standard output as JSON
//! (CSV for `plotdata`), diagnostics to standard error. Exit code 0 means
//! the command decided; 2 is reserved for comparisons of approximate
//! boxes that fall inside the soundness margin and are therefore
//! undecidable at the given tolerance; everything else (I/O, parse,
//! parameter errors, failed verification) exits 1.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

use ccbox::analysis::{
    certify_antichain, certify_chain, equivalence_class, family_monotone_grid,
    is_sensitive_capped, validate_anchor,
};
use ccbox::catalog::{
    hardy, l_empty, l_npr_b, noisy_pr, pr_box, table3_box, table3_mixture, tilted, tsirelson,
};
use ccbox::json::{box_from_str, box_to_json, box_to_string, rat_to_string};
use ccbox::monotones::{
    m_chsh_closed, m_chsh_oracle_capped, m_npr_closed, m_npr_oracle_capped, nonlocal_fraction,
    robustness_general, robustness_local, MonotoneValue, NprDecomposition,
};
use ccbox::ordering::{classify_with_certs, FeasibilityCertificate};
use ccbox::verify;
use ccbox::{CcBox, Error, Rat, Scalar};

#[derive(Parser)]
#[command(
    name = "ccbox",
    version,
    about = "Exact conversion decisions, nonclassicality monotones, and symmetry analysis for no-signalling boxes"
)]
struct Cli {
    /// Tolerance attached to float-encoded box entries read from files.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Cap on deterministic-operation enumerations.
    #[arg(long = "ldo-cap", global = true, default_value_t = 1_000_000)]
    ldo_cap: u64,

    /// Worker threads for batch work (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the conversion relation between two box files (or all pairs).
    Compare {
        /// Box files: exactly two, or two or more with --matrix.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// All-pairs relation matrix over every given file.
        #[arg(long)]
        matrix: bool,
    },
    /// Evaluate a nonclassicality monotone on a box file.
    Monotone {
        /// Which monotone to evaluate.
        #[arg(long, value_enum)]
        which: WhichMonotone,
        /// Use the independent oracle instead of the closed form
        /// (chsh and npr only).
        #[arg(long)]
        oracle: bool,
        /// The box file.
        path: PathBuf,
    },
    /// Write a named catalog box as JSON.
    Catalog {
        /// One of: pr, noisy-pr, l-nprb, l-empty, table3-box,
        /// table3-mixture, tsirelson, hardy, tilted.
        name: String,
        /// Variant or selector index (pr: 0–7; table3-box / table3-mixture: 1–3).
        #[arg(long)]
        k: Option<usize>,
        /// Chain parameter for noisy-pr: a rational like 3/4, or a decimal.
        #[arg(long)]
        alpha: Option<String>,
        /// Tilt angle in radians for tilted, in [0, π/2].
        #[arg(long)]
        theta: Option<f64>,
        /// Write to this file instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Structural probes of the conversion preorder.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Emit CSV plot data on standard output.
    Plotdata {
        /// Which data set: the (α,γ) family grid or the tilted family.
        which: PlotKind,
        /// Family anchor: l1bb, l2bb, l3bb, or a box file.
        #[arg(long, default_value = "l1bb")]
        anchor: String,
        /// Family grid resolution per axis.
        #[arg(long, default_value_t = 9)]
        grid: usize,
        /// Number of tilt angles (evenly spaced in (0, π/2]).
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Run a named verification suite: group, counts, tables, monotones,
    /// or appendixB.
    Verify {
        /// The suite name.
        suite: String,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Is the box outside the convex hull of its non-symmetry images?
    Sensitivity {
        /// The box file.
        path: PathBuf,
    },
    /// The equivalence class (symmetry orbit) of a nonfree box.
    Class {
        /// The box file.
        path: PathBuf,
    },
    /// Monotone values over the two-parameter mixture family.
    Family {
        /// Family anchor: l1bb, l2bb, l3bb, or a box file.
        #[arg(long, default_value = "l1bb")]
        anchor: String,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 9)]
        grid: usize,
    },
    /// Certify that the given boxes are pairwise incomparable.
    Antichain {
        /// Box files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Certify that the given boxes are totally ordered by convertibility.
    Chain {
        /// Box files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichMonotone {
    /// CHSH yield M_CHSH.
    Chsh,
    /// Noisy-PR cost M_NPR.
    Npr,
    /// Nonlocal fraction (M_CHSH − 2)/2.
    Nf,
    /// Robustness against local noise (M_CHSH − 2)/(M_CHSH + 2).
    Rbl,
    /// Robustness against no-signalling noise (M_CHSH − 2)/(M_CHSH + 4).
    Rbg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    /// Columns alpha, gamma, m_chsh, m_npr over the family grid.
    Family,
    /// Columns theta, m_chsh, m_npr over the tilted family.
    Tilted,
}

/// Die silently on a closed output pipe, like the standard text tools,
/// instead of panicking mid-write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Exit code 2 stays reserved for undecidable approximate
            // comparisons; usage errors exit 1, help and version exit 0.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("ccbox: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            println!("{}", json!({ "error": e.to_string() }));
            eprintln!("ccbox: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::ApproxUnsound { .. }) => 2u8,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Compare { paths, matrix } => cmd_compare(cli, paths, *matrix),
        Command::Monotone {
            which,
            oracle,
            path,
        } => cmd_monotone(cli, *which, *oracle, path),
        Command::Catalog {
            name,
            k,
            alpha,
            theta,
            out,
        } => cmd_catalog(name, *k, alpha.as_deref(), *theta, out.as_deref()),
        Command::Analyze { what } => cmd_analyze(cli, what),
        Command::Plotdata {
            which,
            anchor,
            grid,
            points,
        } => cmd_plotdata(cli, *which, anchor, *grid, *points),
        Command::Verify { suite } => cmd_verify(suite),
    }
}

/// Read and validate one box file.
fn load_box(path: &Path, tol: f64) -> anyhow::Result<CcBox> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let b = box_from_str(&text, tol).with_context(|| format!("parsing {}", path.display()))?;
    Ok(b)
}

/// An exact scalar value for an exact rational, a double otherwise.
fn scalar_to_json(s: &Scalar) -> Value {
    if s.is_exact() {
        Value::String(rat_to_string(&s.rationalize()))
    } else {
        json!(s.to_f64())
    }
}

fn monotone_value_to_json(v: &MonotoneValue) -> Value {
    match v {
        MonotoneValue::Finite(s) => scalar_to_json(s),
        MonotoneValue::PlusInfinity => json!("+inf"),
        MonotoneValue::MinusInfinity => json!("-inf"),
    }
}

fn cert_to_json(cert: &FeasibilityCertificate) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("feasible".into(), json!(cert.feasible));
    if let Some(weights) = &cert.weights {
        obj.insert(
            "weights".into(),
            Value::Array(
                weights
                    .iter()
                    .map(|(op, w)| json!([op, rat_to_string(w)]))
                    .collect(),
            ),
        );
    }
    if let Some(sep) = &cert.witness {
        obj.insert(
            "witness".into(),
            json!({
                "normal": sep.normal.iter().map(rat_to_string).collect::<Vec<_>>(),
                "offset": rat_to_string(&sep.offset),
            }),
        );
    }
    if let Some((distance, margin)) = cert.approx_margin {
        obj.insert(
            "approx_margin".into(),
            json!({ "distance": distance, "margin": margin }),
        );
    }
    Value::Object(obj)
}

fn cmd_compare(cli: &Cli, paths: &[PathBuf], matrix: bool) -> anyhow::Result<u8> {
    if matrix {
        return cmd_compare_matrix(cli, paths);
    }
    if paths.len() != 2 {
        anyhow::bail!(
            "compare takes exactly two box files (got {}); use --matrix for all pairs",
            paths.len()
        );
    }
    let a = load_box(&paths[0], cli.tol)?;
    let b = load_box(&paths[1], cli.tol)?;
    let (relation, forward, backward) = classify_with_certs(&a, &b, cli.ldo_cap)?;
    let payload = json!({
        "relation": relation.to_string(),
        "forward": cert_to_json(&forward),
        "backward": cert_to_json(&backward),
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(0)
}

/// All-pairs relation matrix. Files are sorted lexicographically first,
/// so the output is independent of argument order and of how the pair
/// work is scheduled.
fn cmd_compare_matrix(cli: &Cli, paths: &[PathBuf]) -> anyhow::Result<u8> {
    if paths.len() < 2 {
        anyhow::bail!("--matrix needs at least two box files (got {})", paths.len());
    }
    let mut sorted: Vec<&PathBuf> = paths.iter().collect();
    sorted.sort();
    let boxes: Vec<CcBox> = sorted
        .iter()
        .map(|p| load_box(p, cli.tol))
        .collect::<anyhow::Result<_>>()?;
    let n = boxes.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let decided: Vec<((usize, usize), Option<String>)> = pairs
        .par_iter()
        .map(|&(i, j)| -> anyhow::Result<_> {
            match classify_with_certs(&boxes[i], &boxes[j], cli.ldo_cap) {
                Ok((relation, _, _)) => Ok(((i, j), Some(relation.to_string()))),
                Err(Error::ApproxUnsound { .. }) => Ok(((i, j), None)),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<anyhow::Result<_>>()?;

    let mut relations = vec![vec![String::from("equivalent"); n]; n];
    let mut unsound = 0usize;
    for ((i, j), rel) in decided {
        match rel {
            Some(rel) => {
                let mirrored = match rel.as_str() {
                    "strictly-above" => "strictly-below".to_string(),
                    "strictly-below" => "strictly-above".to_string(),
                    other => other.to_string(),
                };
                relations[i][j] = rel;
                relations[j][i] = mirrored;
            }
            None => {
                unsound += 1;
                relations[i][j] = "approx-unsound".into();
                relations[j][i] = "approx-unsound".into();
            }
        }
    }
    let payload = json!({
        "files": sorted.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "relations": relations,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    if unsound > 0 {
        eprintln!("ccbox: {unsound} pair(s) undecidable at the given tolerance");
        return Ok(2);
    }
    Ok(0)
}

fn decomposition_to_json(d: &NprDecomposition) -> Value {
    json!({
        "alpha": scalar_to_json(&d.alpha),
        "gamma": scalar_to_json(&d.gamma),
        "variant": d.variant,
        "boundary_box": box_to_json(&d.boundary_box),
    })
}

fn cmd_monotone(
    cli: &Cli,
    which: WhichMonotone,
    oracle: bool,
    path: &Path,
) -> anyhow::Result<u8> {
    let b = load_box(path, cli.tol)?;
    let mut decomposition = None;
    let (value, method) = match (which, oracle) {
        (WhichMonotone::Chsh, false) => (m_chsh_closed(&b)?, "closed"),
        (WhichMonotone::Chsh, true) => (m_chsh_oracle_capped(&b, cli.ldo_cap)?, "oracle"),
        (WhichMonotone::Npr, false) => {
            let (value, dec) = m_npr_closed(&b)?;
            decomposition = dec;
            (value, "closed")
        }
        (WhichMonotone::Npr, true) => (m_npr_oracle_capped(&b, cli.ldo_cap)?, "oracle"),
        (WhichMonotone::Nf, false) => (nonlocal_fraction(&b)?, "closed"),
        (WhichMonotone::Rbl, false) => (robustness_local(&b)?, "closed"),
        (WhichMonotone::Rbg, false) => (robustness_general(&b)?, "closed"),
        (WhichMonotone::Nf | WhichMonotone::Rbl | WhichMonotone::Rbg, true) => {
            return Err(Error::BadParameter(
                "nf, rbl, and rbg are fixed transformations of the CHSH yield; \
                 only chsh and npr have independent oracles"
                    .into(),
            )
            .into());
        }
    };
    let mut payload = json!({
        "value": monotone_value_to_json(&value),
        "method": method,
    });
    if let Some(d) = &decomposition {
        payload["decomposition"] = decomposition_to_json(d);
    }
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(0)
}

/// Parse a rational parameter: "p/q", an integer, or a plain decimal
/// like 0.75 (read exactly as 75/100).
fn parse_rational(text: &str) -> anyhow::Result<Rat> {
    if let Ok(r) = ccbox::json::rat_from_str(text) {
        return Ok(r);
    }
    let t = text.trim();
    let (sign, digits) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t),
    };
    if let Some((int_part, frac_part)) = digits.split_once('.') {
        let all_digits =
            |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if all_digits(int_part) && all_digits(frac_part) {
            let numerator: BigInt = format!("{int_part}{frac_part}")
                .parse()
                .expect("digit string parses");
            let denominator = BigInt::from(10u32).pow(frac_part.len() as u32);
            return Ok(Rat::new(BigInt::from(sign) * numerator, denominator));
        }
    }
    anyhow::bail!("cannot parse '{text}' as a rational (use p/q, an integer, or a decimal)")
}

fn cmd_catalog(
    name: &str,
    k: Option<usize>,
    alpha: Option<&str>,
    theta: Option<f64>,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let need_k = |what: &str| {
        k.ok_or_else(|| anyhow::anyhow!("catalog {name} needs --k ({what})"))
    };
    let b = match name.replace('_', "-").as_str() {
        "pr" | "pr-box" => pr_box(k.unwrap_or(0))?,
        "noisy-pr" | "chain" => {
            let text = alpha
                .ok_or_else(|| anyhow::anyhow!("catalog noisy-pr needs --alpha"))?;
            noisy_pr(&Scalar::from_rat(parse_rational(text)?))?
        }
        "l-nprb" | "l-npr-b" => l_npr_b(),
        "l-empty" => l_empty(),
        "table3-box" => table3_box(need_k("1, 2, or 3")?)?,
        "table3-mixture" => table3_mixture(need_k("1, 2, or 3")?)?,
        "tsirelson" => tsirelson(),
        "hardy" => hardy(),
        "tilted" => {
            let t = theta.ok_or_else(|| anyhow::anyhow!("catalog tilted needs --theta"))?;
            tilted(&Scalar::approx(t, 1e-12)?)?
        }
        other => anyhow::bail!(
            "unknown catalog box '{other}'; expected pr, noisy-pr, l-nprb, l-empty, \
             table3-box, table3-mixture, tsirelson, hardy, or tilted"
        ),
    };
    let text = box_to_string(&b);
    match out {
        Some(path) => {
            fs::write(path, format!("{text}\n"))
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{}", json!({ "written": path.display().to_string() }));
            eprintln!("ccbox: wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(0)
}

/// An anchor by name (l1bb, l2bb, l3bb) or from a box file; validated.
fn resolve_anchor(text: &str, tol: f64) -> anyhow::Result<CcBox> {
    let b = match text {
        "l1bb" => table3_box(1)?,
        "l2bb" => table3_box(2)?,
        "l3bb" => table3_box(3)?,
        path => load_box(Path::new(path), tol)
            .with_context(|| format!("anchor '{text}' is not l1bb/l2bb/l3bb or a readable box file"))?,
    };
    validate_anchor(&b)?;
    Ok(b)
}

fn cmd_analyze(cli: &Cli, what: &AnalyzeCommand) -> anyhow::Result<u8> {
    match what {
        AnalyzeCommand::Sensitivity { path } => {
            let b = load_box(path, cli.tol)?;
            let (sensitive, cert) = is_sensitive_capped(&b, cli.ldo_cap)?;
            let payload = json!({
                "sensitive": sensitive,
                "certificate": cert_to_json(&cert),
            });
            println!("{}", serde_json::to_string_pretty(&payload)?);
        }
        AnalyzeCommand::Class { path } => {
            let b = load_box(path, cli.tol)?;
            let payload = match equivalence_class(&b) {
                Ok(members) => json!({
                    "class": "orbit",
                    "size": members.len(),
                    "members": members.iter().map(box_to_json).collect::<Vec<_>>(),
                }),
                Err(Error::FreeBoxClass) => json!({
                    "class": "free",
                    "note": "free boxes form a single equivalence class with no finite member list",
                }),
                Err(e) => return Err(e.into()),
            };
            println!("{}", serde_json::to_string_pretty(&payload)?);
        }
        AnalyzeCommand::Family { anchor, grid } => {
            let anchor_box = resolve_anchor(anchor, cli.tol)?;
            let rows = family_monotone_grid(&anchor_box, *grid)?;
            let payload = json!({
                "anchor": anchor,
                "grid": grid,
                "rows": rows.iter().map(|r| json!({
                    "alpha": scalar_to_json(&r.alpha),
                    "gamma": scalar_to_json(&r.gamma),
                    "m_chsh": scalar_to_json(&r.m_chsh),
                    "m_npr": scalar_to_json(&r.m_npr),
                })).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&payload)?);
        }
        AnalyzeCommand::Antichain { paths } => {
            let boxes: Vec<CcBox> = paths
                .iter()
                .map(|p| load_box(p, cli.tol))
                .collect::<anyhow::Result<_>>()?;
            let verdict = certify_antichain(&boxes)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "antichain": verdict,
                    "count": boxes.len(),
                }))?
            );
        }
        AnalyzeCommand::Chain { paths } => {
            let boxes: Vec<CcBox> = paths
                .iter()
                .map(|p| load_box(p, cli.tol))
                .collect::<anyhow::Result<_>>()?;
            let verdict = certify_chain(&boxes)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "chain": verdict,
                    "count": boxes.len(),
                }))?
            );
        }
    }
    Ok(0)
}

/// One CSV cell: "p/q" for exact scalars, 17-significant-digit decimal
/// for approximate ones (both parse back losslessly).
fn csv_cell(s: &Scalar) -> String {
    if s.is_exact() {
        rat_to_string(&s.rationalize())
    } else {
        format!("{:.16e}", s.to_f64())
    }
}

fn csv_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_plotdata(
    cli: &Cli,
    which: PlotKind,
    anchor: &str,
    grid: usize,
    points: usize,
) -> anyhow::Result<u8> {
    match which {
        PlotKind::Family => {
            let anchor_box = resolve_anchor(anchor, cli.tol)?;
            let rows = family_monotone_grid(&anchor_box, grid)?;
            println!("alpha,gamma,m_chsh,m_npr");
            for r in rows {
                println!(
                    "{},{},{},{}",
                    csv_cell(&r.alpha),
                    csv_cell(&r.gamma),
                    csv_cell(&r.m_chsh),
                    csv_cell(&r.m_npr)
                );
            }
        }
        PlotKind::Tilted => {
            if points == 0 {
                anyhow::bail!("--points must be positive");
            }
            println!("theta,m_chsh,m_npr");
            for i in 1..=points {
                let theta =
                    std::f64::consts::FRAC_PI_2 * (i as f64) / (points as f64);
                let b = tilted(&Scalar::approx(theta, 1e-12)?)?;
                let m_chsh = m_chsh_closed(&b)?.to_f64();
                let m_npr = m_npr_closed(&b)?.0.to_f64();
                println!("{},{},{}", csv_f64(theta), csv_f64(m_chsh), csv_f64(m_npr));
            }
        }
    }
    Ok(0)
}

fn cmd_verify(suite: &str) -> anyhow::Result<u8> {
    let report = verify::suite(suite)?;
    for check in &report.checks {
        eprintln!(
            "[{}] {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let passed = report.passed();
    let payload = json!({
        "suite": report.suite,
        "passed": passed,
        "checks": report.checks.iter().map(|c| json!({
            "name": c.name,
            "passed": c.passed,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    if passed {
        Ok(0)
    } else {
        eprintln!("ccbox: suite '{suite}' failed");
        Ok(1)
    }
}
