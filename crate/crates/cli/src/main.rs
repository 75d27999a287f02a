//! Command-line harness: runs the verification suites and emits
//! machine-readable reports.
//!
//! Subcommands:
//! - `verify-closed`: closed-manifold Gauss-Bonnet check for a catalog metric;
//! - `polygon`: two-dimensional polyhedral assembly for a builtin region;
//! - `exhaust`: thick-part exhaustion table for a named model;
//! - `chi`: exact rational Euler-characteristic values;
//! - `model-check`: the thin-part model invariants (level-set form, gradient
//!   ratio, fibre decay, systole descent against tree search).
//!
//! Reports are JSON ({command, config_echo, rows, verdict, versions,
//! timestamp}) or CSV (rows only). All volatile data (wall clock, runtime)
//! lives inside the single `timestamp` field, so re-runs with the same config
//! are byte-identical everywhere else.
//!
//! Exit codes: 0 match/success, 1 usage error, 2 mismatch, 3 inconclusive,
//! 4 model inconsistency.

use clap::{Args, Parser, Subcommand};
use gblab_core::assembly::{self, Verdict};
use gblab_core::quad::QuadSpec;
use gblab_core::{chart, chi, moduli, region, Error};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "gblab", version, about = "Gauss-Bonnet numerical laboratory")]
struct Cli {
    /// Flat key = value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct OutputOpts {
    /// json or csv
    #[arg(long)]
    format: Option<String>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct QuadOpts {
    /// Gauss-Legendre order per axis
    #[arg(long)]
    order: Option<usize>,
    /// Absolute tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for sampled quantities
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Integrate the Gauss-Bonnet-Chern density over a closed catalog metric.
    VerifyClosed {
        /// Metric name: sphere, flat-torus, s2xs2, s4, ...
        #[arg(long)]
        metric: Option<String>,
        /// Sphere radius (sphere, s4)
        #[arg(long)]
        radius: Option<f64>,
        /// Dimension (euclidean, flat-torus)
        #[arg(long)]
        dim: Option<usize>,
        /// Use finite-difference curvature instead of closed-form partials
        #[arg(long)]
        finite_difference: bool,
        #[command(flatten)]
        quad: QuadOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Polyhedral Gauss-Bonnet breakdown for a builtin surface region.
    Polygon {
        /// Region name: square, spherical-triangle, hyperbolic-pentagon, disk
        #[arg(long)]
        region: Option<String>,
        #[command(flatten)]
        quad: QuadOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Thick-part exhaustion table for a named model.
    Exhaust {
        /// Model name: modular-curve, thin-strip, closed-sphere
        #[arg(long)]
        model: Option<String>,
        /// Comma list of thickness parameters, strictly decreasing
        #[arg(long)]
        eps: Option<String>,
        /// Comma list of truncation heights (modular curve: eps = 1/Y)
        #[arg(long)]
        cutoffs: Option<String>,
        /// Covering index (modular curve)
        #[arg(long)]
        index: Option<usize>,
        #[command(flatten)]
        quad: QuadOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Exact rational Euler characteristics.
    Chi {
        /// Family: punctured, closed, sp, zeta
        #[arg(long)]
        family: Option<String>,
        /// Genus (punctured, closed, zeta)
        #[arg(long)]
        g: Option<usize>,
        /// Rank (sp)
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Thin-part model invariants and the systole consistency check.
    ModelCheck {
        /// Number of random trace triples for the systole check
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        quad: QuadOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
}

/// Flat key = value file; '#' starts a comment.
fn load_config(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {} is not key = value", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Settings {
    config: BTreeMap<String, String>,
}

impl Settings {
    fn str_opt(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.config.get(key).cloned())
    }

    fn parse_opt<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key '{key}' has unparsable value '{raw}'")),
            None => Ok(None),
        }
    }
}

fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number '{s}' in list"))
        })
        .collect()
}

fn quad_spec(dim: usize, opts: &QuadOpts, settings: &Settings) -> Result<QuadSpec, String> {
    let mut spec = QuadSpec::for_dim(dim);
    if let Some(order) = settings.parse_opt(opts.order, "order")? {
        spec.order = order;
    }
    if let Some(tol) = settings.parse_opt(opts.tol, "tol")? {
        spec.abs_tol = tol;
    }
    if let Some(seed) = settings.parse_opt(opts.seed, "seed")? {
        spec.seed = seed;
    }
    Ok(spec)
}

#[derive(Serialize)]
struct Report {
    command: String,
    config_echo: Value,
    rows: Vec<Value>,
    verdict: Verdict,
    versions: Value,
    /// All volatile data sits here so everything above is reproducible.
    timestamp: Value,
}

fn emit(report: &Report, output: &OutputOpts, settings: &Settings) -> Result<(), String> {
    let format = settings
        .str_opt(output.format.clone(), "format")
        .unwrap_or_else(|| "json".into());
    let out_path = output
        .out
        .clone()
        .or_else(|| settings.config.get("out").map(PathBuf::from));
    let body = match format.as_str() {
        "json" => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
            s.push('\n');
            s
        }
        "csv" => rows_to_csv(&report.rows)?,
        other => return Err(format!("unknown format '{other}' (use json or csv)")),
    };
    match out_path {
        Some(path) => {
            std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn csv_cell(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn rows_to_csv(rows: &[Value]) -> Result<String, String> {
    let mut out = String::new();
    let mut headers: Vec<String> = Vec::new();
    for row in rows {
        if let Value::Object(map) = row {
            for key in map.keys() {
                if !headers.contains(key) {
                    headers.push(key.clone());
                }
            }
        }
    }
    let header_cells: Vec<String> = headers.iter().map(|h| csv_cell(h)).collect();
    out.push_str(&header_cells.join(","));
    out.push('\n');
    for row in rows {
        if let Value::Object(map) = row {
            let cells: Vec<String> = headers
                .iter()
                .map(|h| match map.get(h) {
                    Some(Value::String(s)) => csv_cell(s),
                    Some(v) => csv_cell(&v.to_string()),
                    None => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    Ok(out)
}

fn verdict_exit(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Match => 0,
        Verdict::Mismatch => 2,
        Verdict::Inconclusive => 3,
    }
}

fn error_exit(err: &Error) -> i32 {
    match err {
        Error::ModelConsistency(_) | Error::EstimateInconsistency { .. } => 4,
        _ => 1,
    }
}

fn run() -> Result<i32, (i32, String)> {
    let cli = Cli::try_parse().map_err(|e| (1, e.to_string()))?;
    let config = match &cli.config {
        Some(path) => load_config(path).map_err(|m| (1, m))?,
        None => BTreeMap::new(),
    };
    let settings = Settings { config };
    let started = Instant::now();
    let wall_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);

    let usage = |m: String| (1, m);

    match cli.command {
        Command::VerifyClosed {
            metric,
            radius,
            dim,
            finite_difference,
            quad,
            output,
        } => {
            let name = settings
                .str_opt(metric, "metric")
                .ok_or_else(|| usage("--metric is required".into()))?;
            let mut params: Vec<(String, f64)> = Vec::new();
            if let Some(r) = settings.parse_opt(radius, "radius").map_err(usage)? {
                params.push(("radius".into(), r));
            }
            if let Some(d) = settings.parse_opt(dim, "dim").map_err(usage)? {
                params.push(("dim".into(), d as f64));
            }
            let mut chart = chart::by_name(&name, &params).map_err(|e| (1, e.to_string()))?;
            let fd = finite_difference
                || settings
                    .config
                    .get("finite-difference")
                    .map(|v| v == "true")
                    .unwrap_or(false);
            if fd {
                chart = chart.with_finite_difference();
            }
            let spec = quad_spec(chart.dim(), &quad, &settings).map_err(usage)?;
            let report = assembly::gauss_bonnet_closed(&chart, &spec)
                .map_err(|e| (error_exit(&e), e.to_string()))?;
            let verdict = report.verdict;
            let row = serde_json::to_value(&report).map_err(|e| (1, e.to_string()))?;
            let out = Report {
                command: "verify-closed".into(),
                config_echo: json!({
                    "metric": name,
                    "params": params,
                    "finite_difference": fd,
                    "order": spec.order,
                    "tol": spec.abs_tol,
                    "seed": spec.seed,
                }),
                rows: vec![row],
                verdict,
                versions: versions(),
                timestamp: stamp(wall_ms, started),
            };
            emit(&out, &output, &settings).map_err(usage)?;
            Ok(verdict_exit(verdict))
        }
        Command::Polygon {
            region: region_name,
            quad,
            output,
        } => {
            let name = settings
                .str_opt(region_name, "region")
                .ok_or_else(|| usage("--region is required".into()))?;
            let region = region::region_by_name(&name).map_err(|e| (1, e.to_string()))?;
            let spec = quad_spec(2, &quad, &settings).map_err(usage)?;
            let report = assembly::gauss_bonnet_2d_region(&region, &spec)
                .map_err(|e| (error_exit(&e), e.to_string()))?;
            let verdict = report.verdict;
            let mut rows = vec![json!({
                "term": "interior",
                "label": "density integral",
                "value": report.interior_integral,
            })];
            for t in &report.boundary_terms {
                rows.push(json!({
                    "term": if t.codim == 1 { "edge" } else { "corner" },
                    "label": t.label,
                    "value": t.value,
                }));
            }
            rows.push(json!({
                "term": "total",
                "label": "sum",
                "value": report.total,
            }));
            rows.push(json!({
                "term": "expected",
                "label": "inner Euler characteristic",
                "value": report.expected_chi,
            }));
            let out = Report {
                command: "polygon".into(),
                config_echo: json!({
                    "region": name,
                    "order": spec.order,
                    "tol": spec.abs_tol,
                    "seed": spec.seed,
                }),
                rows,
                verdict,
                versions: versions(),
                timestamp: stamp(wall_ms, started),
            };
            emit(&out, &output, &settings).map_err(usage)?;
            Ok(verdict_exit(verdict))
        }
        Command::Exhaust {
            model,
            eps,
            cutoffs,
            index,
            quad,
            output,
        } => {
            let name = settings
                .str_opt(model, "model")
                .ok_or_else(|| usage("--model is required".into()))?;
            let index = settings
                .parse_opt(index, "index")
                .map_err(usage)?
                .unwrap_or(12);
            let eps_raw = settings.str_opt(eps, "eps");
            let cutoff_raw = settings.str_opt(cutoffs, "cutoffs");
            let eps_list: Vec<f64> = match (eps_raw, cutoff_raw) {
                (Some(e), _) => parse_list(&e).map_err(usage)?,
                (None, Some(c)) => {
                    let ys = parse_list(&c).map_err(usage)?;
                    ys.iter().map(|y| 1.0 / y).collect()
                }
                (None, None) => vec![0.5, 0.2, 0.1, 0.05],
            };
            for w in eps_list.windows(2) {
                if w[1] >= w[0] {
                    return Err(usage("eps list must be strictly decreasing".into()));
                }
            }
            let spec = quad_spec(2, &quad, &settings).map_err(usage)?;
            let _ = spec; // models carry their own quadrature budgets
            let model = assembly::model_by_name(&name, index).map_err(|e| (1, e.to_string()))?;
            let report = assembly::exhaustion_report(model.as_ref(), &eps_list)
                .map_err(|e| (error_exit(&e), e.to_string()))?;
            let verdict = report.verdict;
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| serde_json::to_value(r).unwrap())
                .collect();
            let out = Report {
                command: "exhaust".into(),
                config_echo: json!({
                    "model": name,
                    "index": index,
                    "eps": eps_list,
                    "expected_chi": report.expected_chi,
                }),
                rows,
                verdict,
                versions: versions(),
                timestamp: stamp(wall_ms, started),
            };
            emit(&out, &output, &settings).map_err(usage)?;
            Ok(verdict_exit(verdict))
        }
        Command::Chi {
            family,
            g,
            n,
            output,
        } => {
            let family = settings
                .str_opt(family, "family")
                .ok_or_else(|| usage("--family is required".into()))?;
            let g = settings.parse_opt(g, "g").map_err(usage)?;
            let n = settings.parse_opt(n, "n").map_err(usage)?;
            let (label, value) = match family.as_str() {
                "punctured" => {
                    let g = g.ok_or_else(|| usage("--g is required for punctured".into()))?;
                    (
                        format!("chi(Mod(S_{{{g},1}}))"),
                        chi::chi_punctured(g).map_err(|e| (1, e.to_string()))?,
                    )
                }
                "closed" => {
                    let g = g.ok_or_else(|| usage("--g is required for closed".into()))?;
                    (
                        format!("chi(Mod(S_{{{g},0}}))"),
                        chi::chi_closed(g).map_err(|e| (1, e.to_string()))?,
                    )
                }
                "sp" => {
                    let n = n.ok_or_else(|| usage("--n is required for sp".into()))?;
                    (
                        format!("chi(Sp({}, Z))", 2 * n),
                        chi::chi_sp(n).map_err(|e| (1, e.to_string()))?,
                    )
                }
                "zeta" => {
                    let g = g.ok_or_else(|| usage("--g is required for zeta".into()))?;
                    (
                        format!("zeta(1-{})", 2 * g),
                        chi::zeta_neg(g).map_err(|e| (1, e.to_string()))?,
                    )
                }
                other => return Err(usage(format!("unknown family '{other}'"))),
            };
            let rows = vec![json!({
                "family": family,
                "label": label,
                "value": chi::rational_string(&value),
            })];
            let out = Report {
                command: "chi".into(),
                config_echo: json!({ "family": family, "g": g, "n": n }),
                rows,
                verdict: Verdict::Match,
                versions: versions(),
                timestamp: stamp(wall_ms, started),
            };
            emit(&out, &output, &settings).map_err(usage)?;
            Ok(0)
        }
        Command::ModelCheck {
            samples,
            quad,
            output,
        } => {
            let samples = settings
                .parse_opt(samples, "samples")
                .map_err(usage)?
                .unwrap_or(50);
            let seed = settings
                .parse_opt(quad.seed, "seed")
                .map_err(usage)?
                .unwrap_or(7);
            let (rows, all_pass) = model_check_rows(samples, seed).map_err(|e| {
                (error_exit(&e), e.to_string())
            })?;
            let verdict = if all_pass {
                Verdict::Match
            } else {
                Verdict::Mismatch
            };
            let out = Report {
                command: "model-check".into(),
                config_echo: json!({ "samples": samples, "seed": seed }),
                rows,
                verdict,
                versions: versions(),
                timestamp: stamp(wall_ms, started),
            };
            emit(&out, &output, &settings).map_err(usage)?;
            Ok(if all_pass { 0 } else { 4 })
        }
    }
}

fn versions() -> Value {
    json!({ "gblab": env!("CARGO_PKG_VERSION") })
}

fn stamp(wall_ms: u64, started: Instant) -> Value {
    json!({
        "unix_ms": wall_ms,
        "runtime_ms": started.elapsed().as_millis() as u64,
    })
}

fn model_check_rows(samples: usize, seed: u64) -> Result<(Vec<Value>, bool), Error> {
    use rand::SeedableRng;
    let mut rows = Vec::new();
    let mut all = true;
    let mut push = |label: &str, value: f64, expected: f64, tol: f64, all: &mut bool| {
        let pass = (value - expected).abs() <= tol;
        *all &= pass;
        rows.push(json!({
            "check": label,
            "value": value,
            "expected": expected,
            "tolerance": tol,
            "pass": pass,
        }));
    };

    for u0 in [0.0, 1.0, 5.0, 10.0] {
        let f = moduli::level_set_ii(u0)?;
        push(
            &format!("level-set form at u0 = {u0}"),
            f.numeric,
            3.0,
            1e-6,
            &mut all,
        );
    }
    {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let u: f64 = rng.random_range(0.0..8.0);
            let ratio = moduli::grad_length_norm(u)? / (-2.0 * u).exp();
            worst = worst.max((ratio - 2.0).abs());
        }
        push(
            "sup |grad-length ratio - 2| over 50 levels",
            worst,
            0.0,
            1e-9,
            &mut all,
        );
    }
    for m in [1usize, 2] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &eps in &[1e-1f64, 1e-2, 1e-3, 1e-4, 1e-5] {
            let v = moduli::thin_fibre_volume(eps, m)?;
            xs.push(eps.ln());
            ys.push(v.volume.ln());
        }
        let k = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        push(
            &format!("fibre-volume log-log slope, rank {m}"),
            slope,
            1.5 * m as f64,
            0.01,
            &mut all,
        );
    }
    {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut mismatches = 0usize;
        for _ in 0..samples {
            let t = moduli::random_triple(&mut rng);
            let descent = moduli::fricke_reduce(&t)?.triple.min_entry();
            let tree = moduli::min_trace_by_tree_search(&t, 12)?;
            if descent.to_bits() != tree.to_bits() {
                mismatches += 1;
            }
        }
        push(
            &format!("systole descent vs depth-12 tree search ({samples} triples), mismatches"),
            mismatches as f64,
            0.0,
            0.0,
            &mut all,
        );
    }
    Ok((rows, all))
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err((code, message)) => {
            eprintln!("{message}");
            std::process::exit(code);
        }
    }
}
