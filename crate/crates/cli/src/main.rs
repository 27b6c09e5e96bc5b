//! Command-line front end. Every run emits a self-describing report that
//! embeds the full parsed configuration, so a report alone is enough to
//! reproduce the run. Reports are byte-stable for identical configs except
//! for the timestamp field (drop it with --no-timestamp).
//!
//! Exit codes: 0 success, 1 domain error (structured error report on
//! stderr), 2 usage error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use ramseyforge_core::analysis::{
    count_monochromatic, find_switches, nonmonotone_solutions, residue_profile, CountOptions,
    SwitchWitness, SolutionTriple,
};
use ramseyforge_core::coloring::{
    divisibility_coloring, parity_coloring, periodic_coloring, power_of_two_coloring,
    three_interval_coloring, Coloring, ExplicitColoring,
};
use ramseyforge_core::modring::ResidueSet;
use ramseyforge_core::oracle::naive_count;
use ramseyforge_core::poly::{parse_polynomial, IntPolynomial};
use ramseyforge_core::search::{
    enumerate_bad_periodic, exhaustive_stability_oracle, min_solutions_landscape,
    verify_characterization, LandscapeMode,
};
use ramseyforge_core::sieve::{verify_nesting, SieveSet};

#[derive(Parser, Serialize)]
#[command(name = "ramseyforge", version, about = "Monochromatic solutions of x + y = p(z) under 2-colorings: counting, constructions, sieves, and exhaustive searches")]
struct Cli {
    #[command(flatten)]
    #[serde(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    #[serde(flatten)]
    command: Command,
}

#[derive(Args, Serialize)]
struct GlobalOpts {
    /// Worker threads (0 = all cores). RAMSEYFORGE_WORKERS overrides this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Report format. CSV exists only for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    /// Omit the timestamp so identical configs give byte-identical reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Validate inputs and echo the config without computing anything.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Count monochromatic solutions of x + y = p(z) in [1, n].
    Count {
        #[arg(long)]
        poly: String,
        /// parity | pow2 | mod:<m>:<r1,r2,...> | inline JSON | @file | file
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        n: u64,
        /// Also tally degenerate hits (x=y, z in {x,y}) separately.
        #[arg(long)]
        include_degenerate: bool,
        /// Stream solution triples here as JSON lines.
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        witnesses: Option<PathBuf>,
    },
    /// Build a coloring and print it in the schema `count` accepts.
    Construct {
        #[arg(long, value_enum)]
        kind: ConstructKind,
        /// Modulus for divisibility colorings.
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<u64>,
        /// Comma-separated residues colored -1 (divisibility colorings).
        #[arg(long, value_delimiter = ',')]
        #[serde(skip_serializing_if = "Vec::is_empty")]
        neg: Vec<u64>,
        /// Target polynomial (three-interval colorings).
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        poly: Option<String>,
        /// Domain size (three-interval and random colorings).
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<u64>,
        /// Generator seed (random colorings; recorded for reproducibility).
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Switch structure of a coloring: residue classes mod p(k+1)-p(k),
    /// monotonicity, and one re-verified witness per non-monotone class.
    Analyze {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        coloring: String,
        /// Scan switches in [k-lo, k-hi].
        #[arg(long, default_value_t = 1)]
        k_lo: u64,
        #[arg(long, default_value_t = 100)]
        k_hi: u64,
        /// Stream the witnesses here as JSON lines.
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        witnesses: Option<PathBuf>,
    },
    /// Build the sieve set Z(I, m) and query its root structure.
    Sieve {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        m: u64,
        /// Closed interval, written lo..hi.
        #[arg(long, value_parser = parse_interval)]
        interval: (u64, u64),
        /// Count members with p(z) = c (mod m); repeatable.
        #[arg(long = "count-roots")]
        #[serde(skip_serializing_if = "Vec::is_empty")]
        count_roots: Vec<u64>,
        /// Report the worst c and compare against the prime-power bound.
        #[arg(long)]
        max_root_count: bool,
        /// Check members stay members for this divisor of m.
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        verify_nesting: Option<u64>,
    },
    /// Exhaustive searches over colorings and balanced sets.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Certify one balanced periodic coloring solution-free (or refute it).
    Verify {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        m: u64,
        /// Comma-separated residues colored -1.
        #[arg(long, value_delimiter = ',', required = true)]
        neg: Vec<u64>,
        #[arg(long)]
        horizon: u64,
    },
    /// Run the embedded oracle suites and exit 0 only if all pass.
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConstructKind {
    Parity,
    Pow2,
    Divisibility,
    ThreeInterval,
    Random,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "search", rename_all = "kebab-case")]
enum SearchCommand {
    /// Enumerate balanced periodic colorings with period <= m-max that have
    /// no solutions up to the horizon, certifying each algebraically.
    BadPeriodic {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        m_max: u64,
        #[arg(long)]
        horizon: u64,
    },
    /// Sweep every balanced subset of Z_m through the decomposition oracle.
    Stability {
        #[arg(long)]
        m: u64,
    },
    /// Minimum solution count over colorings of [1, n], exhaustive by
    /// default, sampled when --samples and --seed are given.
    MinSolutions {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        samples: Option<u64>,
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn parse_interval(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

enum Failure {
    /// Bad invocation: message to stderr, exit 2.
    Usage(String),
    /// Valid invocation, impossible computation: error report, exit 1.
    Domain(ramseyforge_core::error::Error),
    Io(String),
}

impl From<ramseyforge_core::error::Error> for Failure {
    fn from(e: ramseyforge_core::error::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let workers = std::env::var("RAMSEYFORGE_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(cli.global.workers);
    if workers > 0 {
        // Ignore the error: the pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }

    let config = serde_json::to_value(&cli).expect("config serializes");
    let outcome = if cli.global.dry_run { validate(&cli.command) } else { execute(&cli.command) };

    match outcome {
        Ok(result) => match emit(&cli, &config, result) {
            Ok(()) => ExitCode::SUCCESS,
            Err(Failure::Io(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Err(Failure::Usage(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Err(Failure::Domain(_)) => unreachable!("emit raises no domain errors"),
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            let report = json!({
                "tool": "ramseyforge",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "error": { "kind": e.kind(), "message": e.to_string() },
            });
            eprintln!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(cli: &Cli, config: &Value, result: Value) -> Result<(), Failure> {
    let mut report = serde_json::Map::new();
    report.insert("tool".into(), json!("ramseyforge"));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    if !cli.global.no_timestamp {
        report.insert("timestamp".into(), json!(chrono::Utc::now().to_rfc3339()));
    }
    report.insert("config".into(), config.clone());
    report.insert("result".into(), result.clone());

    let text = match cli.global.format {
        Format::Json => serde_json::to_string_pretty(&Value::Object(report)).unwrap() + "\n",
        Format::Csv => render_csv(&cli.command, &result)?,
        Format::Text => render_text(&cli.command, &result),
    };

    match &cli.global.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn field_or_dash(result: &Value, key: &str) -> String {
    result
        .get(key)
        .map(|v| v.to_string())
        .unwrap_or_else(|| "-".into())
}

fn render_csv(command: &Command, result: &Value) -> Result<String, Failure> {
    let table: Option<(Vec<&str>, Vec<Vec<Value>>)> = match command {
        Command::Sieve { .. } => result.get("root_counts").and_then(Value::as_array).map(|rows| {
            (
                vec!["c", "count"],
                rows.iter()
                    .map(|r| vec![r["c"].clone(), r["count"].clone()])
                    .collect(),
            )
        }),
        Command::Search(SearchCommand::MinSolutions { .. }) => {
            result["landscape"]["histogram"].as_array().map(|rows| {
                (
                    vec!["count", "colorings"],
                    rows.iter()
                        .map(|r| vec![r["count"].clone(), r["colorings"].clone()])
                        .collect(),
                )
            })
        }
        Command::Search(SearchCommand::Stability { .. }) => {
            result["report"]["certificates"].as_array().map(|rows| {
                (
                    vec!["m_prime", "alpha", "count"],
                    rows.iter()
                        .map(|r| vec![r["m_prime"].clone(), r["alpha"].clone(), r["count"].clone()])
                        .collect(),
                )
            })
        }
        _ => None,
    };
    let (header, rows) = table.ok_or_else(|| {
        Failure::Usage(
            "csv output only exists for tabular results: sieve --count-roots, \
             search min-solutions (histogram), search stability (certificates)"
                .into(),
        )
    })?;
    let mut out = header.join(",") + "\n";
    for row in rows {
        let cells: Vec<String> = row.iter().map(Value::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn render_text(command: &Command, result: &Value) -> String {
    if result.get("validated").is_some() {
        return "dry run: inputs validated\n".to_string();
    }
    match command {
        Command::Count { .. } => format!(
            "count={} n={} degenerate={}\n",
            result["report"]["count"],
            result["report"]["n"],
            field_or_dash(&result["report"], "degenerate"),
        ),
        Command::Construct { .. } => {
            serde_json::to_string(&result["coloring"]).unwrap() + "\n"
        }
        Command::Analyze { .. } => {
            let mut out = String::new();
            for p in result["profiles"].as_array().into_iter().flatten() {
                out.push_str(&format!(
                    "switch k={} p(k)={} m(k)={} nonmonotone={} witnesses={}\n",
                    p["k"], p["p_k"], p["m_k"], p["nonmonotone"], p["witnesses"]
                ));
            }
            out + &format!("switches={}\n", result["switches"])
        }
        Command::Sieve { .. } => {
            let mut out = format!(
                "|Z|={} |I|={} ratio={}\n",
                result["sieve"]["size"], result["sieve"]["interval_len"], result["sieve"]["ratio"]
            );
            for r in result.get("root_counts").and_then(Value::as_array).into_iter().flatten() {
                out.push_str(&format!("c={} count={}\n", r["c"], r["count"]));
            }
            if let Some(m) = result.get("max_root") {
                out.push_str(&format!(
                    "max_root c*={} count={} bound={}\n",
                    m["c_star"], m["count"], m["bound"]
                ));
            }
            if let Some(nest) = result.get("nesting") {
                out.push_str(&format!(
                    "nesting m_star={} holds={}\n",
                    nest["m_star"], nest["holds"]
                ));
            }
            out
        }
        Command::Search(SearchCommand::BadPeriodic { .. }) => {
            let search = &result["search"];
            let mut out = format!(
                "colorings_examined={} certified={} uncertified_zero={}\n",
                search["colorings_examined"],
                search["records"].as_array().map_or(0, Vec::len),
                search["uncertified"].as_array().map_or(0, Vec::len),
            );
            for r in search["records"].as_array().into_iter().flatten() {
                out.push_str(&format!(
                    "m={} neg={} m_prime={} alpha={}\n",
                    r["m"],
                    r["neg_classes"]["members"],
                    r["congruence"]["modulus"],
                    r["congruence"]["residue"]
                ));
            }
            out
        }
        Command::Search(SearchCommand::Stability { .. }) => format!(
            "balanced={} full_sumset={} decomposed={}\n",
            result["report"]["balanced_sets"],
            result["report"]["full_sumset"],
            result["report"]["decomposed"]
        ),
        Command::Search(SearchCommand::MinSolutions { .. }) => format!(
            "min_count={} colorings_examined={} mode={}\n",
            result["landscape"]["min_count"],
            result["landscape"]["colorings_examined"],
            result["landscape"]["mode"]
        ),
        Command::Verify { .. } => format!(
            "certified-bad={} m_prime={} alpha={} empirical_zero={} agrees={}\n",
            result["certified_bad"],
            field_or_dash(result, "m_prime"),
            field_or_dash(result, "alpha"),
            result["report"]["empirical_zero"],
            result["report"]["agrees"]
        ),
        Command::Selftest => {
            let mut out = String::new();
            for s in result["suites"].as_array().into_iter().flatten() {
                out.push_str(&format!(
                    "{} ... {} ({} cases)\n",
                    s["name"].as_str().unwrap_or("?"),
                    if s["ok"].as_bool() == Some(true) { "ok" } else { "FAILED" },
                    s["cases"]
                ));
            }
            out + &format!("all_ok={}\n", result["all_ok"])
        }
    }
}

/// parity | pow2 | mod:<m>:<r1,...> | inline JSON | @file | file. Files may
/// hold either a bare coloring object or a full report with result.coloring,
/// so `construct --output f.json` pipes straight back into `count`.
fn parse_coloring_spec(spec: &str) -> Result<Coloring, Failure> {
    let trimmed = spec.trim();
    match trimmed {
        "parity" => return Ok(parity_coloring()),
        "pow2" => return Ok(power_of_two_coloring()),
        _ => {}
    }
    if let Some(rest) = trimmed.strip_prefix("mod:") {
        let (m, residues) = rest
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("expected mod:<m>:<r1,r2,...>, got {spec:?}")))?;
        let m: u64 = m
            .parse()
            .map_err(|e| Failure::Usage(format!("bad modulus in coloring spec: {e}")))?;
        let mut members = Vec::new();
        for r in residues.split(',').filter(|r| !r.is_empty()) {
            members.push(
                r.parse::<u64>()
                    .map_err(|e| Failure::Usage(format!("bad residue in coloring spec: {e}")))?,
            );
        }
        let neg = ResidueSet::from_members(m, members)?;
        return Ok(periodic_coloring(neg));
    }
    let body = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        let path = trimmed.strip_prefix('@').unwrap_or(trimmed);
        fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read coloring file {path:?}: {e}")))?
    };
    let value: Value = serde_json::from_str(&body)
        .map_err(|e| Failure::Usage(format!("coloring spec is not valid JSON: {e}")))?;
    let coloring_value = if value.get("kind").is_some() {
        value
    } else if let Some(inner) = value.pointer("/result/coloring") {
        inner.clone()
    } else {
        return Err(Failure::Usage(
            "coloring JSON needs a \"kind\" field (or a report with result.coloring)".into(),
        ));
    };
    serde_json::from_value(coloring_value)
        .map_err(|e| Failure::Usage(format!("bad coloring JSON: {e}")))
}

fn parse_poly(text: &str) -> Result<IntPolynomial, Failure> {
    Ok(parse_polynomial(text)?)
}

fn witness_line(x: u64, y: u64, z: u64, color: i8) -> String {
    format!("{{\"x\":{x},\"y\":{y},\"z\":{z},\"color\":{color}}}")
}

fn write_witness_jsonl(path: &PathBuf, triples: &[SolutionTriple]) -> Result<(), Failure> {
    let mut f = fs::File::create(path)?;
    for t in triples {
        writeln!(f, "{}", witness_line(t.x, t.y, t.z, t.color.value()))?;
    }
    Ok(())
}

/// --dry-run: parse and validate every input without computing.
fn validate(command: &Command) -> Result<Value, Failure> {
    match command {
        Command::Count { poly, coloring, n, witnesses, .. } => {
            let p = parse_poly(poly)?;
            p.require_admissible()?;
            let phi = parse_coloring_spec(coloring)?;
            phi.require_domain(*n)?;
            if let Some(path) = witnesses {
                if let Some(dir) = path.parent() {
                    if !dir.as_os_str().is_empty() && !dir.exists() {
                        return Err(Failure::Usage(format!("witness directory {dir:?} does not exist")));
                    }
                }
            }
        }
        Command::Construct { kind, m, neg, poly, n, seed } => {
            construct_inputs(*kind, *m, neg, poly.as_deref(), *n, *seed)?;
        }
        Command::Analyze { poly, coloring, k_lo, k_hi, .. } => {
            let p = parse_poly(poly)?;
            p.require_admissible()?;
            let phi = parse_coloring_spec(coloring)?;
            if *k_lo < 1 || k_hi <= k_lo {
                return Err(Failure::Usage(format!("need 1 <= k-lo < k-hi, got [{k_lo}, {k_hi}]")));
            }
            phi.require_domain(*k_hi)?;
        }
        Command::Sieve { poly, m, interval, .. } => {
            let p = parse_poly(poly)?;
            let (lo, hi) = *interval;
            if *m < 2 || lo > hi {
                return Err(Failure::Usage(format!("need m >= 2 and lo <= hi, got m={m}, {lo}..{hi}")));
            }
            let _ = p;
        }
        Command::Search(SearchCommand::BadPeriodic { poly, m_max, horizon }) => {
            let p = parse_poly(poly)?;
            p.require_admissible()?;
            if *m_max < 2 || *horizon == 0 {
                return Err(Failure::Usage("need m-max >= 2 and horizon >= 1".into()));
            }
        }
        Command::Search(SearchCommand::Stability { m }) => {
            if *m < 2 || *m % 2 != 0 {
                return Err(Failure::Usage(format!("need an even modulus >= 2, got {m}")));
            }
        }
        Command::Search(SearchCommand::MinSolutions { poly, n, samples, seed }) => {
            let p = parse_poly(poly)?;
            p.require_admissible()?;
            if *n == 0 {
                return Err(Failure::Usage("need --n >= 1".into()));
            }
            landscape_mode(*samples, *seed)?;
        }
        Command::Verify { poly, m, neg, horizon } => {
            let p = parse_poly(poly)?;
            p.require_admissible()?;
            let set = ResidueSet::from_members(*m, neg.iter().copied())?;
            if set.len() * 2 != *m {
                return Err(Failure::Usage(format!(
                    "verify needs a balanced coloring: {} of {m} residues colored -1",
                    set.len()
                )));
            }
            if *horizon == 0 {
                return Err(Failure::Usage("need horizon >= 1".into()));
            }
        }
        Command::Selftest => {}
    }
    Ok(json!({ "validated": true }))
}

fn landscape_mode(samples: Option<u64>, seed: Option<u64>) -> Result<LandscapeMode, Failure> {
    match (samples, seed) {
        (None, None) => Ok(LandscapeMode::Exhaustive),
        (Some(s), Some(seed)) if s > 0 => Ok(LandscapeMode::Random { samples: s, seed }),
        (Some(_), Some(_)) => Err(Failure::Usage("need --samples >= 1".into())),
        _ => Err(Failure::Usage(
            "random mode needs both --samples and --seed (seeds are recorded for reproducibility)"
                .into(),
        )),
    }
}

fn construct_inputs(
    kind: ConstructKind,
    m: Option<u64>,
    neg: &[u64],
    poly: Option<&str>,
    n: Option<u64>,
    seed: Option<u64>,
) -> Result<ConstructPlan, Failure> {
    let need = |cond: bool, msg: &str| {
        if cond {
            Ok(())
        } else {
            Err(Failure::Usage(msg.into()))
        }
    };
    match kind {
        ConstructKind::Parity => Ok(ConstructPlan::Parity),
        ConstructKind::Pow2 => Ok(ConstructPlan::Pow2),
        ConstructKind::Divisibility => {
            let m = m.ok_or_else(|| Failure::Usage("divisibility needs --m".into()))?;
            need(!neg.is_empty(), "divisibility needs --neg r1,r2,...")?;
            let set = ResidueSet::from_members(m, neg.iter().copied())?;
            Ok(ConstructPlan::Divisibility(set))
        }
        ConstructKind::ThreeInterval => {
            let poly = poly.ok_or_else(|| Failure::Usage("three-interval needs --poly".into()))?;
            let n = n.ok_or_else(|| Failure::Usage("three-interval needs --n".into()))?;
            let p = parse_poly(poly)?;
            p.require_admissible()?;
            Ok(ConstructPlan::ThreeInterval(p, n))
        }
        ConstructKind::Random => {
            let n = n.ok_or_else(|| Failure::Usage("random needs --n".into()))?;
            let seed =
                seed.ok_or_else(|| Failure::Usage("random needs --seed (recorded in the report)".into()))?;
            need(n >= 1, "random needs --n >= 1")?;
            Ok(ConstructPlan::Random(n, seed))
        }
    }
}

enum ConstructPlan {
    Parity,
    Pow2,
    Divisibility(ResidueSet),
    ThreeInterval(IntPolynomial, u64),
    Random(u64, u64),
}

fn execute(command: &Command) -> Result<Value, Failure> {
    match command {
        Command::Count { poly, coloring, n, include_degenerate, witnesses } => {
            let p = parse_poly(poly)?;
            let phi = parse_coloring_spec(coloring)?;
            let opts = CountOptions {
                include_degenerate: *include_degenerate,
                collect_witnesses: witnesses.is_some(),
                ..CountOptions::default()
            };
            let report = count_monochromatic(&p, &phi, *n, opts)?;
            if let Some(path) = witnesses {
                write_witness_jsonl(path, report.witnesses.as_deref().unwrap_or(&[]))?;
            }
            let mut result = json!({ "poly": p.to_string(), "report": report });
            // The JSONL stream is the witness channel; keep the report lean.
            result["report"].as_object_mut().unwrap().remove("witnesses");
            Ok(result)
        }
        Command::Construct { kind, m, neg, poly, n, seed } => {
            let plan = construct_inputs(*kind, *m, neg, poly.as_deref(), *n, *seed)?;
            let (coloring, extra) = match plan {
                ConstructPlan::Parity => (parity_coloring(), Value::Null),
                ConstructPlan::Pow2 => (power_of_two_coloring(), Value::Null),
                ConstructPlan::Divisibility(set) => {
                    (divisibility_coloring(set.modulus(), set)?, Value::Null)
                }
                ConstructPlan::ThreeInterval(p, n) => {
                    let (phi, rep) = three_interval_coloring(&p, n)?;
                    (phi, json!({ "n1": rep.n1, "n2": rep.n2 }))
                }
                ConstructPlan::Random(n, seed) => {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let phi = ExplicitColoring::new(n, |_| rng.random::<bool>())?;
                    (Coloring::Explicit(phi), json!({ "seed": seed }))
                }
            };
            let mut result = json!({ "coloring": coloring });
            if !extra.is_null() {
                result["detail"] = extra;
            }
            Ok(result)
        }
        Command::Analyze { poly, coloring, k_lo, k_hi, witnesses } => {
            let p = parse_poly(poly)?;
            let phi = parse_coloring_spec(coloring)?;
            let switches = find_switches(&phi, *k_lo, *k_hi)?;
            let mut profiles = Vec::new();
            let mut stream = Vec::new();
            for &k in &switches {
                let prof = residue_profile(&p, &phi, k)?;
                let found = nonmonotone_solutions(&p, &phi, k)?;
                for w in &found {
                    let (x, y, z, color) = match &w.witness {
                        SwitchWitness::Strict { triple } => {
                            (triple.x, triple.y, triple.z, triple.color)
                        }
                        SwitchWitness::Degenerate { x, y, z, color } => (*x, *y, *z, *color),
                    };
                    stream.push(witness_line(x, y, z, color.value()));
                }
                profiles.push(json!({
                    "k": k,
                    "p_k": prof.p_k,
                    "m_k": prof.m_k,
                    "classes": prof.classes.len(),
                    "nonmonotone": prof.nonmonotone_classes,
                    "witnesses": found.len(),
                }));
            }
            if let Some(path) = witnesses {
                let mut f = fs::File::create(path)?;
                for line in &stream {
                    writeln!(f, "{line}")?;
                }
            }
            Ok(json!({ "poly": p.to_string(), "switches": switches, "profiles": profiles }))
        }
        Command::Sieve { poly, m, interval, count_roots, max_root_count, verify_nesting: nest } => {
            let p = parse_poly(poly)?;
            let (lo, hi) = *interval;
            let sieve = SieveSet::build(&p, *m, lo, hi)?;
            let mut result = json!({ "sieve": sieve.report() });
            if !count_roots.is_empty() {
                let rows: Vec<Value> = count_roots
                    .iter()
                    .map(|&c| Ok(json!({ "c": c, "count": sieve.count_roots(c)? })))
                    .collect::<Result<_, ramseyforge_core::error::Error>>()?;
                result["root_counts"] = Value::Array(rows);
            }
            if *max_root_count {
                result["max_root"] = serde_json::to_value(sieve.max_root_count()?).unwrap();
            }
            if let Some(m_star) = nest {
                let holds = verify_nesting(&p, *m, *m_star, lo, hi)?;
                result["nesting"] = json!({ "m_star": m_star, "holds": holds });
            }
            Ok(result)
        }
        Command::Search(SearchCommand::BadPeriodic { poly, m_max, horizon }) => {
            let p = parse_poly(poly)?;
            let search = enumerate_bad_periodic(&p, *m_max, *horizon)?;
            Ok(json!({ "poly": p.to_string(), "search": search }))
        }
        Command::Search(SearchCommand::Stability { m }) => {
            let report = exhaustive_stability_oracle(*m)?;
            Ok(json!({ "report": report }))
        }
        Command::Search(SearchCommand::MinSolutions { poly, n, samples, seed }) => {
            let p = parse_poly(poly)?;
            let mode = landscape_mode(*samples, *seed)?;
            let landscape = min_solutions_landscape(&p, *n, mode)?;
            Ok(json!({ "poly": p.to_string(), "landscape": landscape }))
        }
        Command::Verify { poly, m, neg, horizon } => {
            let p = parse_poly(poly)?;
            let set = ResidueSet::from_members(*m, neg.iter().copied())?;
            let report = verify_characterization(&p, *m, set, *horizon)?;
            let congruence = report.congruence;
            let mut result = json!({
                "poly": p.to_string(),
                "certified_bad": report.certified,
                "report": report,
            });
            if let Some(c) = congruence {
                result["m_prime"] = json!(c.modulus);
                result["alpha"] = json!(c.residue);
            }
            Ok(result)
        }
        Command::Selftest => selftest(),
    }
}

/// Small embedded oracle suites: enough to catch a miscompiled or broken
/// install in a few seconds, not a replacement for the full test suite.
fn selftest() -> Result<Value, Failure> {
    use rand::{Rng, SeedableRng};
    let mut suites = Vec::new();
    let mut all_ok = true;
    let mut push = |name: &str, cases: u64, ok: bool| {
        all_ok &= ok;
        suites.push(json!({ "name": name, "cases": cases, "ok": ok }));
    };

    {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5E1F_0001);
        let mut ok = true;
        for round in 0..25 {
            let d = rng.random_range(1..=3usize);
            let mut coeffs: Vec<i128> = (0..=d).map(|_| rng.random_range(-5..=5)).collect();
            coeffs[d] = rng.random_range(1..=5);
            let p = IntPolynomial::new(coeffs);
            let n = rng.random_range(4..=400u64);
            let phi = if round % 2 == 0 {
                parity_coloring()
            } else {
                Coloring::Explicit(ExplicitColoring::new(n, |_| rng.random::<bool>())?)
            };
            let opts = CountOptions { include_degenerate: true, ..CountOptions::default() };
            let fast = count_monochromatic(&p, &phi, n, opts)?;
            let slow = naive_count(&p, &phi, n)?;
            let fd = fast.degenerate.as_ref().unwrap();
            ok &= fast.count == slow.count
                && fd.equal_pair == slow.equal_pair
                && fd.repeated_z == slow.repeated_z
                && fd.trivial == slow.trivial;
        }
        push("counting kernel vs double-loop oracle", 25, ok);
    }

    {
        let mut ok = true;
        let mut cases = 0;
        for m in [2u64, 4, 6, 8, 10] {
            let rep = exhaustive_stability_oracle(m)?;
            cases += rep.balanced_sets;
            ok &= rep.full_sumset + rep.decomposed == rep.balanced_sets;
        }
        push("stability decomposition sweep (even m <= 10)", cases, ok);
    }

    {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5E1F_0002);
        let mut ok = true;
        for _ in 0..500 {
            let len = rng.random_range(1..=7usize);
            let coeffs: Vec<i128> = (0..len).map(|_| rng.random_range(-50..=50)).collect();
            let p = IntPolynomial::new(coeffs);
            let n = p.degree() as u32;
            let base = rng.random_range(-20..=20i128);
            let ell = rng.random_range(1..=10i128);
            let mut rhs = p.coeff(n as usize);
            for i in 1..=n as i128 {
                rhs *= ell * i;
            }
            ok &= p.finite_difference(n, base, ell)? == rhs;
        }
        push("finite difference identity", 500, ok);
    }

    {
        let p = parse_polynomial("z^2").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5E1F_0003);
        let mut ok = true;
        let mut cases = 0;
        for _ in 0..5 {
            let phi = Coloring::Explicit(ExplicitColoring::new(4000, |_| rng.random::<bool>())?);
            for &k in find_switches(&phi, 1, 40)?.iter() {
                let prof = residue_profile(&p, &phi, k)?;
                let found = nonmonotone_solutions(&p, &phi, k)?;
                cases += 1;
                ok &= found.len() == prof.nonmonotone_classes.len();
            }
        }
        push("switch witnesses cover non-monotone classes", cases, ok);
    }

    {
        let p = parse_polynomial("2z^2+1").unwrap();
        let zero_a =
            count_monochromatic(&p, &parity_coloring(), 10_000, CountOptions::default())?.count;
        let cubic = parse_polynomial("z^3+3z^2+2z+3").unwrap();
        let neg = ResidueSet::from_members(6, [2, 3, 5])?;
        let phi = divisibility_coloring(6, neg)?;
        let zero_b = count_monochromatic(&cubic, &phi, 10_000, CountOptions::default())?.count;
        push("reference solution-free colorings", 2, zero_a == 0 && zero_b == 0);
    }

    {
        let p = parse_polynomial("z^2").unwrap();
        let mut ok = true;
        for m_star in [9u64, 21, 49] {
            ok &= verify_nesting(&p, 441, m_star, 1, 441)?;
        }
        push("sieve nesting on divisor chains of 441", 3, ok);
    }

    let result = json!({ "suites": suites, "all_ok": all_ok });
    if all_ok {
        Ok(result)
    } else {
        Err(Failure::Domain(ramseyforge_core::error::Error::InternalInvariantBroken(
            format!("selftest failures: {result}"),
        )))
    }
}
