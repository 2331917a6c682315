//! `compop`: classify composition operators from the command line.
//!
//! Exit codes: 0 when the run completed (whatever the verdicts), 1 on a usage
//! error, 2 when the input data is malformed or inconsistent, 3 on an internal
//! consistency violation.

mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use compop::classify::classify_all;
use compop::document::{load_space, to_document, validate};
use compop::domains::{self, DomainQuery};
use compop::exact::{format_rational, parse_rational};
use compop::l2ops::{self, Vector};
use compop::moments::{stieltjes_truncated, StieltjesVerdict};
use compop::registry::{self, Params, Predicate, RandomSpaceSpec};
use compop::{h, AtomId, Error, MeasureSpace, Rational, Transformation};

use output::{witness_cell, Format, Output};

#[derive(Parser)]
#[command(name = "compop", version, about = "Exact classification of composition operators on atomic L² spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Window level for generated spaces.
    #[arg(long, global = true, default_value_t = 16)]
    window: u32,
    /// Seed for random vectors and spaces.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Highest power or moment order examined.
    #[arg(long, global = true, default_value_t = 4)]
    order: u32,
    /// Space-file to load.
    #[arg(long, global = true, conflicts_with = "example")]
    space: Option<PathBuf>,
    /// Shipped example to load instead of a space-file.
    #[arg(long, global = true)]
    example: Option<String>,
    /// Example parameter `key=value` (repeatable).
    #[arg(long = "param", global = true, value_parser = parse_param)]
    params: Vec<(String, String)>,
    /// Map to study; `a∘b` composes named maps.
    #[arg(long, global = true)]
    map: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every classifier and print the report.
    Classify,
    /// Tabulate h_{φⁿ} over the window.
    H {
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Apply an operator to a vector.
    Apply {
        #[arg(long, value_enum)]
        op: Op,
        /// Vector as a JSON object `{"atom": "p/q"}`.
        #[arg(long, conflicts_with = "vector_file")]
        vector: Option<String>,
        #[arg(long)]
        vector_file: Option<PathBuf>,
    },
    /// Domain, density and closedness checks.
    Domains {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Comma-separated maps for products, applied first to last.
        #[arg(long, value_delimiter = ',')]
        maps: Vec<String>,
        /// Left domain for `inclusion`: `power:MAP:N`, `iterate:MAP:N` or `product:M1,M2`.
        #[arg(long)]
        lhs: Option<String>,
        /// Right domain for `inclusion`.
        #[arg(long)]
        rhs: Option<String>,
    },
    /// Truncated Stieltjes test of a moment sequence.
    Moments {
        /// Comma-separated rationals.
        #[arg(long, conflicts_with = "from_h")]
        seq: Option<String>,
        /// Use (h_{φᵏ}(atom))_{k ≤ order}.
        #[arg(long)]
        from_h: Option<String>,
    },
    /// Describe a shipped example and verify its expected facts.
    Example {
        name: Option<String>,
        /// Write the example's space-file here.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Search seeded random spaces for ones satisfying a predicate.
    Search {
        /// e.g. `stieltjes & !quasinormal`.
        #[arg(long)]
        predicate: String,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
        #[arg(long, default_value_t = 5)]
        max_atoms: usize,
        #[arg(long)]
        null_atoms: bool,
        /// Directory receiving one space-file per hit.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schema check, annotation cross-check and nonsingularity report.
    Validate {
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Cphi,
    Adjoint,
    Modulus,
    #[value(name = "U")]
    U,
    #[value(name = "Ustar")]
    Ustar,
    Expect,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Dense,
    DensePower,
    ProductDense,
    PowerEq,
    ProductClosed,
    Inclusion,
    Cinfty,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

struct Loaded {
    space: MeasureSpace,
    maps: BTreeMap<String, Transformation>,
    default_map: String,
}

impl Loaded {
    fn resolve(&self, name: &str) -> compop::Result<Transformation> {
        if let Some(t) = self.maps.get(name) {
            return Ok(t.clone());
        }
        if name.contains('∘') {
            let parts = name.split('∘').map(|p| self.resolve(p.trim())).collect::<compop::Result<Vec<_>>>()?;
            return Ok(Transformation::compose(&parts));
        }
        let known: Vec<&str> = self.maps.keys().map(String::as_str).collect();
        Err(usage(format!("no map named {name:?}; available: {}", known.join(", "))))
    }
}

fn load(g: &Global) -> compop::Result<Loaded> {
    let params: Params = g.params.iter().cloned().collect();
    match (&g.space, &g.example) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let loaded = load_space(&text)?;
            let default_map = ["phi", "phi1"]
                .iter()
                .find(|m| loaded.maps.contains_key(**m))
                .map(|m| m.to_string())
                .or_else(|| loaded.maps.keys().find(|k| *k != "id").cloned())
                .unwrap_or_else(|| "id".to_string());
            Ok(Loaded { space: loaded.space, maps: loaded.maps, default_map })
        }
        (None, Some(name)) => {
            let e = registry::example(name, &params)?;
            let mut maps = e.maps.clone();
            maps.entry("id".to_string()).or_insert(Transformation::Identity);
            Ok(Loaded { space: e.space, maps, default_map: e.default_map })
        }
        (None, None) => Err(usage("one of --space or --example is required")),
    }
}

fn phi(g: &Global, l: &Loaded) -> compop::Result<Transformation> {
    l.resolve(g.map.as_deref().unwrap_or(&l.default_map))
}

fn read_vector(inline: &Option<String>, file: &Option<PathBuf>) -> compop::Result<Vector> {
    let text = match (inline, file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => {
            std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?
        }
        (None, None) => return Err(usage("one of --vector or --vector-file is required")),
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("vector: {e}")))?;
    Vector::from_json(&value)
}

fn parse_query(spec: &str, l: &Loaded) -> compop::Result<DomainQuery> {
    let bad = || usage(format!("domain {spec:?} is not power:MAP:N, iterate:MAP:N or product:M1,M2"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "power" | "iterate" => {
            let (map, n) = rest.rsplit_once(':').ok_or_else(bad)?;
            let n: u32 = n.parse().map_err(|_| bad())?;
            let t = l.resolve(map)?;
            Ok(if kind == "power" { DomainQuery::Power(t, n) } else { DomainQuery::Iterate(t, n) })
        }
        "product" => {
            let maps = rest.split(',').map(|m| l.resolve(m.trim())).collect::<compop::Result<Vec<_>>>()?;
            Ok(DomainQuery::Product(maps))
        }
        _ => Err(bad()),
    }
}

/// Errors that describe the mathematics of the request rather than a broken run.
fn is_mathematical(e: &Error) -> bool {
    matches!(
        e,
        Error::NotInDomain(_)
            | Error::NotInAdjointDomain(_)
            | Error::IncompletePreimage { .. }
            | Error::IncompleteClass(..)
            | Error::NotCertified(..)
            | Error::NotDenselyDefined(..)
            | Error::Inconclusive { .. }
    )
}

fn undefined(e: &Error) -> Output {
    Output::flat(json!({ "status": "undefined", "reason": e.to_string() }))
}

fn verdict_output(v: Value) -> Output {
    Output::flat(v)
}

fn run_command(cli: &Cli) -> compop::Result<(Output, u32)> {
    let g = &cli.global;
    let level = g.window;
    match &cli.command {
        Command::Classify => {
            let l = load(g)?;
            let t = phi(g, &l)?;
            let w = l.space.window(level);
            let report = classify_all(&l.space, &t, &w, g.order)?;
            let json = report.to_json();
            let mut rows: Vec<Vec<String>> = report
                .properties()
                .into_iter()
                .map(|(name, v)| {
                    let vj = v.to_json(w.level);
                    vec![name.to_string(), v.status().into(), v.certified().to_string(), witness_cell(&vj)]
                })
                .collect();
            for (n, v) in &report.dense_power {
                let vj = v.to_json(w.level);
                rows.push(vec![format!("dense_power({n})"), v.status().into(), v.certified().to_string(), witness_cell(&vj)]);
            }
            for (n, v) in &report.multiplicative_h {
                let vj = v.to_json(w.level);
                rows.push(vec![format!("multiplicative_h({n})"), v.status().into(), v.certified().to_string(), witness_cell(&vj)]);
            }
            Ok((Output::tabular(json, &["property", "status", "certified", "witness"], rows), w.level))
        }
        Command::H { n } => {
            let l = load(g)?;
            let t = phi(g, &l)?;
            let w = l.space.window(level);
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for atom in w.positive_atoms(&l.space)? {
                let v = h(&l.space, &t, *n, &atom, &w)?;
                rows.push(vec![atom.to_string(), v.value.to_string(), v.certainty.name().to_string()]);
                items.push(json!({ "atom": atom.to_string(), "value": v.value.to_string(), "certainty": v.certainty.name() }));
            }
            let json = json!({ "map": t.label(), "n": n, "rows": items });
            Ok((Output::tabular(json, &["atom", "value", "certainty"], rows), w.level))
        }
        Command::Apply { op, vector, vector_file } => {
            let l = load(g)?;
            let t = phi(g, &l)?;
            let w = l.space.window(level);
            let f = read_vector(vector, vector_file)?;
            let result = match op {
                Op::Cphi => l2ops::apply_cphi(&l.space, &t, &f, &w).map(|v| v.to_json()),
                Op::Adjoint => l2ops::apply_adjoint(&l.space, &t, &f, &w).map(|v| v.to_json()),
                Op::Expect => l2ops::conditional_expectation(&l.space, &t, &f, &w).map(|v| v.to_json()),
                Op::Modulus => l2ops::apply_modulus(&l.space, &t, &f, &w).map(|v| v.to_json()),
                Op::U => l2ops::apply_u(&l.space, &t, &f, &w).map(|v| v.to_json()),
                Op::Ustar => l2ops::apply_u_star(&l.space, &t, &f, &w).map(|v| v.to_json()),
            };
            match result {
                Ok(v) => Ok((Output::flat(json!({ "status": "ok", "vector": v })), w.level)),
                Err(e) if is_mathematical(&e) => Ok((undefined(&e), w.level)),
                Err(e) => Err(e),
            }
        }
        Command::Domains { check, n, maps, lhs, rhs } => {
            let l = load(g)?;
            let w = l.space.window(level);
            let product = || -> compop::Result<Vec<Transformation>> {
                if maps.is_empty() {
                    Ok(vec![phi(g, &l)?; *n as usize])
                } else {
                    maps.iter().map(|m| l.resolve(m)).collect()
                }
            };
            let json = match check {
                Check::Dense => domains::densely_defined(&l.space, &phi(g, &l)?, &w)?.to_json(w.level),
                Check::DensePower => domains::densely_defined_power(&l.space, &phi(g, &l)?, *n, &w)?.to_json(w.level),
                Check::ProductDense => domains::densely_defined_product(&l.space, &product()?, &w)?.to_json(w.level),
                Check::PowerEq => domains::power_equals_iterate(&l.space, &phi(g, &l)?, *n, &w)?.to_json(w.level),
                Check::ProductClosed => domains::product_closed(&l.space, &product()?, &w)?.to_json(w.level),
                Check::Cinfty => domains::cinfty_dense(&l.space, &phi(g, &l)?, &w, *n)?.to_json(w.level),
                Check::Inclusion => {
                    let (Some(a), Some(b)) = (lhs, rhs) else {
                        return Err(usage("inclusion needs --lhs and --rhs"));
                    };
                    let (q1, q2) = (parse_query(a, &l)?, parse_query(b, &l)?);
                    domains::domain_inclusion(&l.space, &q1, &q2, &w)?.to_json(w.level)
                }
            };
            Ok((verdict_output(json), w.level))
        }
        Command::Moments { seq, from_h } => {
            let (gamma, level) = match (seq, from_h) {
                (Some(s), _) => {
                    let gamma = s
                        .split(',')
                        .map(|x| parse_rational(x.trim()).map_err(|e| usage(format!("--seq: {e}"))))
                        .collect::<compop::Result<Vec<Rational>>>()?;
                    (gamma, level)
                }
                (None, Some(atom)) => {
                    let l = load(g)?;
                    let t = phi(g, &l)?;
                    let w = l.space.window(level);
                    let atom: AtomId = atom.parse().map_err(|e| usage(format!("--from-h: {e}")))?;
                    if !w.contains(&atom) {
                        return Err(usage(format!("atom {atom} is outside the window")));
                    }
                    let mut gamma = Vec::new();
                    for k in 0..=g.order {
                        let v = h(&l.space, &t, k, &atom, &w).map_err(|e| match e {
                            Error::NullAtom(a) => usage(format!("h is undefined at the null atom {a}")),
                            other => other,
                        })?;
                        match v.exact_value() {
                            Some(x) => gamma.push(x.clone()),
                            None => {
                                let reason = format!("h_(φ^{k})({atom}) = {v} is not an exact finite value");
                                let json = json!({ "status": "undefined", "reason": reason });
                                return Ok((Output::flat(json), w.level));
                            }
                        }
                    }
                    (gamma, w.level)
                }
                (None, None) => return Err(usage("one of --seq or --from-h is required")),
            };
            let verdict = stieltjes_truncated(&gamma);
            let mut json = verdict.to_json();
            json["sequence"] = json!(gamma.iter().map(format_rational).collect::<Vec<_>>());
            let mut rows = vec![vec!["status".to_string(), json["status"].as_str().unwrap_or("").to_string()]];
            if let StieltjesVerdict::Rejected { kind, indices, det } = &verdict {
                rows.push(vec!["form".into(), kind.name().into()]);
                rows.push(vec!["indices".into(), format!("{indices:?}")]);
                rows.push(vec!["det".into(), format_rational(det)]);
            }
            Ok((Output::tabular(json, &["key", "value"], rows), level))
        }
        Command::Example { name, write } => {
            let name = name.as_deref().or(g.example.as_deref());
            let Some(name) = name else {
                let list: Vec<Value> = registry::EXAMPLES
                    .iter()
                    .map(|n| {
                        let e = registry::example(n, &Params::new())?;
                        Ok(json!({ "name": n, "summary": e.descriptor.summary }))
                    })
                    .collect::<compop::Result<_>>()?;
                let rows = list
                    .iter()
                    .map(|v| vec![v["name"].as_str().unwrap_or("").into(), v["summary"].as_str().unwrap_or("").into()])
                    .collect();
                return Ok((Output::tabular(json!(list), &["example", "summary"], rows), level));
            };
            let params: Params = g.params.iter().cloned().collect();
            let e = registry::example(name, &params)?;
            let doc = to_document(&e.space, &e.maps)?;
            let mut facts = Vec::new();
            let mut rows = Vec::new();
            for (fact, (statement, outcome)) in e.descriptor.facts.iter().zip(e.run_facts()) {
                let holds = outcome?;
                facts.push(json!({ "statement": statement, "origin": fact.origin.name(), "holds": holds }));
                rows.push(vec![statement.to_string(), fact.origin.name().to_string(), holds.to_string()]);
            }
            if let Some(path) = write {
                let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Internal(e.to_string()))?;
                std::fs::write(path, text + "\n").map_err(|err| usage(format!("cannot write {}: {err}", path.display())))?;
            }
            let json = json!({
                "name": e.descriptor.name,
                "summary": e.descriptor.summary,
                "params": e.descriptor.params,
                "default_map": e.default_map,
                "maps": e.maps.keys().collect::<Vec<_>>(),
                "facts": facts,
                "space": doc,
            });
            Ok((Output::tabular(json, &["fact", "origin", "holds"], rows), level))
        }
        Command::Search { predicate, budget, max_atoms, null_atoms, out } => {
            let pred = Predicate::parse(predicate).map_err(|e| usage(e.to_string()))?;
            if *max_atoms == 0 || *max_atoms > 8 {
                return Err(usage("--max-atoms must lie in 1..=8"));
            }
            let spec = RandomSpaceSpec { max_atoms: *max_atoms, null_atoms: *null_atoms, ..RandomSpaceSpec::new(g.seed) };
            let hits = registry::search(&pred, &spec, *budget, g.order)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
                for hit in &hits {
                    let path = dir.join(format!("hit-{}.json", hit.seed));
                    let text = serde_json::to_string_pretty(&hit.document).map_err(|e| Error::Internal(e.to_string()))?;
                    std::fs::write(&path, text + "\n").map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
                }
            }
            let rows = hits.iter().map(|h| vec![h.seed.to_string(), h.document.to_string()]).collect();
            let json = json!({ "predicate": predicate, "budget": budget, "hits": registry::search_json(&hits) });
            Ok((Output::tabular(json, &["seed", "space"], rows), 1))
        }
        Command::Validate { file } => {
            let path = file.as_ref().or(g.space.as_ref()).ok_or_else(|| usage("validate needs a space-file"))?;
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let d = validate(&text, level, g.order.max(1))?;
            let rows = d
                .nonsingular
                .iter()
                .map(|(name, v)| vec![name.clone(), v.status().to_string(), witness_cell(&v.to_json(d.level))])
                .collect();
            Ok((Output::tabular(d.to_json(), &["map", "nonsingular", "witness"], rows), d.level))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::NullAtom(_) => 1,
        Error::Internal(_) => 3,
        e if e.is_data_error() => 2,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = run_command(&cli).or_else(|e| if is_mathematical(&e) { Ok((undefined(&e), cli.global.window)) } else { Err(e) });
    match outcome {
        Ok((out, level)) => match out.render(cli.global.format, &argv[1..], level) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
