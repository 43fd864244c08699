use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qhs_core::classes::{classify, enumerate_states, is_grews};
use qhs_core::entanglement::{schmidt_coefficients, verify_theorem2, ENTANGLEMENT_THRESHOLD};
use qhs_core::nonlocality::{chsh_report, chsh_table, ChshMode, ChshReport, ChshRow, ChshTable};
use qhs_core::output::{format_sig, round_sig};
use qhs_core::rewrite::{apply_chain, RewriteOp};
use qhs_core::stabilizer::{apply_generator, commutator_residual, generator};
use qhs_core::statevector::build_state;
use qhs_core::verify::{verify_suite, Suite};
use qhs_core::{Bipartition, MultiHypergraph};
use rand::SeedableRng;

#[derive(Parser)]
#[command(
    name = "qhs",
    version,
    about = "Qudit hypergraph states: build, stabilize, rewrite, analyse"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write results here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Numerical tolerance for verification verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Args)]
struct Input {
    /// Hypergraph JSON document, `-` for standard input.
    #[arg(short, long)]
    input: String,
}

#[derive(Subcommand)]
enum Command {
    /// Build the state of a hypergraph.
    Build {
        #[command(flatten)]
        input: Input,
        /// Include every amplitude in the output.
        #[arg(long)]
        print_amplitudes: bool,
    },
    /// List and check the stabilizer generators g_k.
    Stabilizers {
        #[command(flatten)]
        input: Input,
    },
    /// Apply a chain of Z, X and Z-measurement rewrites.
    Rewrite {
        #[command(flatten)]
        input: Input,
        /// `z:k`, `x:k`, `measure:k` or `measure:k=j`; repeat to chain.
        #[arg(long = "op", required = true)]
        ops: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Schmidt analysis across bipartitions.
    Entanglement {
        #[command(flatten)]
        input: Input,
        /// Control and target sides, e.g. `1,2|3,4`.
        #[arg(long, conflicts_with = "all_bipartitions")]
        partition: Option<String>,
        /// Sweep every bipartition and check that crossing edges entangle (the default).
        #[arg(long)]
        all_bipartitions: bool,
    },
    /// CHSH value of the uniform state C_V^m |+>^N after post-selection.
    Chsh {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, conflicts_with = "dense_only")]
        analytic_only: bool,
        #[arg(long)]
        dense_only: bool,
    },
    /// CHSH values over a grid of levels and sizes, as CSV by default.
    ChshTable {
        #[arg(long, value_delimiter = ',', required = true)]
        d_list: Vec<u32>,
        #[arg(long = "N-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, conflicts_with = "dense_only")]
        analytic_only: bool,
        #[arg(long)]
        dense_only: bool,
    },
    /// GREWS, graph and stabilizer membership.
    Classify {
        #[command(flatten)]
        input: Input,
    },
    /// Count distinct states over all hypergraphs on n vertices.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
    },
    /// Run seeded property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    /// Bad input or arguments: exit 2.
    Usage(anyhow::Error),
    /// A check came out false: exit 1. The report is still emitted.
    Verification(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<qhs_core::Error> for Failure {
    fn from(e: qhs_core::Error) -> Self {
        Failure::Usage(e.into())
    }
}

/// Rendered output plus an optional verification failure to report after writing it.
struct Report {
    text: String,
    failure: Option<String>,
}

impl Report {
    fn ok(text: String) -> Self {
        Report {
            text,
            failure: None,
        }
    }

    fn check(text: String, passed: bool, what: &str) -> Self {
        Report {
            text,
            failure: (!passed).then(|| what.to_string()),
        }
    }
}

fn read_hypergraph(input: &Input) -> anyhow::Result<MultiHypergraph> {
    let text = if input.input == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        s
    } else {
        fs::read_to_string(&input.input).with_context(|| format!("reading {}", input.input))?
    };
    MultiHypergraph::parse(&text).with_context(|| format!("parsing {}", input.input))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn num(x: f64) -> Value {
    json!(round_sig(x))
}

fn hypergraph_value(h: &MultiHypergraph) -> Value {
    serde_json::from_str(&h.to_json()).expect("hypergraph JSON round-trips")
}

fn ket_label(digits: &[u32], d: u32) -> String {
    let sep = if d > 10 { "," } else { "" };
    let body: Vec<String> = digits.iter().map(u32::to_string).collect();
    format!("|{}>", body.join(sep))
}

fn unsupported(format: Format, what: &str) -> Failure {
    let name = match format {
        Format::Json => "json",
        Format::Table => "table",
        Format::Csv => "csv",
    };
    Failure::Usage(anyhow!("--format {name} is not supported by {what}"))
}

fn build(
    h: &MultiHypergraph,
    format: Format,
    amplitudes: bool,
    tol: f64,
) -> Result<Report, Failure> {
    let s = build_state(h)?;
    let grews = is_grews(&s, tol);
    let rows: Vec<(String, f64, f64)> = (0..s.dim())
        .map(|i| {
            let digits: Vec<u32> = (1..=s.n()).map(|k| s.digit(i, k)).collect();
            let a = s.amplitudes()[i];
            (ket_label(&digits, s.d()), a.re, a.im)
        })
        .collect();
    let text = match format {
        Format::Json => {
            let mut v = json!({
                "n": s.n(),
                "d": s.d(),
                "dimension": s.dim(),
                "norm": num(s.norm()),
                "grews": grews,
            });
            if amplitudes {
                v["amplitudes"] = rows
                    .iter()
                    .map(|(_, re, im)| json!([round_sig(*re), round_sig(*im)]))
                    .collect();
            }
            pretty(&v)
        }
        Format::Table => {
            let mut out = format!(
                "n={} d={} dimension={} norm={} grews={}\n",
                s.n(),
                s.d(),
                s.dim(),
                format_sig(s.norm()),
                grews
            );
            if amplitudes {
                for (label, re, im) in &rows {
                    out.push_str(&format!(
                        "{label}  {} {}\n",
                        format_sig(*re),
                        format_sig(*im)
                    ));
                }
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("index,ket,re,im\n");
            for (i, (label, re, im)) in rows.iter().enumerate() {
                out.push_str(&format!(
                    "{i},{label},{},{}\n",
                    format_sig(*re),
                    format_sig(*im)
                ));
            }
            out
        }
    };
    Ok(Report::check(text, grews, "built state is not GREWS"))
}

fn stabilizers(h: &MultiHypergraph, format: Format, tol: f64) -> Result<Report, Failure> {
    let state = build_state(h)?;
    let mut gens = Vec::new();
    for k in 1..=h.n() {
        let residual = apply_generator(h, k, &state)?.distance(&state)?;
        gens.push((k, generator(h, k)?.to_string(), residual));
    }
    let mut worst_comm = 0.0f64;
    for k in 1..=h.n() {
        for k2 in k + 1..=h.n() {
            worst_comm = worst_comm.max(commutator_residual(h, k, k2)?);
        }
    }
    let worst = gens.iter().map(|g| g.2).fold(0.0, f64::max);
    let passed = worst < tol && worst_comm < tol;
    let text = match format {
        Format::Json => pretty(&json!({
            "generators": gens.iter().map(|(k, g, r)| json!({"k": k, "generator": g, "residual": num(*r)})).collect::<Vec<_>>(),
            "max_commutator_residual": num(worst_comm),
            "passed": passed,
        })),
        Format::Table => {
            let mut out = String::new();
            for (k, g, r) in &gens {
                out.push_str(&format!("g_{k} = {g}    residual {}\n", format_sig(*r)));
            }
            out.push_str(&format!(
                "max commutator residual {}\n{}\n",
                format_sig(worst_comm),
                if passed { "pass" } else { "FAIL" }
            ));
            out
        }
        Format::Csv => return Err(unsupported(format, "stabilizers")),
    };
    Ok(Report::check(text, passed, "stabilizer check failed"))
}

fn rewrite(
    h: &MultiHypergraph,
    ops: &[String],
    seed: u64,
    format: Format,
) -> Result<Report, Failure> {
    let ops: Vec<RewriteOp> = ops
        .iter()
        .map(|s| s.parse::<RewriteOp>())
        .collect::<Result<_, _>>()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let steps = apply_chain(h, &ops, &mut rng)?;
    let total_p: f64 = steps.iter().map(|s| s.probability).product();
    let last = steps
        .last()
        .map_or_else(|| h.clone(), |s| s.hypergraph.clone());
    let text = match format {
        Format::Json => pretty(&json!({
            "steps": ops.iter().zip(&steps).map(|(op, s)| json!({
                "op": op.to_string(),
                "outcome": s.outcome,
                "probability": num(s.probability),
                "hypergraph": hypergraph_value(&s.hypergraph),
            })).collect::<Vec<_>>(),
            "probability": num(total_p),
            "hypergraph": hypergraph_value(&last),
        })),
        Format::Table => {
            let mut out = String::new();
            for (op, s) in ops.iter().zip(&steps) {
                let outcome = s.outcome.map(|j| format!(" -> {j}")).unwrap_or_default();
                out.push_str(&format!(
                    "{op}{outcome}  p={}  {}\n",
                    format_sig(s.probability),
                    s.hypergraph
                ));
            }
            out.push_str(&format!("probability {}\n", format_sig(total_p)));
            out
        }
        Format::Csv => return Err(unsupported(format, "rewrite")),
    };
    Ok(Report::ok(text))
}

fn entanglement(
    h: &MultiHypergraph,
    partition: Option<&str>,
    format: Format,
) -> Result<Report, Failure> {
    let state = build_state(h)?;
    if let Some(p) = partition {
        let p = Bipartition::parse(h.n(), p)?;
        let coeffs = schmidt_coefficients(&state, &p)?;
        let crossing = h.crossing_edges(&p)?;
        let second = coeffs.get(1).copied().unwrap_or(0.0);
        let entangled = second > ENTANGLEMENT_THRESHOLD;
        let text = match format {
            Format::Json => pretty(&json!({
                "partition": p.to_string(),
                "schmidt_coefficients": coeffs.iter().map(|&c| num(c)).collect::<Vec<_>>(),
                "crossing_edges": crossing.iter().map(|(e, m)| json!({"v": e.as_slice(), "m": m})).collect::<Vec<_>>(),
                "entangled": entangled,
            })),
            Format::Table => {
                let cs: Vec<String> = coeffs.iter().map(|&c| format_sig(c)).collect();
                format!(
                    "partition {p}\nschmidt coefficients {}\ncrossing edges {}\nentangled {entangled}\n",
                    cs.join(" "),
                    crossing.len()
                )
            }
            Format::Csv => {
                let cs: Vec<String> = coeffs.iter().map(|&c| format_sig(c)).collect();
                format!(
                    "partition,crossing,second_singular_value,entangled,coefficients\n{p},{},{},{entangled},{}\n",
                    !crossing.is_empty(),
                    format_sig(second),
                    cs.join(" ")
                )
            }
        };
        let consistent = crossing.is_empty() != entangled;
        return Ok(Report::check(
            text,
            consistent,
            "entanglement verdict contradicts connectivity",
        ));
    }

    let report = verify_theorem2(h)?;
    let text = match format {
        Format::Json => pretty(&json!({
            "bipartitions": report.verdicts.iter().map(|v| json!({
                "partition": v.partition.to_string(),
                "crossing": v.crossing,
                "second_singular_value": num(v.second_singular_value),
                "entangled": v.entangled,
            })).collect::<Vec<_>>(),
            "connected": h.is_connected(),
            "violations": report.violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "converse_violations": report.converse_violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "passed": report.passed(),
        })),
        Format::Table => {
            let mut out = String::new();
            for v in &report.verdicts {
                out.push_str(&format!(
                    "{:<24} crossing={:<5} second={:<20} entangled={}\n",
                    v.partition.to_string(),
                    v.crossing,
                    format_sig(v.second_singular_value),
                    v.entangled
                ));
            }
            out.push_str(&format!(
                "connected={} {}\n",
                h.is_connected(),
                if report.passed() { "pass" } else { "FAIL" }
            ));
            out
        }
        Format::Csv => {
            let mut out = String::from("partition,crossing,second_singular_value,entangled\n");
            for v in &report.verdicts {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    v.partition,
                    v.crossing,
                    format_sig(v.second_singular_value),
                    v.entangled
                ));
            }
            out
        }
    };
    Ok(Report::check(
        text,
        report.passed(),
        "connectivity/entanglement violation",
    ))
}

fn chsh_value_json(r: &ChshReport) -> Value {
    let mut v = json!({"d": r.d, "N": r.n, "m": r.m, "C": num(r.chsh())});
    if let Some(a) = r.analytic {
        v["analytic"] = json!({
            "lambda": num(a.pair.lambda),
            "x_plus": num(a.pair.x_plus),
            "x_minus": num(a.pair.x_minus),
            "c0": num(a.pair.c0),
            "c1": num(a.pair.c1),
            "t": num(a.t),
            "C": num(a.chsh),
        });
    }
    if let Some(x) = &r.dense {
        let du = r.d as usize;
        v["dense"] = json!({
            "omega": (0..du).map(|i| (0..du).map(|j| {
                let z = x.postselection.omega[(i, j)];
                json!([round_sig(z.re), round_sig(z.im)])
            }).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "postselection_probability": num(x.postselection.probability),
            "rank": x.rank,
            "c0": num(x.c0),
            "c1": num(x.c1),
            "t": num(x.t),
            "C_closed_form": num(x.chsh_closed_form),
            "C_correlations": num(x.chsh_correlations),
            "degenerate": x.degenerate,
        });
    }
    if let Some(res) = r.branch_residual() {
        v["branch_residual"] = num(res);
    }
    v
}

fn mode(analytic_only: bool, dense_only: bool) -> ChshMode {
    match (analytic_only, dense_only) {
        (true, _) => ChshMode::AnalyticOnly,
        (_, true) => ChshMode::DenseOnly,
        _ => ChshMode::Both,
    }
}

fn chsh(
    n: usize,
    d: u32,
    m: u32,
    mode: ChshMode,
    format: Format,
    tol: f64,
) -> Result<Report, Failure> {
    let r = chsh_report(n, d, m, mode)?;
    let consistent = r.branch_residual().is_none_or(|x| x < tol);
    let text = match format {
        Format::Json => pretty(&chsh_value_json(&r)),
        Format::Csv => ChshTable {
            rows: vec![ChshRow {
                d,
                n,
                m,
                result: Ok(r),
            }],
        }
        .to_csv(),
        Format::Table => {
            let mut out = format!("d={d} N={n} m={m}  C={}\n", format_sig(r.chsh()));
            if let Some(a) = r.analytic {
                out.push_str(&format!(
                    "analytic: lambda={} x+={} x-={} c0={} c1={} t={} C={}\n",
                    format_sig(a.pair.lambda),
                    format_sig(a.pair.x_plus),
                    format_sig(a.pair.x_minus),
                    format_sig(a.pair.c0),
                    format_sig(a.pair.c1),
                    format_sig(a.t),
                    format_sig(a.chsh)
                ));
            }
            if let Some(x) = &r.dense {
                out.push_str(&format!(
                    "dense: rank={} c0={} c1={} t={} C(closed form)={} C(correlations)={}\n",
                    x.rank,
                    format_sig(x.c0),
                    format_sig(x.c1),
                    format_sig(x.t),
                    format_sig(x.chsh_closed_form),
                    format_sig(x.chsh_correlations)
                ));
            }
            out
        }
    };
    Ok(Report::check(
        text,
        consistent,
        "analytic and dense CHSH values disagree",
    ))
}

fn chsh_grid(
    d_list: &[u32],
    n_list: &[usize],
    m: u32,
    mode: ChshMode,
    format: Format,
    tol: f64,
) -> Result<Report, Failure> {
    let table = chsh_table(d_list, n_list, m, mode);
    for row in &table.rows {
        if let Err(e) = &row.result {
            eprintln!("skipped d={} N={}: {e}", row.d, row.n);
        }
    }
    let consistent = table.max_branch_residual() < tol;
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&json!({
            "rows": table.rows.iter().map(|row| match &row.result {
                Ok(r) => chsh_value_json(r),
                Err(e) => json!({"d": row.d, "N": row.n, "m": row.m, "skipped": e.to_string()}),
            }).collect::<Vec<_>>(),
            "max_branch_residual": num(table.max_branch_residual()),
        })),
        Format::Table => {
            let mut out = String::new();
            for row in &table.rows {
                match &row.result {
                    Ok(r) => out.push_str(&format!(
                        "d={:<3} N={:<3} C={}\n",
                        row.d,
                        row.n,
                        format_sig(r.chsh())
                    )),
                    Err(e) => {
                        out.push_str(&format!("d={:<3} N={:<3} skipped: {e}\n", row.d, row.n))
                    }
                }
            }
            out
        }
    };
    Ok(Report::check(
        text,
        consistent,
        "analytic and dense CHSH values disagree",
    ))
}

fn classify_cmd(h: &MultiHypergraph, format: Format) -> Result<Report, Failure> {
    let r = classify(h);
    let text = match format {
        Format::Json => pretty(&json!({
            "is_hypergraph_state": r.is_hypergraph_state,
            "is_grews": r.is_grews,
            "is_graph": r.is_graph,
            "is_stabilizer": r.is_stabilizer,
            "max_cardinality": r.max_cardinality,
        })),
        Format::Table => format!(
            "hypergraph state {}\ngrews {}\ngraph {}\nstabilizer {}\nmax cardinality {}\n",
            r.is_hypergraph_state,
            r.is_grews,
            r.is_graph,
            r.is_stabilizer,
            r.max_cardinality
                .map_or_else(|| "-".to_string(), |c| c.to_string())
        ),
        Format::Csv => return Err(unsupported(format, "classify")),
    };
    Ok(Report::ok(text))
}

fn enumerate(n: usize, d: u32, format: Format) -> Result<Report, Failure> {
    let (distinct, total) = enumerate_states(n, d)?;
    let injective = distinct == total;
    let text = match format {
        Format::Json => pretty(
            &json!({"n": n, "d": d, "distinct": distinct, "total": total, "injective": injective}),
        ),
        Format::Table => format!(
            "n={n} d={d}: {distinct} distinct states from {total} hypergraphs; {}\n",
            if injective {
                "every hypergraph gives a different state"
            } else {
                "COLLISION"
            }
        ),
        Format::Csv => {
            format!("n,d,distinct,total,injective\n{n},{d},{distinct},{total},{injective}\n")
        }
    };
    Ok(Report::check(
        text,
        injective,
        "two hypergraphs produced the same state",
    ))
}

fn verify(suite: &str, seed: u64, format: Format) -> Result<Report, Failure> {
    let suite: Suite = suite.parse()?;
    let r = verify_suite(suite, seed)?;
    let text = match format {
        Format::Json => {
            let mut s = r.to_json();
            s.push('\n');
            s
        }
        Format::Table => r.to_table(),
        Format::Csv => {
            let mut out = String::from("suite,property,cases,failures,worst_residual,passed\n");
            for p in &r.properties {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.suite,
                    p.property.replace(',', ";"),
                    p.cases,
                    p.failures,
                    p.worst_residual.map(format_sig).unwrap_or_default(),
                    p.passed()
                ));
            }
            out
        }
    };
    Ok(Report::check(text, r.passed(), "property suite failed"))
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    let fmt = |default: Format| cli.format.unwrap_or(default);
    let tol = cli.tolerance;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Usage(anyhow!("--tolerance must be positive")));
    }
    match &cli.command {
        Command::Build {
            input,
            print_amplitudes,
        } => build(
            &read_hypergraph(input)?,
            fmt(Format::Json),
            *print_amplitudes,
            tol,
        ),
        Command::Stabilizers { input } => {
            stabilizers(&read_hypergraph(input)?, fmt(Format::Table), tol)
        }
        Command::Rewrite { input, ops, seed } => {
            rewrite(&read_hypergraph(input)?, ops, *seed, fmt(Format::Json))
        }
        Command::Entanglement {
            input, partition, ..
        } => entanglement(
            &read_hypergraph(input)?,
            partition.as_deref(),
            fmt(Format::Table),
        ),
        Command::Chsh {
            d,
            n,
            m,
            analytic_only,
            dense_only,
        } => chsh(
            *n,
            *d,
            *m,
            mode(*analytic_only, *dense_only),
            fmt(Format::Table),
            tol,
        ),
        Command::ChshTable {
            d_list,
            n_list,
            m,
            analytic_only,
            dense_only,
        } => chsh_grid(
            d_list,
            n_list,
            *m,
            mode(*analytic_only, *dense_only),
            fmt(Format::Csv),
            tol,
        ),
        Command::Classify { input } => classify_cmd(&read_hypergraph(input)?, fmt(Format::Json)),
        Command::Enumerate { n, d } => enumerate(*n, *d, fmt(Format::Table)),
        Command::Verify { suite, seed } => verify(suite, *seed, fmt(Format::Table)),
    }
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let report = dispatch(cli)?;
    emit(cli, &report.text)?;
    match report.failure {
        Some(what) => Err(Failure::Verification(what)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(what)) => {
            eprintln!("qhs: verification failed: {what}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("qhs: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
