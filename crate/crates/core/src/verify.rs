//! Seeded property suites over the whole library, used by `qhs verify`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::classes::{classify, enumerate_states, grews_census, is_grews, verify_generator_pauli};
use crate::entanglement::{block_factorization_residual, verify_theorem2};
use crate::error::{Error, Result};
use crate::hypergraph::MultiHypergraph;
use crate::nonlocality::{chsh_table, ChshMode, BRANCH_TOLERANCE};
use crate::output::{format_sig, round_sig};
use crate::rewrite::{dense_residual, RewriteOp};
use crate::stabilizer::{check_stabilized, commutator_residual, STABILIZER_TOLERANCE};
use crate::statevector::build_state;

/// Random hypergraphs per sampled property.
const SAMPLES: usize = 100;
/// Tolerance for the block-factorization overlap defect.
const FACTORIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Stabilizer,
    Rewrite,
    Entanglement,
    Enumeration,
    Nonlocality,
    All,
}

impl Suite {
    const EACH: [Suite; 5] = [
        Suite::Stabilizer,
        Suite::Rewrite,
        Suite::Entanglement,
        Suite::Enumeration,
        Suite::Nonlocality,
    ];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "stabilizer" => Suite::Stabilizer,
            "rewrite" => Suite::Rewrite,
            "entanglement" => Suite::Entanglement,
            "enumeration" => Suite::Enumeration,
            "nonlocality" => Suite::Nonlocality,
            "all" => Suite::All,
            _ => return Err(Error::domain(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Stabilizer => "stabilizer",
            Suite::Rewrite => "rewrite",
            Suite::Entanglement => "entanglement",
            Suite::Enumeration => "enumeration",
            Suite::Nonlocality => "nonlocality",
            Suite::All => "all",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub suite: Suite,
    pub property: String,
    pub cases: usize,
    pub failures: usize,
    pub worst_residual: Option<f64>,
    pub note: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyResult::passed)
    }

    pub fn to_json(&self) -> String {
        let props: Vec<_> = self
            .properties
            .iter()
            .map(|p| {
                json!({
                    "suite": p.suite.to_string(),
                    "property": p.property,
                    "cases": p.cases,
                    "failures": p.failures,
                    "worst_residual": p.worst_residual.map(round_sig),
                    "note": p.note,
                    "passed": p.passed(),
                })
            })
            .collect();
        let doc = json!({
            "suite": self.suite.to_string(),
            "seed": self.seed,
            "passed": self.passed(),
            "properties": props,
        });
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            out.push_str(&format!(
                "{:<4} {:<13} {:<40} cases={:<5} failures={:<3} worst={}{}\n",
                if p.passed() { "PASS" } else { "FAIL" },
                p.suite.to_string(),
                p.property,
                p.cases,
                p.failures,
                p.worst_residual
                    .map(format_sig)
                    .unwrap_or_else(|| "-".into()),
                p.note
                    .as_ref()
                    .map(|n| format!("  ({n})"))
                    .unwrap_or_default(),
            ));
        }
        out.push_str(&format!(
            "suite {} seed {}: {}\n",
            self.suite,
            self.seed,
            if self.passed() { "pass" } else { "FAIL" }
        ));
        out
    }
}

/// Accumulates cases, failures and the largest residual of one property.
struct Tally {
    suite: Suite,
    property: String,
    cases: usize,
    failures: usize,
    worst: Option<f64>,
    note: Option<String>,
}

impl Tally {
    fn new(suite: Suite, property: &str) -> Self {
        Tally {
            suite,
            property: property.to_string(),
            cases: 0,
            failures: 0,
            worst: None,
            note: None,
        }
    }

    fn check(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn residual(&mut self, r: f64, tol: f64) {
        self.worst = Some(self.worst.map_or(r, |w| w.max(r)));
        self.check(r < tol);
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            suite: self.suite,
            property: self.property,
            cases: self.cases,
            failures: self.failures,
            worst_residual: self.worst,
            note: self.note,
        }
    }
}

fn random_hypergraph(
    rng: &mut ChaCha8Rng,
    n_range: std::ops::RangeInclusive<usize>,
    d_max: u32,
) -> Result<MultiHypergraph> {
    let n = rng.random_range(n_range);
    let d = rng.random_range(2..=d_max);
    MultiHypergraph::random(n, d, rng)
}

/// Fixed three-vertex sample hypergraphs used as anchors in several suites.
fn anchors() -> Result<Vec<MultiHypergraph>> {
    Ok(vec![
        MultiHypergraph::from_edges(
            3,
            2,
            [
                (vec![], 1),
                (vec![1], 1),
                (vec![2, 3], 1),
                (vec![1, 2, 3], 1),
            ],
        )?,
        MultiHypergraph::from_edges(
            3,
            3,
            [
                (vec![], 1),
                (vec![1], 1),
                (vec![2, 3], 1),
                (vec![1, 2, 3], 2),
            ],
        )?,
    ])
}

fn stabilizer_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stab = Tally::new(Suite::Stabilizer, "g_k stabilizes |H>");
    let mut comm = Tally::new(Suite::Stabilizer, "generators commute");
    let mut sample = anchors()?;
    for _ in 0..SAMPLES {
        sample.push(random_hypergraph(&mut rng, 1..=4, 5)?);
    }
    for h in &sample {
        stab.residual(check_stabilized(h)?.worst(), STABILIZER_TOLERANCE);
        for k in 1..=h.n() {
            for k2 in k + 1..=h.n() {
                comm.residual(commutator_residual(h, k, k2)?, STABILIZER_TOLERANCE);
            }
        }
    }

    let mut classifier = Tally::new(Suite::Stabilizer, "cardinality <= 2 iff Pauli generators");
    let mut pool = Vec::new();
    for d in [2u32, 3] {
        let slots = 4u32;
        for code in 0..d.pow(slots) {
            let edges = (0..slots as u64).map(|mask| {
                (
                    crate::hypergraph::VertexSet::from_mask(mask),
                    i64::from(code / d.pow(mask as u32) % d),
                )
            });
            pool.push(MultiHypergraph::from_edges(2, d, edges)?);
        }
    }
    for _ in 0..SAMPLES {
        let d = rng.random_range(2..=3);
        pool.push(MultiHypergraph::random(3, d, &mut rng)?);
    }
    for h in &pool {
        let dense = (1..=h.n()).try_fold(true, |acc, k| {
            Ok::<_, Error>(acc && verify_generator_pauli(h, k)?)
        })?;
        classifier.check(classify(h).is_stabilizer == dense);
    }
    Ok(vec![stab.finish(), comm.finish(), classifier.finish()])
}

fn rewrite_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157);
    let mut tallies = [
        Tally::new(Suite::Rewrite, "Z rewrite matches dense Z"),
        Tally::new(Suite::Rewrite, "X rewrite matches dense X"),
        Tally::new(Suite::Rewrite, "Z measurement matches projection"),
    ];
    let mut prob = Tally::new(Suite::Rewrite, "Z measurement probability 1/d");
    for _ in 0..SAMPLES {
        let h = random_hypergraph(&mut rng, 2..=4, 5)?;
        let k = rng.random_range(1..=h.n());
        let j = rng.random_range(0..h.d());
        let ops = [
            RewriteOp::Z(k),
            RewriteOp::X(k),
            RewriteOp::Measure(k, Some(j)),
        ];
        for (tally, op) in tallies.iter_mut().zip(ops) {
            let (residual, dp) = dense_residual(&h, op)?;
            tally.residual(residual, STABILIZER_TOLERANCE);
            if matches!(op, RewriteOp::Measure(..)) {
                prob.residual(dp, 1e-12);
            }
        }
    }
    let [a, b, c] = tallies;
    Ok(vec![a.finish(), b.finish(), c.finish(), prob.finish()])
}

fn entanglement_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE47A);
    let mut crossing = Tally::new(Suite::Entanglement, "crossing cut => entangled");
    let mut converse = Tally::new(Suite::Entanglement, "non-crossing cut => product");
    let mut blocks = Tally::new(Suite::Entanglement, "disconnected state factorizes");
    let mut sample = Vec::new();
    for code in 0u32..256 {
        let edges = (0..8u64).map(|mask| {
            (
                crate::hypergraph::VertexSet::from_mask(mask),
                i64::from(code >> mask & 1),
            )
        });
        sample.push(MultiHypergraph::from_edges(3, 2, edges)?);
    }
    for _ in 0..SAMPLES {
        sample.push(random_hypergraph(&mut rng, 2..=4, 5)?);
    }
    for h in &sample {
        let report = verify_theorem2(h)?;
        for v in &report.verdicts {
            if v.crossing {
                crossing.check(v.entangled);
                let worst = crossing.worst.map_or(v.second_singular_value, |w: f64| {
                    w.min(v.second_singular_value)
                });
                crossing.worst = Some(worst);
            } else {
                converse.check(!v.entangled);
            }
        }
        if !h.is_connected() {
            blocks.residual(block_factorization_residual(h)?, FACTORIZATION_TOLERANCE);
        }
    }
    crossing.note = Some("worst is the smallest second singular value on a crossing cut".into());
    Ok(vec![crossing.finish(), converse.finish(), blocks.finish()])
}

fn enumeration_suite() -> Result<Vec<PropertyResult>> {
    let mut counts = Tally::new(Suite::Enumeration, "distinct states = d^(2^n)");
    let mut seen = Vec::new();
    for (n, d) in [(2, 2), (2, 3), (3, 2)] {
        let (distinct, total) = enumerate_states(n, d)?;
        counts.check(distinct == total);
        seen.push(format!("({distinct},{total})"));
    }
    counts.note = Some(seen.join(" "));

    let mut grews = Tally::new(Suite::Enumeration, "built states are GREWS");
    let mut rng = ChaCha8Rng::seed_from_u64(0x6E);
    for _ in 0..SAMPLES {
        let h = random_hypergraph(&mut rng, 1..=4, 5)?;
        grews.check(is_grews(&build_state(&h)?, STABILIZER_TOLERANCE));
    }
    let mut census = Tally::new(Suite::Enumeration, "one-qutrit GREWS census");
    let c = grews_census(3)?;
    census.check(c.hypergraph_states == 9 && c.phase_functions == 27 && c.witness.is_some());
    census.note = Some(format!(
        "{} hypergraph states of {} phase functions",
        c.hypergraph_states, c.phase_functions
    ));
    Ok(vec![counts.finish(), grews.finish(), census.finish()])
}

fn nonlocality_suite() -> Vec<PropertyResult> {
    let table = chsh_table(&[2, 3, 5, 7], &[3, 4, 5, 6], 1, ChshMode::Both);
    let mut branches = Tally::new(Suite::Nonlocality, "analytic C matches correlations");
    for r in table.computed() {
        if let Some(res) = r.branch_residual() {
            branches.residual(res, BRANCH_TOLERANCE);
        }
    }
    let mut computed = Tally::new(Suite::Nonlocality, "every row computed");
    for row in &table.rows {
        computed.check(row.result.is_ok());
    }
    let mut violation = Tally::new(Suite::Nonlocality, "C > 2");
    let classical = table.classical_rows();
    for r in table.computed() {
        violation.check(!classical.contains(&(r.d, r.n)));
    }
    let mut trend = Tally::new(Suite::Nonlocality, "C decreasing in N, increasing in d");
    trend.cases = table.rows.len();
    trend.failures = table.non_decreasing_in_n().len() + table.non_increasing_in_d().len();
    vec![
        computed.finish(),
        branches.finish(),
        violation.finish(),
        trend.finish(),
    ]
}

/// Runs one suite, or all of them in a fixed order. Identical seeds give
/// identical reports.
pub fn verify_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let selected: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    let mut properties = Vec::new();
    for s in selected {
        properties.extend(match s {
            Suite::Stabilizer => stabilizer_suite(seed)?,
            Suite::Rewrite => rewrite_suite(seed)?,
            Suite::Entanglement => entanglement_suite(seed)?,
            Suite::Enumeration => enumeration_suite()?,
            Suite::Nonlocality => nonlocality_suite(),
            Suite::All => unreachable!(),
        });
    }
    Ok(SuiteReport {
        suite,
        seed,
        properties,
    })
}
