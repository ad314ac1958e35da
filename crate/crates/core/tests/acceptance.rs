//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cde_core::analysis;
use cde_core::codec::LocalCode;
use cde_core::decoder::{self, DecodeStatus};
use cde_core::sim::{self, AdversaryPlan};
use cde_core::{
    for_each_subset, make_field, random_encoding, verify_error_correction, EncodingMatrix, FieldVector,
    DEFAULT_BUDGET,
};
use common::*;
use rand::Rng;

const DIAMETER_PROBLEMS: usize = 240;
const DISTANCE_PAIRS: usize = 150;
const MONTE_CARLO_TRIALS: u64 = 500;
const MONTE_CARLO_SEED: u64 = 20_240_601;

struct Criterion {
    id: u8,
    title: &'static str,
    limit: Option<Duration>,
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

/// Encodings produced while checking the oracle criteria, reused downstream.
#[derive(Default)]
struct Suite {
    encodings: Vec<EncodingMatrix>,
}

fn six_client_scheme(name: &str) -> EncodingMatrix {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture");
    cde_core::format::parse_encoding(&text, &six_clients()).expect("fixture parses")
}

fn diameter_and_capability() -> Outcome {
    let report = analysis::analyze(&six_clients(), analysis::DEFAULT_DEGREE_BUDGET).unwrap();
    let ok = report.rho_per_client == vec![4; 6] && report.rho == 4 && report.delta == 1;
    Outcome::new(
        ok,
        format!("rho_j={:?} rho={} delta={}", report.rho_per_client, report.rho, report.delta),
    )
}

fn six_client_scheme_verification() -> Outcome {
    let e = six_client_scheme("six_clients.matrix.toml");
    let distances: Vec<usize> = e.local_codes().iter().map(|c| c.min_distance(DEFAULT_BUDGET).unwrap()).collect();
    let one = verify_error_correction(&e, 1, DEFAULT_BUDGET).unwrap();
    let two = verify_error_correction(&e, 2, DEFAULT_BUDGET).unwrap();
    let ok = distances.iter().all(|&d| d == 3) && one.passed && !two.passed;
    Outcome::new(
        ok,
        format!(
            "GF(3) distances={distances:?} (expected all 3) verify(1)={} verify(2)={}",
            one.passed, two.passed
        ),
    )
}

fn single_adversary_sweep() -> Outcome {
    let e = six_client_scheme("six_clients.matrix.toml");
    let x = FieldVector::new(e.field(), vec![1, 2, 0, 1, 2, 1]).unwrap();
    let mut failing = Vec::new();
    let mut singles = 0;
    for client in 0..6 {
        for value in 0..3 {
            let plan = AdversaryPlan::honest().with(client, value);
            let trace = sim::run_exchange(&e, &x, &plan, DEFAULT_BUDGET).unwrap();
            singles += 1;
            if !trace.verdict.is_success() {
                failing.push(format!("({},{})", client + 1, value));
            }
        }
    }
    let pairs = sim::all_plans(6, 3, 2).into_iter().filter(|p| p.len() == 2);
    let tight = pairs
        .map(|plan| sim::run_exchange(&e, &x, &plan, DEFAULT_BUDGET).unwrap())
        .find(|t| !t.verdict.is_success());
    let ok = singles == 18 && failing.is_empty() && tight.is_some();
    Outcome::new(
        ok,
        format!(
            "{}/{singles} single plans recovered, failing (client,value)={}; two-client violation found={}",
            singles - failing.len(),
            if failing.is_empty() { "none".into() } else { failing.join(" ") },
            tight.is_some()
        ),
    )
}

fn diameter_oracle(suite: &mut Suite) -> Outcome {
    let mut rng = rng(0xacce_0004);
    let mut mismatches = 0;
    let mut clients = 0;
    for trial in 0..DIAMETER_PROBLEMS {
        let p = random_problem(&mut rng, 8, 8, None);
        for j in 0..p.n() {
            clients += 1;
            let fast = analysis::local_diameter(&p.local_support(j)).ok();
            if fast != brute_force_diameter(&p, j) {
                mismatches += 1;
            }
        }
        if analysis::diameter(&p).is_ok() {
            let q = if trial % 2 == 0 { 3 } else { 5 };
            suite.encodings.push(random_encoding(&p, make_field(q).unwrap(), trial as u64));
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("{DIAMETER_PROBLEMS} problems, {clients} clients, {mismatches} mismatches"),
    )
}

fn rank_route_oracle(suite: &mut Suite) -> Outcome {
    let mut rng = rng(0xacce_0005);
    let mut mismatches = 0;
    let mut codes = 0;
    for trial in 0..DISTANCE_PAIRS {
        let q = if trial % 2 == 0 { 3 } else { 5 };
        let p = random_problem(&mut rng, 7, 8, Some(3));
        let e = random_encoding(&p, make_field(q).unwrap(), 1_000 + trial as u64);
        for code in e.local_codes().iter().filter(|c| c.dimension() > 0) {
            codes += 1;
            if brute_force_distance(code) != rank_route_distance(code) {
                mismatches += 1;
            }
        }
        suite.encodings.push(e);
    }
    Outcome::new(
        mismatches == 0,
        format!("{DISTANCE_PAIRS} pairs over GF(3)/GF(5), {codes} local codes, {mismatches} mismatches"),
    )
}

fn converse_bound(suite: &Suite) -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for e in &suite.encodings {
        let p = e.problem();
        let Ok(rhos) = analysis::local_diameters(p) else { continue };
        for code in e.local_codes().iter().filter(|c| c.dimension() > 0) {
            checked += 1;
            if code.min_distance(DEFAULT_BUDGET).unwrap() > p.n() - rhos[code.client()] + 1 {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0 && checked > 0,
        format!("{} encodings, {checked} local codes, {violations} violations", suite.encodings.len()),
    )
}

fn random_coding_bound() -> Outcome {
    let stats = sim::monte_carlo_success_rate(
        &six_clients(),
        make_field(1009).unwrap(),
        1,
        MONTE_CARLO_TRIALS,
        MONTE_CARLO_SEED,
        DEFAULT_BUDGET,
    )
    .unwrap();
    // Both readings must hold: the upper bound does not reject the floor, and
    // the lower bound of the 99% interval sits above it.
    Outcome::new(
        stats.consistent_with_floor && stats.ci_low >= stats.theoretical_floor,
        format!(
            "{}/{} passed ({:.4}), 99% interval [{:.4}, {:.4}], one-sided upper {:.4}, floor 1-{}/1009 = {:.4}",
            stats.passes,
            stats.trials,
            stats.pass_fraction,
            stats.ci_low,
            stats.ci_high,
            stats.one_sided_upper,
            stats.degree_bound,
            stats.theoretical_floor
        ),
    )
}

/// Decodes every error pattern of weight `1..=delta` off position `client`.
fn check_radius(code: &LocalCode, delta: usize, message: &[u32]) -> Result<usize, String> {
    let f = code.generator().field();
    let q = f.modulus();
    let n = code.length();
    let clean = code.generator().left_mul(message);
    let others: Vec<usize> = (0..n).filter(|&c| c != code.client()).collect();
    let mut patterns = 0;
    let mut failure = None;
    for w in 1..=delta.min(others.len()) {
        for_each_subset(others.len(), w, |slots| {
            let mut values = vec![1u32; w];
            loop {
                let mut z = clean.clone();
                for (&s, &v) in slots.iter().zip(&values) {
                    let pos = others[s];
                    z[pos] = f.add(z[pos], v);
                }
                let z = FieldVector::new(f, z).unwrap();
                let r = decoder::min_distance_decode(code, &z, DEFAULT_BUDGET).unwrap();
                patterns += 1;
                if r.status != DecodeStatus::Unique || r.message.values() != message {
                    failure = Some(format!("client {} error {:?}: {:?}", code.client() + 1, z.values(), r.status));
                    return false;
                }
                let mut i = 0;
                while i < w {
                    values[i] += 1;
                    if values[i] < q {
                        break;
                    }
                    values[i] = 1;
                    i += 1;
                }
                if i == w {
                    return true;
                }
            }
        });
        if let Some(f) = failure {
            return Err(f);
        }
    }
    Ok(patterns)
}

fn correction_radius(suite: &Suite) -> Outcome {
    let mut rng = rng(0xacce_0008);
    let mut verified = 0;
    let mut patterns = 0;
    let mut failures = Vec::new();
    for e in suite.encodings.iter().filter(|e| e.field().modulus() == 3) {
        let codes = e.local_codes();
        let Some(d) = codes
            .iter()
            .filter(|c| c.dimension() > 0)
            .map(|c| c.min_distance(DEFAULT_BUDGET).unwrap())
            .min()
        else {
            continue;
        };
        let delta = d.saturating_sub(1) / 2;
        if delta == 0 || !verify_error_correction(e, delta, DEFAULT_BUDGET).unwrap().passed {
            continue;
        }
        verified += 1;
        for code in codes.iter().filter(|c| c.dimension() > 0) {
            for _ in 0..2 {
                let message: Vec<u32> = (0..code.dimension()).map(|_| rng.random_range(0..3)).collect();
                match check_radius(code, delta, &message) {
                    Ok(count) => patterns += count,
                    Err(f) => failures.push(f),
                }
            }
        }
    }
    Outcome::new(
        verified > 0 && failures.is_empty(),
        format!(
            "{verified} verified GF(3) encodings, {patterns} error patterns, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, title: "diameter and capability of the six-client instance", limit: secs(1) },
        Criterion { id: 2, title: "local distances of the six-client scheme over GF(3)", limit: secs(1) },
        Criterion { id: 3, title: "single-adversary sweep against the six-client scheme", limit: secs(5) },
        Criterion { id: 4, title: "Hall diameter equals subset enumeration", limit: secs(60) },
        Criterion { id: 5, title: "rank test distance equals weight enumeration", limit: secs(60) },
        Criterion { id: 6, title: "local distance at most n - rho_j + 1", limit: None },
        Criterion { id: 7, title: "random encodings clear the degree floor", limit: secs(120) },
        Criterion { id: 8, title: "decoding within the correction radius", limit: secs(120) },
    ];
    let mut suite = Suite::default();
    let mut failed = 0;
    println!("acceptance: {} mode", if cde_core::par::is_parallel() { "parallel" } else { "sequential" });
    for c in &criteria {
        let start = Instant::now();
        let outcome = match c.id {
            1 => diameter_and_capability(),
            2 => six_client_scheme_verification(),
            3 => single_adversary_sweep(),
            4 => diameter_oracle(&mut suite),
            5 => rank_route_oracle(&mut suite),
            6 => converse_bound(&suite),
            7 => random_coding_bound(),
            8 => correction_radius(&suite),
            _ => unreachable!(),
        };
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed < l);
        let passed = outcome.passed && in_time;
        failed += usize::from(!passed);
        let limit = c.limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
        println!(
            "{} #{} {}: {} [{:.2}s, limit {}{}]",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            outcome.detail,
            elapsed.as_secs_f64(),
            limit,
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
