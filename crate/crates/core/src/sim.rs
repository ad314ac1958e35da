//! Adversarial exchange simulation.
//!
//! Compromised clients replace their broadcast with an arbitrary field value.
//! Only honest clients are required to recover `X`; the compromised ones are
//! not decoded at all.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::codec::{random_encoding, verify_error_correction, CodecError, EncodingMatrix};
use crate::combinatorics::{binomial, for_each_subset};
use crate::decoder::{broadcast_all, decode_all, held_packets, DecodeError, DecodeResult, DecodeStatus};
use crate::field::{FieldVector, PrimeField};
use crate::model::CdeProblem;
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid adversary plan: {0}")]
    InvalidPlan(String),
    #[error("sweep needs {required} plans, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("at least one trial is required")]
    NoTrials,
}

/// Which clients lie, and what each one broadcasts instead.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AdversaryPlan {
    substitutions: BTreeMap<usize, u32>,
}

impl AdversaryPlan {
    pub fn honest() -> Self {
        Self::default()
    }

    pub fn with(mut self, client: usize, value: u32) -> Self {
        self.substitutions.insert(client, value);
        self
    }

    pub fn compromised(&self) -> impl Iterator<Item = usize> + '_ {
        self.substitutions.keys().copied()
    }

    pub fn is_compromised(&self, client: usize) -> bool {
        self.substitutions.contains_key(&client)
    }

    pub fn substitutions(&self) -> &BTreeMap<usize, u32> {
        &self.substitutions
    }

    pub fn len(&self) -> usize {
        self.substitutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.substitutions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "clients", rename_all = "snake_case")]
pub enum Verdict {
    AllRecovered,
    /// Honest clients that decoded ambiguously or wrongly.
    Violations(Vec<usize>),
}

impl Verdict {
    pub fn is_success(&self) -> bool {
        matches!(self, Verdict::AllRecovered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientOutcome {
    pub result: DecodeResult,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeTrace {
    pub x: FieldVector,
    pub honest: FieldVector,
    pub received: FieldVector,
    pub plan: AdversaryPlan,
    /// One entry per honest client, in client order.
    pub outcomes: Vec<ClientOutcome>,
    pub verdict: Verdict,
}

pub fn run_exchange(
    encoding: &EncodingMatrix,
    x: &FieldVector,
    plan: &AdversaryPlan,
    budget: u64,
) -> Result<ExchangeTrace, SimError> {
    let n = encoding.problem().n();
    let f = encoding.field();
    let honest = broadcast_all(encoding, x)?;
    let mut received = honest.clone();
    for (&client, &value) in plan.substitutions() {
        if client >= n {
            return Err(SimError::InvalidPlan(format!("client {} does not exist", client + 1)));
        }
        let v = f
            .element(value as u64)
            .map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        received.set(client, v).expect("same field");
    }
    let clients: Vec<usize> = (0..n).filter(|&j| !plan.is_compromised(j)).collect();
    let outcomes = par::map_slice(&clients, |&j| {
        decode_all(encoding, j, &received, &held_packets(encoding, x, j), budget).map(|result| {
            let correct = result.status == DecodeStatus::Unique && result.estimate == *x;
            ClientOutcome { result, correct }
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let bad: Vec<usize> = outcomes
        .iter()
        .filter(|o| !o.correct)
        .map(|o| o.result.client)
        .collect();
    Ok(ExchangeTrace {
        x: x.clone(),
        honest,
        received,
        plan: plan.clone(),
        outcomes,
        verdict: if bad.is_empty() {
            Verdict::AllRecovered
        } else {
            Verdict::Violations(bad)
        },
    })
}

/// Uniformly random packet contents, reproducible from `seed`.
pub fn random_packets(k: usize, field: PrimeField, seed: u64) -> FieldVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..k).map(|_| rng.random_range(0..field.modulus())).collect();
    FieldVector::new(field, values).expect("values are reduced")
}

/// Number of plans with at most `delta` compromised clients: `sum_s C(n,s) q^s`.
pub fn plan_count(n: usize, q: u32, delta: usize) -> u128 {
    (0..=delta.min(n))
        .map(|s| {
            (q as u128)
                .checked_pow(s as u32)
                .map_or(u128::MAX, |p| binomial(n, s).saturating_mul(p))
        })
        .fold(0u128, u128::saturating_add)
}

/// Every plan with at most `delta` liars, every liar trying every field value
/// (the honest value included). Smaller plans come first.
pub fn all_plans(n: usize, q: u32, delta: usize) -> Vec<AdversaryPlan> {
    let mut plans = Vec::new();
    for size in 0..=delta.min(n) {
        for_each_subset(n, size, |clients| {
            let mut values = vec![0u32; size];
            loop {
                let plan = clients
                    .iter()
                    .zip(&values)
                    .fold(AdversaryPlan::honest(), |p, (&c, &v)| p.with(c, v));
                plans.push(plan);
                let Some(pos) = (0..size).rev().find(|&p| values[p] + 1 < q) else {
                    break;
                };
                values[pos] += 1;
                values[pos + 1..].iter_mut().for_each(|v| *v = 0);
            }
            true
        });
    }
    plans
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanOutcome {
    pub plan: AdversaryPlan,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryCheck {
    pub delta: usize,
    pub passed: bool,
    pub plans_checked: u64,
    pub violating_plans: u64,
    /// First violating plan in enumeration order.
    pub witness: Option<PlanOutcome>,
    #[serde(skip)]
    pub outcomes: Vec<PlanOutcome>,
}

/// Runs every plan with at most `delta` compromised clients.
pub fn exhaustive_adversary_check(
    encoding: &EncodingMatrix,
    delta: usize,
    x: &FieldVector,
    budget: u64,
) -> Result<AdversaryCheck, SimError> {
    let n = encoding.problem().n();
    let q = encoding.field().modulus();
    let required = plan_count(n, q, delta);
    if required > budget as u128 {
        return Err(SimError::BudgetExceeded { required, budget });
    }
    let plans = all_plans(n, q, delta);
    let outcomes = par::map_slice(&plans, |plan| {
        run_exchange(encoding, x, plan, budget).map(|t| PlanOutcome {
            plan: plan.clone(),
            verdict: t.verdict,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let violating_plans = outcomes.iter().filter(|o| !o.verdict.is_success()).count() as u64;
    Ok(AdversaryCheck {
        delta,
        passed: violating_plans == 0,
        plans_checked: outcomes.len() as u64,
        violating_plans,
        witness: outcomes.iter().find(|o| !o.verdict.is_success()).cloned(),
        outcomes,
    })
}

/// Confidence level used for every interval in [`MonteCarloStats`].
pub const CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloStats {
    pub trials: u64,
    pub passes: u64,
    pub pass_fraction: f64,
    /// Two-sided Clopper-Pearson interval at [`CONFIDENCE`].
    pub ci_low: f64,
    pub ci_high: f64,
    /// One-sided Clopper-Pearson upper bound at [`CONFIDENCE`].
    pub one_sided_upper: f64,
    pub degree_bound: String,
    /// `max(0, 1 - d/q)`.
    pub theoretical_floor: f64,
    /// False iff the data reject "true pass rate >= floor" at the 1% level.
    pub consistent_with_floor: bool,
}

fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    Beta::new(a, b).expect("positive shape parameters").inverse_cdf(p)
}

/// Clopper-Pearson bounds `(two-sided low, two-sided high, one-sided high)`.
pub fn clopper_pearson(passes: u64, trials: u64, confidence: f64) -> (f64, f64, f64) {
    let (x, n) = (passes as f64, trials as f64);
    let alpha = 1.0 - confidence;
    let low = if passes == 0 {
        0.0
    } else {
        beta_quantile(x, n - x + 1.0, alpha / 2.0)
    };
    let (high, one_sided) = if passes == trials {
        (1.0, 1.0)
    } else {
        (
            beta_quantile(x + 1.0, n - x, 1.0 - alpha / 2.0),
            beta_quantile(x + 1.0, n - x, confidence),
        )
    };
    (low, high, one_sided)
}

/// Draws `trials` random encodings (trial `i` uses seed `seed + i`) and counts
/// how many correct `delta` errors.
pub fn monte_carlo_success_rate(
    problem: &CdeProblem,
    field: PrimeField,
    delta: usize,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<MonteCarloStats, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let degree = analysis::char_poly_degree_bound(problem, budget)?;
    let q = field.modulus() as u64;
    let theoretical_floor = match u64::try_from(&degree) {
        Ok(d) if d < q => 1.0 - d as f64 / q as f64,
        _ => 0.0,
    };
    let verdicts = par::map_range(0..trials, |i| {
        let e = random_encoding(problem, field, seed.wrapping_add(i));
        verify_error_correction(&e, delta, budget).map(|r| r.passed)
    });
    let mut passes = 0;
    for v in verdicts {
        passes += v? as u64;
    }
    let (ci_low, ci_high, one_sided_upper) = clopper_pearson(passes, trials, CONFIDENCE);
    Ok(MonteCarloStats {
        trials,
        passes,
        pass_fraction: passes as f64 / trials as f64,
        ci_low,
        ci_high,
        one_sided_upper,
        degree_bound: degree.to_string(),
        theoretical_floor,
        consistent_with_floor: one_sided_upper >= theoretical_floor,
    })
}
