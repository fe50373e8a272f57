//! Coincidence extraction, seeded trial sampling and Clopper-Pearson
//! interval analysis.
//!
//! Trial `k` of a run with seed `s` reads the 64-bit word at position `2k`
//! of the ChaCha8 keystream keyed by `s`. Every trial is therefore a pure
//! function of `(s, k)`, and counts do not depend on how the trial range is
//! split across threads.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{Amp, AmpError};
use crate::outcome::{ModeKey, Outcome, OutcomeTable};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 2024;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("number of trials must be at least 1")]
    NoTrials,
    #[error("successes {successes} exceed trials {trials}")]
    TooManySuccesses { successes: u64, trials: u64 },
    #[error("confidence {0} is outside (0, 1)")]
    Confidence(f64),
    #[error("table has no outcome with positive probability")]
    EmptyTable,
    #[error(transparent)]
    Amp(#[from] AmpError),
}

/// Probability that each named detector fires with exactly as many photons
/// as it is named (`["D1", "D1"]` asks for two photons at `D1`).
pub fn coincidence(table: &OutcomeTable, detectors: &[&str]) -> Result<Amp, StatsError> {
    let mut want: BTreeMap<&str, u8> = BTreeMap::new();
    for d in detectors {
        if !table.has_terminal(d) {
            return Err(StatsError::UnknownDetector(d.to_string()));
        }
        *want.entry(*d).or_insert(0) += 1;
    }
    let hits: Vec<Amp> = table
        .iter()
        .filter(|(o, _)| want.iter().all(|(d, &n)| o.count_at(d) == n))
        .map(|(_, p)| *p)
        .collect();
    Ok(Amp::sum(&hits)?)
}

/// Probability of two photons at `detector`.
pub fn bunched(table: &OutcomeTable, detector: &str) -> Result<Amp, StatsError> {
    coincidence(table, &[detector, detector])
}

/// Probability that at least one photon ends at a loss terminal.
pub fn loss_probability(table: &OutcomeTable) -> Result<Amp, StatsError> {
    let hits: Vec<Amp> = table.iter().filter(|(o, _)| !table.is_loss_free(o)).map(|(_, p)| *p).collect();
    Ok(Amp::sum(&hits)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub counts: BTreeMap<Outcome, u64>,
    pub trials: u64,
    pub seed: u64,
}

impl TrialCounts {
    pub fn count(&self, outcome: &Outcome) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }
}

fn uniform(seed: u64, trial: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(trial as u128 * 2);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `trials` independent draws from the table.
pub fn sample(table: &OutcomeTable, trials: u64, seed: u64) -> Result<TrialCounts, StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    let outcomes: Vec<&Outcome> = table.entries.keys().collect();
    let mut cumulative = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for p in table.entries.values() {
        acc += p.value().max(0.0);
        cumulative.push(acc);
    }
    let last_positive = table.entries.values().rposition(|p| p.value() > 0.0).ok_or(StatsError::EmptyTable)?;
    // scale so rounding in the total cannot strand a draw past the end
    let total = acc;
    let pick = |u: f64| -> usize {
        let x = u * total;
        cumulative.partition_point(|&c| c <= x).min(last_positive)
    };
    let chunks: Vec<u64> = (0..trials.div_ceil(CHUNK)).collect();
    let counts = chunks
        .par_iter()
        .map(|&c| {
            let mut local = vec![0u64; outcomes.len()];
            for k in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                local[pick(uniform(seed, k))] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; outcomes.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(TrialCounts {
        counts: outcomes.into_iter().cloned().zip(counts).collect(),
        trials,
        seed,
    })
}

/// `ln C(n, k)` via running log sums.
fn ln_choose_table(n: u64) -> Vec<f64> {
    let mut ln_fact = Vec::with_capacity(n as usize + 1);
    ln_fact.push(0.0);
    for i in 1..=n {
        ln_fact.push(ln_fact[i as usize - 1] + (i as f64).ln());
    }
    (0..=n).map(|k| ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize]).collect()
}

/// `P(X <= k)` for `X ~ Binomial(n, p)`, summed in the log domain.
fn binomial_cdf(ln_choose: &[f64], k: u64, p: f64) -> f64 {
    let n = ln_choose.len() as u64 - 1;
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let terms: Vec<f64> = (0..=k).map(|i| ln_choose[i as usize] + i as f64 * lp + (n - i) as f64 * lq).collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()).exp().min(1.0)
}

/// Root of a decreasing function on [0, 1] by bisection.
fn bisect(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact binomial interval from inverted binomial tails.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64), StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    if successes > trials {
        return Err(StatsError::TooManySuccesses { successes, trials });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::Confidence(confidence));
    }
    let tail = (1.0 - confidence) / 2.0;
    let ln_choose = ln_choose_table(trials);
    // P(X >= k) = 1 - P(X <= k - 1) grows with p; P(X <= k) falls with p
    let lo = if successes == 0 {
        0.0
    } else {
        bisect(|p| binomial_cdf(&ln_choose, successes - 1, p), 1.0 - tail)
    };
    let hi = if successes == trials { 1.0 } else { bisect(|p| binomial_cdf(&ln_choose, successes, p), tail) };
    Ok((lo, hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub outcome: String,
    pub p_true: f64,
    pub count: u64,
    pub p_hat: f64,
    pub cp_lo: f64,
    pub cp_hi: f64,
    pub contains: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    pub rows: Vec<StudyRow>,
}

/// Name of the row aggregating every outcome with a lost photon.
pub const LOST: &str = "lost";

/// Every way to put `k` photons on `detectors`, as outcomes.
fn detection_events(detectors: &[String], k: usize) -> Vec<Outcome> {
    fn rec(detectors: &[String], start: usize, left: usize, cur: &mut Outcome, out: &mut Vec<Outcome>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..detectors.len() {
            let mut next = cur.clone();
            next.add(ModeKey::terminal(detectors[i].clone()), 1);
            rec(detectors, i, left - 1, &mut next, out);
        }
    }
    let mut out = Vec::new();
    rec(detectors, 0, k, &mut Outcome::empty(), &mut out);
    out
}

impl StudyReport {
    /// Samples the label-free table and compares every loss-free detection
    /// event, plus the aggregate loss, against its interval.
    pub fn run(table: &OutcomeTable, trials: u64, seed: u64, confidence: f64) -> Result<StudyReport, StatsError> {
        let table = table.coarse()?;
        let counts = sample(&table, trials, seed)?;
        let events = detection_events(&table.detectors, table.photon_number());
        let mut rows = Vec::with_capacity(events.len() + 1);
        let mut row = |name: String, p_true: f64, count: u64| -> Result<(), StatsError> {
            let (cp_lo, cp_hi) = clopper_pearson(count, trials, confidence)?;
            rows.push(StudyRow {
                outcome: name,
                p_true,
                count,
                p_hat: count as f64 / trials as f64,
                cp_lo,
                cp_hi,
                contains: cp_lo <= p_true && p_true <= cp_hi,
            });
            Ok(())
        };
        for e in events {
            row(e.to_string(), table.p(&e), counts.count(&e))?;
        }
        if !table.loss_terminals.is_empty() {
            let lost: u64 = counts.counts.iter().filter(|(o, _)| !table.is_loss_free(o)).map(|(_, n)| n).sum();
            row(LOST.to_string(), loss_probability(&table)?.value(), lost)?;
        }
        Ok(StudyReport { trials, seed, confidence, rows })
    }

    /// Fraction of rows with `0 < p_true < 1` whose interval contains the truth.
    pub fn coverage(&self) -> f64 {
        let live: Vec<&StudyRow> = self.rows.iter().filter(|r| r.p_true > 0.0 && r.p_true < 1.0).collect();
        if live.is_empty() {
            return 1.0;
        }
        live.iter().filter(|r| r.contains).count() as f64 / live.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
