//! Detection outcomes and probability tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{Amp, AmpError};
use crate::circuit::Circuit;

/// A terminal, refined by an internal label when its detector resolves labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeKey {
    pub terminal: String,
    pub label: Option<String>,
}

impl ModeKey {
    pub fn terminal(name: impl Into<String>) -> ModeKey {
        ModeKey { terminal: name.into(), label: None }
    }

    pub fn labeled(name: impl Into<String>, label: impl Into<String>) -> ModeKey {
        ModeKey { terminal: name.into(), label: Some(label.into()) }
    }

    pub fn coarse(&self) -> ModeKey {
        ModeKey::terminal(self.terminal.clone())
    }
}

impl fmt::Display for ModeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{}[{l}]", self.terminal),
            None => write!(f, "{}", self.terminal),
        }
    }
}

/// Occupation pattern over terminal modes. Zero counts are never stored.
///
/// Rendered as `D1^2,D4` or `D1[H],D4[V]`; the empty pattern is `vac`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(BTreeMap<ModeKey, u8>);

impl Outcome {
    pub fn empty() -> Outcome {
        Outcome::default()
    }

    /// One photon at each named terminal (repeats add up).
    pub fn of(terminals: &[&str]) -> Outcome {
        let mut o = Outcome::empty();
        for t in terminals {
            o.add(ModeKey::terminal(*t), 1);
        }
        o
    }

    pub fn add(&mut self, mode: ModeKey, count: u8) {
        if count > 0 {
            *self.0.entry(mode).or_insert(0) += count;
        }
    }

    pub fn modes(&self) -> &BTreeMap<ModeKey, u8> {
        &self.0
    }

    pub fn photon_count(&self) -> usize {
        self.0.values().map(|&n| n as usize).sum()
    }

    /// Photons at `terminal`, over all labels.
    pub fn count_at(&self, terminal: &str) -> u8 {
        self.0.iter().filter(|(k, _)| k.terminal == terminal).map(|(_, &n)| n).sum()
    }

    pub fn terminals(&self) -> impl Iterator<Item = &str> {
        let mut names: Vec<&str> = self.0.keys().map(|k| k.terminal.as_str()).collect();
        names.dedup();
        names.into_iter()
    }

    /// Drops every label.
    pub fn coarse(&self) -> Outcome {
        self.keep_labels(|_| false)
    }

    /// Keeps labels only at terminals for which `resolving` holds.
    pub fn keep_labels(&self, resolving: impl Fn(&str) -> bool) -> Outcome {
        let mut o = Outcome::empty();
        for (k, &n) in &self.0 {
            let key = if resolving(&k.terminal) { k.clone() } else { k.coarse() };
            o.add(key, n);
        }
        o
    }

    /// `n!` product over modes.
    pub fn factorial_weight(&self) -> u64 {
        self.0.values().map(|&n| (1..=n as u64).product::<u64>()).product()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "vac");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, &n)| if n == 1 { k.to_string() } else { format!("{k}^{n}") })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse outcome `{0}`")]
pub struct OutcomeParseError(pub String);

impl FromStr for Outcome {
    type Err = OutcomeParseError;

    fn from_str(s: &str) -> Result<Outcome, OutcomeParseError> {
        let err = || OutcomeParseError(s.to_string());
        let s = s.trim();
        let mut o = Outcome::empty();
        if s == "vac" {
            return Ok(o);
        }
        for part in s.split(',') {
            let part = part.trim();
            let (mode, count) = match part.rsplit_once('^') {
                Some((m, c)) => (m, c.parse::<u8>().map_err(|_| err())?),
                None => (part, 1),
            };
            let key = match mode.strip_suffix(']').and_then(|m| m.split_once('[')) {
                Some((t, l)) if !t.is_empty() && !l.is_empty() => ModeKey::labeled(t, l),
                _ if !mode.is_empty() && !mode.contains(['[', ']']) => ModeKey::terminal(mode),
                _ => return Err(err()),
            };
            if count == 0 {
                return Err(err());
            }
            o.add(key, count);
        }
        Ok(o)
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Outcome, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which computation produced a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Path,
    Fock,
    SemiNaive,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Path => "path",
            Engine::Fock => "fock",
            Engine::SemiNaive => "semi_naive",
        })
    }
}

/// Probabilities per outcome, loss outcomes included. Probabilities are real
/// amplitudes so they stay exact whenever the circuit is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    pub engine: Engine,
    /// Detector names, in circuit order.
    pub detectors: Vec<String>,
    /// Loss terminal names, in circuit order.
    pub loss_terminals: Vec<String>,
    pub entries: BTreeMap<Outcome, Amp>,
}

impl OutcomeTable {
    pub fn new(engine: Engine, detectors: Vec<String>, loss_terminals: Vec<String>) -> OutcomeTable {
        OutcomeTable { engine, detectors, loss_terminals, entries: BTreeMap::new() }
    }

    pub fn for_circuit(engine: Engine, circuit: &Circuit) -> OutcomeTable {
        let names = |loss: bool| {
            circuit.terminals.iter().filter(|t| t.is_loss() == loss).map(|t| t.name.clone()).collect()
        };
        OutcomeTable::new(engine, names(false), names(true))
    }

    pub fn has_terminal(&self, name: &str) -> bool {
        self.detectors.iter().chain(&self.loss_terminals).any(|t| t == name)
    }

    /// Largest photon number among the outcomes.
    pub fn photon_number(&self) -> usize {
        self.entries.keys().map(Outcome::photon_count).max().unwrap_or(0)
    }

    pub fn accumulate(&mut self, outcome: Outcome, p: Amp) -> Result<(), AmpError> {
        let slot = self.entries.entry(outcome).or_insert(Amp::ZERO);
        *slot = slot.add(&p)?;
        Ok(())
    }

    pub fn prob(&self, outcome: &Outcome) -> Amp {
        self.entries.get(outcome).copied().unwrap_or(Amp::ZERO)
    }

    /// Probability of `outcome` as `f64`.
    pub fn p(&self, outcome: &Outcome) -> f64 {
        self.prob(outcome).value()
    }

    pub fn total(&self) -> Result<Amp, AmpError> {
        Amp::sum(self.entries.values())
    }

    pub fn is_exact(&self) -> bool {
        self.entries.values().all(Amp::is_exact)
    }

    pub fn is_loss_free(&self, outcome: &Outcome) -> bool {
        self.loss_terminals.iter().all(|t| outcome.count_at(t) == 0)
    }

    /// Same table with every label summed out.
    pub fn coarse(&self) -> Result<OutcomeTable, AmpError> {
        let mut t = OutcomeTable::new(self.engine, self.detectors.clone(), self.loss_terminals.clone());
        for (o, p) in &self.entries {
            t.accumulate(o.coarse(), *p)?;
        }
        Ok(t)
    }

    /// Drops zero entries.
    pub fn prune(mut self) -> OutcomeTable {
        self.entries.retain(|_, p| !p.is_zero());
        self
    }

    /// Largest entrywise difference, over the union of outcomes.
    pub fn max_discrepancy(&self, other: &OutcomeTable) -> f64 {
        self.entries
            .keys()
            .chain(other.entries.keys())
            .map(|o| (self.p(o) - other.p(o)).abs())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, &Amp)> {
        self.entries.iter()
    }
}
