//! Second-quantized oracle: states are polynomials in creation operators,
//! and each element rewrites the creation operators of its input ports as
//! combinations of those of its output ports. Nothing here looks at paths.
//!
//! Coefficients are stored per creation monomial, so the single-mode state
//! `(a†)^2 |0>` has coefficient 1 while its norm is `2!`; the `sqrt(n!)`
//! measure is applied only when reading out probabilities.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::amplitude::{Amp, AmpError, ExactAmp};
use crate::circuit::{Circuit, CircuitError, Emitter, LABEL_H};
use crate::outcome::{Engine, ModeKey, Outcome, OutcomeTable};
use crate::sources::{InputSpec, InputState, SourceError};

/// Largest total photon number a state may carry.
pub const MAX_PHOTONS: u8 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Amp(#[from] AmpError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("state carries {found} photons, above the limit of {limit}")]
    TooManyPhotons { found: usize, limit: u8 },
    #[error("unknown input port `{0}`")]
    UnknownInput(String),
    #[error("state has zero norm")]
    ZeroNorm,
}

/// Global mode index: every wire of the circuit, times every internal label.
#[derive(Clone, Debug, PartialEq)]
pub struct FockSpace {
    emitters: Vec<Emitter>,
    labels: Vec<String>,
    index: BTreeMap<Emitter, usize>,
}

impl FockSpace {
    pub fn new(circuit: &Circuit, labels: &[String]) -> FockSpace {
        let mut emitters: Vec<Emitter> = (0..circuit.inputs.len()).map(Emitter::Input).collect();
        for (e, el) in circuit.elements.iter().enumerate() {
            for port in 0..el.kind.port_count() {
                emitters.push(Emitter::Out { element: e, port });
            }
        }
        let index = emitters.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut labels = labels.to_vec();
        labels.sort();
        labels.dedup();
        FockSpace { emitters, labels, index }
    }

    pub fn n_modes(&self) -> usize {
        self.emitters.len() * self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode(&self, emitter: Emitter, label: &str) -> Option<usize> {
        let l = self.labels.iter().position(|x| x == label)?;
        Some(self.index[&emitter] * self.labels.len() + l)
    }

    fn split(&self, mode: usize) -> (Emitter, &str) {
        let n = self.labels.len();
        (self.emitters[mode / n], &self.labels[mode % n])
    }
}

/// Sparse polynomial in creation operators applied to the vacuum.
#[derive(Clone, Debug, PartialEq)]
pub struct FockPoly {
    /// Cap on the total photon number.
    pub n_max: u8,
    terms: BTreeMap<Vec<u8>, Amp>,
}

fn factorial(n: u8) -> u64 {
    (1..=n as u64).product()
}

impl FockPoly {
    pub fn vacuum(space: &FockSpace, n_max: u8) -> FockPoly {
        FockPoly { n_max, terms: BTreeMap::from([(vec![0; space.n_modes()], Amp::ONE)]) }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, Amp> {
        &self.terms
    }

    /// `(occupation, coefficient)` records for debugging.
    pub fn dump(&self) -> Vec<(Vec<u8>, Amp)> {
        self.terms.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Applies `sum_k c_k a†_k` on the left.
    fn create(&self, combo: &[(usize, Amp)]) -> Result<FockPoly, FockError> {
        let mut out: BTreeMap<Vec<u8>, Amp> = BTreeMap::new();
        for (occ, c) in &self.terms {
            for &(mode, a) in combo {
                let mut occ = occ.clone();
                occ[mode] += 1;
                let slot = out.entry(occ).or_insert(Amp::ZERO);
                *slot = slot.add(&c.mul(&a)?)?;
            }
        }
        let p = FockPoly { n_max: self.n_max, terms: out };
        p.check_limit()?;
        Ok(p)
    }

    /// Product with a polynomial in one mode `sum_n c_n (a†)^n`.
    fn times_single_mode(&self, mode: usize, coeffs: &[Amp]) -> Result<FockPoly, FockError> {
        let mut out: BTreeMap<Vec<u8>, Amp> = BTreeMap::new();
        for (occ, c) in &self.terms {
            for (n, a) in coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut occ = occ.clone();
                occ[mode] += n as u8;
                let slot = out.entry(occ).or_insert(Amp::ZERO);
                *slot = slot.add(&c.mul(a)?)?;
            }
        }
        let p = FockPoly { n_max: self.n_max, terms: out };
        p.check_limit()?;
        Ok(p)
    }

    fn check_limit(&self) -> Result<(), FockError> {
        for occ in self.terms.keys() {
            let n: usize = occ.iter().map(|&x| x as usize).sum();
            if n > self.n_max as usize {
                return Err(FockError::TooManyPhotons { found: n, limit: self.n_max });
            }
        }
        Ok(())
    }

    /// `sum |c|^2 prod n_k!`.
    pub fn norm_sq(&self) -> Result<Amp, AmpError> {
        let mut acc = Amp::ZERO;
        for (occ, c) in &self.terms {
            let w: u64 = occ.iter().map(|&n| factorial(n)).product();
            acc = acc.add(&c.abs_sq()?.mul(&Amp::Exact(ExactAmp::from_int(w as i64)))?)?;
        }
        Ok(acc)
    }

    /// Keeps the terms with exactly `n` photons (not renormalized).
    pub fn project_sector(&self, n: usize) -> FockPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(occ, _)| occ.iter().map(|&x| x as usize).sum::<usize>() == n)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        FockPoly { n_max: self.n_max, terms }
    }

    fn prune(mut self) -> FockPoly {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }
}

/// Coefficients `N alpha^n / n!` of `(a†)^n` for the truncated coherent
/// state, with `N` restoring unit norm.
fn coherent_coefficients(alpha: Complex64, n_max: u8) -> Vec<Amp> {
    let norm: f64 = (0..=n_max).map(|n| alpha.norm_sqr().powi(n as i32) / factorial(n) as f64).sum();
    let scale = norm.sqrt().recip();
    (0..=n_max)
        .map(|n| {
            if n == 0 {
                // keeps the vacuum exact when alpha = 0
                if alpha.norm_sqr() == 0.0 {
                    Amp::ONE
                } else {
                    Amp::real(scale)
                }
            } else {
                Amp::Float(alpha.powi(n as i32) * scale / factorial(n) as f64)
            }
        })
        .collect()
}

/// Truncated, renormalized coherent state on input `port` (label `H`).
pub fn coherent_input(
    circuit: &Circuit,
    space: &FockSpace,
    port: &str,
    alpha: Complex64,
    n_max: u8,
) -> Result<FockPoly, FockError> {
    InputState::coherent(alpha, n_max)?;
    let input = circuit.input_index(port).ok_or_else(|| FockError::UnknownInput(port.to_string()))?;
    let mode = space.mode(Emitter::Input(input), LABEL_H).expect("space includes label H");
    FockPoly::vacuum(space, n_max).times_single_mode(mode, &coherent_coefficients(alpha, n_max)).map(FockPoly::prune)
}

/// Product state of every port in `inputs`, over a space holding all their labels.
pub fn from_inputs(circuit: &Circuit, inputs: &InputSpec) -> Result<(FockSpace, FockPoly), FockError> {
    inputs.check_ports(circuit)?;
    let mut labels = inputs.labels();
    if labels.is_empty() {
        labels.push(LABEL_H.to_string());
    }
    let space = FockSpace::new(circuit, &labels);
    let total: usize = inputs.ports().iter().map(|(_, s)| s.max_photons() as usize).sum();
    if total > MAX_PHOTONS as usize {
        return Err(FockError::TooManyPhotons { found: total, limit: MAX_PHOTONS });
    }
    let mut state = FockPoly::vacuum(&space, total as u8);
    for (port, s) in inputs.ports() {
        let input = circuit.input_index(port).ok_or_else(|| FockError::UnknownInput(port.clone()))?;
        match s {
            InputState::Vacuum => {}
            InputState::SinglePhoton(internal) => {
                let combo: Vec<(usize, Amp)> = internal
                    .components()
                    .iter()
                    .map(|(l, a)| (space.mode(Emitter::Input(input), l).expect("label in space"), *a))
                    .collect();
                state = state.create(&combo)?;
            }
            InputState::Coherent { alpha, n_max } => {
                let mode = space.mode(Emitter::Input(input), LABEL_H).expect("label in space");
                state = state.times_single_mode(mode, &coherent_coefficients(*alpha, *n_max))?;
            }
        }
    }
    Ok((space, state.prune()))
}

/// Substitutes every element in topological order.
pub fn evolve(circuit: &Circuit, space: &FockSpace, state: &FockPoly) -> Result<FockPoly, FockError> {
    evolve_with_order(circuit, space, state, None)
}

/// As [`evolve`], with ties in the topological order broken by `priority`.
pub fn evolve_with_order(
    circuit: &Circuit,
    space: &FockSpace,
    state: &FockPoly,
    priority: Option<&[usize]>,
) -> Result<FockPoly, FockError> {
    let topo = circuit.topology_with_order(priority)?;
    state.check_limit()?;
    let mut current = state.clone();
    for &e in &topo.order {
        let el = &circuit.elements[e];
        // substitution rule per (input mode) of this element
        let mut rules: Vec<(usize, Vec<(usize, Amp)>)> = Vec::new();
        for label in space.labels() {
            let couplings = el.couplings(label)?;
            for port in 0..el.kind.port_count() {
                let from = space.mode(topo.feeds[e][port as usize], label).expect("mode exists");
                let combo = couplings
                    .iter()
                    .filter(|c| c.input == port)
                    .map(|c| (space.mode(Emitter::Out { element: e, port: c.output }, label).expect("mode exists"), c.amp))
                    .collect();
                rules.push((from, combo));
            }
        }
        let mut next: BTreeMap<Vec<u8>, Amp> = BTreeMap::new();
        for (occ, c) in &current.terms {
            let mut rest = occ.clone();
            for (from, _) in &rules {
                rest[*from] = 0;
            }
            let mut partial = FockPoly { n_max: current.n_max, terms: BTreeMap::from([(rest, *c)]) };
            for (from, combo) in &rules {
                for _ in 0..occ[*from] {
                    partial = partial.create(combo)?;
                }
            }
            for (o, a) in partial.terms {
                let slot = next.entry(o).or_insert(Amp::ZERO);
                *slot = slot.add(&a)?;
            }
        }
        current = FockPoly { n_max: current.n_max, terms: next }.prune();
    }
    Ok(current)
}

/// Outcome probabilities of an evolved state, normalized by its norm. Labels
/// survive only at label-resolving detectors.
pub fn distribution(circuit: &Circuit, space: &FockSpace, state: &FockPoly) -> Result<OutcomeTable, FockError> {
    let topo = circuit.topology()?;
    let terminal_of: BTreeMap<Emitter, &str> =
        topo.terminal_feeds.iter().enumerate().map(|(t, &em)| (em, circuit.terminals[t].name.as_str())).collect();
    let resolving = circuit.resolving_terminals();
    let mut table = OutcomeTable::for_circuit(Engine::Fock, circuit);
    for (occ, c) in &state.terms {
        let mut fine = Outcome::empty();
        for (mode, &n) in occ.iter().enumerate() {
            if n > 0 {
                let (em, label) = space.split(mode);
                let terminal = terminal_of.get(&em).expect("evolved states live on terminal modes");
                fine.add(ModeKey::labeled(*terminal, label), n);
            }
        }
        let w = Amp::Exact(ExactAmp::from_int(fine.factorial_weight() as i64));
        table.accumulate(fine.keep_labels(|t| resolving.contains(t)), c.abs_sq()?.mul(&w)?)?;
    }
    let norm = state.norm_sq()?;
    if norm.is_zero() {
        return Err(FockError::ZeroNorm);
    }
    if norm != Amp::ONE {
        let inv = 1.0 / norm.value();
        for p in table.entries.values_mut() {
            *p = Amp::real(p.value() * inv);
        }
    }
    Ok(table)
}

/// Inputs through the circuit, read out as a table.
pub fn fock_distribution(circuit: &Circuit, inputs: &InputSpec) -> Result<OutcomeTable, FockError> {
    let (space, state) = from_inputs(circuit, inputs)?;
    let out = evolve(circuit, &space, &state)?;
    distribution(circuit, &space, &out)
}

/// Photon-number probabilities `P_0..=P_{n_max}` of a truncated coherent state.
pub fn coherent_number_distribution(alpha: Complex64, n_max: u8) -> Result<Vec<f64>, FockError> {
    InputState::coherent(alpha, n_max)?;
    Ok(coherent_coefficients(alpha, n_max)
        .iter()
        .enumerate()
        .map(|(n, c)| c.to_complex().norm_sqr() * factorial(n as u8) as f64)
        .collect())
}

/// Source-channel probabilities for two coherent inputs: `P_jk` is the
/// chance that source A emits `j` photons and source B emits `k`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoherentChannels {
    pub p00: f64,
    pub p11: f64,
    pub p20: f64,
    pub p02: f64,
}

impl CoherentChannels {
    /// Untruncated Poisson values.
    pub fn poisson(alpha: Complex64, beta: Complex64) -> CoherentChannels {
        let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
        let e = (-a2 - b2).exp();
        CoherentChannels { p00: e, p11: e * a2 * b2, p20: e * a2 * a2 / 2.0, p02: e * b2 * b2 / 2.0 }
    }

    /// Read off the truncated joint input state.
    pub fn from_state(state: &FockPoly, mode_a: usize, mode_b: usize) -> CoherentChannels {
        let mut ch = CoherentChannels { p00: 0.0, p11: 0.0, p20: 0.0, p02: 0.0 };
        for (occ, c) in state.terms() {
            let w: u64 = occ.iter().map(|&n| factorial(n)).product();
            let p = c.to_complex().norm_sqr() * w as f64;
            match (occ[mode_a], occ[mode_b]) {
                (0, 0) => ch.p00 += p,
                (1, 1) => ch.p11 += p,
                (2, 0) => ch.p20 += p,
                (0, 2) => ch.p02 += p,
                _ => {}
            }
        }
        ch
    }
}

/// Two coherent sources: input channel probabilities and the output
/// distribution conditioned on a two-photon detection event.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoherentReport {
    pub channels: CoherentChannels,
    pub poisson: CoherentChannels,
    /// Probability that exactly two photons leave the circuit.
    pub two_photon_probability: f64,
    pub conditional: OutcomeTable,
}

pub fn coherent_pair(
    circuit: &Circuit,
    port_a: &str,
    alpha: Complex64,
    port_b: &str,
    beta: Complex64,
    n_max: u8,
) -> Result<CoherentReport, FockError> {
    let inputs = InputSpec::new()
        .with(port_a, InputState::coherent(alpha, n_max)?)?
        .with(port_b, InputState::coherent(beta, n_max)?)?;
    let (space, state) = from_inputs(circuit, &inputs)?;
    let mode = |p: &str| -> Result<usize, FockError> {
        let i = circuit.input_index(p).ok_or_else(|| FockError::UnknownInput(p.to_string()))?;
        Ok(space.mode(Emitter::Input(i), LABEL_H).expect("label H present"))
    };
    let channels = CoherentChannels::from_state(&state, mode(port_a)?, mode(port_b)?);
    let out = evolve(circuit, &space, &state)?;
    let sector = out.project_sector(2);
    let two_photon_probability = sector.norm_sq()?.value();
    let conditional = distribution(circuit, &space, &sector)?;
    Ok(CoherentReport { channels, poisson: CoherentChannels::poisson(alpha, beta), two_photon_probability, conditional })
}
