//! The counting method: enumerate every single-photon path, multiply the
//! per-element factors along it (`t` on transmission, `i r` on reflection),
//! and add the products of path amplitudes over all photon-to-path
//! assignments that produce the same detection pattern.
//!
//! Internal labels enter as extra mode indices. Photon `p` with internal
//! state `psi_p` reaches terminal `j` in label `l` with amplitude
//! `psi_p[l] * A_l(j <- s_p)`. The coefficient of an output occupation is the
//! sum over assignments of the products of these amplitudes (a permanent);
//! the normalized amplitude carries an extra `sqrt(prod n_k!)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{Amp, AmpError, ExactAmp};
use crate::circuit::{Action, Circuit, CircuitError, Emitter, Receiver, Topology};
use crate::outcome::{Engine, ModeKey, Outcome, OutcomeTable};
use crate::sources::{InputSpec, InputState, SourceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Amp(#[from] AmpError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("unknown input port `{0}`")]
    UnknownInput(String),
    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),
    #[error("outcome has {found} photons, the input has {expected}")]
    PhotonCount { expected: usize, found: usize },
    #[error("the path engine handles vacuum and single-photon inputs only (port `{0}`)")]
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub element: String,
    pub action: Action,
}

/// One route of a single photon from an input to a terminal.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTrace {
    pub source: String,
    pub label: String,
    pub steps: Vec<Step>,
    pub terminal: String,
    pub amp: Amp,
}

impl PathTrace {
    /// `N_r`: the amplitude's phase is `i^{N_r}` for beam splitters and mirrors.
    pub fn reflections(&self) -> usize {
        self.steps.iter().filter(|s| s.action == Action::Reflect).count()
    }

    pub fn passes(&self, element: &str) -> bool {
        self.steps.iter().any(|s| s.element == element)
    }
}

/// Paths of an `H` photon, transmission explored before reflection.
pub fn enumerate_paths(circuit: &Circuit, source: &str) -> Result<Vec<PathTrace>, PathError> {
    enumerate_paths_for(circuit, source, crate::circuit::LABEL_H)
}

/// Paths of a photon carrying `label`. Zero-amplitude steps are pruned.
pub fn enumerate_paths_for(circuit: &Circuit, source: &str, label: &str) -> Result<Vec<PathTrace>, PathError> {
    let topo = circuit.topology()?;
    enumerate_with(circuit, &topo, source, label)
}

fn enumerate_with(circuit: &Circuit, topo: &Topology, source: &str, label: &str) -> Result<Vec<PathTrace>, PathError> {
    let input = circuit.input_index(source).ok_or_else(|| PathError::UnknownInput(source.to_string()))?;
    let couplings = circuit
        .elements
        .iter()
        .map(|el| el.couplings(label))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    let mut steps = Vec::new();
    walk(circuit, topo, &couplings, Emitter::Input(input), Amp::ONE, &mut steps, &mut |steps, terminal, amp| {
        out.push(PathTrace {
            source: source.to_string(),
            label: label.to_string(),
            steps: steps.to_vec(),
            terminal: circuit.terminals[terminal].name.clone(),
            amp,
        });
    })?;
    Ok(out)
}

fn walk(
    circuit: &Circuit,
    topo: &Topology,
    couplings: &[Vec<crate::circuit::Coupling>],
    from: Emitter,
    amp: Amp,
    steps: &mut Vec<Step>,
    emit: &mut dyn FnMut(&[Step], usize, Amp),
) -> Result<(), PathError> {
    match topo.route[&from] {
        Receiver::Terminal(t) => emit(steps, t, amp),
        Receiver::In { element, port } => {
            for c in couplings[element].iter().filter(|c| c.input == port) {
                steps.push(Step { element: circuit.elements[element].name.clone(), action: c.action });
                let next = amp.mul(&c.amp)?;
                walk(circuit, topo, couplings, Emitter::Out { element, port: c.output }, next, steps, emit)?;
                steps.pop();
            }
        }
    }
    Ok(())
}

/// Sum of path amplitudes from `source` to `terminal` for an `H` photon.
pub fn single_photon_amplitude(circuit: &Circuit, source: &str, terminal: &str) -> Result<Amp, PathError> {
    if circuit.terminal_index(terminal).is_none() {
        return Err(PathError::UnknownTerminal(terminal.to_string()));
    }
    let paths = enumerate_paths(circuit, source)?;
    let amps: Vec<Amp> = paths.iter().filter(|p| p.terminal == terminal).map(|p| p.amp).collect();
    Ok(Amp::sum(&amps)?)
}

/// Per-photon amplitudes over fine modes (terminal, label).
#[derive(Clone, Debug)]
struct PhotonAmps {
    source: String,
    modes: Vec<(ModeKey, Amp)>,
}

fn photon_amps(circuit: &Circuit, inputs: &InputSpec) -> Result<Vec<PhotonAmps>, PathError> {
    let topo = circuit.topology()?;
    inputs.check_ports(circuit)?;
    let mut photons = Vec::new();
    for (port, state) in inputs.ports() {
        let internal = match state {
            InputState::Vacuum => continue,
            InputState::SinglePhoton(s) => s,
            InputState::Coherent { .. } => return Err(PathError::Unsupported(port.clone())),
        };
        let mut acc: BTreeMap<ModeKey, Amp> = BTreeMap::new();
        for (label, weight) in internal.components() {
            for path in enumerate_with(circuit, &topo, port, label)? {
                let key = ModeKey::labeled(path.terminal.clone(), label.clone());
                let slot = acc.entry(key).or_insert(Amp::ZERO);
                *slot = slot.add(&weight.mul(&path.amp)?)?;
            }
        }
        acc.retain(|_, a| !a.is_zero());
        photons.push(PhotonAmps { source: port.clone(), modes: acc.into_iter().collect() });
    }
    Ok(photons)
}

/// One photon-to-mode assignment and the product of its amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessAssignment {
    /// `(source port, final mode, single-photon amplitude)` per photon.
    pub photons: Vec<(String, ModeKey, Amp)>,
    pub product: Amp,
}

/// Called with each photon-to-mode choice and its amplitude product.
type Visit<'a> = dyn FnMut(&[usize], Amp) -> Result<(), PathError> + 'a;

fn for_each_assignment(
    photons: &[PhotonAmps],
    f: &mut Visit,
) -> Result<(), PathError> {
    fn rec(
        photons: &[PhotonAmps],
        choice: &mut Vec<usize>,
        amp: Amp,
        f: &mut Visit,
    ) -> Result<(), PathError> {
        let p = choice.len();
        if p == photons.len() {
            return f(choice, amp);
        }
        for (k, (_, a)) in photons[p].modes.iter().enumerate() {
            choice.push(k);
            rec(photons, choice, amp.mul(a)?, f)?;
            choice.pop();
        }
        Ok(())
    }
    rec(photons, &mut Vec::with_capacity(photons.len()), Amp::ONE, f)
}

fn fine_outcome(photons: &[PhotonAmps], choice: &[usize]) -> Outcome {
    let mut o = Outcome::empty();
    for (p, &k) in choice.iter().enumerate() {
        o.add(photons[p].modes[k].0.clone(), 1);
    }
    o
}

/// Creation-monomial coefficients of the output state, keyed by fully
/// labelled outcome. Entries reached by some assignment are kept even when
/// the assignments cancel.
fn coefficients(photons: &[PhotonAmps]) -> Result<BTreeMap<Outcome, Amp>, PathError> {
    let mut coef: BTreeMap<Outcome, Amp> = BTreeMap::new();
    for_each_assignment(photons, &mut |choice, amp| {
        let slot = coef.entry(fine_outcome(photons, choice)).or_insert(Amp::ZERO);
        *slot = slot.add(&amp)?;
        Ok(())
    })?;
    Ok(coef)
}

/// Assignments whose fully labelled outcome is `outcome`.
pub fn process_assignments(
    circuit: &Circuit,
    inputs: &InputSpec,
    outcome: &Outcome,
) -> Result<Vec<ProcessAssignment>, PathError> {
    let photons = photon_amps(circuit, inputs)?;
    check_count(photons.len(), outcome)?;
    let mut out = Vec::new();
    for_each_assignment(&photons, &mut |choice, product| {
        let fine = fine_outcome(&photons, choice);
        if matches_query(&fine, outcome) {
            let photons = choice
                .iter()
                .enumerate()
                .map(|(p, &k)| {
                    let (mode, a) = &photons[p].modes[k];
                    (photons[p].source.clone(), mode.clone(), *a)
                })
                .collect();
            out.push(ProcessAssignment { photons, product });
        }
        Ok(())
    })?;
    Ok(out)
}

fn check_count(expected: usize, outcome: &Outcome) -> Result<(), PathError> {
    if outcome.photon_count() != expected {
        return Err(PathError::PhotonCount { expected, found: outcome.photon_count() });
    }
    Ok(())
}

/// A fine outcome matches a query when they agree after dropping labels at
/// the terminals the query leaves unlabelled.
fn matches_query(fine: &Outcome, query: &Outcome) -> bool {
    let labelled: Vec<&str> =
        query.modes().keys().filter(|k| k.label.is_some()).map(|k| k.terminal.as_str()).collect();
    fine.keep_labels(|t| labelled.contains(&t)) == *query
}

fn bose_factor(fine: &Outcome) -> Amp {
    Amp::sqrt_int(fine.factorial_weight())
}

/// Normalized amplitudes of every fully labelled outcome compatible with
/// `outcome`, including the `sqrt(n!)` enhancement for shared modes.
pub fn outcome_amplitudes(
    circuit: &Circuit,
    inputs: &InputSpec,
    outcome: &Outcome,
) -> Result<BTreeMap<Outcome, Amp>, PathError> {
    let photons = photon_amps(circuit, inputs)?;
    check_count(photons.len(), outcome)?;
    let mut out = BTreeMap::new();
    for (fine, c) in coefficients(&photons)? {
        if matches_query(&fine, outcome) {
            let a = c.mul(&bose_factor(&fine))?;
            out.insert(fine, a);
        }
    }
    Ok(out)
}

/// Probabilities of every outcome, loss included. Labels survive only at
/// label-resolving detectors.
pub fn full_distribution(circuit: &Circuit, inputs: &InputSpec) -> Result<OutcomeTable, PathError> {
    let photons = photon_amps(circuit, inputs)?;
    let resolving = circuit.resolving_terminals();
    let mut table = OutcomeTable::for_circuit(Engine::Path, circuit);
    for (fine, c) in coefficients(&photons)? {
        let weight = Amp::Exact(ExactAmp::from_int(fine.factorial_weight() as i64));
        let p = c.abs_sq()?.mul(&weight)?;
        table.accumulate(fine.keep_labels(|t| resolving.contains(t)), p)?;
    }
    Ok(table)
}

/// Photons treated as independent classical particles: probabilities, not
/// amplitudes, of the labelled assignments are added.
pub fn seminaive_distribution(circuit: &Circuit, inputs: &InputSpec) -> Result<OutcomeTable, PathError> {
    let photons = photon_amps(circuit, inputs)?;
    let resolving = circuit.resolving_terminals();
    // per-photon probabilities over observed modes
    let mut observed = Vec::with_capacity(photons.len());
    for p in &photons {
        let mut m: BTreeMap<ModeKey, Amp> = BTreeMap::new();
        for (k, a) in &p.modes {
            let key = if resolving.contains(&k.terminal) { k.clone() } else { k.coarse() };
            let slot = m.entry(key).or_insert(Amp::ZERO);
            *slot = slot.add(&a.abs_sq()?)?;
        }
        observed.push(PhotonAmps { source: p.source.clone(), modes: m.into_iter().collect() });
    }
    let mut table = OutcomeTable::for_circuit(Engine::SemiNaive, circuit);
    for_each_assignment(&observed, &mut |choice, prob| {
        table.accumulate(fine_outcome(&observed, choice), prob)?;
        Ok(())
    })?;
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub overlap: Amp,
    pub table: OutcomeTable,
}

/// Full distribution with the first photon in `H` and the second in
/// `c H + sqrt(1 - |c|^2) V`, for each `c` on the grid.
pub fn partial_distinguishability_curve(
    circuit: &Circuit,
    first: &str,
    second: &str,
    grid: &[Amp],
) -> Result<Vec<CurvePoint>, PathError> {
    grid.par_iter()
        .map(|&c| {
            let inputs = InputSpec::pair_with_overlap(first, second, c)?;
            Ok(CurvePoint { overlap: c, table: full_distribution(circuit, &inputs)? })
        })
        .collect()
}

/// Outer, zigzag and crossing amplitudes of the double interferometer.
///
/// From the left source: `O` reaches `D2` through `bsm_L`, `Z` reaches `D2`
/// through `bsc`, `C` reaches `D3`. The right source mirrors this.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyPathAmps {
    pub o_l: Amp,
    pub z_l: Amp,
    pub c_l: Amp,
    pub o_r: Amp,
    pub z_r: Amp,
    pub c_r: Amp,
}

impl HardyPathAmps {
    /// Reads the three named amplitudes off the path listings of a circuit
    /// built by [`crate::circuit::build_double_mzi`].
    pub fn from_circuit(circuit: &Circuit) -> Result<HardyPathAmps, PathError> {
        let left = enumerate_paths(circuit, "L")?;
        let right = enumerate_paths(circuit, "R")?;
        let pick = |paths: &[PathTrace], terminal: &str, via: Option<&str>| -> Result<Amp, PathError> {
            let amps: Vec<Amp> = paths
                .iter()
                .filter(|p| p.terminal == terminal && via.is_none_or(|v| p.passes(v)))
                .map(|p| p.amp)
                .collect();
            Ok(Amp::sum(&amps)?)
        };
        Ok(HardyPathAmps {
            o_l: pick(&left, "D2", Some("bsm_L"))?,
            z_l: pick(&left, "D2", Some("bsc"))?,
            c_l: pick(&left, "D3", None)?,
            o_r: pick(&right, "D3", Some("bsm_R"))?,
            z_r: pick(&right, "D3", Some("bsc"))?,
            c_r: pick(&right, "D2", None)?,
        })
    }

    /// `(O_L + Z_L)(O_R + Z_R) + C_L C_R`.
    pub fn a23(&self) -> Result<Amp, AmpError> {
        let l = self.o_l.add(&self.z_l)?;
        let r = self.o_r.add(&self.z_r)?;
        l.mul(&r)?.add(&self.c_l.mul(&self.c_r)?)
    }

    /// True when single-photon interference empties `D2` for the left photon
    /// and `D3` for the right one.
    pub fn mzi_holds(&self) -> Result<bool, AmpError> {
        Ok(self.o_l.add(&self.z_l)?.is_zero() && self.o_r.add(&self.z_r)?.is_zero())
    }

    /// True when the two zigzag-zigzag and crossing-crossing alternatives cancel.
    pub fn homi_holds(&self) -> Result<bool, AmpError> {
        Ok(self.z_l.mul(&self.z_r)?.add(&self.c_l.mul(&self.c_r)?)?.is_zero())
    }

    /// `C_L C_R`, equal to [`HardyPathAmps::a23`] when [`HardyPathAmps::mzi_holds`].
    pub fn mzi_reduction(&self) -> Result<Amp, AmpError> {
        self.c_l.mul(&self.c_r)
    }

    /// `O_L O_R + O_L Z_R + Z_L O_R`, equal to [`HardyPathAmps::a23`] when
    /// [`HardyPathAmps::homi_holds`].
    pub fn homi_reduction(&self) -> Result<Amp, AmpError> {
        let oo = self.o_l.mul(&self.o_r)?;
        let oz = self.o_l.mul(&self.z_r)?;
        let zo = self.z_l.mul(&self.o_r)?;
        oo.add(&oz)?.add(&zo)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub steps: Vec<Step>,
    pub terminal: String,
    pub reflections: usize,
    /// `[a,b,c,d,m]` when exact, `[re, im]` otherwise.
    pub amp: Amp,
    pub amp_text: String,
}

/// Structured listing of the paths from one source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathListing {
    pub circuit: String,
    pub source: String,
    pub label: String,
    pub paths: Vec<PathRecord>,
    /// Summed amplitude per terminal, in terminal order.
    pub totals: Vec<(String, Amp)>,
}

impl PathListing {
    pub fn new(circuit: &Circuit, source: &str, label: &str) -> Result<PathListing, PathError> {
        let paths = enumerate_paths_for(circuit, source, label)?;
        let mut totals = Vec::new();
        for t in &circuit.terminals {
            let amps: Vec<Amp> = paths.iter().filter(|p| p.terminal == t.name).map(|p| p.amp).collect();
            totals.push((t.name.clone(), Amp::sum(&amps)?));
        }
        Ok(PathListing {
            circuit: circuit.name.clone(),
            source: source.to_string(),
            label: label.to_string(),
            paths: paths
                .into_iter()
                .map(|p| PathRecord {
                    reflections: p.reflections(),
                    amp_text: p.amp.to_string(),
                    steps: p.steps,
                    terminal: p.terminal,
                    amp: p.amp,
                })
                .collect(),
            totals,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("listings serialize")
    }
}
