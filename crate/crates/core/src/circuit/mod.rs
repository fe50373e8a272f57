//! Linear-optical networks as directed acyclic graphs.
//!
//! A [`Circuit`] is a list of elements plus wires. Sources (named inputs)
//! emit into element input ports, element output ports emit into other
//! element input ports or into named terminals. Terminals are either
//! photon-number-resolving detectors or loss sinks; keeping loss as an
//! ordinary terminal means probability is conserved and survival rates come
//! from marginalizing over the loss outcomes.
//!
//! Beam splitters follow the symmetric convention: input port `k` reaches
//! output port `k` with amplitude `t` and output port `1 - k` with `i r`.

mod builders;
mod file;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::amplitude::{Amp, AmpError, ExactAmp, QSqrt2};
use crate::expr::Real;

pub use builders::{build_double_mzi, build_hom, build_mzi, HardyParams};
pub use file::{
    CircuitFile, ComplexSpec, ElementSpec, FileError, SourceKind, SourceSpec, TerminalSpec, TerminalSpecKind, WireSpec,
    FORMAT_VERSION,
};

/// Internal-state label transmitted by a polarizing beam splitter.
pub const LABEL_H: &str = "H";
/// Internal-state label reflected by a polarizing beam splitter.
pub const LABEL_V: &str = "V";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("invalid circuit: {0}")]
    Invalid(ValidationReport),
    #[error("parameter `{name}` = {value} is outside [0, 1]")]
    OutOfRange { name: String, value: f64 },
    #[error("polarizing beam splitter `{element}` has no rule for internal label `{label}`")]
    UnsupportedLabel { element: String, label: String },
    #[error(transparent)]
    Amp(#[from] AmpError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElementKind {
    BeamSplitter { reflectivity: Real },
    /// Purely reflective element with a single input and output.
    Mirror,
    /// Transmits label `H`, reflects label `V`.
    PolarizingBeamSplitter,
    PhaseShifter { phase: Real },
}

impl ElementKind {
    pub fn port_count(&self) -> u8 {
        match self {
            ElementKind::BeamSplitter { .. } | ElementKind::PolarizingBeamSplitter => 2,
            ElementKind::Mirror | ElementKind::PhaseShifter { .. } => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
}

/// How a photon crossed an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Transmit,
    Reflect,
    Phase,
}

/// One nonzero entry of an element's coupling: input port to output port.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub input: u8,
    pub output: u8,
    pub action: Action,
    pub amp: Amp,
}

fn sqrt_param(x: &QSqrt2) -> Option<ExactAmp> {
    x.sqrt()?.to_exact()
}

impl Element {
    pub fn beam_splitter(name: impl Into<String>, reflectivity: Real) -> Element {
        Element { name: name.into(), kind: ElementKind::BeamSplitter { reflectivity } }
    }

    pub fn mirror(name: impl Into<String>) -> Element {
        Element { name: name.into(), kind: ElementKind::Mirror }
    }

    /// Transmission and reflection coefficients `(t, r)`.
    pub fn coefficients(reflectivity: &Real) -> (Amp, Amp) {
        let exact = reflectivity.exact_value().and_then(|r| {
            let one_minus = QSqrt2::from_int(1).checked_sub(&r).ok()?;
            Some((sqrt_param(&one_minus)?, sqrt_param(&r)?))
        });
        match exact {
            Some((t, r)) => (Amp::Exact(t), Amp::Exact(r)),
            None => {
                let r = reflectivity.value().clamp(0.0, 1.0);
                (Amp::real((1.0 - r).sqrt()), Amp::real(r.sqrt()))
            }
        }
    }

    fn phase_factor(phase: &Real) -> Amp {
        if let Some(k) = phase.pi_multiple() {
            // exact for multiples of pi/4
            let eighths = k.checked_mul(&QSqrt2::from_int(4)).ok();
            if let Some(e) = eighths {
                if e.surd.is_zero() && e.rational.is_integer() {
                    let n = e.rational.to_integer() as i64;
                    return Amp::Exact(ExactAmp::omega_pow(n));
                }
            }
        }
        let p = phase.value();
        Amp::float(p.cos(), p.sin())
    }

    /// Nonzero couplings for a photon carrying internal label `label`.
    pub fn couplings(&self, label: &str) -> Result<Vec<Coupling>, CircuitError> {
        let mut out = Vec::with_capacity(4);
        match &self.kind {
            ElementKind::BeamSplitter { reflectivity } => {
                let (t, r) = Element::coefficients(reflectivity);
                let ir = Amp::I.mul(&r)?;
                for k in 0..2u8 {
                    out.push(Coupling { input: k, output: k, action: Action::Transmit, amp: t });
                    out.push(Coupling { input: k, output: 1 - k, action: Action::Reflect, amp: ir });
                }
            }
            ElementKind::PolarizingBeamSplitter => match label {
                LABEL_H => {
                    for k in 0..2u8 {
                        out.push(Coupling { input: k, output: k, action: Action::Transmit, amp: Amp::ONE });
                    }
                }
                LABEL_V => {
                    for k in 0..2u8 {
                        out.push(Coupling { input: k, output: 1 - k, action: Action::Reflect, amp: Amp::I });
                    }
                }
                other => {
                    return Err(CircuitError::UnsupportedLabel {
                        element: self.name.clone(),
                        label: other.to_string(),
                    })
                }
            },
            ElementKind::Mirror => {
                out.push(Coupling { input: 0, output: 0, action: Action::Reflect, amp: Amp::I });
            }
            ElementKind::PhaseShifter { phase } => {
                out.push(Coupling {
                    input: 0,
                    output: 0,
                    action: Action::Phase,
                    amp: Element::phase_factor(phase),
                });
            }
        }
        out.retain(|c| !c.amp.is_zero());
        Ok(out)
    }

    pub fn is_exact(&self) -> bool {
        match &self.kind {
            ElementKind::BeamSplitter { reflectivity } => Element::coefficients(reflectivity).0.is_exact(),
            ElementKind::PhaseShifter { phase } => Element::phase_factor(phase).is_exact(),
            ElementKind::Mirror | ElementKind::PolarizingBeamSplitter => true,
        }
    }
}

/// Anything that emits light into a wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emitter {
    Input(usize),
    Out { element: usize, port: u8 },
}

/// Anything that receives light from a wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Receiver {
    In { element: usize, port: u8 },
    Terminal(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalKind {
    Detector { label_resolving: bool },
    Loss,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Terminal {
    pub name: String,
    pub kind: TerminalKind,
}

impl Terminal {
    pub fn detector(name: impl Into<String>) -> Terminal {
        Terminal { name: name.into(), kind: TerminalKind::Detector { label_resolving: false } }
    }

    pub fn loss(name: impl Into<String>) -> Terminal {
        Terminal { name: name.into(), kind: TerminalKind::Loss }
    }

    pub fn is_loss(&self) -> bool {
        self.kind == TerminalKind::Loss
    }

    pub fn label_resolving(&self) -> bool {
        matches!(self.kind, TerminalKind::Detector { label_resolving: true })
    }
}

/// A linear-optical network. Immutable once built.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    pub name: String,
    pub elements: Vec<Element>,
    pub inputs: Vec<String>,
    pub terminals: Vec<Terminal>,
    pub wires: Vec<(Emitter, Receiver)>,
}

/// A structural defect found by [`Circuit::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Defect {
    DuplicateName(String),
    /// An element input port with no feeding wire or source.
    UnfedInput(String),
    /// An element input port fed more than once.
    MultiplyFedInput(String),
    /// An output port or source that goes nowhere.
    DanglingOutput(String),
    /// An output port or source wired to several receivers.
    SplitOutput(String),
    UnfedTerminal(String),
    MultiplyFedTerminal(String),
    /// A reference to a port that does not exist.
    UnknownPort(String),
    Cycle(Vec<String>),
    UnreachableTerminal(String),
    ParameterOutOfRange { element: String, value: f64 },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::DuplicateName(n) => write!(f, "duplicate name `{n}`"),
            Defect::UnfedInput(p) => write!(f, "input port `{p}` is not fed"),
            Defect::MultiplyFedInput(p) => write!(f, "input port `{p}` is fed more than once"),
            Defect::DanglingOutput(p) => write!(f, "output port `{p}` is dangling"),
            Defect::SplitOutput(p) => write!(f, "output port `{p}` is wired more than once"),
            Defect::UnfedTerminal(t) => write!(f, "terminal `{t}` is not fed"),
            Defect::MultiplyFedTerminal(t) => write!(f, "terminal `{t}` is fed more than once"),
            Defect::UnknownPort(p) => write!(f, "unknown port `{p}`"),
            Defect::Cycle(els) => write!(f, "wire cycle through {}", els.join(" -> ")),
            Defect::UnreachableTerminal(t) => write!(f, "terminal `{t}` is unreachable from every input"),
            Defect::ParameterOutOfRange { element, value } => {
                write!(f, "element `{element}` has parameter {value} outside [0, 1]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ValidationReport {
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.defects.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.defects.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Routing tables of a validated circuit.
#[derive(Clone, Debug)]
pub struct Topology {
    /// Elements in a topological order.
    pub order: Vec<usize>,
    /// Where each emitter sends its light.
    pub route: BTreeMap<Emitter, Receiver>,
    /// `feeds[e][p]` is the emitter feeding input port `p` of element `e`.
    pub feeds: Vec<Vec<Emitter>>,
    /// Emitter feeding each terminal.
    pub terminal_feeds: Vec<Emitter>,
}

/// Single-photon transfer matrix: `entries[terminal][input]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub terminals: Vec<String>,
    pub inputs: Vec<String>,
    pub entries: Vec<Vec<Amp>>,
}

impl TransferMatrix {
    pub fn column(&self, input: usize) -> Vec<Amp> {
        self.entries.iter().map(|row| row[input]).collect()
    }

    pub fn get(&self, terminal: &str, input: &str) -> Option<Amp> {
        let t = self.terminals.iter().position(|n| n == terminal)?;
        let i = self.inputs.iter().position(|n| n == input)?;
        Some(self.entries[t][i])
    }

    /// Inner product `<col_a | col_b>`.
    pub fn inner(&self, a: usize, b: usize) -> Result<Amp, AmpError> {
        let mut acc = Amp::ZERO;
        for row in &self.entries {
            acc = acc.add(&row[a].conj().mul(&row[b])?)?;
        }
        Ok(acc)
    }

    /// Largest deviation of the column Gram matrix from the identity.
    pub fn isometry_defect(&self) -> Result<f64, AmpError> {
        let n = self.inputs.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let g = self.inner(a, b)?.to_complex();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        Ok(worst)
    }
}

impl Circuit {
    pub fn new(name: impl Into<String>) -> Circuit {
        Circuit { name: name.into(), ..Circuit::default() }
    }

    pub fn add_element(&mut self, element: Element) -> usize {
        self.elements.push(element);
        self.elements.len() - 1
    }

    pub fn add_input(&mut self, name: impl Into<String>) -> usize {
        self.inputs.push(name.into());
        self.inputs.len() - 1
    }

    pub fn add_terminal(&mut self, terminal: Terminal) -> usize {
        self.terminals.push(terminal);
        self.terminals.len() - 1
    }

    pub fn connect(&mut self, from: Emitter, to: Receiver) {
        self.wires.push((from, to));
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|n| n == name)
    }

    pub fn terminal_index(&self, name: &str) -> Option<usize> {
        self.terminals.iter().position(|t| t.name == name)
    }

    pub fn terminal(&self, name: &str) -> Option<&Terminal> {
        self.terminals.iter().find(|t| t.name == name)
    }

    pub fn detectors(&self) -> impl Iterator<Item = &Terminal> {
        self.terminals.iter().filter(|t| !t.is_loss())
    }

    pub fn resolving_terminals(&self) -> BTreeSet<String> {
        self.terminals.iter().filter(|t| t.label_resolving()).map(|t| t.name.clone()).collect()
    }

    /// True when every element coefficient lies in the exact ring.
    pub fn is_exact(&self) -> bool {
        self.elements.iter().all(Element::is_exact)
    }

    pub fn emitter_name(&self, e: Emitter) -> String {
        match e {
            Emitter::Input(i) => self.inputs.get(i).cloned().unwrap_or_else(|| format!("input#{i}")),
            Emitter::Out { element, port } => format!("{}.out{port}", self.element_name(element)),
        }
    }

    pub fn receiver_name(&self, r: Receiver) -> String {
        match r {
            Receiver::In { element, port } => format!("{}.in{port}", self.element_name(element)),
            Receiver::Terminal(t) => {
                self.terminals.get(t).map(|t| t.name.clone()).unwrap_or_else(|| format!("terminal#{t}"))
            }
        }
    }

    fn element_name(&self, e: usize) -> String {
        self.elements.get(e).map(|el| el.name.clone()).unwrap_or_else(|| format!("element#{e}"))
    }

    /// Structural checks: unique names, complete wiring, acyclicity,
    /// reachability and parameter ranges.
    pub fn validate(&self) -> ValidationReport {
        let mut defects = Vec::new();

        let mut seen = BTreeSet::new();
        let names = self
            .elements
            .iter()
            .map(|e| &e.name)
            .chain(self.inputs.iter())
            .chain(self.terminals.iter().map(|t| &t.name));
        for n in names {
            if !seen.insert(n.clone()) {
                defects.push(Defect::DuplicateName(n.clone()));
            }
        }

        for el in &self.elements {
            let r = match &el.kind {
                ElementKind::BeamSplitter { reflectivity } => Some(reflectivity.value()),
                _ => None,
            };
            if let Some(v) = r {
                if !(0.0..=1.0).contains(&v) {
                    defects.push(Defect::ParameterOutOfRange { element: el.name.clone(), value: v });
                }
            }
        }

        let mut emitter_uses: BTreeMap<Emitter, usize> = BTreeMap::new();
        let mut receiver_uses: BTreeMap<Receiver, usize> = BTreeMap::new();
        for &(from, to) in &self.wires {
            let from_ok = match from {
                Emitter::Input(i) => i < self.inputs.len(),
                Emitter::Out { element, port } => {
                    element < self.elements.len() && port < self.elements[element].kind.port_count()
                }
            };
            let to_ok = match to {
                Receiver::Terminal(t) => t < self.terminals.len(),
                Receiver::In { element, port } => {
                    element < self.elements.len() && port < self.elements[element].kind.port_count()
                }
            };
            if !from_ok {
                defects.push(Defect::UnknownPort(self.emitter_name(from)));
            }
            if !to_ok {
                defects.push(Defect::UnknownPort(self.receiver_name(to)));
            }
            if from_ok && to_ok {
                *emitter_uses.entry(from).or_default() += 1;
                *receiver_uses.entry(to).or_default() += 1;
            }
        }

        for (i, _) in self.inputs.iter().enumerate() {
            match emitter_uses.get(&Emitter::Input(i)).copied().unwrap_or(0) {
                0 => defects.push(Defect::DanglingOutput(self.emitter_name(Emitter::Input(i)))),
                1 => {}
                _ => defects.push(Defect::SplitOutput(self.emitter_name(Emitter::Input(i)))),
            }
        }
        for (e, el) in self.elements.iter().enumerate() {
            for port in 0..el.kind.port_count() {
                let out = Emitter::Out { element: e, port };
                match emitter_uses.get(&out).copied().unwrap_or(0) {
                    0 => defects.push(Defect::DanglingOutput(self.emitter_name(out))),
                    1 => {}
                    _ => defects.push(Defect::SplitOutput(self.emitter_name(out))),
                }
                let inp = Receiver::In { element: e, port };
                match receiver_uses.get(&inp).copied().unwrap_or(0) {
                    0 => defects.push(Defect::UnfedInput(self.receiver_name(inp))),
                    1 => {}
                    _ => defects.push(Defect::MultiplyFedInput(self.receiver_name(inp))),
                }
            }
        }
        for t in 0..self.terminals.len() {
            match receiver_uses.get(&Receiver::Terminal(t)).copied().unwrap_or(0) {
                0 => defects.push(Defect::UnfedTerminal(self.terminals[t].name.clone())),
                1 => {}
                _ => defects.push(Defect::MultiplyFedTerminal(self.terminals[t].name.clone())),
            }
        }

        if let Err(cycle) = self.topological_order(None) {
            defects.push(Defect::Cycle(cycle));
        }

        // forward reachability from the sources
        let mut reached_elements = BTreeSet::new();
        let mut reached_terminals = BTreeSet::new();
        let mut queue: VecDeque<Emitter> = (0..self.inputs.len()).map(Emitter::Input).collect();
        let mut visited = BTreeSet::new();
        while let Some(em) = queue.pop_front() {
            if !visited.insert(em) {
                continue;
            }
            for &(from, to) in &self.wires {
                if from != em {
                    continue;
                }
                match to {
                    Receiver::Terminal(t) => {
                        reached_terminals.insert(t);
                    }
                    Receiver::In { element, .. } if element < self.elements.len() => {
                        if reached_elements.insert(element) {
                            for port in 0..self.elements[element].kind.port_count() {
                                queue.push_back(Emitter::Out { element, port });
                            }
                        }
                    }
                    Receiver::In { .. } => {}
                }
            }
        }
        for (t, term) in self.terminals.iter().enumerate() {
            if !reached_terminals.contains(&t) {
                defects.push(Defect::UnreachableTerminal(term.name.clone()));
            }
        }

        ValidationReport { defects }
    }

    /// Kahn's algorithm over the element graph. `priority` breaks ties among
    /// ready elements (lower first); by default insertion order. On a cycle
    /// returns the names of the elements that could not be ordered.
    pub fn topological_order(&self, priority: Option<&[usize]>) -> Result<Vec<usize>, Vec<String>> {
        let n = self.elements.len();
        let mut indegree = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(from, to) in &self.wires {
            if let (Emitter::Out { element: a, .. }, Receiver::In { element: b, .. }) = (from, to) {
                if a < n && b < n {
                    indegree[b] += 1;
                    succ[a].push(b);
                }
            }
        }
        let rank = |e: usize| priority.and_then(|p| p.get(e).copied()).unwrap_or(e);
        let mut ready: BTreeSet<(usize, usize)> =
            (0..n).filter(|&e| indegree[e] == 0).map(|e| (rank(e), e)).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&first) = ready.iter().next() {
            ready.remove(&first);
            let e = first.1;
            order.push(e);
            for &s in &succ[e] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert((rank(s), s));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let placed: BTreeSet<usize> = order.into_iter().collect();
            Err((0..n).filter(|e| !placed.contains(e)).map(|e| self.elements[e].name.clone()).collect())
        }
    }

    /// Validates and returns routing tables.
    pub fn topology(&self) -> Result<Topology, CircuitError> {
        self.topology_with_order(None)
    }

    pub fn topology_with_order(&self, priority: Option<&[usize]>) -> Result<Topology, CircuitError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(CircuitError::Invalid(report));
        }
        let order = self.topological_order(priority).expect("validated circuits are acyclic");
        let mut route = BTreeMap::new();
        let mut feeds: Vec<Vec<Emitter>> = self
            .elements
            .iter()
            .map(|el| vec![Emitter::Input(usize::MAX); el.kind.port_count() as usize])
            .collect();
        let mut terminal_feeds = vec![Emitter::Input(usize::MAX); self.terminals.len()];
        for &(from, to) in &self.wires {
            route.insert(from, to);
            match to {
                Receiver::In { element, port } => feeds[element][port as usize] = from,
                Receiver::Terminal(t) => terminal_feeds[t] = from,
            }
        }
        Ok(Topology { order, route, feeds, terminal_feeds })
    }

    /// Single-photon transfer matrix for internal label `H`.
    pub fn transfer_matrix(&self) -> Result<TransferMatrix, CircuitError> {
        self.transfer_matrix_for(LABEL_H)
    }

    /// Single-photon transfer matrix for a photon carrying `label`, computed by
    /// propagating amplitude vectors through the elements in topological order.
    pub fn transfer_matrix_for(&self, label: &str) -> Result<TransferMatrix, CircuitError> {
        let topo = self.topology()?;
        let n_in = self.inputs.len();
        // amplitude vector (one entry per input) carried by each emitter
        let mut carried: BTreeMap<Emitter, Vec<Amp>> = BTreeMap::new();
        for i in 0..n_in {
            let mut v = vec![Amp::ZERO; n_in];
            v[i] = Amp::ONE;
            carried.insert(Emitter::Input(i), v);
        }
        for &e in &topo.order {
            let el = &self.elements[e];
            let ports = el.kind.port_count();
            let mut outs = vec![vec![Amp::ZERO; n_in]; ports as usize];
            for c in el.couplings(label)? {
                let src = &carried[&topo.feeds[e][c.input as usize]];
                for (k, a) in src.iter().enumerate() {
                    let contrib = c.amp.mul(a)?;
                    outs[c.output as usize][k] = outs[c.output as usize][k].add(&contrib)?;
                }
            }
            for (port, v) in outs.into_iter().enumerate() {
                carried.insert(Emitter::Out { element: e, port: port as u8 }, v);
            }
        }
        let entries = topo.terminal_feeds.iter().map(|em| carried[em].clone()).collect();
        Ok(TransferMatrix {
            terminals: self.terminals.iter().map(|t| t.name.clone()).collect(),
            inputs: self.inputs.clone(),
            entries,
        })
    }
}
