//! JSON circuit documents.
//!
//! ```json
//! {
//!   "format": 1,
//!   "name": "hom",
//!   "elements": [{"id": "bs", "kind": "beam_splitter", "reflectivity": "1/2"}],
//!   "inputs": ["in_L", "in_R"],
//!   "terminals": [{"name": "L", "kind": "detector"}, {"name": "R", "kind": "detector"}],
//!   "wires": [
//!     {"from": "in_L", "to": "bs.in0"}, {"from": "in_R", "to": "bs.in1"},
//!     {"from": "bs.out0", "to": "R"}, {"from": "bs.out1", "to": "L"}
//!   ],
//!   "sources": [
//!     {"port": "in_L", "kind": "single_photon", "internal": {"H": "1"}},
//!     {"port": "in_R", "kind": "single_photon", "internal": {"H": "1/sqrt2", "V": [0, "1/sqrt2"]}}
//!   ]
//! }
//! ```
//!
//! Parameters are numbers or expression strings; strings such as `"1/2"` or
//! `"2-sqrt2"` keep their exact value.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Real;
use crate::sources::{InputSpec, SourceError};

use super::{Circuit, Element, ElementKind, Emitter, Receiver, Terminal, TerminalKind, ValidationReport};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    BeamSplitter { id: String, reflectivity: Real },
    Mirror { id: String },
    PolarizingBeamSplitter { id: String },
    PhaseShifter { id: String, phase: Real },
}

impl ElementSpec {
    fn id(&self) -> &str {
        match self {
            ElementSpec::BeamSplitter { id, .. }
            | ElementSpec::Mirror { id }
            | ElementSpec::PolarizingBeamSplitter { id }
            | ElementSpec::PhaseShifter { id, .. } => id,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSpec {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalSpecKind {
    Detector,
    Loss,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalSpec {
    pub name: String,
    pub kind: TerminalSpecKind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub label_resolving: bool,
}

/// A complex component: a real value or a `[re, im]` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(Real),
    Pair([Real; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Vacuum,
    SinglePhoton,
    Coherent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub port: String,
    pub kind: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal: Option<BTreeMap<String, ComplexSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub elements: Vec<ElementSpec>,
    pub inputs: Vec<String>,
    pub terminals: Vec<TerminalSpec>,
    pub wires: Vec<WireSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceSpec>,
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// serde_json messages carry the line and column.
    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("wire {index}: unknown endpoint `{endpoint}`")]
    UnknownEndpoint { index: usize, endpoint: String },
    #[error("invalid circuit: {0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Source(#[from] SourceError),
}

impl CircuitFile {
    pub fn from_json(text: &str) -> Result<CircuitFile, FileError> {
        let file: CircuitFile = serde_json::from_str(text)?;
        if file.format != FORMAT_VERSION {
            return Err(FileError::Version(file.format));
        }
        Ok(file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<CircuitFile, FileError> {
        CircuitFile::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit files serialize")
    }

    /// Builds the circuit and checks it with [`Circuit::validate`].
    pub fn to_circuit(&self) -> Result<Circuit, FileError> {
        let mut c = Circuit::new(self.name.clone().unwrap_or_else(|| "circuit".into()));
        for spec in &self.elements {
            let kind = match spec {
                ElementSpec::BeamSplitter { reflectivity, .. } => {
                    ElementKind::BeamSplitter { reflectivity: reflectivity.clone() }
                }
                ElementSpec::Mirror { .. } => ElementKind::Mirror,
                ElementSpec::PolarizingBeamSplitter { .. } => ElementKind::PolarizingBeamSplitter,
                ElementSpec::PhaseShifter { phase, .. } => ElementKind::PhaseShifter { phase: phase.clone() },
            };
            c.add_element(Element { name: spec.id().to_string(), kind });
        }
        for name in &self.inputs {
            c.add_input(name.clone());
        }
        for t in &self.terminals {
            let kind = match t.kind {
                TerminalSpecKind::Detector => TerminalKind::Detector { label_resolving: t.label_resolving },
                TerminalSpecKind::Loss => TerminalKind::Loss,
            };
            c.add_terminal(Terminal { name: t.name.clone(), kind });
        }
        for (index, w) in self.wires.iter().enumerate() {
            let unknown = |e: &str| FileError::UnknownEndpoint { index, endpoint: e.to_string() };
            let from = parse_emitter(&c, &w.from).ok_or_else(|| unknown(&w.from))?;
            let to = parse_receiver(&c, &w.to).ok_or_else(|| unknown(&w.to))?;
            c.connect(from, to);
        }
        let report = c.validate();
        if !report.is_valid() {
            return Err(FileError::Invalid(report));
        }
        Ok(c)
    }

    /// Source block as an [`InputSpec`] (empty when the file has none).
    pub fn input_spec(&self) -> Result<InputSpec, FileError> {
        Ok(InputSpec::from_specs(&self.sources)?)
    }

    /// Serializes a circuit (and optionally its sources) back to a document.
    pub fn from_circuit(c: &Circuit, sources: Option<&InputSpec>) -> CircuitFile {
        let elements = c
            .elements
            .iter()
            .map(|el| {
                let id = el.name.clone();
                match &el.kind {
                    ElementKind::BeamSplitter { reflectivity } => {
                        ElementSpec::BeamSplitter { id, reflectivity: reflectivity.clone() }
                    }
                    ElementKind::Mirror => ElementSpec::Mirror { id },
                    ElementKind::PolarizingBeamSplitter => ElementSpec::PolarizingBeamSplitter { id },
                    ElementKind::PhaseShifter { phase } => ElementSpec::PhaseShifter { id, phase: phase.clone() },
                }
            })
            .collect();
        let terminals = c
            .terminals
            .iter()
            .map(|t| TerminalSpec {
                name: t.name.clone(),
                kind: if t.is_loss() { TerminalSpecKind::Loss } else { TerminalSpecKind::Detector },
                label_resolving: t.label_resolving(),
            })
            .collect();
        let wires = c
            .wires
            .iter()
            .map(|&(f, t)| WireSpec { from: c.emitter_name(f), to: c.receiver_name(t) })
            .collect();
        CircuitFile {
            format: FORMAT_VERSION,
            name: Some(c.name.clone()),
            elements,
            inputs: c.inputs.clone(),
            terminals,
            wires,
            sources: sources.map(InputSpec::to_specs).unwrap_or_default(),
        }
    }
}

fn element_port(c: &Circuit, s: &str, prefix: &str) -> Option<(usize, u8)> {
    let (name, port) = s.rsplit_once('.')?;
    let port: u8 = port.strip_prefix(prefix)?.parse().ok()?;
    let e = c.elements.iter().position(|el| el.name == name)?;
    (port < c.elements[e].kind.port_count()).then_some((e, port))
}

fn parse_emitter(c: &Circuit, s: &str) -> Option<Emitter> {
    if let Some(i) = c.input_index(s) {
        return Some(Emitter::Input(i));
    }
    element_port(c, s, "out").map(|(element, port)| Emitter::Out { element, port })
}

fn parse_receiver(c: &Circuit, s: &str) -> Option<Receiver> {
    if let Some(t) = c.terminal_index(s) {
        return Some(Receiver::Terminal(t));
    }
    element_port(c, s, "in").map(|(element, port)| Receiver::In { element, port })
}
