#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use photon_interference::circuit::{ElementKind, Emitter, Receiver, TerminalKind, LABEL_H};
use photon_interference::{make_diagonal, Amp, Circuit, Element, InputSpec, InputState, InternalState, Real, Terminal};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

/// Random network of at most six elements on two to four wires, with one to
/// three photons in random internal states.
pub fn random_setup(seed: u64) -> (Circuit, InputSpec) {
    let mut rng = Rng::new(seed);
    let wires = 2 + rng.below(3);
    let mut c = Circuit::new(format!("random_{seed}"));
    let mut open: Vec<Emitter> = (0..wires).map(|k| Emitter::Input(c.add_input(format!("in{k}")))).collect();
    let n_elements = 1 + rng.below(6);
    for e in 0..n_elements {
        let kind = match rng.below(10) {
            0..=5 => {
                let r = if rng.below(4) == 0 { Real::ratio(1, 2) } else { Real::float(rng.uniform()) };
                ElementKind::BeamSplitter { reflectivity: r }
            }
            6 | 7 => ElementKind::PolarizingBeamSplitter,
            8 => ElementKind::PhaseShifter { phase: Real::float(2.0 * PI * rng.uniform()) },
            _ => ElementKind::Mirror,
        };
        let element = Element { name: format!("e{e}"), kind };
        let ports = element.kind.port_count() as usize;
        let idx = c.add_element(element);
        let a = rng.below(wires);
        let mut picked = vec![a];
        if ports == 2 {
            picked.push((a + 1 + rng.below(wires - 1)) % wires);
        }
        for (port, &w) in picked.iter().enumerate() {
            c.connect(open[w], Receiver::In { element: idx, port: port as u8 });
            open[w] = Emitter::Out { element: idx, port: port as u8 };
        }
    }
    for (k, e) in open.into_iter().enumerate() {
        let t = match rng.below(8) {
            0 | 1 => Terminal::loss(format!("loss{k}")),
            2 => Terminal { name: format!("T{k}"), kind: TerminalKind::Detector { label_resolving: true } },
            _ => Terminal::detector(format!("T{k}")),
        };
        let ti = c.add_terminal(t);
        c.connect(e, Receiver::Terminal(ti));
    }
    let photons = (1 + rng.below(3)).min(wires);
    let mut ports: Vec<usize> = (0..wires).collect();
    let mut inputs = InputSpec::new();
    for p in 0..photons {
        let k = ports.remove(rng.below(ports.len()));
        let state = if p == 0 {
            InternalState::h()
        } else {
            let (m, phi) = (rng.uniform(), 2.0 * PI * rng.uniform());
            make_diagonal(Amp::Float(Complex64::from_polar(m, phi))).unwrap()
        };
        inputs.insert(format!("in{k}"), InputState::SinglePhoton(state)).unwrap();
    }
    (c, inputs)
}

fn reflectivity_coeffs(r: f64) -> (Complex64, Complex64) {
    (Complex64::new((1.0 - r).sqrt(), 0.0), Complex64::new(0.0, r.sqrt()))
}

/// Single-photon transfer matrix by forward propagation of mode amplitudes
/// in floating point, independent of the path enumeration. Rows follow
/// `circuit.terminals`, columns `circuit.inputs`.
pub fn oracle_transfer(circuit: &Circuit, label: &str) -> Vec<Vec<Complex64>> {
    let feed: BTreeMap<Receiver, Emitter> = circuit.wires.iter().map(|&(e, r)| (r, e)).collect();
    let order = circuit.topological_order(None).expect("acyclic");
    let mut cols = vec![vec![Complex64::new(0.0, 0.0); circuit.inputs.len()]; circuit.terminals.len()];
    for input in 0..circuit.inputs.len() {
        let mut field: BTreeMap<Emitter, Complex64> = BTreeMap::new();
        field.insert(Emitter::Input(input), Complex64::new(1.0, 0.0));
        let at = |field: &BTreeMap<Emitter, Complex64>, r: Receiver| {
            feed.get(&r).and_then(|e| field.get(e)).copied().unwrap_or_default()
        };
        for &el in &order {
            let a0 = at(&field, Receiver::In { element: el, port: 0 });
            let outs: Vec<Complex64> = match &circuit.elements[el].kind {
                ElementKind::BeamSplitter { reflectivity } => {
                    let a1 = at(&field, Receiver::In { element: el, port: 1 });
                    let (t, ir) = reflectivity_coeffs(reflectivity.value());
                    vec![t * a0 + ir * a1, ir * a0 + t * a1]
                }
                ElementKind::PolarizingBeamSplitter => {
                    let a1 = at(&field, Receiver::In { element: el, port: 1 });
                    if label == LABEL_H {
                        vec![a0, a1]
                    } else {
                        let i = Complex64::new(0.0, 1.0);
                        vec![i * a1, i * a0]
                    }
                }
                ElementKind::Mirror => vec![Complex64::new(0.0, 1.0) * a0],
                ElementKind::PhaseShifter { phase } => vec![Complex64::from_polar(1.0, phase.value()) * a0],
            };
            for (port, v) in outs.into_iter().enumerate() {
                field.insert(Emitter::Out { element: el, port: port as u8 }, v);
            }
        }
        for (t, row) in cols.iter_mut().enumerate() {
            row[input] = at(&field, Receiver::Terminal(t));
        }
    }
    cols
}

/// Label-free two-photon probabilities from first-quantized amplitudes:
/// photons at inputs `a` and `b` with `|<psi|phi>|^2 = s`, in a circuit whose
/// elements treat every label alike.
pub fn two_photon_oracle(circuit: &Circuit, a: &str, b: &str, s: f64) -> BTreeMap<photon_interference::Outcome, f64> {
    let m = oracle_transfer(circuit, LABEL_H);
    let ia = circuit.inputs.iter().position(|n| n == a).unwrap();
    let ib = circuit.inputs.iter().position(|n| n == b).unwrap();
    let names: Vec<&str> = circuit.terminals.iter().map(|t| t.name.as_str()).collect();
    let mut out = BTreeMap::new();
    for i in 0..names.len() {
        for j in i..names.len() {
            let (x, y) = (m[i][ia] * m[j][ib], m[j][ia] * m[i][ib]);
            let p = if i == j {
                x.norm_sqr() * (1.0 + s)
            } else {
                x.norm_sqr() + y.norm_sqr() + 2.0 * s * (x * y.conj()).re
            };
            out.insert(photon_interference::Outcome::of(&[names[i], names[j]]), p);
        }
    }
    out
}
