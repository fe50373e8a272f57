//! Input states shared by both engines.
//!
//! Every circuit input is vacuum unless an [`InputSpec`] says otherwise. A
//! single photon carries a unit internal vector over string basis labels
//! (`H`/`V` for polarization, but `red`/`blue` work just as well as long as
//! no polarizing beam splitter has to act on them).

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::amplitude::{Amp, AmpError, ExactAmp};
use crate::circuit::{Circuit, ComplexSpec, SourceKind, SourceSpec, LABEL_H, LABEL_V};

const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error("port `{0}` has more than one input specification")]
    DuplicatePort(String),
    #[error("port `{0}` is not an input of the circuit")]
    UnknownPort(String),
    #[error("internal state of `{port}` has norm^2 {norm_sq}, expected 1")]
    NotNormalized { port: String, norm_sq: f64 },
    #[error("internal state of `{0}` is empty")]
    EmptyState(String),
    #[error("overlap magnitude {0} exceeds 1")]
    OverlapOutOfRange(f64),
    #[error("coherent amplitude |alpha| = {0} exceeds 1")]
    AlphaOutOfRange(f64),
    #[error("coherent truncation n_max = {0} is outside 2..=4")]
    TruncationOutOfRange(u8),
    #[error("source `{port}`: {reason}")]
    Malformed { port: String, reason: String },
    #[error(transparent)]
    Amp(#[from] AmpError),
}

/// Unit vector over internal basis labels. Zero components are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct InternalState {
    components: BTreeMap<String, Amp>,
}

impl InternalState {
    pub fn new<S: Into<String>>(components: impl IntoIterator<Item = (S, Amp)>) -> Result<InternalState, SourceError> {
        InternalState::checked("internal state", components)
    }

    fn checked<S: Into<String>>(
        port: &str,
        components: impl IntoIterator<Item = (S, Amp)>,
    ) -> Result<InternalState, SourceError> {
        let mut map: BTreeMap<String, Amp> = BTreeMap::new();
        for (label, amp) in components {
            let slot = map.entry(label.into()).or_insert(Amp::ZERO);
            *slot = slot.add(&amp)?;
        }
        map.retain(|_, a| !a.is_zero());
        if map.is_empty() {
            return Err(SourceError::EmptyState(port.to_string()));
        }
        let state = InternalState { components: map };
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(SourceError::NotNormalized { port: port.to_string(), norm_sq });
        }
        Ok(state)
    }

    /// The basis vector for `label`.
    pub fn label(label: impl Into<String>) -> InternalState {
        InternalState { components: BTreeMap::from([(label.into(), Amp::ONE)]) }
    }

    pub fn h() -> InternalState {
        InternalState::label(LABEL_H)
    }

    pub fn v() -> InternalState {
        InternalState::label(LABEL_V)
    }

    pub fn components(&self) -> &BTreeMap<String, Amp> {
        &self.components
    }

    pub fn component(&self, label: &str) -> Amp {
        self.components.get(label).copied().unwrap_or(Amp::ZERO)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.values().map(|a| a.to_complex().norm_sqr()).sum()
    }

    /// `<other|self>`, so that `make_diagonal(c).overlap(&H) == c`.
    pub fn overlap(&self, other: &InternalState) -> Result<Amp, AmpError> {
        let mut acc = Amp::ZERO;
        for (label, a) in &self.components {
            if let Some(b) = other.components.get(label) {
                acc = acc.add(&b.conj().mul(a)?)?;
            }
        }
        Ok(acc)
    }

    pub fn is_exact(&self) -> bool {
        self.components.values().all(Amp::is_exact)
    }
}

/// `c H + sqrt(1 - |c|^2) V`. Exact when `c` and the square root are.
pub fn make_diagonal(c: Amp) -> Result<InternalState, SourceError> {
    let mag_sq = c.to_complex().norm_sqr();
    if mag_sq > 1.0 + NORM_TOLERANCE {
        return Err(SourceError::OverlapOutOfRange(mag_sq.sqrt()));
    }
    let exact_rest = c.exact().and_then(|x| {
        let rest = ExactAmp::ONE.sub(&x.abs_sq().ok()?).ok()?;
        rest.sqrt_real()
    });
    let rest = match exact_rest {
        Some(r) => Amp::Exact(r),
        None => Amp::real((1.0 - mag_sq).max(0.0).sqrt()),
    };
    let mut components = BTreeMap::new();
    components.insert(LABEL_H.to_string(), c);
    components.insert(LABEL_V.to_string(), rest);
    components.retain(|_, a| !a.is_zero());
    Ok(InternalState { components })
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputState {
    Vacuum,
    SinglePhoton(InternalState),
    /// Truncated at `n_max` photons and renormalized; carries label `H`.
    Coherent { alpha: Complex64, n_max: u8 },
}

impl InputState {
    pub fn coherent(alpha: Complex64, n_max: u8) -> Result<InputState, SourceError> {
        if !(2..=4).contains(&n_max) {
            return Err(SourceError::TruncationOutOfRange(n_max));
        }
        if alpha.norm().is_nan() || alpha.norm() > 1.0 {
            return Err(SourceError::AlphaOutOfRange(alpha.norm()));
        }
        Ok(InputState::Coherent { alpha, n_max })
    }

    /// Largest photon number this port can emit.
    pub fn max_photons(&self) -> u8 {
        match self {
            InputState::Vacuum => 0,
            InputState::SinglePhoton(_) => 1,
            InputState::Coherent { n_max, .. } => *n_max,
        }
    }
}

/// Per-port input states in port insertion order; unnamed ports are vacuum.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct InputSpec {
    ports: Vec<(String, InputState)>,
}

impl InputSpec {
    pub fn new() -> InputSpec {
        InputSpec::default()
    }

    pub fn with(mut self, port: impl Into<String>, state: InputState) -> Result<InputSpec, SourceError> {
        self.insert(port, state)?;
        Ok(self)
    }

    pub fn insert(&mut self, port: impl Into<String>, state: InputState) -> Result<(), SourceError> {
        let port = port.into();
        if self.ports.iter().any(|(p, _)| *p == port) {
            return Err(SourceError::DuplicatePort(port));
        }
        self.ports.push((port, state));
        Ok(())
    }

    /// One photon per port, in the given internal states.
    pub fn photons<'a>(
        ports: impl IntoIterator<Item = (&'a str, InternalState)>,
    ) -> Result<InputSpec, SourceError> {
        let mut spec = InputSpec::new();
        for (port, state) in ports {
            spec.insert(port, InputState::SinglePhoton(state))?;
        }
        Ok(spec)
    }

    /// Two photons with overlap `c`: the first in `H`, the second in
    /// `c H + sqrt(1 - |c|^2) V`.
    pub fn pair_with_overlap(first: &str, second: &str, c: Amp) -> Result<InputSpec, SourceError> {
        InputSpec::photons([(first, InternalState::h()), (second, make_diagonal(c)?)])
    }

    /// Two identical photons (both `H`).
    pub fn identical_pair(first: &str, second: &str) -> Result<InputSpec, SourceError> {
        InputSpec::pair_with_overlap(first, second, Amp::ONE)
    }

    pub fn ports(&self) -> &[(String, InputState)] {
        &self.ports
    }

    pub fn get(&self, port: &str) -> Option<&InputState> {
        self.ports.iter().find(|(p, _)| p == port).map(|(_, s)| s)
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    /// Single-photon ports and their internal states.
    pub fn single_photons(&self) -> Vec<(&str, &InternalState)> {
        self.ports
            .iter()
            .filter_map(|(p, s)| match s {
                InputState::SinglePhoton(st) => Some((p.as_str(), st)),
                _ => None,
            })
            .collect()
    }

    pub fn photon_count(&self) -> usize {
        self.single_photons().len()
    }

    pub fn has_coherent(&self) -> bool {
        self.ports.iter().any(|(_, s)| matches!(s, InputState::Coherent { .. }))
    }

    /// Every internal label used by any source (`H` for coherent ports).
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for (_, s) in &self.ports {
            match s {
                InputState::SinglePhoton(st) => labels.extend(st.labels().map(str::to_string)),
                InputState::Coherent { .. } => labels.push(LABEL_H.to_string()),
                InputState::Vacuum => {}
            }
        }
        labels.sort();
        labels.dedup();
        labels
    }

    pub fn check_ports(&self, circuit: &Circuit) -> Result<(), SourceError> {
        for (p, _) in &self.ports {
            if circuit.input_index(p).is_none() {
                return Err(SourceError::UnknownPort(p.clone()));
            }
        }
        Ok(())
    }

    pub fn from_specs(specs: &[SourceSpec]) -> Result<InputSpec, SourceError> {
        let mut out = InputSpec::new();
        for s in specs {
            let malformed = |reason: &str| SourceError::Malformed { port: s.port.clone(), reason: reason.to_string() };
            let state = match s.kind {
                SourceKind::Vacuum => InputState::Vacuum,
                SourceKind::SinglePhoton => {
                    let internal = match &s.internal {
                        Some(map) => {
                            let comps = map.iter().map(|(l, v)| (l.clone(), complex_spec(v))).collect::<Vec<_>>();
                            InternalState::checked(&s.port, comps)?
                        }
                        None => InternalState::h(),
                    };
                    InputState::SinglePhoton(internal)
                }
                SourceKind::Coherent => {
                    let [re, im] = s.alpha.ok_or_else(|| malformed("coherent source needs `alpha`"))?;
                    InputState::coherent(Complex64::new(re, im), s.n_max.unwrap_or(4))?
                }
            };
            out.insert(s.port.clone(), state)?;
        }
        Ok(out)
    }

    pub fn to_specs(&self) -> Vec<SourceSpec> {
        use crate::expr::Real;
        let real = |x: f64| Real::float(x);
        self.ports
            .iter()
            .map(|(port, state)| match state {
                InputState::Vacuum => {
                    SourceSpec { port: port.clone(), kind: SourceKind::Vacuum, internal: None, alpha: None, n_max: None }
                }
                InputState::SinglePhoton(st) => SourceSpec {
                    port: port.clone(),
                    kind: SourceKind::SinglePhoton,
                    internal: Some(
                        st.components()
                            .iter()
                            .map(|(l, a)| {
                                let z = a.to_complex();
                                let v = if z.im == 0.0 {
                                    ComplexSpec::Real(real(z.re))
                                } else {
                                    ComplexSpec::Pair([real(z.re), real(z.im)])
                                };
                                (l.clone(), v)
                            })
                            .collect(),
                    ),
                    alpha: None,
                    n_max: None,
                },
                InputState::Coherent { alpha, n_max } => SourceSpec {
                    port: port.clone(),
                    kind: SourceKind::Coherent,
                    internal: None,
                    alpha: Some([alpha.re, alpha.im]),
                    n_max: Some(*n_max),
                },
            })
            .collect()
    }
}

fn real_amp(r: &crate::expr::Real) -> Amp {
    match r.to_exact_amp() {
        Some(x) => Amp::Exact(x),
        None => Amp::real(r.value()),
    }
}

fn complex_spec(v: &ComplexSpec) -> Amp {
    match v {
        ComplexSpec::Real(r) => real_amp(r),
        ComplexSpec::Pair([re, im]) => {
            let im = real_amp(im).mul(&Amp::I).unwrap_or_else(|_| Amp::float(0.0, im.value()));
            real_amp(re).add(&im).unwrap_or_else(|_| Amp::float(re.value(), im.to_complex().im))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_limits() {
        assert_eq!(make_diagonal(Amp::ONE).unwrap(), InternalState::h());
        assert_eq!(make_diagonal(Amp::ZERO).unwrap(), InternalState::v());
        let d = make_diagonal(Amp::Exact(ExactAmp::FRAC_1_SQRT_2)).unwrap();
        assert!(d.is_exact());
        assert_eq!(d.component(LABEL_V), Amp::Exact(ExactAmp::FRAC_1_SQRT_2));
        assert_eq!(d.overlap(&InternalState::h()).unwrap(), Amp::Exact(ExactAmp::FRAC_1_SQRT_2));
        assert!(matches!(make_diagonal(Amp::real(1.1)), Err(SourceError::OverlapOutOfRange(_))));
    }

    #[test]
    fn spec_rules() {
        let spec = InputSpec::identical_pair("L", "R").unwrap();
        assert_eq!(spec.photon_count(), 2);
        assert!(matches!(spec.with("L", InputState::Vacuum), Err(SourceError::DuplicatePort(_))));
        let bad = InternalState::new([("H", Amp::real(0.5))]);
        assert!(matches!(bad, Err(SourceError::NotNormalized { .. })));
        assert!(InputState::coherent(Complex64::new(0.1, 0.0), 5).is_err());
        assert!(InputState::coherent(Complex64::new(1.5, 0.0), 3).is_err());
    }

    #[test]
    fn specs_round_trip() {
        let spec = InputSpec::new()
            .with("a", InputState::SinglePhoton(make_diagonal(Amp::real(0.6)).unwrap()))
            .unwrap()
            .with("b", InputState::coherent(Complex64::new(0.1, 0.05), 3).unwrap())
            .unwrap()
            .with("c", InputState::Vacuum)
            .unwrap();
        let back = InputSpec::from_specs(&spec.to_specs()).unwrap();
        assert_eq!(back.ports().len(), 3);
        let InputState::SinglePhoton(st) = back.get("a").unwrap() else { panic!() };
        assert!((st.component(LABEL_V).value() - 0.8).abs() < 1e-15);
        assert_eq!(back.get("b"), spec.get("b"));
    }

    proptest! {
        #[test]
        fn overlap_with_h_is_c(re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let c = Complex64::new(re, im);
            prop_assume!(c.norm() <= 1.0);
            let d = make_diagonal(Amp::Float(c)).unwrap();
            let o = d.overlap(&InternalState::h()).unwrap().to_complex();
            prop_assert!((o - c).norm() < 1e-15);
            prop_assert!((d.norm_sq() - 1.0).abs() < 1e-12);
        }
    }
}
