//! Few-photon interference in networks of beam splitters.
//!
//! A [`Circuit`] is a directed acyclic network of two-port elements fed by
//! sources and drained by detectors or loss terminals. Two engines compute
//! its outcome distribution:
//!
//! * [`path_engine`] sums single-photon path amplitudes (`t` per
//!   transmission, `i r` per reflection) and symmetrizes over photon
//!   assignments.
//! * [`fock`] pushes creation-operator polynomials through the network. It
//!   also handles coherent inputs.
//!
//! Both stay in exact arithmetic ([`ExactAmp`]) while every reflectivity is
//! exactly representable, and fall back to `f64` otherwise.
//!
//! ```
//! use photon_interference::{build_double_mzi, full_distribution, HardyParams, InputSpec, Outcome};
//!
//! let circuit = build_double_mzi(&HardyParams::balanced());
//! let inputs = InputSpec::identical_pair("L", "R").unwrap();
//! let table = full_distribution(&circuit, &inputs).unwrap();
//! assert_eq!(table.p(&Outcome::of(&["D2", "D3"])), 1.0 / 64.0);
//! ```

pub mod amplitude;
pub mod circuit;
pub mod expr;
pub mod outcome;
pub mod sources;
pub mod path_engine;
pub mod fock;
pub mod statistics;
pub mod design;
pub mod cli;

pub use amplitude::{Amp, AmpError, ExactAmp, QSqrt2};
pub use circuit::{build_double_mzi, build_hom, build_mzi, Circuit, CircuitError, CircuitFile, Element, HardyParams, Terminal};
pub use design::{maximize_p23, p23, p23_exact};
pub use expr::Real;
pub use fock::{coherent_pair, fock_distribution};
pub use outcome::{Engine, ModeKey, Outcome, OutcomeTable};
pub use path_engine::{enumerate_paths, full_distribution, partial_distinguishability_curve};
pub use sources::{make_diagonal, InputSpec, InputState, InternalState};
pub use statistics::{clopper_pearson, coincidence, sample, StudyReport};
