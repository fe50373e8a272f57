//! The three canonical setups: a balanced Mach-Zehnder interferometer, a
//! single beam splitter with two inputs, and the double interferometer in
//! which two Mach-Zehnder interferometers share a central beam splitter.

use crate::expr::Real;

use super::{Circuit, CircuitError, Element, Emitter, Receiver, Terminal};

/// Reflectivities of the left-right symmetric double interferometer: first,
/// center-most, outer-middle and final beam splitters.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyParams {
    pub r0: Real,
    pub rc: Real,
    pub rm: Real,
    pub rf: Real,
}

impl HardyParams {
    pub fn new(r0: Real, rc: Real, rm: Real, rf: Real) -> Result<HardyParams, CircuitError> {
        let p = HardyParams { r0, rc, rm, rf };
        for (name, v) in p.named() {
            if !(0.0..=1.0).contains(&v.value()) || !v.value().is_finite() {
                return Err(CircuitError::OutOfRange { name: name.to_string(), value: v.value() });
            }
        }
        Ok(p)
    }

    pub fn from_f64(r0: f64, rc: f64, rm: f64, rf: f64) -> Result<HardyParams, CircuitError> {
        HardyParams::new(Real::float(r0), Real::float(rc), Real::float(rm), Real::float(rf))
    }

    /// Every beam splitter 50:50.
    pub fn balanced() -> HardyParams {
        let h = Real::ratio(1, 2);
        HardyParams { r0: h.clone(), rc: h.clone(), rm: h.clone(), rf: h }
    }

    pub fn named(&self) -> [(&'static str, &Real); 4] {
        [("R0", &self.r0), ("Rc", &self.rc), ("Rm", &self.rm), ("Rf", &self.rf)]
    }

    pub fn values(&self) -> [f64; 4] {
        [self.r0.value(), self.rc.value(), self.rm.value(), self.rf.value()]
    }
}

fn out(element: usize, port: u8) -> Emitter {
    Emitter::Out { element, port }
}

fn into(element: usize, port: u8) -> Receiver {
    Receiver::In { element, port }
}

/// Source `in` on the first beam splitter (`vac` on its other port), two
/// mirrors, detectors `D1` (constructive port) and `D2`.
pub fn build_mzi() -> Circuit {
    let mut c = Circuit::new("mzi");
    let half = Real::ratio(1, 2);
    let src = c.add_input("in");
    let vac = c.add_input("vac");
    let bs1 = c.add_element(Element::beam_splitter("bs1", half.clone()));
    let m1 = c.add_element(Element::mirror("m1"));
    let m2 = c.add_element(Element::mirror("m2"));
    let bs2 = c.add_element(Element::beam_splitter("bs2", half));
    let d1 = c.add_terminal(Terminal::detector("D1"));
    let d2 = c.add_terminal(Terminal::detector("D2"));
    c.connect(Emitter::Input(src), into(bs1, 0));
    c.connect(Emitter::Input(vac), into(bs1, 1));
    // transmitted beam takes the upper arm, reflected beam the lower arm
    c.connect(out(bs1, 0), into(m1, 0));
    c.connect(out(bs1, 1), into(m2, 0));
    c.connect(out(m1, 0), into(bs2, 0));
    c.connect(out(m2, 0), into(bs2, 1));
    c.connect(out(bs2, 1), Receiver::Terminal(d1));
    c.connect(out(bs2, 0), Receiver::Terminal(d2));
    c
}

/// One 50:50 beam splitter with inputs `in_L`, `in_R` and detectors `L`, `R`.
/// A photon from `in_L` reaches `R` on transmission and `L` on reflection.
pub fn build_hom() -> Circuit {
    let mut c = Circuit::new("hom");
    let l = c.add_input("in_L");
    let r = c.add_input("in_R");
    let bs = c.add_element(Element::beam_splitter("bs", Real::ratio(1, 2)));
    let dl = c.add_terminal(Terminal::detector("L"));
    let dr = c.add_terminal(Terminal::detector("R"));
    c.connect(Emitter::Input(l), into(bs, 0));
    c.connect(Emitter::Input(r), into(bs, 1));
    c.connect(out(bs, 0), Receiver::Terminal(dr));
    c.connect(out(bs, 1), Receiver::Terminal(dl));
    c
}

/// Two Mach-Zehnder interferometers joined by a common central beam splitter.
///
/// Inputs: `L`, `R` (photon sources) and the vacuum ports `L_vac`, `R_vac`
/// (first splitters) and `Lm_vac`, `Rm_vac` (outer-middle splitters).
/// Terminals: detectors `D1`..`D4` from left to right and loss sinks
/// `loss_L`, `loss_R` where light transmits through an outer-middle splitter.
///
/// On each side the first splitter transmits into the outer arm and reflects
/// into the inner arm. The outer-middle splitter reflects toward the final
/// splitter. At the central splitter a left-inner photon stays left on
/// reflection and crosses right on transmission. At each final splitter the
/// outer arm transmits, and the inner arm reflects, toward the inner detector
/// (`D2` on the left, `D3` on the right).
pub fn build_double_mzi(p: &HardyParams) -> Circuit {
    let mut c = Circuit::new("double_mzi");
    let l = c.add_input("L");
    let r = c.add_input("R");
    let l_vac = c.add_input("L_vac");
    let r_vac = c.add_input("R_vac");
    let lm_vac = c.add_input("Lm_vac");
    let rm_vac = c.add_input("Rm_vac");

    let b0l = c.add_element(Element::beam_splitter("bs0_L", p.r0.clone()));
    let b0r = c.add_element(Element::beam_splitter("bs0_R", p.r0.clone()));
    let bml = c.add_element(Element::beam_splitter("bsm_L", p.rm.clone()));
    let bmr = c.add_element(Element::beam_splitter("bsm_R", p.rm.clone()));
    let bc = c.add_element(Element::beam_splitter("bsc", p.rc.clone()));
    let bfl = c.add_element(Element::beam_splitter("bsf_L", p.rf.clone()));
    let bfr = c.add_element(Element::beam_splitter("bsf_R", p.rf.clone()));

    let d1 = c.add_terminal(Terminal::detector("D1"));
    let d2 = c.add_terminal(Terminal::detector("D2"));
    let d3 = c.add_terminal(Terminal::detector("D3"));
    let d4 = c.add_terminal(Terminal::detector("D4"));
    let loss_l = c.add_terminal(Terminal::loss("loss_L"));
    let loss_r = c.add_terminal(Terminal::loss("loss_R"));

    c.connect(Emitter::Input(l), into(b0l, 0));
    c.connect(Emitter::Input(l_vac), into(b0l, 1));
    c.connect(Emitter::Input(r), into(b0r, 0));
    c.connect(Emitter::Input(r_vac), into(b0r, 1));
    c.connect(Emitter::Input(lm_vac), into(bml, 1));
    c.connect(Emitter::Input(rm_vac), into(bmr, 1));

    // first splitters: outer arm on transmission, inner arm on reflection
    c.connect(out(b0l, 0), into(bml, 0));
    c.connect(out(b0l, 1), into(bc, 0));
    c.connect(out(b0r, 0), into(bmr, 0));
    c.connect(out(b0r, 1), into(bc, 1));

    // outer-middle splitters: transmission leaves the setup
    c.connect(out(bml, 0), Receiver::Terminal(loss_l));
    c.connect(out(bml, 1), into(bfl, 0));
    c.connect(out(bmr, 0), Receiver::Terminal(loss_r));
    c.connect(out(bmr, 1), into(bfr, 0));

    // central splitter: out0 feeds the right final splitter, out1 the left
    c.connect(out(bc, 0), into(bfr, 1));
    c.connect(out(bc, 1), into(bfl, 1));

    c.connect(out(bfl, 0), Receiver::Terminal(d2));
    c.connect(out(bfl, 1), Receiver::Terminal(d1));
    c.connect(out(bfr, 0), Receiver::Terminal(d3));
    c.connect(out(bfr, 1), Receiver::Terminal(d4));
    c
}
