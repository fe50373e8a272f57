//! Reflectivity design for the symmetric double interferometer: when does
//! the `D2 D3` coincidence vanish, and how large can it be while both
//! single-photon and two-photon interference stay complete?
//!
//! With `O = i t0 rm tf`, `Z = i^3 r0 rc rf`, `C = i^2 r0 tc rf`,
//!
//! ```text
//! A23 = (O + Z)^2 + C^2
//!     = R0 Tc Rf - T0 Rm Tf - R0 Rc Rf + 2 sqrt(T0 Rm Tf R0 Rc Rf)
//! ```
//!
//! which is real, so the exact form only needs `Q(sqrt2)`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{Amp, AmpError, QSqrt2};
use crate::circuit::{CircuitError, Element, HardyParams};
use crate::expr::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("R0 * Rf = 0: the zero-family ratio is undefined")]
    DivisionByZero,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Amp(#[from] AmpError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathAmps {
    pub o: Amp,
    pub z: Amp,
    pub c: Amp,
}

/// `(t, r)` of a reflectivity, exact when possible.
fn tr(r: &Real) -> (Amp, Amp) {
    Element::coefficients(r)
}

pub fn path_amps(p: &HardyParams) -> Result<PathAmps, AmpError> {
    let (t0, r0) = tr(&p.r0);
    let (tc, rc) = tr(&p.rc);
    let (_, rm) = tr(&p.rm);
    let (tf, rf) = tr(&p.rf);
    let i = Amp::I;
    let o = i.mul(&t0)?.mul(&rm)?.mul(&tf)?;
    let z = i.neg().mul(&r0)?.mul(&rc)?.mul(&rf)?;
    let c = Amp::ONE.neg().mul(&r0)?.mul(&tc)?.mul(&rf)?;
    Ok(PathAmps { o, z, c })
}

impl PathAmps {
    /// `(O + Z)^2 + C^2`.
    pub fn a23(&self) -> Result<Amp, AmpError> {
        let s = self.o.add(&self.z)?;
        s.mul(&s)?.add(&self.c.mul(&self.c)?)
    }
}

/// `|(O + Z)^2 + C^2|^2`.
pub fn p23(p: &HardyParams) -> Result<Amp, AmpError> {
    path_amps(p)?.a23()?.abs_sq()
}

fn field(r: &Real) -> Option<QSqrt2> {
    r.exact_value()
}

/// Exact `A23` from the closed form, when all four reflectivities are exact
/// and the square root stays in `Q(sqrt2)`.
pub fn a23_exact(p: &HardyParams) -> Option<QSqrt2> {
    let one = QSqrt2::from_int(1);
    let (r0, rc, rm, rf) = (field(&p.r0)?, field(&p.rc)?, field(&p.rm)?, field(&p.rf)?);
    let t0 = one.checked_sub(&r0).ok()?;
    let tc = one.checked_sub(&rc).ok()?;
    let tf = one.checked_sub(&rf).ok()?;
    let outer = t0.checked_mul(&rm).ok()?.checked_mul(&tf).ok()?;
    let zig = r0.checked_mul(&rc).ok()?.checked_mul(&rf).ok()?;
    let cross = r0.checked_mul(&tc).ok()?.checked_mul(&rf).ok()?;
    let root = outer.checked_mul(&zig).ok()?.sqrt()?;
    let two_root = root.checked_add(&root).ok()?;
    cross.checked_sub(&outer).ok()?.checked_sub(&zig).ok()?.checked_add(&two_root).ok()
}

/// Exact `P23 = A23^2`.
pub fn p23_exact(p: &HardyParams) -> Option<QSqrt2> {
    let a = a23_exact(p)?;
    a.checked_mul(&a).ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

/// `2R* - (1 +- 2 sqrt(Rc (1 - Rc)))` with `2R* = Rm (1-R0)(1-Rf) / (R0 Rf)`.
pub fn zero_family_residual(p: &HardyParams, branch: Branch) -> Result<f64, DesignError> {
    let [r0, rc, rm, rf] = p.values();
    if r0 * rf == 0.0 {
        return Err(DesignError::DivisionByZero);
    }
    let two_r_star = rm * (1.0 - r0) * (1.0 - rf) / (r0 * rf);
    let s = 2.0 * (rc * (1.0 - rc)).sqrt();
    Ok(match branch {
        Branch::Plus => two_r_star - (1.0 + s),
        Branch::Minus => two_r_star - (1.0 - s),
    })
}

/// Whether a zero residual on `branch` forces `P23 = 0`. Squaring loses the
/// sign of `rc - tc`, so the minus branch only qualifies for `Rc >= 1/2`.
pub fn branch_implies_zero(p: &HardyParams, branch: Branch) -> bool {
    match branch {
        Branch::Plus => true,
        Branch::Minus => p.rc.value() >= 0.5,
    }
}

/// `R*` of the zero family, for the circle `(R* - 1/2)^2 + (Rc - 1/2)^2 = 1/4`.
pub fn r_star(p: &HardyParams) -> Result<f64, DesignError> {
    let [r0, _, rm, rf] = p.values();
    if r0 * rf == 0.0 {
        return Err(DesignError::DivisionByZero);
    }
    Ok(rm * (1.0 - r0) * (1.0 - rf) / (2.0 * r0 * rf))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintResiduals {
    /// `O + Z = i (t0 rm tf - r0 rc rf)`; zero for complete single-photon interference.
    pub mzi: Amp,
    /// `Z^2 + C^2 = R0 Rf (Tc - Rc)`; zero for complete two-photon interference.
    pub homi: f64,
}

pub fn constraint_residuals(p: &HardyParams) -> Result<ConstraintResiduals, AmpError> {
    let a = path_amps(p)?;
    let [r0, rc, _, rf] = p.values();
    Ok(ConstraintResiduals { mzi: a.o.add(&a.z)?, homi: r0 * rf * ((1.0 - rc) - rc) })
}

/// `A23` on the constrained manifold with `Rf` eliminated:
/// `R0 (1 - R0) / (R0/Rm + 2 (1 - R0))`.
pub fn constrained_a23(r0: f64, rm: f64) -> f64 {
    r0 * (1.0 - r0) / (r0 / rm + 2.0 * (1.0 - r0))
}

/// `Rf` that keeps both constraints with `Rc = 1/2`: from `R0 Rf / 2 = Rm T0 Tf`.
pub fn constrained_rf(r0: f64, rm: f64) -> f64 {
    rm * (1.0 - r0) / (r0 / 2.0 + rm * (1.0 - r0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub params: HardyParams,
    /// Maximal `P23`.
    pub value: f64,
    /// Best grid point `(R0, Rm)` before refinement.
    pub grid_best: (f64, f64),
}

const GRID_STEP: f64 = 1e-3;
const GOLDEN_TOL: f64 = 1e-10;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Maximizes `P23` over the constrained manifold: a `(R0, Rm)` grid, then
/// golden-section refinement in `R0` at `Rm = 1`.
pub fn maximize_p23() -> Optimum {
    let n = (1.0 / GRID_STEP).round() as usize;
    let best = (1..n)
        .into_par_iter()
        .flat_map_iter(|i| (1..=n).map(move |j| (i as f64 * GRID_STEP, j as f64 * GRID_STEP)))
        .map(|(r0, rm)| (constrained_a23(r0, rm).powi(2), r0, rm))
        // ties resolve to the smaller (R0, Rm), so the reduction is order-free
        .reduce(
            || (f64::NEG_INFINITY, 0.0, 0.0),
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                    y
                } else {
                    x
                }
            },
        );
    let rm = 1.0;
    let lo = (best.1 - GRID_STEP).max(0.0);
    let hi = (best.1 + GRID_STEP).min(1.0);
    let r0 = golden_max(|x| constrained_a23(x, rm), lo, hi);
    let rf = constrained_rf(r0, rm);
    let params = HardyParams::from_f64(r0, 0.5, rm, rf).expect("optimum lies inside the unit box");
    Optimum { params, value: constrained_a23(r0, rm).powi(2), grid_best: (best.1, best.2) }
}

/// One CSV row of a parameter scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ScanRow {
    pub R0: f64,
    pub Rc: f64,
    pub Rm: f64,
    pub Rf: f64,
    pub p23: f64,
    /// Coefficient of `i` in `O + Z`.
    pub residual_mzi: f64,
    pub residual_homi: f64,
    pub residual_zero_plus: Option<f64>,
    pub residual_zero_minus: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanParam {
    R0,
    Rc,
    Rm,
    Rf,
}

impl std::str::FromStr for ScanParam {
    type Err = String;

    fn from_str(s: &str) -> Result<ScanParam, String> {
        match s {
            "R0" | "r0" => Ok(ScanParam::R0),
            "Rc" | "rc" => Ok(ScanParam::Rc),
            "Rm" | "rm" => Ok(ScanParam::Rm),
            "Rf" | "rf" => Ok(ScanParam::Rf),
            other => Err(format!("unknown parameter `{other}` (expected R0, Rc, Rm or Rf)")),
        }
    }
}

pub fn scan_row(p: &HardyParams) -> Result<ScanRow, AmpError> {
    let [r0, rc, rm, rf] = p.values();
    let res = constraint_residuals(p)?;
    Ok(ScanRow {
        R0: r0,
        Rc: rc,
        Rm: rm,
        Rf: rf,
        p23: p23(p)?.value(),
        residual_mzi: res.mzi.to_complex().im,
        residual_homi: res.homi,
        residual_zero_plus: zero_family_residual(p, Branch::Plus).ok(),
        residual_zero_minus: zero_family_residual(p, Branch::Minus).ok(),
    })
}

/// Varies one parameter of `base` over `values`.
pub fn scan(base: &HardyParams, param: ScanParam, values: &[f64]) -> Result<Vec<ScanRow>, DesignError> {
    values
        .par_iter()
        .map(|&v| {
            let mut p = base.clone();
            let slot = match param {
                ScanParam::R0 => &mut p.r0,
                ScanParam::Rc => &mut p.rc,
                ScanParam::Rm => &mut p.rm,
                ScanParam::Rf => &mut p.rf,
            };
            *slot = Real::float(v);
            let p = HardyParams::new(p.r0, p.rc, p.rm, p.rf)?;
            Ok(scan_row(&p)?)
        })
        .collect()
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}
