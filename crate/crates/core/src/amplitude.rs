//! Complex amplitudes.
//!
//! Every amplitude produced by a network of 50:50 beam splitters, mirrors and
//! quarter-turn phase shifters lives in the ring `Z[i, 1/sqrt2]`. [`ExactAmp`]
//! stores such a value as `(a + b*sqrt2 + i*(c + d*sqrt2)) / 2^m` with checked
//! 64-bit integers, so probabilities like `1/64` come out with no rounding.
//! When a circuit uses an arbitrary reflectivity the engines fall back to
//! double precision through [`Amp::Float`].
//!
//! [`QSqrt2`] is the real field `Q(sqrt2)`; it is used for reflectivities
//! parsed from text and for closed-form design formulas, and converts into
//! [`ExactAmp`] whenever its denominators are powers of two.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AmpError {
    /// Integer capacity of the exact representation was exceeded.
    #[error("exact arithmetic capacity exceeded (circuit too deep for exact mode)")]
    Capacity,
    #[error("non-finite floating-point amplitude")]
    NonFinite,
    #[error("division by zero")]
    DivisionByZero,
}

// ----------------------------------------------------------------------------
// ExactAmp
// ----------------------------------------------------------------------------

/// Element of `Z[i, 1/sqrt2]`: `(a + b*sqrt2 + i*(c + d*sqrt2)) / 2^m`.
///
/// Values are kept canonical: either `m == 0` or at least one of the four
/// integers is odd. Since `{1, sqrt2}` is a basis of `Q(sqrt2)` over `Q`, the
/// canonical form is unique and structural equality is value equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ExactAmp {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    m: u32,
}

const MAX_EXPONENT: u32 = 1024;

fn narrow(v: i128) -> Result<i64, AmpError> {
    i64::try_from(v).map_err(|_| AmpError::Capacity)
}

impl ExactAmp {
    pub const ZERO: ExactAmp = ExactAmp { a: 0, b: 0, c: 0, d: 0, m: 0 };
    pub const ONE: ExactAmp = ExactAmp { a: 1, b: 0, c: 0, d: 0, m: 0 };
    pub const I: ExactAmp = ExactAmp { a: 0, b: 0, c: 1, d: 0, m: 0 };
    /// `1/sqrt2 = sqrt2 / 2`.
    pub const FRAC_1_SQRT_2: ExactAmp = ExactAmp { a: 0, b: 1, c: 0, d: 0, m: 1 };
    pub const SQRT_2: ExactAmp = ExactAmp { a: 0, b: 1, c: 0, d: 0, m: 0 };

    /// Builds and canonicalizes `(a + b*sqrt2 + i*(c + d*sqrt2)) / 2^m`.
    pub fn new(a: i64, b: i64, c: i64, d: i64, m: u32) -> ExactAmp {
        let mut x = ExactAmp { a, b, c, d, m };
        x.canonicalize();
        x
    }

    pub fn from_int(n: i64) -> ExactAmp {
        ExactAmp::new(n, 0, 0, 0, 0)
    }

    /// `n / 2^m`.
    pub fn dyadic(n: i64, m: u32) -> ExactAmp {
        ExactAmp::new(n, 0, 0, 0, m)
    }

    /// `i^n` for any integer `n`.
    pub fn i_pow(n: i64) -> ExactAmp {
        match n.rem_euclid(4) {
            0 => ExactAmp::ONE,
            1 => ExactAmp::I,
            2 => ExactAmp::from_int(-1),
            _ => ExactAmp::new(0, 0, -1, 0, 0),
        }
    }

    /// `e^{i k pi/4}`, the eighth roots of unity.
    pub fn omega_pow(k: i64) -> ExactAmp {
        let quarter = ExactAmp::i_pow(k.div_euclid(2));
        if k.rem_euclid(2) == 0 {
            quarter
        } else {
            // (1 + i)/sqrt2 = (sqrt2 + i sqrt2)/2
            let omega = ExactAmp::new(0, 1, 0, 1, 1);
            quarter.mul(&omega).expect("unit-magnitude product fits")
        }
    }

    /// The raw tuple `[a, b, c, d, m]`.
    pub fn parts(&self) -> (i64, i64, i64, i64, u32) {
        (self.a, self.b, self.c, self.d, self.m)
    }

    pub fn canonicalize(&mut self) {
        if self.a == 0 && self.b == 0 && self.c == 0 && self.d == 0 {
            self.m = 0;
            return;
        }
        while self.m > 0
            && self.a % 2 == 0
            && self.b % 2 == 0
            && self.c % 2 == 0
            && self.d % 2 == 0
        {
            self.a /= 2;
            self.b /= 2;
            self.c /= 2;
            self.d /= 2;
            self.m -= 1;
        }
    }

    pub fn is_canonical(&self) -> bool {
        let mut c = *self;
        c.canonicalize();
        c == *self
    }

    pub fn is_zero(&self) -> bool {
        *self == ExactAmp::ZERO
    }

    pub fn is_real(&self) -> bool {
        self.c == 0 && self.d == 0
    }

    fn from_wide(a: i128, b: i128, c: i128, d: i128, m: u32) -> Result<ExactAmp, AmpError> {
        // Reduce in wide integers first so transient growth does not trip the
        // 64-bit capacity check.
        let (mut a, mut b, mut c, mut d, mut m) = (a, b, c, d, m);
        if a == 0 && b == 0 && c == 0 && d == 0 {
            return Ok(ExactAmp::ZERO);
        }
        while m > 0 && a % 2 == 0 && b % 2 == 0 && c % 2 == 0 && d % 2 == 0 {
            a /= 2;
            b /= 2;
            c /= 2;
            d /= 2;
            m -= 1;
        }
        if m > MAX_EXPONENT {
            return Err(AmpError::Capacity);
        }
        Ok(ExactAmp { a: narrow(a)?, b: narrow(b)?, c: narrow(c)?, d: narrow(d)?, m })
    }

    pub fn add(&self, other: &ExactAmp) -> Result<ExactAmp, AmpError> {
        let m = self.m.max(other.m);
        let (x, y) = (self.scaled_to(m)?, other.scaled_to(m)?);
        let sum = |p: i128, q: i128| p.checked_add(q).ok_or(AmpError::Capacity);
        ExactAmp::from_wide(sum(x.0, y.0)?, sum(x.1, y.1)?, sum(x.2, y.2)?, sum(x.3, y.3)?, m)
    }

    fn scaled_to(&self, m: u32) -> Result<(i128, i128, i128, i128), AmpError> {
        let shift = m - self.m;
        if shift >= 63 {
            return Err(AmpError::Capacity);
        }
        let f = 1i128 << shift;
        Ok((
            self.a as i128 * f,
            self.b as i128 * f,
            self.c as i128 * f,
            self.d as i128 * f,
        ))
    }

    pub fn sub(&self, other: &ExactAmp) -> Result<ExactAmp, AmpError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ExactAmp) -> Result<ExactAmp, AmpError> {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        let (e, f, g, h) = (other.a as i128, other.b as i128, other.c as i128, other.d as i128);
        // (a + b s)(e + f s) with s^2 = 2
        let qmul = |a: i128, b: i128, e: i128, f: i128| -> Option<(i128, i128)> {
            let re = a.checked_mul(e)?.checked_add(b.checked_mul(f)?.checked_mul(2)?)?;
            let sq = a.checked_mul(f)?.checked_add(b.checked_mul(e)?)?;
            Some((re, sq))
        };
        let cap = AmpError::Capacity;
        let (rr0, rr1) = qmul(a, b, e, f).ok_or(cap)?;
        let (ii0, ii1) = qmul(c, d, g, h).ok_or(cap)?;
        let (ri0, ri1) = qmul(a, b, g, h).ok_or(cap)?;
        let (ir0, ir1) = qmul(c, d, e, f).ok_or(cap)?;
        let m = self.m.checked_add(other.m).ok_or(cap)?;
        ExactAmp::from_wide(
            rr0.checked_sub(ii0).ok_or(cap)?,
            rr1.checked_sub(ii1).ok_or(cap)?,
            ri0.checked_add(ir0).ok_or(cap)?,
            ri1.checked_add(ir1).ok_or(cap)?,
            m,
        )
    }

    pub fn neg(&self) -> ExactAmp {
        ExactAmp { a: -self.a, b: -self.b, c: -self.c, d: -self.d, m: self.m }
    }

    pub fn conj(&self) -> ExactAmp {
        ExactAmp { a: self.a, b: self.b, c: -self.c, d: -self.d, m: self.m }
    }

    /// `|x|^2 = x * conj(x)`, a real ring element.
    pub fn abs_sq(&self) -> Result<ExactAmp, AmpError> {
        self.mul(&self.conj())
    }

    pub fn re(&self) -> ExactAmp {
        ExactAmp::new(self.a, self.b, 0, 0, self.m)
    }

    pub fn im(&self) -> ExactAmp {
        ExactAmp::new(self.c, self.d, 0, 0, self.m)
    }

    pub fn to_complex(&self) -> Complex64 {
        let s = std::f64::consts::SQRT_2;
        let scale = (-(self.m as f64)).exp2();
        Complex64::new(
            (self.a as f64 + self.b as f64 * s) * scale,
            (self.c as f64 + self.d as f64 * s) * scale,
        )
    }

    /// Real part as `Q(sqrt2)`.
    pub fn re_field(&self) -> QSqrt2 {
        let den = Ratio::from_integer(1i128 << self.m.min(120));
        QSqrt2::new(
            Ratio::from_integer(self.a as i128) / den,
            Ratio::from_integer(self.b as i128) / den,
        )
    }

    /// Nonnegative square root of a nonnegative real element, if it lies in
    /// the ring.
    pub fn sqrt_real(&self) -> Option<ExactAmp> {
        if !self.is_real() || self.m > 120 {
            return None;
        }
        self.re_field().sqrt()?.to_exact()
    }
}

impl fmt::Display for ExactAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (self.re_field(), self.im().re_field());
        let simple = |q: &QSqrt2| q.rational.is_zero() || q.surd.is_zero();
        let im_text = |q: &QSqrt2| {
            if q.surd.is_zero() {
                let (n, d) = (*q.rational.numer(), *q.rational.denom());
                let head = match n {
                    1 => "i".to_string(),
                    -1 => "-i".to_string(),
                    n => format!("{n}i"),
                };
                if d == 1 {
                    head
                } else {
                    format!("{head}/{d}")
                }
            } else {
                format!("({q})i")
            }
        };
        match (re.is_zero(), im.is_zero()) {
            (_, true) => write!(f, "{re}"),
            (true, false) => f.write_str(&im_text(&im)),
            (false, false) => {
                let neg_simple = simple(&im) && im.signum() == Ordering::Less;
                if neg_simple {
                    write!(f, "{re}-{}", im_text(&im.neg()))
                } else {
                    write!(f, "{re}+{}", im_text(&im))
                }
            }
        }
    }
}

impl Serialize for ExactAmp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.a, self.b, self.c, self.d, self.m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactAmp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b, c, dd, m) = <(i64, i64, i64, i64, u32)>::deserialize(d)?;
        Ok(ExactAmp::new(a, b, c, dd, m))
    }
}

// ----------------------------------------------------------------------------
// QSqrt2
// ----------------------------------------------------------------------------

type Q = Ratio<i128>;

/// Real number `p + q*sqrt2` with rational `p`, `q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct QSqrt2 {
    pub rational: Q,
    pub surd: Q,
}

fn rational_sqrt(x: Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (*x.numer(), *x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (rn * rn == n && rd * rd == d).then(|| Q::new(rn, rd))
}

impl QSqrt2 {
    pub fn new(rational: Q, surd: Q) -> QSqrt2 {
        QSqrt2 { rational, surd }
    }

    pub fn from_ratio(n: i128, d: i128) -> QSqrt2 {
        QSqrt2::new(Q::new(n, d), Q::zero())
    }

    pub fn from_int(n: i128) -> QSqrt2 {
        QSqrt2::from_ratio(n, 1)
    }

    pub fn sqrt2() -> QSqrt2 {
        QSqrt2::new(Q::zero(), Q::from_integer(1))
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.rational.to_f64().unwrap_or(f64::NAN);
        let q = self.surd.to_f64().unwrap_or(f64::NAN);
        p + q * std::f64::consts::SQRT_2
    }

    pub fn checked_add(&self, o: &QSqrt2) -> Result<QSqrt2, AmpError> {
        Ok(QSqrt2::new(
            self.rational.checked_add(&o.rational).ok_or(AmpError::Capacity)?,
            self.surd.checked_add(&o.surd).ok_or(AmpError::Capacity)?,
        ))
    }

    pub fn checked_sub(&self, o: &QSqrt2) -> Result<QSqrt2, AmpError> {
        Ok(QSqrt2::new(
            self.rational.checked_sub(&o.rational).ok_or(AmpError::Capacity)?,
            self.surd.checked_sub(&o.surd).ok_or(AmpError::Capacity)?,
        ))
    }

    pub fn checked_mul(&self, o: &QSqrt2) -> Result<QSqrt2, AmpError> {
        let m = |x: &Q, y: &Q| x.checked_mul(y).ok_or(AmpError::Capacity);
        let a = |x: Q, y: Q| x.checked_add(&y).ok_or(AmpError::Capacity);
        let two = Q::from_integer(2);
        let rational = a(m(&self.rational, &o.rational)?, m(&m(&self.surd, &o.surd)?, &two)?)?;
        let surd = a(m(&self.rational, &o.surd)?, m(&self.surd, &o.rational)?)?;
        Ok(QSqrt2::new(rational, surd))
    }

    /// Field norm `p^2 - 2 q^2`.
    fn norm(&self) -> Result<Q, AmpError> {
        let m = |x: &Q, y: &Q| x.checked_mul(y).ok_or(AmpError::Capacity);
        let pp = m(&self.rational, &self.rational)?;
        let qq = m(&m(&self.surd, &self.surd)?, &Q::from_integer(2))?;
        pp.checked_sub(&qq).ok_or(AmpError::Capacity)
    }

    pub fn checked_div(&self, o: &QSqrt2) -> Result<QSqrt2, AmpError> {
        if o.is_zero() {
            return Err(AmpError::DivisionByZero);
        }
        let n = o.norm()?;
        let conj = QSqrt2::new(o.rational, -o.surd);
        let top = self.checked_mul(&conj)?;
        let d = |x: &Q| x.checked_div(&n).ok_or(AmpError::Capacity);
        Ok(QSqrt2::new(d(&top.rational)?, d(&top.surd)?))
    }

    pub fn neg(&self) -> QSqrt2 {
        QSqrt2::new(-self.rational, -self.surd)
    }

    pub fn signum(&self) -> Ordering {
        let p = self.rational.cmp(&Q::zero());
        let q = self.surd.cmp(&Q::zero());
        match (p, q) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (s, t) if s == t => s,
            // opposite signs: compare p^2 against 2 q^2
            (s, _) => {
                let pp = self.rational * self.rational;
                let qq = self.surd * self.surd * Q::from_integer(2);
                match pp.cmp(&qq) {
                    Ordering::Greater => s,
                    Ordering::Less => s.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn cmp_value(&self, o: &QSqrt2) -> Ordering {
        match self.checked_sub(o) {
            Ok(d) => d.signum(),
            Err(_) => self.to_f64().partial_cmp(&o.to_f64()).unwrap_or(Ordering::Equal),
        }
    }

    /// Nonnegative square root within `Q(sqrt2)`, if one exists.
    pub fn sqrt(&self) -> Option<QSqrt2> {
        if self.signum() == Ordering::Less {
            return None;
        }
        if self.is_zero() {
            return Some(*self);
        }
        let (a, b) = (self.rational, self.surd);
        if b.is_zero() {
            if let Some(p) = rational_sqrt(a) {
                return Some(QSqrt2::new(p, Q::zero()));
            }
            // sqrt(a) = q sqrt2 with q^2 = a/2
            return rational_sqrt(a / Q::from_integer(2)).map(|q| QSqrt2::new(Q::zero(), q));
        }
        // (p + q s)^2 = p^2 + 2 q^2 + 2 p q s
        let disc = rational_sqrt(self.norm().ok()?)?;
        let two = Q::from_integer(2);
        for p_sq in [(a + disc) / two, (a - disc) / two] {
            let Some(p) = rational_sqrt(p_sq) else { continue };
            if p.is_zero() {
                continue;
            }
            let q = b / (two * p);
            let mut root = QSqrt2::new(p, q);
            if root.signum() == Ordering::Less {
                root = root.neg();
            }
            if root.checked_mul(&root).ok()? == *self {
                return Some(root);
            }
        }
        None
    }

    /// Converts to the amplitude ring when both denominators are powers of two.
    pub fn to_exact(&self) -> Option<ExactAmp> {
        let den = num_integer::lcm(*self.rational.denom(), *self.surd.denom());
        if den <= 0 || den & (den - 1) != 0 {
            return None;
        }
        let m = den.trailing_zeros();
        let a = (self.rational * Q::from_integer(den)).to_integer();
        let b = (self.surd * Q::from_integer(den)).to_integer();
        Some(ExactAmp::new(i64::try_from(a).ok()?, i64::try_from(b).ok()?, 0, 0, m))
    }
}

fn fmt_surd(q: Q, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let (n, d) = (*q.numer(), *q.denom());
    match n {
        1 => f.write_str("sqrt2")?,
        -1 => f.write_str("-sqrt2")?,
        n => write!(f, "{n}*sqrt2")?,
    }
    if d != 1 {
        write!(f, "/{d}")?;
    }
    Ok(())
}

/// Parseable by [`crate::expr::Real::parse`]: `3/4`, `sqrt2/4`, `17-12*sqrt2`.
impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.surd.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => fmt_surd(self.surd, f),
            (false, false) => {
                write!(f, "{}", self.rational)?;
                if self.surd.is_positive() {
                    f.write_str("+")?;
                }
                fmt_surd(self.surd, f)
            }
        }
    }
}

// ----------------------------------------------------------------------------
// Amp
// ----------------------------------------------------------------------------

/// Double-precision fallback amplitude; the engines reject non-finite values.
pub type FloatAmp = Complex64;

/// An amplitude that stays exact as long as every factor was exact.
///
/// Serialized as `[a,b,c,d,m]` when exact and `[re, im]` otherwise.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amp {
    Exact(ExactAmp),
    Float(FloatAmp),
}

fn finite(z: Complex64) -> Result<Amp, AmpError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(Amp::Float(z))
    } else {
        Err(AmpError::NonFinite)
    }
}

impl Amp {
    pub const ZERO: Amp = Amp::Exact(ExactAmp::ZERO);
    pub const ONE: Amp = Amp::Exact(ExactAmp::ONE);
    pub const I: Amp = Amp::Exact(ExactAmp::I);

    pub fn float(re: f64, im: f64) -> Amp {
        Amp::Float(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Amp {
        Amp::float(x, 0.0)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Amp::Exact(_))
    }

    pub fn exact(&self) -> Option<ExactAmp> {
        match self {
            Amp::Exact(x) => Some(*x),
            Amp::Float(_) => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Amp::Exact(x) => x.to_complex(),
            Amp::Float(z) => *z,
        }
    }

    /// Real part as `f64` (probabilities are stored as real amplitudes).
    pub fn value(&self) -> f64 {
        self.to_complex().re
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Amp::Exact(x) => x.is_zero(),
            Amp::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn add(&self, o: &Amp) -> Result<Amp, AmpError> {
        match (self, o) {
            (Amp::Exact(x), Amp::Exact(y)) => x.add(y).map(Amp::Exact),
            _ => finite(self.to_complex() + o.to_complex()),
        }
    }

    pub fn sub(&self, o: &Amp) -> Result<Amp, AmpError> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Amp) -> Result<Amp, AmpError> {
        match (self, o) {
            (Amp::Exact(x), Amp::Exact(y)) => x.mul(y).map(Amp::Exact),
            _ => finite(self.to_complex() * o.to_complex()),
        }
    }

    pub fn neg(&self) -> Amp {
        match self {
            Amp::Exact(x) => Amp::Exact(x.neg()),
            Amp::Float(z) => Amp::Float(-z),
        }
    }

    pub fn conj(&self) -> Amp {
        match self {
            Amp::Exact(x) => Amp::Exact(x.conj()),
            Amp::Float(z) => Amp::Float(z.conj()),
        }
    }

    pub fn abs_sq(&self) -> Result<Amp, AmpError> {
        match self {
            Amp::Exact(x) => x.abs_sq().map(Amp::Exact),
            Amp::Float(z) => finite(Complex64::new(z.norm_sqr(), 0.0)),
        }
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Amp>>(items: I) -> Result<Amp, AmpError> {
        items.into_iter().try_fold(Amp::ZERO, |acc, x| acc.add(x))
    }

    /// Square root of a nonnegative integer, exact when it lies in the ring.
    pub fn sqrt_int(n: u64) -> Amp {
        match ExactAmp::from_int(n as i64).sqrt_real() {
            Some(r) => Amp::Exact(r),
            None => Amp::real((n as f64).sqrt()),
        }
    }
}

impl From<ExactAmp> for Amp {
    fn from(x: ExactAmp) -> Amp {
        Amp::Exact(x)
    }
}

impl From<Complex64> for Amp {
    fn from(z: Complex64) -> Amp {
        Amp::Float(z)
    }
}

impl fmt::Display for Amp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amp::Exact(x) => write!(f, "{x}"),
            Amp::Float(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol * (1.0 + y.norm())
    }

    // sum of absolute values of the four terms: the scale of float rounding
    fn magnitude(x: &ExactAmp) -> f64 {
        let s = std::f64::consts::SQRT_2;
        (x.a.abs() as f64 + x.b.abs() as f64 * s + x.c.abs() as f64 + x.d.abs() as f64 * s) * (-(x.m as f64)).exp2()
    }

    #[test]
    fn i_over_sqrt2_squared() {
        let x = ExactAmp::I.mul(&ExactAmp::FRAC_1_SQRT_2).unwrap();
        assert_eq!(x.mul(&x).unwrap(), ExactAmp::dyadic(-1, 1));
    }

    #[test]
    fn crossing_path_product() {
        // (i r) t (i r) with t = r = 1/sqrt2 is i^2 / 2^{3/2}
        let ir = ExactAmp::I.mul(&ExactAmp::FRAC_1_SQRT_2).unwrap();
        let t = ExactAmp::FRAC_1_SQRT_2;
        let c = ir.mul(&t).unwrap().mul(&ir).unwrap();
        let expected = ExactAmp::from_int(-1)
            .mul(&ExactAmp::FRAC_1_SQRT_2)
            .unwrap()
            .mul(&ExactAmp::dyadic(1, 1))
            .unwrap();
        assert_eq!(c, expected);
        assert_eq!(c, ExactAmp::new(0, -1, 0, 0, 2));
    }

    #[test]
    fn mzi_sums() {
        let half = |k| ExactAmp::i_pow(k).mul(&ExactAmp::dyadic(1, 1)).unwrap();
        assert_eq!(half(1).add(&half(3)).unwrap(), ExactAmp::ZERO);
        assert_eq!(half(2).add(&half(2)).unwrap(), ExactAmp::from_int(-1));
        let x = ExactAmp::new(3, -1, 2, 5, 3);
        assert_eq!(x.add(&ExactAmp::ZERO).unwrap(), x);
    }

    #[test]
    fn abs_sq_values() {
        let x = ExactAmp::I.mul(&ExactAmp::FRAC_1_SQRT_2).unwrap();
        assert_eq!(x.abs_sq().unwrap(), ExactAmp::dyadic(1, 1));
        assert_eq!(ExactAmp::dyadic(1, 3).abs_sq().unwrap(), ExactAmp::dyadic(1, 6));
        assert_eq!(ExactAmp::ZERO.abs_sq().unwrap(), ExactAmp::ZERO);
    }

    #[test]
    fn omega_powers() {
        let w = ExactAmp::omega_pow(1);
        assert_eq!(w.mul(&w).unwrap(), ExactAmp::I);
        assert_eq!(ExactAmp::omega_pow(8), ExactAmp::ONE);
        assert_eq!(ExactAmp::omega_pow(-2), ExactAmp::i_pow(-1));
    }

    #[test]
    fn overflow_is_reported() {
        let g = ExactAmp::new(1, 1, 0, 0, 0);
        let mut x = ExactAmp::ONE;
        let mut err = None;
        for _ in 0..200 {
            match x.mul(&g) {
                Ok(y) => x = y,
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        assert_eq!(err, Some(AmpError::Capacity));
    }

    #[test]
    fn canonical_form() {
        let x = ExactAmp::new(4, 2, 0, 8, 3);
        assert_eq!(x.parts(), (2, 1, 0, 4, 2));
        assert!(x.is_canonical());
        assert_eq!(ExactAmp::new(0, 0, 0, 0, 9).parts(), (0, 0, 0, 0, 0));
    }

    #[test]
    fn display_and_serde() {
        let x = ExactAmp::new(1, -1, 0, 2, 3);
        assert_eq!(x.to_string(), "1/8-sqrt2/8+(sqrt2/4)i");
        assert_eq!(ExactAmp::new(0, 0, 1, 0, 1).to_string(), "i/2");
        assert_eq!(ExactAmp::new(1, 0, -1, 0, 1).to_string(), "1/2-i/2");
        assert_eq!(ExactAmp::new(0, 0, -1, 0, 0).to_string(), "-i");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "[1,-1,0,2,3]");
        let back: ExactAmp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        let uncanonical: ExactAmp = serde_json::from_str("[2,0,0,0,1]").unwrap();
        assert_eq!(uncanonical, ExactAmp::ONE);
    }

    #[test]
    fn qsqrt2_sqrt() {
        let half = QSqrt2::from_ratio(1, 2);
        let r = half.sqrt().unwrap();
        assert_eq!(r.to_exact(), Some(ExactAmp::FRAC_1_SQRT_2));
        // sqrt(3 - 2 sqrt2) = sqrt2 - 1
        let x = QSqrt2::new(Q::from_integer(3), Q::from_integer(-2));
        assert_eq!(x.sqrt().unwrap(), QSqrt2::new(Q::from_integer(-1), Q::from_integer(1)));
        assert!(QSqrt2::from_ratio(1, 3).sqrt().is_none());
        assert!(QSqrt2::from_ratio(2, 3).sqrt().is_none());
        assert_eq!(QSqrt2::from_ratio(4, 9).sqrt(), Some(QSqrt2::from_ratio(2, 3)));
        // 2 - sqrt2 is positive, sqrt2 - 2 is negative
        let v = QSqrt2::new(Q::from_integer(2), Q::from_integer(-1));
        assert_eq!(v.signum(), Ordering::Greater);
        assert_eq!(v.neg().signum(), Ordering::Less);
        assert!(v.sqrt().is_none());
    }

    #[test]
    fn qsqrt2_division() {
        let x = QSqrt2::new(Q::from_integer(1), Q::from_integer(1));
        let inv = QSqrt2::from_int(1).checked_div(&x).unwrap();
        assert_eq!(inv, QSqrt2::new(Q::from_integer(-1), Q::from_integer(1)));
        assert_eq!(x.checked_div(&QSqrt2::from_int(0)), Err(AmpError::DivisionByZero));
    }

    #[test]
    fn sqrt_real_in_ring() {
        assert_eq!(ExactAmp::dyadic(1, 1).sqrt_real(), Some(ExactAmp::FRAC_1_SQRT_2));
        assert_eq!(ExactAmp::from_int(2).sqrt_real(), Some(ExactAmp::SQRT_2));
        assert_eq!(ExactAmp::from_int(4).sqrt_real(), Some(ExactAmp::from_int(2)));
        assert_eq!(ExactAmp::from_int(6).sqrt_real(), None);
        assert_eq!(Amp::sqrt_int(6), Amp::real(6f64.sqrt()));
    }

    #[test]
    fn mixed_modes_degrade_to_float() {
        let x = Amp::Exact(ExactAmp::FRAC_1_SQRT_2);
        let y = Amp::real(0.5);
        let p = x.mul(&y).unwrap();
        assert!(!p.is_exact());
        assert!((p.value() - 0.5 / 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(Amp::real(f64::MAX).mul(&Amp::real(10.0)), Err(AmpError::NonFinite));
    }

    fn small() -> impl Strategy<Value = ExactAmp> {
        (-40i64..40, -40i64..40, -40i64..40, -40i64..40, 0u32..8)
            .prop_map(|(a, b, c, d, m)| ExactAmp::new(a, b, c, d, m))
    }

    proptest! {
        #[test]
        fn product_matches_float(x in small(), y in small()) {
            let p = x.mul(&y).unwrap();
            prop_assert!(p.is_canonical());
            let err = (p.to_complex() - x.to_complex() * y.to_complex()).norm();
            prop_assert!(err <= 1e-15 * (1.0 + magnitude(&x) * magnitude(&y)));
        }

        #[test]
        fn sum_matches_float(x in small(), y in small()) {
            let s = x.add(&y).unwrap();
            prop_assert!(s.is_canonical());
            let err = (s.to_complex() - (x.to_complex() + y.to_complex())).norm();
            prop_assert!(err <= 1e-15 * (1.0 + magnitude(&x) + magnitude(&y)));
        }

        #[test]
        fn ring_axioms(x in small(), y in small(), z in small()) {
            let lhs = x.mul(&y).unwrap().mul(&z).unwrap();
            let rhs = x.mul(&y.mul(&z).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let dl = x.mul(&y.add(&z).unwrap()).unwrap();
            let dr = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
            prop_assert_eq!(dl, dr);
            let f = x.to_complex() * (y.to_complex() + z.to_complex());
            prop_assert!(close(dl.to_complex(), f, 1e-12));
        }

        #[test]
        fn conjugation_and_modulus(x in small(), y in small()) {
            let xy = x.mul(&y).unwrap();
            prop_assert_eq!(xy.conj(), x.conj().mul(&y.conj()).unwrap());
            let lhs = xy.abs_sq().unwrap();
            prop_assert!(lhs.is_real());
            prop_assert_eq!(lhs, x.abs_sq().unwrap().mul(&y.abs_sq().unwrap()).unwrap());
        }

        #[test]
        fn canonicalization_idempotent(a in -500i64..500, b in -500i64..500, c in -500i64..500,
                                       d in -500i64..500, m in 0u32..12) {
            let raw = ExactAmp { a, b, c, d, m };
            let once = ExactAmp::new(a, b, c, d, m);
            let mut twice = once;
            twice.canonicalize();
            prop_assert_eq!(once, twice);
            prop_assert!(close(once.to_complex(), raw.to_complex(), 1e-15));
        }
    }
}
