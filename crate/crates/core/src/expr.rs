//! Small arithmetic-expression reader for reflectivities, phases and internal
//! state components in circuit files, e.g. `"1/2"`, `"2-sqrt2"`, `"0.3"`,
//! `"sqrt(2/3)"`, `"3*pi/4"`.
//!
//! Values keep an exact form `q * pi^k` with `q` in `Q(sqrt2)` whenever every
//! step of the evaluation stays inside that field.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::amplitude::{ExactAmp, QSqrt2};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}`: {reason}")]
pub struct ExprError {
    pub input: String,
    pub reason: String,
}

/// A real parameter together with its exact value when one is known.
#[derive(Clone, Debug, PartialEq)]
pub struct Real {
    value: f64,
    exact: Option<QSqrt2>,
    pi_power: i32,
    text: Option<String>,
}

impl Real {
    pub fn float(value: f64) -> Real {
        Real { value, exact: None, pi_power: 0, text: None }
    }

    pub fn exact(q: QSqrt2) -> Real {
        Real { value: q.to_f64(), exact: Some(q), pi_power: 0, text: None }
    }

    pub fn ratio(n: i128, d: i128) -> Real {
        Real::exact(QSqrt2::from_ratio(n, d))
    }

    pub fn parse(s: &str) -> Result<Real, ExprError> {
        let mut r = Parser::new(s).parse_all()?;
        r.text = Some(s.trim().to_string());
        Ok(r)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Exact value in `Q(sqrt2)`, if the parameter is free of `pi`.
    pub fn exact_value(&self) -> Option<QSqrt2> {
        if self.pi_power == 0 {
            self.exact
        } else {
            None
        }
    }

    /// Exact coefficient of `pi` (for phases written like `3*pi/4`).
    pub fn pi_multiple(&self) -> Option<QSqrt2> {
        match self.pi_power {
            1 => self.exact,
            0 if self.exact.map(|q| q.is_zero()).unwrap_or(false) => self.exact,
            _ => None,
        }
    }

    /// Exact ring element for this value, if representable.
    pub fn to_exact_amp(&self) -> Option<ExactAmp> {
        self.exact_value()?.to_exact()
    }

    fn combine(
        &self,
        other: &Real,
        value: f64,
        exact: impl FnOnce(&QSqrt2, &QSqrt2) -> Option<QSqrt2>,
        pi_power: Option<i32>,
    ) -> Real {
        let exact = match (self.exact, other.exact, pi_power) {
            (Some(a), Some(b), Some(_)) => exact(&a, &b),
            _ => None,
        };
        Real { value, exact, pi_power: pi_power.unwrap_or(0), text: None }
    }

    fn add_pi_power(&self, other: &Real) -> Option<i32> {
        if self.pi_power == other.pi_power {
            Some(self.pi_power)
        } else if self.exact.map(|q| q.is_zero()).unwrap_or(false) {
            Some(other.pi_power)
        } else if other.exact.map(|q| q.is_zero()).unwrap_or(false) {
            Some(self.pi_power)
        } else {
            None
        }
    }

    fn add(&self, o: &Real) -> Real {
        let p = self.add_pi_power(o);
        self.combine(o, self.value + o.value, |a, b| a.checked_add(b).ok(), p)
    }

    fn sub(&self, o: &Real) -> Real {
        let p = self.add_pi_power(o);
        self.combine(o, self.value - o.value, |a, b| a.checked_sub(b).ok(), p)
    }

    fn mul(&self, o: &Real) -> Real {
        let p = Some(self.pi_power + o.pi_power);
        self.combine(o, self.value * o.value, |a, b| a.checked_mul(b).ok(), p)
    }

    fn div(&self, o: &Real) -> Real {
        let p = Some(self.pi_power - o.pi_power);
        self.combine(o, self.value / o.value, |a, b| a.checked_div(b).ok(), p)
    }

    fn neg(&self) -> Real {
        Real {
            value: -self.value,
            exact: self.exact.map(|q| q.neg()),
            pi_power: self.pi_power,
            text: None,
        }
    }

    fn sqrt(&self) -> Real {
        let exact = if self.pi_power == 0 { self.exact.and_then(|q| q.sqrt()) } else { None };
        Real { value: self.value.sqrt(), exact, pi_power: 0, text: None }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.text, self.exact_value()) {
            (Some(t), _) => write!(f, "{t}"),
            (None, Some(q)) => write!(f, "{q}"),
            (None, None) => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.text.is_none() && self.exact.is_none() {
            s.serialize_f64(self.value)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Integer(i64),
    Number(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RealRepr::deserialize(d)? {
            RealRepr::Integer(n) => Ok(Real::ratio(n.into(), 1)),
            RealRepr::Number(x) => Ok(Real::float(x)),
            RealRepr::Text(t) => Real::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { src, chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 }
    }

    fn err(&self, reason: impl Into<String>) -> ExprError {
        ExprError { input: self.src.to_string(), reason: reason.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(&mut self) -> Result<Real, ExprError> {
        if self.chars.is_empty() {
            return Err(self.err("empty expression"));
        }
        let v = self.expr()?;
        if self.pos != self.chars.len() {
            return Err(self.err(format!("unexpected `{}`", self.chars[self.pos])));
        }
        if !v.value.is_finite() {
            return Err(self.err("value is not finite"));
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<Real, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Real, ExprError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat('/') {
                let d = self.factor()?;
                if d.value == 0.0 {
                    return Err(self.err("division by zero"));
                }
                acc = acc.div(&d);
            } else if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '(') {
                // implicit product such as `3pi` or `2sqrt2`
                acc = acc.mul(&self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Real, ExprError> {
        if self.eat('-') {
            return Ok(self.factor()?.neg());
        }
        if self.eat('+') {
            return self.factor();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Real, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("missing `)`"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                match word.as_str() {
                    "pi" => Ok(Real {
                        value: std::f64::consts::PI,
                        exact: Some(QSqrt2::from_int(1)),
                        pi_power: 1,
                        text: None,
                    }),
                    "sqrt" => {
                        if self.peek() == Some('2') {
                            self.pos += 1;
                            return Ok(Real::exact(QSqrt2::sqrt2()));
                        }
                        if !self.eat('(') {
                            return Err(self.err("expected `(` after sqrt"));
                        }
                        let v = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.err("missing `)`"));
                        }
                        if v.value < 0.0 {
                            return Err(self.err("square root of a negative value"));
                        }
                        Ok(v.sqrt())
                    }
                    other => Err(self.err(format!("unknown name `{other}`"))),
                }
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Real, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        let mut exponent = 0i32;
        if matches!(self.peek(), Some('e') | Some('E'))
            && matches!(self.chars.get(self.pos + 1), Some(c) if c.is_ascii_digit() || *c == '-' || *c == '+')
        {
            self.pos += 1;
            let es = self.pos;
            if matches!(self.peek(), Some('-') | Some('+')) {
                self.pos += 1;
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let etext: String = self.chars[es..self.pos].iter().collect();
            exponent = etext.parse().map_err(|_| self.err("bad exponent"))?;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let mantissa = text.split(['e', 'E']).next().unwrap_or("");
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() || frac_part.contains('.') {
            return Err(self.err(format!("bad number `{text}`")));
        }
        let value: f64 = text.parse().map_err(|_| self.err(format!("bad number `{text}`")))?;
        let digits = format!("{int_part}{frac_part}");
        let scale = exponent - frac_part.len() as i32;
        let exact = digits.parse::<i128>().ok().and_then(|n| {
            if scale.unsigned_abs() > 30 {
                return None;
            }
            let p = 10i128.pow(scale.unsigned_abs());
            let r = if scale >= 0 { Ratio::from_integer(n.checked_mul(p)?) } else { Ratio::new(n, p) };
            Some(QSqrt2::new(r, Ratio::zero()))
        });
        Ok(Real { value, exact, pi_power: 0, text: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> QSqrt2 {
        QSqrt2::from_ratio(n, d)
    }

    #[test]
    fn field_display_parses_back() {
        use num_rational::Ratio;
        for (a, b, c, d) in [(17, 1, -12, 1), (0, 1, 1, 4), (3, 4, -1, 3), (-1, 2, 0, 1), (0, 1, -5, 7), (2, 1, 1, 1)] {
            let x = QSqrt2::new(Ratio::new(a, b), Ratio::new(c, d));
            assert_eq!(Real::parse(&x.to_string()).unwrap().exact_value(), Some(x), "{x}");
        }
    }

    #[test]
    fn json_integers_stay_exact() {
        let r: Real = serde_json::from_str("3").unwrap();
        assert_eq!(r.exact_value(), Some(q(3, 1)));
        let f: Real = serde_json::from_str("0.25").unwrap();
        assert_eq!(f.exact_value(), None);
    }

    #[test]
    fn exact_forms() {
        assert_eq!(Real::parse("1/2").unwrap().exact_value(), Some(q(1, 2)));
        assert_eq!(Real::parse("0.25").unwrap().exact_value(), Some(q(1, 4)));
        assert_eq!(Real::parse("2.5e-1").unwrap().exact_value(), Some(q(1, 4)));
        let two_minus = Real::parse("2-sqrt2").unwrap();
        assert_eq!(
            two_minus.exact_value(),
            Some(QSqrt2::new(Ratio::from_integer(2), Ratio::from_integer(-1)))
        );
        assert!((two_minus.value() - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(Real::parse("sqrt(1/4)").unwrap().exact_value(), Some(q(1, 2)));
        assert_eq!(Real::parse("1/sqrt2").unwrap().to_exact_amp(), Some(ExactAmp::FRAC_1_SQRT_2));
        assert_eq!(Real::parse("(1)").unwrap().exact_value(), Some(q(1, 1)));
    }

    #[test]
    fn irrational_forms_fall_back_to_float() {
        let r = Real::parse("sqrt(2/3)").unwrap();
        assert!(r.exact_value().is_none());
        assert!((r.value() - (2f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn phases() {
        let p = Real::parse("3*pi/4").unwrap();
        assert_eq!(p.pi_multiple(), Some(q(3, 4)));
        assert!(p.exact_value().is_none());
        assert_eq!(Real::parse("pi/2").unwrap().pi_multiple(), Some(q(1, 2)));
        assert_eq!(Real::parse("-pi").unwrap().pi_multiple(), Some(q(-1, 1)));
        assert_eq!(Real::parse("2pi").unwrap().pi_multiple(), Some(q(2, 1)));
        assert_eq!(Real::parse("0").unwrap().pi_multiple(), Some(q(0, 1)));
        assert!(Real::parse("1+pi").unwrap().pi_multiple().is_none());
    }

    #[test]
    fn errors() {
        for bad in ["", "1/", "foo", "1/0", "sqrt(-1)", "(1", "1..2"] {
            assert!(Real::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn serde_keeps_text() {
        let r: Real = serde_json::from_str("\"2-sqrt2\"").unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"2-sqrt2\"");
        let f: Real = serde_json::from_str("0.3").unwrap();
        assert!(f.exact_value().is_none());
        assert_eq!(serde_json::to_string(&f).unwrap(), "0.3");
    }
}
