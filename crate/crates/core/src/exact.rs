//! Exact scalars: rationals and Gaussian rationals, plus their text encodings.
//!
//! Rationals are written as `"p/q"` (or `"p"` when the denominator is one),
//! Gaussian rationals as a `[re, im]` pair of such strings.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational scalar used for every structure constant.
pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qr(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| *x.numer() as f64 / *x.denom() as f64)
}

/// Nearest rational with the given power-of-two denominator.
pub fn q_from_f64(x: f64, denom_bits: u32) -> Q {
    let den = 1i128 << denom_bits;
    let num = (x * den as f64).round() as i128;
    Q::new(num, den)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseScalarError(pub String);

pub fn parse_q(s: &str) -> Result<Q, ParseScalarError> {
    let s = s.trim();
    let err = || ParseScalarError(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| err())?;
            let d: i128 = d.trim().parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ok(Q::new(n, d))
        }
        None => s.parse::<i128>().map(Q::from_integer).map_err(|_| err()),
    }
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Cq {
    pub re: Q,
    pub im: Q,
}

impl Cq {
    pub const fn new(re: Q, im: Q) -> Self {
        Self { re, im }
    }

    pub fn real(re: Q) -> Self {
        Self { re, im: Q::zero() }
    }

    pub fn i() -> Self {
        Self { re: Q::zero(), im: Q::one() }
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    /// `|z|²`, always rational.
    pub fn norm_sqr(self) -> Q {
        self.re * self.re + self.im * self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(self, k: Q) -> Self {
        Self { re: self.re * k, im: self.im * k }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    pub fn from_c64(z: Complex64, denom_bits: u32) -> Self {
        Self { re: q_from_f64(z.re, denom_bits), im: q_from_f64(z.im, denom_bits) }
    }
}

impl fmt::Debug for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", format_q(&self.re))
        } else {
            write!(f, "({} + {}i)", format_q(&self.re), format_q(&self.im))
        }
    }
}

impl From<Q> for Cq {
    fn from(re: Q) -> Self {
        Cq::real(re)
    }
}

impl Zero for Cq {
    fn zero() -> Self {
        Cq::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Cq {
    fn one() -> Self {
        Cq::real(Q::one())
    }
}

impl Add for Cq {
    type Output = Cq;
    fn add(self, o: Cq) -> Cq {
        Cq::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cq {
    type Output = Cq;
    fn sub(self, o: Cq) -> Cq {
        Cq::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cq {
    type Output = Cq;
    fn mul(self, o: Cq) -> Cq {
        if self.im.is_zero() && o.im.is_zero() {
            return Cq::real(self.re * o.re);
        }
        Cq::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for Cq {
    type Output = Cq;
    fn div(self, o: Cq) -> Cq {
        let n = o.norm_sqr();
        let t = self * o.conj();
        Cq::new(t.re / n, t.im / n)
    }
}

impl Neg for Cq {
    type Output = Cq;
    fn neg(self) -> Cq {
        Cq::new(-self.re, -self.im)
    }
}

impl AddAssign for Cq {
    fn add_assign(&mut self, o: Cq) {
        *self = *self + o;
    }
}

impl SubAssign for Cq {
    fn sub_assign(&mut self, o: Cq) {
        *self = *self - o;
    }
}

impl MulAssign for Cq {
    fn mul_assign(&mut self, o: Cq) {
        *self = *self * o;
    }
}

/// Field operations needed by the exact linear algebra routines.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl Scalar for Q {}
impl Scalar for Cq {}

/// Sign of a rational as -1, 0 or 1.
pub fn sign_q(x: &Q) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Serde adapter writing a [`Q`] as a `"p/q"` string.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde wrapper for [`Q`] usable inside containers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QStr(pub Q);

impl Serialize for QStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_q::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for QStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_q::deserialize(d).map(QStr)
    }
}

impl Serialize for Cq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [format_q(&self.re), format_q(&self.im)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        Ok(Cq::new(
            parse_q(&re).map_err(serde::de::Error::custom)?,
            parse_q(&im).map_err(serde::de::Error::custom)?,
        ))
    }
}

pub fn qs(v: &[Q]) -> Vec<QStr> {
    v.iter().copied().map(QStr).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_roundtrip() {
        for s in ["0", "3", "-7/2", "1/3"] {
            assert_eq!(format_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(parse_q(" 4/6 ").unwrap(), qr(2, 3));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn gaussian_field_ops() {
        let a = Cq::new(q(1), q(2));
        let b = Cq::new(qr(1, 2), q(-1));
        assert_eq!((a * b) / b, a);
        assert_eq!(a * a.conj(), Cq::real(q(5)));
        assert_eq!(Cq::i() * Cq::i(), -Cq::one());
    }

    #[test]
    fn cq_serde_as_pair() {
        let z = Cq::new(qr(-1, 3), q(2));
        let js = serde_json::to_string(&z).unwrap();
        assert_eq!(js, r#"["-1/3","2"]"#);
        assert_eq!(serde_json::from_str::<Cq>(&js).unwrap(), z);
    }
}
