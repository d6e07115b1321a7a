//! Exact rationals and real quadratic numbers `a + b*sqrt(d)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always in lowest terms with a positive denominator.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse number `{0}`")]
pub struct ParseNumberError(pub String);

/// Two irrational operands living in different quadratic fields.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("operands lie in different quadratic fields Q(sqrt({0})) and Q(sqrt({1}))")]
pub struct MixedFieldError(pub BigInt, pub BigInt);

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `p` or a plain decimal such as `-1.25`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseNumberError> {
    let t = s.trim();
    let err = || ParseNumberError(s.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let ip = if ip.is_empty() { "0" } else { ip };
        let whole = BigInt::from_str(ip).map_err(|_| err())?;
        let frac = BigInt::from_str(fp).map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10u8), fp.len());
        let mag = Rat::new(whole * &scale + frac, scale);
        return Ok(if neg { -mag } else { mag });
    }
    BigInt::from_str(t).map(Rat::from_integer).map_err(|_| err())
}

/// `p/q`, or `p` for integers.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational value of a finite `f64`.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

fn rat_sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn floor_rat(r: &Rat) -> BigInt {
    r.numer().div_floor(r.denom())
}

const SMALL_PRIMES_LIMIT: u64 = 1 << 16;

fn small_primes() -> &'static [u64] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SMALL_PRIMES_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        let mut out = Vec::new();
        for i in 2..=n {
            if sieve[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        out
    })
}

/// Splits `d = s^2 * k` pulling out square factors; `k` is square-free whenever `d < 2^32`,
/// and for larger `d` every square factor with a prime below 2^16 is removed.
fn square_free_split(d: &BigInt) -> (BigInt, BigInt) {
    debug_assert!(!d.is_negative());
    if d.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let mut s = BigInt::one();
    let mut k = d.clone();
    if let Some(mut v) = k.to_u64() {
        let mut su: u64 = 1;
        for &p in small_primes() {
            if p * p > v {
                break;
            }
            let pp = p * p;
            while v % pp == 0 {
                v /= pp;
                su *= p;
            }
        }
        s *= BigInt::from(su);
        k = BigInt::from(v);
    } else {
        for &p in small_primes().iter().take_while(|&&p| p < 1000) {
            let pp = BigInt::from(p * p);
            while (&k % &pp).is_zero() {
                k /= &pp;
                s *= p;
            }
        }
    }
    let r = k.sqrt();
    if &r * &r == k {
        s *= r;
        k = BigInt::one();
    }
    (s, k)
}

/// The real number `a + b*sqrt(d)` with rational `a`, `b` and square-free `d >= 0`.
///
/// Rationals are stored with `b = 0` and `d = 0`.
#[derive(Clone, Debug)]
pub struct QuadExt {
    a: Rat,
    b: Rat,
    d: BigInt,
}

impl QuadExt {
    pub fn new(a: Rat, b: Rat, d: BigInt) -> Self {
        assert!(!d.is_negative(), "negative radicand");
        if b.is_zero() || d.is_zero() {
            return Self::from_rat(a);
        }
        let (s, k) = square_free_split(&d);
        let b = b * Rat::from_integer(s);
        if k.is_one() {
            return Self::from_rat(a + b);
        }
        QuadExt { a, b, d: k }
    }

    /// Builds from a radicand that is already canonical.
    fn reduced(a: Rat, b: Rat, d: BigInt) -> Self {
        if b.is_zero() || d.is_zero() {
            return Self::from_rat(a);
        }
        QuadExt { a, b, d }
    }

    pub fn from_rat(a: Rat) -> Self {
        QuadExt { a, b: Rat::zero(), d: BigInt::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(int(n))
    }

    pub fn zero() -> Self {
        Self::from_rat(Rat::zero())
    }

    /// `sqrt(q)` for a rational `q >= 0`.
    pub fn sqrt_rat(q: &Rat) -> Self {
        assert!(!q.is_negative(), "square root of a negative rational");
        let den = q.denom().clone();
        let rad = q.numer() * &den;
        Self::new(Rat::zero(), Rat::new(BigInt::one(), den), rad)
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        self.is_rational().then_some(&self.a)
    }

    /// Radicand of the field, `None` for rationals.
    pub fn field(&self) -> Option<&BigInt> {
        (!self.is_rational()).then_some(&self.d)
    }

    fn common_d(&self, o: &QuadExt) -> Result<BigInt, MixedFieldError> {
        match (self.field(), o.field()) {
            (None, None) => Ok(BigInt::zero()),
            (Some(d), None) | (None, Some(d)) => Ok(d.clone()),
            (Some(d1), Some(d2)) if d1 == d2 => Ok(d1.clone()),
            (Some(d1), Some(d2)) => Err(MixedFieldError(d1.clone(), d2.clone())),
        }
    }

    pub fn checked_add(&self, o: &QuadExt) -> Result<QuadExt, MixedFieldError> {
        let d = self.common_d(o)?;
        Ok(Self::reduced(&self.a + &o.a, &self.b + &o.b, d))
    }

    pub fn checked_sub(&self, o: &QuadExt) -> Result<QuadExt, MixedFieldError> {
        let d = self.common_d(o)?;
        Ok(Self::reduced(&self.a - &o.a, &self.b - &o.b, d))
    }

    pub fn checked_mul(&self, o: &QuadExt) -> Result<QuadExt, MixedFieldError> {
        let d = self.common_d(o)?;
        let dr = Rat::from_integer(d.clone());
        let a = &self.a * &o.a + &self.b * &o.b * dr;
        let b = &self.a * &o.b + &self.b * &o.a;
        Ok(Self::reduced(a, b, d))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<QuadExt> {
        if self.sign() == 0 {
            return None;
        }
        if self.is_rational() {
            return Some(Self::from_rat(self.a.recip()));
        }
        let dr = Rat::from_integer(self.d.clone());
        let norm = &self.a * &self.a - &self.b * &self.b * dr;
        Some(Self::reduced(&self.a / &norm, -&self.b / &norm, self.d.clone()))
    }

    pub fn scale(&self, k: &Rat) -> QuadExt {
        Self::reduced(&self.a * k, &self.b * k, self.d.clone())
    }

    pub fn add_rat(&self, k: &Rat) -> QuadExt {
        Self::reduced(&self.a + k, self.b.clone(), self.d.clone())
    }

    pub fn square(&self) -> QuadExt {
        self.checked_mul(self).expect("same field")
    }

    pub fn sign(&self) -> i8 {
        quad_sign(self)
    }

    pub fn to_f64(&self) -> f64 {
        let a = rat_to_f64(&self.a);
        if self.is_rational() {
            return a;
        }
        let d = self.d.to_f64().unwrap_or(f64::INFINITY);
        let b = rat_to_f64(&self.b);
        let naive = a + b * d.sqrt();
        // Cancellation guard: use the conjugate form when the two terms nearly cancel.
        if naive.abs() < 1e-6 * a.abs().max(1.0) {
            let dr = Rat::from_integer(self.d.clone());
            let norm = &self.a * &self.a - &self.b * &self.b * dr;
            let conj = a - b * d.sqrt();
            if conj != 0.0 {
                return rat_to_f64(&norm) / conj;
            }
        }
        naive
    }

    /// `floor(self)` computed exactly.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return floor_rat(&self.a);
        }
        let q = self.a.denom().lcm(self.b.denom());
        let qr = Rat::from_integer(q.clone());
        let p = (&self.a * &qr).to_integer();
        let r = (&self.b * &qr).to_integer();
        let s = (&r * &r * &self.d).sqrt();
        let num = if r.is_negative() { &p - &s - 1 } else { &p + &s };
        let mut c = num.div_floor(&q);
        loop {
            let next = QuadExt::from_rat(Rat::from_integer(&c + 1));
            if quad_cmp(&next, self) != Ordering::Greater {
                c += 1;
            } else {
                break;
            }
        }
        while quad_cmp(&QuadExt::from_rat(Rat::from_integer(c.clone())), self) == Ordering::Greater {
            c -= 1;
        }
        c
    }

    /// Decimal expansion rounded to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = Rat::from_integer(num_traits::pow(BigInt::from(10u8), digits));
        let shifted = self.scale(&scale).add_rat(&rat(1, 2));
        let n = shifted.floor();
        let neg = n.is_negative();
        let mag = n.abs().to_string();
        let body = if digits == 0 {
            mag
        } else {
            let padded = format!("{:0>width$}", mag, width = digits + 1);
            let (ip, fp) = padded.split_at(padded.len() - digits);
            format!("{ip}.{fp}")
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        quad_cmp(self, other) == Ordering::Equal
    }
}

impl Eq for QuadExt {}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        quad_cmp(self, other)
    }
}

impl From<Rat> for QuadExt {
    fn from(a: Rat) -> Self {
        QuadExt::from_rat(a)
    }
}

impl std::ops::Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -&self.a, b: -&self.b, d: self.d.clone() }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", format_rat(&self.a));
        }
        let (op, b) = if self.b.is_negative() { ("-", -&self.b) } else { ("+", self.b.clone()) };
        write!(f, "{} {} {}*sqrt({})", format_rat(&self.a), op, format_rat(&b), self.d)
    }
}

impl FromStr for QuadExt {
    type Err = ParseNumberError;

    /// Accepts `p/q` and `p/q + r/s*sqrt(d)` (or with `-`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || ParseNumberError(s.to_string());
        let Some(pos) = t.find("*sqrt(") else {
            return parse_rat(t).map(QuadExt::from_rat);
        };
        let head = &t[..pos];
        let tail = &t[pos + "*sqrt(".len()..];
        let d_str = tail.strip_suffix(')').ok_or_else(err)?;
        let d = BigInt::from_str(d_str.trim()).map_err(|_| err())?;
        if d.is_negative() {
            return Err(err());
        }
        let split = head.rfind([' ']).ok_or_else(err)?;
        let left = head[..split].trim();
        let (a_str, op) = if let Some(a) = left.strip_suffix('+') {
            (a, 1)
        } else if let Some(a) = left.strip_suffix('-') {
            (a, -1)
        } else {
            return Err(err());
        };
        let a = parse_rat(a_str)?;
        let b = parse_rat(head[split..].trim())?;
        let b = if op < 0 { -b } else { b };
        Ok(QuadExt::new(a, b, d))
    }
}

/// Exact sign of `a + b*sqrt(d)`.
pub fn quad_sign(q: &QuadExt) -> i8 {
    let sa = rat_sign(&q.a);
    if q.is_rational() {
        return sa;
    }
    let sb = rat_sign(&q.b);
    if sa >= 0 && sb >= 0 {
        return if sa == 0 && sb == 0 { 0 } else { 1 };
    }
    if sa <= 0 && sb <= 0 {
        return -1;
    }
    let a2 = &q.a * &q.a;
    let b2d = &q.b * &q.b * Rat::from_integer(q.d.clone());
    let c = rat_sign(&(a2 - b2d));
    if sa > 0 {
        c
    } else {
        -c
    }
}

/// Exact ordering of two quadratic numbers, possibly from different fields.
pub fn quad_cmp(q1: &QuadExt, q2: &QuadExt) -> Ordering {
    let same = match (q1.field(), q2.field()) {
        (Some(d1), Some(d2)) => d1 == d2,
        _ => true,
    };
    let s = if same {
        quad_sign(&q1.checked_sub(q2).expect("same field"))
    } else {
        // value = u - v with u = A + B*sqrt(d1) and v = b2*sqrt(d2)
        let u = QuadExt::reduced(&q1.a - &q2.a, q1.b.clone(), q1.d.clone());
        let su = quad_sign(&u);
        let sv = rat_sign(&q2.b);
        if su != sv {
            if su > sv {
                1
            } else {
                -1
            }
        } else if su == 0 {
            0
        } else {
            let v2 = &q2.b * &q2.b * Rat::from_integer(q2.d.clone());
            let diff = u.square().add_rat(&-v2);
            su * quad_sign(&diff)
        }
    };
    s.cmp(&0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: Rat, b: Rat, d: i64) -> QuadExt {
        QuadExt::new(a, b, BigInt::from(d))
    }

    #[test]
    fn sign_examples() {
        assert_eq!(quad_sign(&QuadExt::zero()), 0);
        assert_eq!(quad_sign(&q(int(-1), int(1), 2)), 1);
        assert_eq!(quad_sign(&q(rat(7, 5), int(-1), 2)), -1);
    }

    #[test]
    fn cmp_examples() {
        assert_eq!(quad_cmp(&QuadExt::from_int(1), &QuadExt::from_int(1)), Ordering::Equal);
        assert_eq!(quad_cmp(&q(int(0), int(1), 2), &q(int(0), int(1), 3)), Ordering::Less);
        assert_eq!(quad_cmp(&q(int(1), int(1), 2), &q(int(0), int(1), 6)), Ordering::Less);
    }

    #[test]
    fn canonical_form_pulls_squares() {
        let x = q(int(0), int(1), 8);
        assert_eq!(x.d(), &BigInt::from(2));
        assert_eq!(x.b(), &int(2));
        let y = q(int(1), int(3), 9);
        assert!(y.is_rational());
        assert_eq!(y.a(), &int(10));
        let s = QuadExt::sqrt_rat(&rat(15, 16));
        assert_eq!(s.to_string(), "0 + 1/4*sqrt(15)");
    }

    #[test]
    fn display_parse_roundtrip() {
        for s in ["3/2", "-7", "7/5 - 1*sqrt(2)", "0 + 1/4*sqrt(15)", "-1/3 + 5/7*sqrt(110)"] {
            let v: QuadExt = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert!("1 + x*sqrt(2)".parse::<QuadExt>().is_err());
    }

    #[test]
    fn floor_and_decimal() {
        assert_eq!(q(int(0), int(1), 2).floor(), BigInt::from(1));
        assert_eq!(q(int(0), int(-1), 2).floor(), BigInt::from(-2));
        assert_eq!(q(int(0), int(1), 2).to_decimal(12), "1.414213562373");
        assert_eq!(q(int(0), int(-1), 2).to_decimal(5), "-1.41421");
        assert_eq!(QuadExt::from_rat(rat(-1, 200)).to_decimal(2), "0.00");
        assert_eq!(QuadExt::from_rat(rat(-1, 20)).to_decimal(2), "-0.05");
        assert_eq!(QuadExt::from_rat(rat(7, 4)).to_decimal(3), "1.750");
    }

    #[test]
    fn inverse() {
        let x = q(int(1), int(1), 2);
        let y = x.inv().unwrap();
        assert_eq!(x.checked_mul(&y).unwrap(), QuadExt::from_int(1));
        assert!(QuadExt::zero().inv().is_none());
    }

    #[test]
    fn mixed_fields_rejected() {
        let x = q(int(0), int(1), 2);
        let y = q(int(0), int(1), 3);
        assert!(x.checked_add(&y).is_err());
        assert!(x.checked_add(&QuadExt::from_int(4)).is_ok());
    }

    #[test]
    fn parse_rat_forms() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rat("4").unwrap(), int(4));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }
}
