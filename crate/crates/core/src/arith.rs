//! Small exact-arithmetic helpers shared by every module.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn rats_of_ints(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(rat_int).collect()
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise, `q > 0`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn lcm_of_denominators(v: &[Rational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Scales a rational vector to the primitive-direction integer vector times
/// the lcm of denominators (not divided by the gcd).
pub fn clear_vector(v: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let n = lcm_of_denominators(v);
    let out = v
        .iter()
        .map(|q| (q * Rational::from_integer(n.clone())).to_integer())
        .collect();
    (out, n)
}

pub fn gcd_of(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Divides an integer vector by the gcd of its entries.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = gcd_of(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

pub fn dot_qi(f: &[Rational], x: &[BigInt]) -> Rational {
    f.iter()
        .zip(x)
        .fold(Rational::zero(), |acc, (a, b)| acc + a * rat_int(b))
}

pub fn dot_qq(f: &[Rational], x: &[Rational]) -> Rational {
    f.iter()
        .zip(x)
        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

pub fn dot_ii(f: &[BigInt], x: &[BigInt]) -> BigInt {
    f.iter().zip(x).fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter()
        .map(|q| q.abs())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

/// Cooperative deadline for long-running LP work.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Some(Instant::now() + d))
    }

    pub fn check(&self) -> Result<()> {
        match self.0 {
            Some(t) if Instant::now() > t => Err(Error::DeadlineExceeded),
            _ => Ok(()),
        }
    }
}
