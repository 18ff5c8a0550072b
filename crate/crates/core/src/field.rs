use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient field: a prime field `F_p` (p < 2^31) or the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Prime(u64),
    Rational,
}

pub const MAX_PRIME: u64 = 1 << 31;

impl Field {
    pub fn prime(p: u64) -> Result<Field> {
        if p >= MAX_PRIME {
            return Err(Error::UnsupportedField(format!("{p} exceeds 2^31")));
        }
        if !is_prime(p) {
            return Err(Error::UnsupportedField(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    /// Characteristic; `0` for the rationals.
    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Prime(p) => *p,
            Field::Rational => 0,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(p) => write!(f, "F{p}"),
            Field::Rational => write!(f, "Q"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    /// Accepts `Q`, `0` (rationals), or a prime, optionally prefixed with `F`.
    fn from_str(s: &str) -> Result<Field> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") || t == "0" {
            return Ok(Field::Rational);
        }
        let digits = t.strip_prefix(['F', 'f']).unwrap_or(t);
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::UnsupportedField(format!("cannot parse field '{s}'")))?;
        Field::prime(p)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes `m = p^n` with `p` prime, if possible.
pub fn prime_power(m: u64) -> Option<(u64, u32)> {
    if m < 2 {
        return None;
    }
    let mut p = 2;
    while m % p != 0 {
        p += 1;
    }
    let (mut r, mut n) = (m, 0);
    while r % p == 0 {
        r /= p;
        n += 1;
    }
    (r == 1).then_some((p, n))
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Reduces a signed integer into `0..p`.
#[inline]
pub fn reduce(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Multiplicative order of `r` modulo `m`, or `None` when they are not coprime.
pub fn multiplicative_order(r: u64, m: u64) -> Option<u64> {
    if num_integer::gcd(r, m) != 1 {
        return None;
    }
    let mut x = r % m;
    let mut k = 1;
    while x != 1 % m {
        x = x * r % m;
        k += 1;
    }
    Some(k)
}
