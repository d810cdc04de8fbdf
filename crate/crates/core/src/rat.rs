//! Exact rationals and small rational vectors.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-3/4"` or a plain decimal such as `"0.125"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = digits.parse().ok()?;
        let d = num::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

pub fn fmt_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| if v.is_positive() { f64::INFINITY } else { f64::NEG_INFINITY })
}

/// Exact conversion of a finite double.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Floor of `sqrt(v)` on the dyadic grid with `bits` fractional bits; exact when `v` is a rational square.
pub fn sqrt_floor(v: &Q, bits: u32) -> Q {
    assert!(!v.is_negative(), "sqrt of negative rational");
    let (n, d) = (v.numer(), v.denom());
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Q::new(rn, rd);
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let num = (n * d * scale).sqrt();
    Q::new(num, d * (BigInt::one() << bits as usize))
}

/// Simplest rational (smallest denominator) in the closed interval `[lo, hi]`.
pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
    assert!(lo <= hi);
    if lo.is_positive() {
        return simplest_pos(lo, hi);
    }
    if hi.is_negative() {
        return -simplest_pos(&-hi, &-lo);
    }
    Q::zero()
}

fn simplest_pos(lo: &Q, hi: &Q) -> Q {
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if fl.clone() + Q::one() <= *hi {
        return fl + Q::one();
    }
    // lo and hi share the integer part; recurse on reciprocals of the fractional parts.
    let a = hi.clone() - fl.clone();
    let b = lo.clone() - fl.clone();
    let inner = simplest_pos(&a.recip(), &b.recip());
    fl + inner.recip()
}

/// A rational vector; ambient dimension is its length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(pub Vec<Q>);

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(fmt_q).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Vector {
    pub fn new(v: Vec<Q>) -> Self {
        Vector(v)
    }

    pub fn ints(v: &[i64]) -> Self {
        Vector(v.iter().map(|&x| q(x)).collect())
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![Q::zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> &Q {
        &self.0[i]
    }

    pub fn dot(&self, o: &Vector) -> Q {
        debug_assert_eq!(self.dim(), o.dim());
        self.0.iter().zip(&o.0).fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn add(&self, o: &Vector) -> Vector {
        Vector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Vector) -> Vector {
        Vector(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, t: &Q) -> Vector {
        Vector(self.0.iter().map(|a| a * t).collect())
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }

    /// `self + t * o`
    pub fn axpy(&self, t: &Q, o: &Vector) -> Vector {
        Vector(self.0.iter().zip(&o.0).map(|(a, b)| a + t * b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|a| a.is_zero())
    }

    pub fn l1(&self) -> Q {
        self.0.iter().fold(Q::zero(), |acc, a| acc + a.abs())
    }

    /// Positive multiple with coprime integer entries; zero stays zero.
    pub fn primitive(&self) -> Vector {
        self.primitive_factor().0
    }

    /// Returns the primitive vector and the positive factor `k` with `primitive = k * self`.
    pub fn primitive_factor(&self) -> (Vector, Q) {
        if self.is_zero() {
            return (self.clone(), Q::one());
        }
        let l = self.0.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|a| (a * Q::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
        let k = Q::new(l, g.clone());
        (Vector(ints.into_iter().map(|a| Q::from_integer(a / &g)).collect()), k)
    }

    pub fn l1_normalized(&self) -> Vector {
        let n = self.l1();
        self.scale(&n.recip())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    /// Integer entries of a primitive vector, when they fit.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|a| if a.is_integer() { a.numer().to_i64() } else { None }).collect()
    }

    pub fn x(&self) -> &Q {
        &self.0[0]
    }

    pub fn y(&self) -> &Q {
        &self.0[1]
    }
}

/// 2D helpers used by the exact kernel.
pub(crate) fn v2(x: Q, y: Q) -> Vector {
    Vector(vec![x, y])
}

pub(crate) fn cross(a: &Vector, b: &Vector) -> Q {
    a.x() * b.y() - a.y() * b.x()
}

/// Counter-clockwise rotation by a right angle.
pub(crate) fn perp(a: &Vector) -> Vector {
    v2(-a.y().clone(), a.x().clone())
}
