//! Extended reals with inf-addition and inf-residuation.

use crate::rat::{fmt_q, parse_q, Q};
use num::{BigInt, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// Variant order gives the total order `-inf < finite < +inf`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtReal {
    MinusInf,
    Finite(Q),
    PlusInf,
}

impl ExtReal {
    pub fn fin(v: Q) -> Self {
        ExtReal::Finite(v)
    }

    pub fn int(v: i64) -> Self {
        ExtReal::Finite(crate::rat::q(v))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Inf-addition: `+inf` dominates, `-inf` absorbs finite values.
    pub fn inf_add(&self, o: &ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, o) {
            (PlusInf, _) | (_, PlusInf) => PlusInf,
            (MinusInf, _) | (_, MinusInf) => MinusInf,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }

    /// `r ÷ s = inf{t ∈ R : r ≤ s ⊞ t}`.
    pub fn residual(&self, s: &ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, s) {
            (_, PlusInf) => MinusInf,
            (MinusInf, _) => MinusInf,
            (PlusInf, _) => PlusInf,
            (Finite(_), MinusInf) => PlusInf,
            (Finite(a), Finite(b)) => Finite(a - b),
        }
    }

    /// Multiplication by a positive rational.
    pub fn scale_pos(&self, s: &Q) -> ExtReal {
        assert!(s.is_positive(), "scale_pos needs a positive factor");
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * s),
            other => other.clone(),
        }
    }

    pub fn neg(&self) -> ExtReal {
        match self {
            ExtReal::MinusInf => ExtReal::PlusInf,
            ExtReal::PlusInf => ExtReal::MinusInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::MinusInf => f64::NEG_INFINITY,
            ExtReal::PlusInf => f64::INFINITY,
            ExtReal::Finite(v) => crate::rat::to_f64(v),
        }
    }

    /// Absolute gap between two values; zero for equal infinities, `None` when only one side is infinite.
    pub fn gap(&self, o: &ExtReal) -> Option<Q> {
        match (self, o) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((a - b).abs()),
            (a, b) if a == b => Some(Q::zero()),
            _ => None,
        }
    }

    pub fn cmp_with_tol(&self, o: &ExtReal, tol: &Q) -> Ordering {
        match self.gap(o) {
            Some(g) if &g <= tol => Ordering::Equal,
            _ => self.cmp(o),
        }
    }
}

impl From<Q> for ExtReal {
    fn from(v: Q) -> Self {
        ExtReal::Finite(v)
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::MinusInf => write!(f, "-inf"),
            ExtReal::PlusInf => write!(f, "+inf"),
            ExtReal::Finite(v) => write!(f, "{}", fmt_q(v)),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    t: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    d: Option<String>,
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let w = match self {
            ExtReal::MinusInf => Wire { t: "-inf".into(), n: None, d: None },
            ExtReal::PlusInf => Wire { t: "+inf".into(), n: None, d: None },
            ExtReal::Finite(v) => Wire {
                t: "fin".into(),
                n: Some(v.numer().to_string()),
                d: Some(v.denom().to_string()),
            },
        };
        w.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        match w.t.as_str() {
            "-inf" => Ok(ExtReal::MinusInf),
            "+inf" => Ok(ExtReal::PlusInf),
            "fin" => {
                let n: BigInt = w.n.ok_or_else(|| D::Error::missing_field("n"))?.parse().map_err(D::Error::custom)?;
                let dd: BigInt = w.d.ok_or_else(|| D::Error::missing_field("d"))?.parse().map_err(D::Error::custom)?;
                if dd.is_zero() {
                    return Err(D::Error::custom("zero denominator"));
                }
                Ok(ExtReal::Finite(Q::new(n, dd)))
            }
            other => Err(D::Error::custom(format!("unknown tag {other}"))),
        }
    }
}

/// Parses `"+inf"`, `"-inf"` or a rational literal.
pub fn parse_ext(s: &str) -> Option<ExtReal> {
    match s.trim() {
        "+inf" | "inf" => Some(ExtReal::PlusInf),
        "-inf" => Some(ExtReal::MinusInf),
        other => parse_q(other).map(ExtReal::Finite),
    }
}
