//! Helpers for reading and writing exact numbers in JSON.

use crate::extres::{parse_ext, ExtReal};
use crate::rat::{fmt_q, parse_q, Vector, Q};
use num::{BigInt, One};
use serde_json::Value;

/// Accepts integers, floats written as decimals, or strings such as `"3/4"`.
pub fn rational(v: &Value) -> Result<Q, String> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Q::from_integer(BigInt::from(i)))
            } else {
                parse_q(&n.to_string()).ok_or_else(|| format!("bad number {n}"))
            }
        }
        Value::String(s) => parse_q(s).ok_or_else(|| format!("bad rational {s:?}")),
        other => Err(format!("expected a number, got {other}")),
    }
}

pub fn ext(v: &Value) -> Result<ExtReal, String> {
    match v {
        Value::String(s) => parse_ext(s).ok_or_else(|| format!("bad extended real {s:?}")),
        other => rational(other).map(ExtReal::Finite),
    }
}

pub fn vector(v: &Value) -> Result<Vector, String> {
    let arr = v.as_array().ok_or_else(|| format!("expected an array, got {v}"))?;
    arr.iter().map(rational).collect::<Result<Vec<_>, _>>().map(Vector::new)
}

pub fn vectors(v: &Value) -> Result<Vec<Vector>, String> {
    let arr = v.as_array().ok_or_else(|| format!("expected an array, got {v}"))?;
    arr.iter().map(vector).collect()
}

fn rat_value(q: &Q) -> Value {
    if q.denom().is_one() {
        if let Ok(i) = i64::try_from(q.numer()) {
            return Value::from(i);
        }
    }
    Value::String(fmt_q(q))
}

/// Integers stay integers, everything else becomes `"p/q"`.
pub fn rat(q: &Q) -> Value {
    rat_value(q)
}

pub fn rat_vector(v: &Vector) -> Value {
    Value::Array(v.0.iter().map(rat_value).collect())
}

pub fn int_vector(v: &Vector) -> Value {
    rat_vector(v)
}

pub fn ext_value(e: &ExtReal) -> Value {
    match e {
        ExtReal::Finite(q) => rat_value(q),
        ExtReal::PlusInf => Value::String("+inf".into()),
        ExtReal::MinusInf => Value::String("-inf".into()),
    }
}
