//! Small expression language over the lattice operations, e.g.
//! `res(inf(pt(0,1), hs(-1,-1;-2)), cone)`.

use crate::lattice::{UpperSet, Workspace};
use crate::rat::{parse_q, Vector, Q};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0}")]
    Eval(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Q),
    Open,
    Close,
    Comma,
    Semi,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' | ')' | ',' | ';' => {
                out.push((i, match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    ',' => Tok::Comma,
                    _ => Tok::Semi,
                }));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '/' | '.') {
                    i += 1;
                }
                let text = &src[start..i];
                let v = parse_q(text).ok_or(ExprError::Parse { pos: start, msg: format!("bad number {text:?}") })?;
                out.push((start, Tok::Num(v)));
            }
            other => return Err(ExprError::Parse { pos: i, msg: format!("unexpected character {other:?}") }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Arg {
    Num(Q),
    Set(Node),
}

#[derive(Debug, Clone)]
enum Node {
    Name(String),
    Call { name: String, args: Vec<Arg>, semi: Option<usize> },
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.here(), msg: msg.to_string() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn node(&mut self) -> Result<Node, ExprError> {
        let Some(Tok::Ident(name)) = self.peek().cloned() else {
            return self.err("expected a name");
        };
        self.pos += 1;
        if self.peek() != Some(&Tok::Open) {
            return Ok(Node::Name(name));
        }
        self.pos += 1;
        let mut args = Vec::new();
        let mut semi = None;
        if self.peek() == Some(&Tok::Close) {
            self.pos += 1;
            return Ok(Node::Call { name, args, semi });
        }
        loop {
            match self.peek().cloned() {
                Some(Tok::Num(v)) => {
                    self.pos += 1;
                    args.push(Arg::Num(v));
                }
                Some(Tok::Ident(_)) => args.push(Arg::Set(self.node()?)),
                _ => return self.err("expected an argument"),
            }
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::Semi) if semi.is_none() => {
                    semi = Some(args.len());
                    self.pos += 1;
                }
                Some(Tok::Close) => {
                    self.pos += 1;
                    return Ok(Node::Call { name, args, semi });
                }
                _ => return self.err("expected ',' or ')'"),
            }
        }
    }
}

fn eval_err<T>(msg: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError::Eval(msg.into()))
}

fn nums(name: &str, args: &[Arg]) -> Result<Vec<Q>, ExprError> {
    args.iter()
        .map(|a| match a {
            Arg::Num(v) => Ok(v.clone()),
            Arg::Set(_) => eval_err(format!("{name} takes numbers")),
        })
        .collect()
}

fn eval(ws: &Workspace, node: &Node, env: &BTreeMap<String, UpperSet>) -> Result<UpperSet, ExprError> {
    match node {
        Node::Name(n) => match n.as_str() {
            "empty" => Ok(UpperSet::Empty),
            "all" => Ok(ws.all()),
            "cone" => Ok(ws.cone_set()),
            other => env.get(other).cloned().ok_or_else(|| ExprError::Eval(format!("unknown set {other:?}"))),
        },
        Node::Call { name, args, semi } => {
            let sets = || -> Result<Vec<UpperSet>, ExprError> {
                args.iter()
                    .map(|a| match a {
                        Arg::Set(s) => eval(ws, s, env),
                        Arg::Num(_) => eval_err(format!("{name} takes sets")),
                    })
                    .collect()
            };
            let binary = |f: &dyn Fn(&UpperSet, &UpperSet) -> UpperSet| -> Result<UpperSet, ExprError> {
                match &sets()?[..] {
                    [a, b] => Ok(f(a, b)),
                    _ => eval_err(format!("{name} takes two sets")),
                }
            };
            if semi.is_some() && name != "hs" {
                return eval_err(format!("';' is only allowed in hs"));
            }
            match name.as_str() {
                "inf" => Ok(ws.inf_family(&sets()?)),
                "sup" => Ok(ws.sup_family(&sets()?)),
                "add" => binary(&|a, b| ws.add(a, b)),
                "res" => binary(&|a, b| ws.residual_diff(a, b)),
                "rec" => match &sets()?[..] {
                    [a] => Ok(ws.recession(a)),
                    _ => eval_err("rec takes one set"),
                },
                "scale" => match &args[..] {
                    [Arg::Num(t), Arg::Set(s)] => ws.scale(t, &eval(ws, s, env)?).map_err(|e| ExprError::Eval(e.to_string())),
                    _ => eval_err("scale takes a number and a set"),
                },
                "pt" => {
                    let p = Vector::new(nums(name, args)?);
                    if p.dim() != ws.dim {
                        return eval_err(format!("pt needs {} coordinates", ws.dim));
                    }
                    Ok(ws.translated_cone(&p))
                }
                "hs" => {
                    let v = nums(name, args)?;
                    if *semi != Some(ws.dim) || v.len() != ws.dim + 1 {
                        return eval_err(format!("hs needs {} normal coordinates, ';' and a bound", ws.dim));
                    }
                    let n = Vector::new(v[..ws.dim].to_vec());
                    ws.canonicalize(&[(n, v[ws.dim].clone())]).map_err(|e| ExprError::Eval(e.to_string()))
                }
                other => eval_err(format!("unknown operation {other:?}")),
            }
        }
    }
}

/// Parses and evaluates `src`; bare names other than `empty`, `all`, `cone` are looked up in `env`.
pub fn eval_expr(ws: &Workspace, src: &str, env: &BTreeMap<String, UpperSet>) -> Result<UpperSet, ExprError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, end: src.len() };
    let node = p.node()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    eval(ws, &node, env)
}
