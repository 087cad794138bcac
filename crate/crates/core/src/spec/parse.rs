//! Line-oriented parser for the trigger language.
//!
//! ```text
//! # comment
//! dim 3
//! states takeoff travel landing
//! init takeoff
//! trigger takeoff -> travel on cruise when x2 >= 300
//! trigger travel -> landing on descend when true
//! ```

use std::collections::{BTreeMap, BTreeSet};

use super::{SpecEdge, SpecModel};
use crate::error::{Error, Result};
use crate::geometry::{Interval, Rect};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Arrow,
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Spec {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex_line(text: &str, line: usize) -> Result<Vec<Token>> {
    let text = text.split('#').next().unwrap_or("");
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
        if c.is_whitespace() {
            i += 1;
        } else if text[i..].starts_with("->") {
            push(&mut out, Tok::Arrow);
            i += 2;
        } else if text[i..].starts_with("<=") {
            push(&mut out, Tok::Le);
            i += 2;
        } else if text[i..].starts_with(">=") {
            push(&mut out, Tok::Ge);
            i += 2;
        } else if c == '=' {
            push(&mut out, Tok::Eq);
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            push(&mut out, Tok::Word(text[start..i].to_owned()));
        } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = i;
            i += 1;
            while i < bytes.len() {
                let b = bytes[i];
                let exp_sign = (b == b'-' || b == b'+') && matches!(bytes[i - 1], b'e' | b'E');
                if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit
                .parse()
                .map_err(|_| err(line, col, format!("invalid number {lit:?}")))?;
            if !v.is_finite() {
                return Err(err(line, col, format!("number {lit:?} is not finite")));
            }
            push(&mut out, Tok::Num(v));
        } else {
            return Err(err(line, col, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or((self.line, self.end_col), |t| (t.line, t.col))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(err(l, c, msg))
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn word(&mut self, what: &str) -> Result<(String, usize)> {
        let (_, col) = self.here();
        match self.next() {
            Some(Token { tok: Tok::Word(w), .. }) => Ok((w.clone(), col)),
            _ => {
                self.pos -= 1;
                self.fail(format!("expected {what}"))
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Word(w), .. }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{kw}`")),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.toks.get(self.pos).map(|t| &t.tok) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            self.fail("unexpected trailing input")
        } else {
            Ok(())
        }
    }
}

struct Trigger {
    src: (String, usize),
    dst: (String, usize),
    label: String,
    atoms: Vec<Atom>,
    line: usize,
}

struct Atom {
    dim: usize,
    op: Tok,
    value: f64,
    line: usize,
    col: usize,
}

fn parse_trigger(c: &mut Cursor, line: usize) -> Result<Trigger> {
    let src = c.word("source state")?;
    c.expect(Tok::Arrow, "`->`")?;
    let dst = c.word("target state")?;
    c.keyword("on")?;
    let (label, _) = c.word("action label")?;
    c.keyword("when")?;
    let mut atoms = Vec::new();
    if let Some(Token { tok: Tok::Word(w), .. }) = c.toks.get(c.pos) {
        if w == "true" {
            c.pos += 1;
            c.done()?;
            return Ok(Trigger { src, dst, label, atoms, line });
        }
    }
    loop {
        let (var, col) = c.word("variable `x<i>`")?;
        let dim = var
            .strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| err(line, col, format!("expected variable `x<i>`, found {var:?}")))?;
        let op = match c.next() {
            Some(Token { tok: t @ (Tok::Le | Tok::Ge | Tok::Eq), .. }) => t.clone(),
            _ => {
                c.pos -= 1;
                return c.fail("expected `<=`, `>=` or `=`");
            }
        };
        let value = match c.next() {
            Some(Token { tok: Tok::Num(v), .. }) => *v,
            _ => {
                c.pos -= 1;
                return c.fail("expected number");
            }
        };
        atoms.push(Atom { dim, op, value, line, col });
        if c.pos == c.toks.len() {
            break;
        }
        c.keyword("and")?;
    }
    Ok(Trigger { src, dst, label, atoms, line })
}

fn guard(atoms: &[Atom], dim: usize) -> Result<Rect> {
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); dim];
    for a in atoms {
        if a.dim >= dim {
            return Err(err(a.line, a.col, format!("x{} is out of range for dimension {dim}", a.dim)));
        }
        let b = &mut bounds[a.dim];
        match a.op {
            Tok::Le => b.1 = b.1.min(a.value),
            Tok::Ge => b.0 = b.0.max(a.value),
            _ => {
                b.0 = b.0.max(a.value);
                b.1 = b.1.min(a.value);
            }
        }
        if b.0 > b.1 {
            return Err(err(a.line, a.col, format!("condition on x{} is unsatisfiable", a.dim)));
        }
    }
    let dims = bounds
        .into_iter()
        .map(|(lo, hi)| Interval::new(lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Rect::new(dims)
}

pub(super) fn parse(text: &str, dim: Option<usize>) -> Result<SpecModel> {
    let mut declared_dim: Option<(usize, usize)> = None;
    let mut states: Vec<String> = Vec::new();
    let mut init: Option<(String, usize, usize)> = None;
    let mut triggers = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = lex_line(raw, line)?;
        let mut c = Cursor {
            toks: &toks,
            pos: 0,
            line,
            end_col: raw.len() + 1,
        };
        let Some(first) = toks.first() else { continue };
        let Tok::Word(kw) = &first.tok else {
            return c.fail("expected a statement keyword");
        };
        c.pos = 1;
        match kw.as_str() {
            "dim" => {
                if declared_dim.is_some() {
                    return Err(err(line, first.col, "`dim` declared twice"));
                }
                let n = match c.next() {
                    Some(Token { tok: Tok::Num(v), .. }) if v.fract() == 0.0 && *v >= 1.0 => *v as usize,
                    _ => {
                        c.pos -= 1;
                        return c.fail("expected a positive integer dimension");
                    }
                };
                c.done()?;
                declared_dim = Some((n, line));
            }
            "states" => {
                if c.pos == toks.len() {
                    return c.fail("expected at least one state name");
                }
                while c.pos < toks.len() {
                    let (s, col) = c.word("state name")?;
                    if states.contains(&s) {
                        return Err(err(line, col, format!("state {s:?} declared twice")));
                    }
                    states.push(s);
                }
            }
            "init" => {
                if init.is_some() {
                    return Err(err(line, first.col, "`init` declared twice"));
                }
                let (s, col) = c.word("initial state")?;
                c.done()?;
                init = Some((s, line, col));
            }
            "trigger" => triggers.push(parse_trigger(&mut c, line)?),
            other => return Err(err(line, first.col, format!("unknown statement `{other}`"))),
        }
    }

    let dim = match (declared_dim, dim) {
        (Some((n, line)), Some(m)) if n != m => {
            return Err(err(line, 1, format!("declared dimension {n} conflicts with requested {m}")))
        }
        (Some((n, _)), _) => n,
        (None, Some(m)) if m >= 1 => m,
        _ => return Err(err(last_line, 1, "missing `dim` declaration")),
    };
    let (init, il, ic) = init.ok_or_else(|| err(last_line, 1, "missing `init` declaration"))?;
    if !states.contains(&init) {
        return Err(err(il, ic, format!("initial state {init:?} is not declared")));
    }

    let mut edges: BTreeMap<(String, String), (String, Rect)> = BTreeMap::new();
    for t in triggers {
        for (s, col) in [&t.src, &t.dst] {
            if !states.contains(s) {
                return Err(err(t.line, *col, format!("state {s:?} is not declared")));
            }
        }
        if t.src.0 == t.dst.0 {
            return Err(err(t.line, t.src.1, "a trigger must change the abstract state"));
        }
        let g = guard(&t.atoms, dim)?;
        let key = (t.src.0.clone(), t.label.clone());
        match edges.get(&key) {
            Some((d, g2)) if *d == t.dst.0 && *g2 == g => {}
            Some(_) => {
                return Err(err(
                    t.line,
                    t.src.1,
                    format!("conflicting trigger for state {:?} and label {:?}", t.src.0, t.label),
                ))
            }
            None => {
                edges.insert(key, (t.dst.0.clone(), g));
            }
        }
    }

    // Keep only states reachable from the initial one.
    let mut reach: BTreeSet<String> = BTreeSet::from([init.clone()]);
    let mut frontier = vec![init.clone()];
    while let Some(s) = frontier.pop() {
        for ((src, _), (dst, _)) in &edges {
            if *src == s && reach.insert(dst.clone()) {
                frontier.push(dst.clone());
            }
        }
    }
    states.retain(|s| reach.contains(s));
    let edges = edges
        .into_iter()
        .filter(|((src, _), _)| reach.contains(src))
        .map(|((src, label), (dst, guard))| (SpecEdge { src, label, dst }, guard))
        .collect();

    Ok(SpecModel {
        dim,
        states,
        init,
        edges,
    })
}
