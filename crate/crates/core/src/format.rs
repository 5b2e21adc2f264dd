//! Plain-text formats for structures, gadgets and quantum functions.
//!
//! ```text
//! structure C3
//! domain 0 1 2
//! relation E 2
//! (0 1) (1 0) (1 2) (2 1) (2 0) (0 2)
//! ```
//!
//! A gadget adds `distinguished <labels>` and optionally a certificate stanza
//! (`certificate <kind>`, then `tag <tag>` and `detail <text>` lines). Tuples of single-character
//! labels may also be written unparenthesised, e.g. `011`.
//!
//! ```text
//! qfun d=2 source=0,1 target=0,1
//! proj 0 0
//! 1 0
//! 0 0
//! ```
//!
//! Omitted `proj` blocks are zero matrices.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gadgets::{Certificate, CertificateKind};
use crate::linalg::Matrix;
use crate::qfun::QuantumFunction;
use crate::structures::{GadgetSpec, Signature, Structure, Tuple};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Lines with comments stripped, numbered from 1, blank ones dropped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn keyword(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((k, rest)) => (k, rest.trim()),
        None => (line, ""),
    }
}

/// A parsed gadget file; `distinguished` and `certificate` are absent for plain structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedStructure {
    pub structure: Structure,
    pub distinguished: Option<Vec<usize>>,
    pub certificate: Option<Certificate>,
}

fn split_tuples(line: usize, rest: &str) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    let mut chars = rest.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '(' {
            let close = rest[i..].find(')').ok_or_else(|| perr(line, "unclosed `(`"))? + i;
            out.push(rest[i + 1..close].split_whitespace().map(str::to_string).collect());
            while chars.peek().is_some_and(|&(j, _)| j <= close) {
                chars.next();
            }
        } else if c == ')' {
            return Err(perr(line, "unmatched `)`"));
        } else {
            let end = rest[i..].find(|ch: char| ch.is_whitespace() || ch == '(').map_or(rest.len(), |e| e + i);
            out.push(rest[i..end].chars().map(|ch| ch.to_string()).collect());
            while chars.peek().is_some_and(|&(j, _)| j < end) {
                chars.next();
            }
        }
    }
    Ok(out)
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let p = parse_structure_file(text)?;
    if p.distinguished.is_some() {
        return Err(perr(0, "expected a structure, found a gadget"));
    }
    Ok(p.structure)
}

pub fn parse_gadget(text: &str) -> Result<(GadgetSpec, Option<Certificate>)> {
    let p = parse_structure_file(text)?;
    let d = p.distinguished.ok_or_else(|| perr(0, "gadget has no `distinguished` line"))?;
    Ok((GadgetSpec::new(p.structure, d)?, p.certificate))
}

/// Parses either a structure or a gadget.
pub fn parse_structure_file(text: &str) -> Result<ParsedStructure> {
    let mut name = None;
    let mut labels: Option<Vec<String>> = None;
    let mut symbols: Vec<(String, usize)> = Vec::new();
    let mut raw: Vec<Vec<(usize, Vec<String>)>> = Vec::new();
    let mut distinguished: Option<(usize, Vec<String>)> = None;
    let mut certificate: Option<Certificate> = None;
    for (n, line) in lines(text) {
        let (k, rest) = keyword(line);
        match k {
            "structure" if name.is_none() => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(perr(n, "structure name must be a single word"));
                }
                name = Some(rest.to_string());
            }
            "domain" if labels.is_none() => {
                labels = Some(rest.split_whitespace().map(str::to_string).collect());
            }
            "relation" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [sym, arity] = parts[..] else {
                    return Err(perr(n, "expected `relation <symbol> <arity>`"));
                };
                let arity = arity.parse().map_err(|_| perr(n, format!("bad arity `{arity}`")))?;
                if symbols.iter().any(|s| s.0 == sym) {
                    return Err(perr(n, format!("relation {sym} declared twice")));
                }
                symbols.push((sym.to_string(), arity));
                raw.push(Vec::new());
            }
            "distinguished" if distinguished.is_none() => {
                distinguished = Some((n, rest.split_whitespace().map(str::to_string).collect()));
            }
            "certificate" if certificate.is_none() => {
                let kind = CertificateKind::parse(rest)
                    .ok_or_else(|| perr(n, format!("unknown certificate kind `{rest}`")))?;
                certificate = Some(Certificate::new(kind, ""));
            }
            "tag" | "detail" => {
                let cert =
                    certificate.as_mut().ok_or_else(|| perr(n, format!("`{k}` outside a certificate stanza")))?;
                if k == "tag" {
                    cert.tags.push(rest.to_string());
                } else {
                    cert.detail = rest.to_string();
                }
            }
            "structure" | "domain" | "distinguished" | "certificate" => {
                return Err(perr(n, format!("duplicate `{k}` line")));
            }
            _ => {
                let current = raw.last_mut().ok_or_else(|| perr(n, "tuple before any `relation` line"))?;
                if certificate.is_some() || distinguished.is_some() {
                    return Err(perr(n, "tuples must precede `distinguished` and `certificate`"));
                }
                for t in split_tuples(n, line)? {
                    current.push((n, t));
                }
            }
        }
    }
    let name = name.ok_or_else(|| perr(0, "missing `structure` line"))?;
    let labels = labels.ok_or_else(|| perr(0, "missing `domain` line"))?;
    let index = |n: usize, l: &str| -> Result<usize> {
        labels.iter().position(|x| x == l).ok_or_else(|| perr(n, format!("unknown element `{l}`")))
    };
    let mut relations = Vec::new();
    for (s, tuples) in raw.iter().enumerate() {
        let mut rel = BTreeSet::new();
        for (n, t) in tuples {
            if t.len() != symbols[s].1 {
                return Err(perr(*n, format!("tuple of length {} in {}/{}", t.len(), symbols[s].0, symbols[s].1)));
            }
            rel.insert(t.iter().map(|l| index(*n, l)).collect::<Result<Tuple>>()?);
        }
        relations.push(rel);
    }
    let signature = Signature::new(symbols).map_err(|e| perr(0, e.to_string()))?;
    let structure = Structure::new(name, signature, labels.clone(), relations).map_err(|e| perr(0, e.to_string()))?;
    let distinguished = match distinguished {
        Some((n, ls)) => Some(ls.iter().map(|l| index(n, l)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    Ok(ParsedStructure { structure, distinguished, certificate })
}

/// Tuples of arity `arity` over the labels of `a`, written as in a relation block.
pub fn parse_relation(text: &str, a: &Structure, arity: usize) -> Result<BTreeSet<Tuple>> {
    let mut rel = BTreeSet::new();
    for (n, line) in lines(text) {
        for t in split_tuples(n, line)? {
            if t.len() != arity {
                return Err(perr(n, format!("tuple of length {}, expected {arity}", t.len())));
            }
            let idx = t
                .iter()
                .map(|l| a.index_of(l).ok_or_else(|| perr(n, format!("unknown element `{l}`"))))
                .collect::<Result<Tuple>>()?;
            rel.insert(idx);
        }
    }
    Ok(rel)
}

pub fn write_structure(s: &Structure) -> String {
    let mut out = format!("structure {}\ndomain {}\n", s.name(), s.labels().join(" "));
    for (i, (sym, arity)) in s.signature().symbols().iter().enumerate() {
        let _ = writeln!(out, "relation {sym} {arity}");
        for t in s.relation(i) {
            let parts: Vec<&str> = t.iter().map(|&x| s.label(x)).collect();
            let _ = writeln!(out, "({})", parts.join(" "));
        }
    }
    out
}

pub fn write_gadget(g: &GadgetSpec, cert: Option<&Certificate>) -> String {
    let mut out = write_structure(&g.structure);
    let d: Vec<&str> = g.distinguished.iter().map(|&x| g.structure.label(x)).collect();
    let _ = writeln!(out, "distinguished {}", d.join(" "));
    if let Some(c) = cert {
        let _ = writeln!(out, "certificate {}", c.kind.name());
        for t in &c.tags {
            let _ = writeln!(out, "tag {t}");
        }
        if !c.detail.is_empty() {
            let _ = writeln!(out, "detail {}", c.detail.replace('\n', " "));
        }
    }
    out
}

fn parse_rational(n: usize, s: &str) -> Result<BigRational> {
    let bad = || perr(n, format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(perr(n, "zero denominator"));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_qfun(text: &str) -> Result<QuantumFunction<BigRational>> {
    let mut it = lines(text).peekable();
    let (hn, header) = it.next().ok_or_else(|| perr(0, "empty quantum function file"))?;
    let (k, rest) = keyword(header);
    if k != "qfun" {
        return Err(perr(hn, "expected `qfun d=<dim> source=<labels> target=<labels>`"));
    }
    let (mut dim, mut source, mut target) = (None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| perr(hn, format!("bad header field `{field}`")))?;
        let list = || value.split(',').map(str::to_string).collect::<Vec<_>>();
        match key {
            "d" => dim = Some(value.parse::<usize>().map_err(|_| perr(hn, format!("bad dimension `{value}`")))?),
            "source" => source = Some(list()),
            "target" => target = Some(list()),
            _ => return Err(perr(hn, format!("unknown header field `{key}`"))),
        }
    }
    let dim = dim.filter(|&d| d > 0).ok_or_else(|| perr(hn, "missing or zero `d=`"))?;
    let source = source.ok_or_else(|| perr(hn, "missing `source=`"))?;
    let target = target.ok_or_else(|| perr(hn, "missing `target=`"))?;
    crate::qfun::check_dim(dim).map_err(|e| perr(hn, e.to_string()))?;
    let mut pvms = vec![vec![Matrix::zeros(dim, dim); target.len()]; source.len()];
    let mut seen = BTreeSet::new();
    while let Some((n, line)) = it.next() {
        let (k, rest) = keyword(line);
        let parts: Vec<&str> = rest.split_whitespace().collect();
        let (a, b) = match (k, parts.as_slice()) {
            ("proj", &[a, b]) => (a, b),
            _ => return Err(perr(n, "expected `proj <source> <target>`")),
        };
        let ai = source.iter().position(|x| x == a).ok_or_else(|| perr(n, format!("unknown source label `{a}`")))?;
        let bi = target.iter().position(|x| x == b).ok_or_else(|| perr(n, format!("unknown target label `{b}`")))?;
        if !seen.insert((ai, bi)) {
            return Err(perr(n, format!("duplicate block for ({a}, {b})")));
        }
        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (rn, row) = it.next().ok_or_else(|| perr(n, "matrix block ends early"))?;
            let row: Vec<BigRational> = row.split_whitespace().map(|x| parse_rational(rn, x)).collect::<Result<_>>()?;
            if row.len() != dim {
                return Err(perr(rn, format!("row has {} entries, expected {dim}", row.len())));
            }
            rows.push(row);
        }
        pvms[ai][bi] = Matrix::from_rows(rows).map_err(|e| perr(n, e.to_string()))?;
    }
    QuantumFunction::new(source, target, dim, pvms).map_err(|e| perr(0, e.to_string()))
}

/// Writes every nonzero block, in source-then-target order.
pub fn write_qfun(q: &QuantumFunction<BigRational>) -> String {
    let mut out = format!("qfun d={} source={} target={}\n", q.dim(), q.source().join(","), q.target().join(","));
    for a in 0..q.source().len() {
        for b in 0..q.target().len() {
            let m = q.proj(a, b);
            if m.is_zero() {
                continue;
            }
            let _ = writeln!(out, "proj {} {}", q.source()[a], q.target()[b]);
            for i in 0..m.rows() {
                let row: Vec<String> = (0..m.cols()).map(|j| m[[i, j]].to_string()).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
    }
    out
}
