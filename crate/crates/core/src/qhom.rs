//! Verification of quantum homomorphisms and the diagnostics built on it.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hom::{is_core, is_homomorphism};
use crate::linalg::{commutator, Matrix};
use crate::qfun::{ClassicalDecomposition, ContextualityWitness, QuantumFunction};
use crate::scalar::Scalar;
use crate::structures::{diameter, direct_power, Structure, Tuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Both product conditions and commutation on Gaifman edges.
    Oracular,
    /// Product conditions only.
    NonOracular,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Oracular => "oracular",
            Mode::NonOracular => "nonoracular",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracular" => Ok(Mode::Oracular),
            "nonoracular" | "non-oracular" => Ok(Mode::NonOracular),
            _ => Err(invalid(format!("unknown mode {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QHomCandidate<T> {
    pub source: Structure,
    pub target: Structure,
    pub qf: QuantumFunction<T>,
    pub mode: Mode,
}

impl<T: Scalar> QHomCandidate<T> {
    pub fn new(source: Structure, target: Structure, qf: QuantumFunction<T>, mode: Mode) -> Result<Self> {
        source.check_same_signature(&target)?;
        if qf.source() != source.labels() {
            return Err(Error::LabelMismatch(format!("quantum function source does not match {}", source.name())));
        }
        if qf.target() != target.labels() {
            return Err(Error::LabelMismatch(format!("quantum function target does not match {}", target.name())));
        }
        Ok(QHomCandidate { source, target, qf, mode })
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qh1Violation<T> {
    pub symbol: usize,
    pub source_tuple: Tuple,
    pub target_tuple: Tuple,
    pub product: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qh2Violation<T> {
    pub a: usize,
    pub a2: usize,
    pub b: usize,
    pub b2: usize,
    pub commutator: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport<T> {
    pub qh1_violations: Vec<Qh1Violation<T>>,
    pub qh2_violations: Vec<Qh2Violation<T>>,
}

impl<T> VerificationReport<T> {
    pub fn passed(&self) -> bool {
        self.qh1_violations.is_empty() && self.qh2_violations.is_empty()
    }
}

/// Checks the forbidden-tuple products, and commutation on Gaifman edges in oracular mode.
pub fn verify<T: Scalar>(c: &QHomCandidate<T>) -> VerificationReport<T> {
    let qh1_violations = qh1_violations(c);
    let qh2_violations = if c.mode == Mode::Oracular { qh2_violations(c) } else { Vec::new() };
    VerificationReport { qh1_violations, qh2_violations }
}

fn qh1_violations<T: Scalar>(c: &QHomCandidate<T>) -> Vec<Qh1Violation<T>> {
    let jobs: Vec<(usize, &Tuple)> =
        c.source.relations().iter().enumerate().flat_map(|(s, rel)| rel.iter().map(move |t| (s, t))).collect();
    let per_job: Vec<Vec<Qh1Violation<T>>> = jobs
        .par_iter()
        .map(|&(s, a)| {
            let mut out = Vec::new();
            let mut b = Vec::with_capacity(a.len());
            products_outside(c, s, a, &mut b, None, &mut out);
            out
        })
        .collect();
    per_job.into_iter().flatten().collect()
}

/// Extends `b` position by position, pruning once the running product vanishes.
fn products_outside<T: Scalar>(
    c: &QHomCandidate<T>,
    symbol: usize,
    a: &[usize],
    b: &mut Vec<usize>,
    prefix: Option<&Matrix<T>>,
    out: &mut Vec<Qh1Violation<T>>,
) {
    let i = b.len();
    if i == a.len() {
        if !c.target.relation(symbol).contains(b.as_slice()) {
            out.push(Qh1Violation {
                symbol,
                source_tuple: a.to_vec(),
                target_tuple: b.clone(),
                product: prefix.expect("nonempty tuple").clone(),
            });
        }
        return;
    }
    for bi in 0..c.target.size() {
        let q = c.qf.proj(a[i], bi);
        let next = match prefix {
            None => q.clone(),
            Some(p) => p * q,
        };
        if next.is_zero() {
            continue;
        }
        b.push(bi);
        products_outside(c, symbol, a, b, Some(&next), out);
        b.pop();
    }
}

fn qh2_violations<T: Scalar>(c: &QHomCandidate<T>) -> Vec<Qh2Violation<T>> {
    let adj = c.source.gaifman_adjacency();
    let edges: Vec<(usize, usize)> = adj.iter().enumerate().flat_map(|(x, n)| n.iter().map(move |&y| (x, y))).collect();
    let m = c.target.size();
    let per_edge: Vec<Vec<Qh2Violation<T>>> = edges
        .par_iter()
        .map(|&(a, a2)| {
            let mut out = Vec::new();
            for b in 0..m {
                for b2 in 0..m {
                    let k = commutator(c.qf.proj(a, b), c.qf.proj(a2, b2)).expect("shared dimension");
                    if !k.is_zero() {
                        out.push(Qh2Violation { a, a2, b, b2, commutator: k });
                    }
                }
            }
            out
        })
        .collect();
    per_edge.into_iter().flatten().collect()
}

/// Verifies `qf` as an `n`-ary quantum polymorphism `Aⁿ ⇒ A`.
pub fn is_quantum_polymorphism<T: Scalar>(
    a: &Structure,
    n: usize,
    qf: &QuantumFunction<T>,
    mode: Mode,
) -> Result<VerificationReport<T>> {
    let power = direct_power(a, n)?;
    let c = QHomCandidate::new(power, a.clone(), qf.clone(), mode)?;
    Ok(verify(&c))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureVerdict<T> {
    /// A direct sum of classical homomorphisms.
    Member(ClassicalDecomposition<T>),
    Contextual(ContextualityWitness<T>),
}

/// Membership in the quantum closure of the classical homomorphisms.
pub fn in_quantum_closure<T: Scalar>(c: &QHomCandidate<T>) -> Result<ClosureVerdict<T>> {
    if !qh1_violations(c).is_empty() {
        return Err(Error::Precondition("candidate violates the forbidden-tuple products".into()));
    }
    if let Some(w) = c.qf.contextuality_witness() {
        return Ok(ClosureVerdict::Contextual(w));
    }
    let dec = c.qf.decompose_noncontextual()?;
    for h in &dec.components {
        assert!(is_homomorphism(&c.source, &c.target, h), "component of a verified candidate is a homomorphism");
    }
    Ok(ClosureVerdict::Member(dec))
}

/// For a non-contextual quantum endomorphism of a core, checks `Σ_x Q_{x,y} = I` for all `y`.
pub fn core_column_sums<T: Scalar>(c: &QHomCandidate<T>) -> Result<bool> {
    if c.source != c.target {
        return Err(Error::Precondition("not an endomorphism: source and target differ".into()));
    }
    if !verify(c).passed() {
        return Err(Error::Precondition("not a quantum homomorphism".into()));
    }
    if !is_core(&c.source)? {
        return Err(Error::Precondition(format!("{} is not a core", c.source.name())));
    }
    if !c.qf.is_noncontextual() {
        return Err(Error::Precondition("contextual quantum function".into()));
    }
    let id = Matrix::<T>::identity(c.qf.dim());
    Ok((0..c.target.size()).all(|y| {
        (0..c.source.size()).fold(Matrix::zeros(c.qf.dim(), c.qf.dim()), |acc, x| &acc + c.qf.proj(x, y)) == id
    }))
}

/// A pair of projectors that should be orthogonal because of walk lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkViolation {
    pub symbol: usize,
    pub length: usize,
    pub x: usize,
    pub x2: usize,
    pub y: usize,
    pub y2: usize,
}

fn walk_step(reach: &[Vec<bool>], adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    (0..reach.len()).map(|i| (0..n).map(|j| (0..n).any(|k| reach[i][k] && adj[k][j])).collect()).collect()
}

fn adjacency(s: &Structure, symbol: usize) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; s.size()]; s.size()];
    for t in s.relation(symbol) {
        adj[t[0]][t[1]] = true;
    }
    adj
}

/// Pairs `(x,y), (x2,y2)` with an ℓ-walk `x → x2` but none `y → y2` must have
/// orthogonal projectors. Walks are taken in each binary relation separately.
pub fn walk_orthogonality_check<T: Scalar>(c: &QHomCandidate<T>, max_len: usize) -> Result<Vec<WalkViolation>> {
    if !c.source.signature().is_binary() {
        return Err(invalid("walk check needs a binary signature"));
    }
    let (nx, na) = (c.source.size(), c.target.size());
    let mut zero_cache: HashMap<(usize, usize, usize, usize), bool> = HashMap::new();
    let mut out = Vec::new();
    for s in 0..c.source.signature().len() {
        let (ax, aa) = (adjacency(&c.source, s), adjacency(&c.target, s));
        let (mut wx, mut wa) = (ax.clone(), aa.clone());
        for len in 1..=max_len {
            if len > 1 {
                wx = walk_step(&wx, &ax);
                wa = walk_step(&wa, &aa);
            }
            for (x, wx_row) in wx.iter().enumerate() {
                for x2 in (0..nx).filter(|&x2| wx_row[x2]) {
                    for (y, wa_row) in wa.iter().enumerate() {
                        for y2 in (0..na).filter(|&y2| !wa_row[y2]) {
                            let zero = *zero_cache
                                .entry((x, y, x2, y2))
                                .or_insert_with(|| (c.qf.proj(x, y) * c.qf.proj(x2, y2)).is_zero());
                            if !zero {
                                out.push(WalkViolation { symbol: s, length: len, x, x2, y, y2 });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A simple path `x₀ … x_ω` with labels forming the non-orthogonality pattern:
/// every two elements at distinct vertices have non-orthogonal projectors,
/// except `(x₀, a₀')` and `(x_ω, a_ω')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bifurcation {
    pub path: Vec<usize>,
    /// `(a₀, a₀')`.
    pub start: (usize, usize),
    /// `a₁ … a_{ω-1}`.
    pub middle: Vec<usize>,
    /// `(a_ω, a_ω')`.
    pub end: (usize, usize),
}

impl Bifurcation {
    pub fn length(&self) -> usize {
        self.path.len() - 1
    }

    /// The pattern's elements: `(x₀,a₀), (x₀,a₀'), (x₁,a₁), …, (x_ω,a_ω), (x_ω,a_ω')`.
    pub fn elements(&self) -> Vec<(usize, usize)> {
        let w = self.length();
        let mut v = vec![(self.path[0], self.start.0), (self.path[0], self.start.1)];
        v.extend(self.middle.iter().enumerate().map(|(i, &a)| (self.path[i + 1], a)));
        v.push((self.path[w], self.end.0));
        v.push((self.path[w], self.end.1));
        v
    }

    /// Re-checks the defining conditions against `c`.
    pub fn holds_for<T: Scalar>(&self, c: &QHomCandidate<T>) -> bool {
        let adj = c.source.gaifman_adjacency();
        let w = self.length();
        let simple = self.path.iter().collect::<BTreeSet<_>>().len() == self.path.len();
        if w < 1 || !simple || self.middle.len() + 1 != w || self.start.0 == self.start.1 || self.end.0 == self.end.1 {
            return false;
        }
        if !self.path.windows(2).all(|p| adj[p[0]].contains(&p[1])) {
            return false;
        }
        let els = self.elements();
        let exempt = (1, els.len() - 1);
        (0..els.len()).all(|i| {
            (i + 1..els.len()).all(|j| {
                let ((x, a), (y, b)) = (els[i], els[j]);
                x == y || (i, j) == exempt || !(c.qf.proj(x, a) * c.qf.proj(y, b)).is_zero()
            })
        })
    }
}

/// `(source vertex, target label)`.
type Element = (usize, usize);

struct BifurcationSearch<'a, T> {
    c: &'a QHomCandidate<T>,
    adj: Vec<BTreeSet<usize>>,
    /// Cache of `Q_{x,a} Q_{y,b} ≠ 0`, keyed by `((x,a),(y,b))`.
    nonzero: HashMap<(Element, Element), bool>,
}

impl<T: Scalar> BifurcationSearch<'_, T> {
    fn compatible(&mut self, p: (usize, usize), q: (usize, usize)) -> bool {
        let key = if p <= q { (p, q) } else { (q, p) };
        let qf = &self.c.qf;
        // PQ and QP are transposes, so one order decides both.
        *self.nonzero.entry(key).or_insert_with(|| !(qf.proj(p.0, p.1) * qf.proj(q.0, q.1)).is_zero())
    }

    fn paths(&self, len: usize) -> Vec<Vec<usize>> {
        fn extend(adj: &[BTreeSet<usize>], len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == len + 1 {
                out.push(cur.clone());
                return;
            }
            let last = *cur.last().expect("path has a start");
            for &n in &adj[last] {
                if !cur.contains(&n) {
                    cur.push(n);
                    extend(adj, len, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        for x in 0..self.adj.len() {
            extend(&self.adj, len, &mut vec![x], &mut out);
        }
        out
    }

    /// Assigns labels slot by slot in lexicographic order.
    fn labels(&mut self, slots: &[usize], chosen: &mut Vec<usize>) -> bool {
        let k = chosen.len();
        if k == slots.len() {
            return true;
        }
        let last = slots.len() - 1;
        for a in 0..self.c.target.size() {
            if self.c.qf.proj(slots[k], a).is_zero() {
                continue;
            }
            if (k == 1 || k == last) && chosen[k - 1] == a {
                continue;
            }
            let ok = (0..k).all(|i| {
                slots[i] == slots[k] || (i == 1 && k == last) || self.compatible((slots[i], chosen[i]), (slots[k], a))
            });
            if ok {
                chosen.push(a);
                if self.labels(slots, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
}

/// The lexicographically least bifurcation of length `2 ..= diameter`.
///
/// Paths follow the Gaifman graph of the source.
pub fn find_bifurcation<T: Scalar>(c: &QHomCandidate<T>) -> Result<Option<Bifurcation>> {
    if !c.source.signature().is_binary() {
        return Err(invalid("bifurcation search needs a binary signature"));
    }
    let diam = diameter(&c.source).ok_or_else(|| invalid(format!("{} is disconnected", c.source.name())))?;
    let mut search = BifurcationSearch { c, adj: c.source.gaifman_adjacency(), nonzero: HashMap::new() };
    for len in 2..=diam {
        for path in search.paths(len) {
            let mut slots = vec![path[0], path[0]];
            slots.extend_from_slice(&path[1..len]);
            slots.extend([path[len], path[len]]);
            let mut chosen = Vec::new();
            if search.labels(&slots, &mut chosen) {
                return Ok(Some(Bifurcation {
                    start: (chosen[0], chosen[1]),
                    middle: chosen[2..len + 1].to_vec(),
                    end: (chosen[len + 1], chosen[len + 2]),
                    path,
                }));
            }
        }
    }
    Ok(None)
}
