//! Boolean relations, 1-in-k translates and subset-indexed quantum polymorphisms.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::linalg::{is_projector, Matrix};
use crate::qfun::QuantumFunction;
use crate::qhom::{is_quantum_polymorphism, Mode};
use crate::scalar::Scalar;
use crate::structures::{direct_power, PPFormula, Signature, Structure};

/// A relation on `{0,1}`; position `i` of a tuple is bit `k-1-i` of its mask,
/// so masks print as the binary strings of their tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoolRelation {
    arity: usize,
    tuples: BTreeSet<u32>,
}

pub const MAX_BOOL_ARITY: usize = 24;

fn majority(a: u32, b: u32, c: u32) -> u32 {
    (a & b) | (a & c) | (b & c)
}

impl BoolRelation {
    pub fn new(arity: usize, tuples: impl IntoIterator<Item = u32>) -> Result<Self> {
        if arity == 0 || arity > MAX_BOOL_ARITY {
            return Err(invalid(format!("arity {arity} out of range")));
        }
        let tuples: BTreeSet<u32> = tuples.into_iter().collect();
        if tuples.iter().any(|&t| t >> arity != 0) {
            return Err(invalid(format!("mask does not fit arity {arity}")));
        }
        Ok(BoolRelation { arity, tuples })
    }

    /// Parses tuples written as binary strings, e.g. `["100", "010"]`.
    pub fn from_strs(arity: usize, tuples: &[&str]) -> Result<Self> {
        let masks = tuples.iter().map(|s| parse_bits(s, arity)).collect::<Result<Vec<_>>>()?;
        Self::new(arity, masks)
    }

    pub fn full(arity: usize) -> Result<Self> {
        Self::new(arity, 0..1u32 << arity)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<u32> {
        &self.tuples
    }

    pub fn contains(&self, t: u32) -> bool {
        self.tuples.contains(&t)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Value at 0-based position `i`.
    pub fn bit(&self, t: u32, i: usize) -> bool {
        t >> (self.arity - 1 - i) & 1 == 1
    }

    /// Componentwise XOR with `t`.
    pub fn translate(&self, t: u32) -> Result<Self> {
        if t >> self.arity != 0 {
            return Err(invalid(format!("translation tuple longer than arity {}", self.arity)));
        }
        Self::new(self.arity, self.tuples.iter().map(|&x| x ^ t))
    }

    /// Some triple whose componentwise majority leaves the relation.
    pub fn majority_witness(&self) -> Option<[u32; 3]> {
        for &a in &self.tuples {
            for &b in &self.tuples {
                for &c in &self.tuples {
                    if !self.contains(majority(a, b, c)) {
                        return Some([a, b, c]);
                    }
                }
            }
        }
        None
    }

    pub fn majority_preserves(&self) -> bool {
        self.majority_witness().is_none()
    }

    /// Projection onto 0-based coordinates, in the given order.
    pub fn project(&self, coords: &[usize]) -> Result<Self> {
        if coords.iter().any(|&c| c >= self.arity) {
            return Err(invalid("projection coordinate out of range"));
        }
        let k = coords.len();
        Self::new(
            k,
            self.tuples.iter().map(|&t| {
                coords.iter().enumerate().fold(0, |acc, (j, &c)| acc | (u32::from(self.bit(t, c)) << (k - 1 - j)))
            }),
        )
    }

    /// Whether the projection onto 1-based coordinates `i < j` is all of `{0,1}²`.
    pub fn binary_projection_full(&self, i: usize, j: usize) -> Result<bool> {
        if !(1 <= i && i < j && j <= self.arity) {
            return Err(invalid(format!("need 1 <= i < j <= {}, got ({i}, {j})", self.arity)));
        }
        Ok(self.project(&[i - 1, j - 1])?.len() == 4)
    }

    pub fn has_full_binary_projection(&self) -> bool {
        (1..=self.arity).any(|i| (i + 1..=self.arity).any(|j| self.binary_projection_full(i, j).unwrap_or(false)))
    }

    /// Majority preserves every projection onto a nonempty proper subset of coordinates.
    pub fn proper_projections_majority_closed(&self) -> bool {
        let k = self.arity;
        (1u32..(1 << k) - 1).all(|set| {
            let coords: Vec<usize> = (0..k).filter(|&c| set >> c & 1 == 1).collect();
            self.project(&coords).map(|p| p.majority_preserves()).unwrap_or(false)
        })
    }

    /// Not majority-closed, all proper projections majority-closed, no full binary projection.
    pub fn property_triple(&self) -> bool {
        !self.majority_preserves() && self.proper_projections_majority_closed() && !self.has_full_binary_projection()
    }

    /// The least `t` with `self = R_{1/k} ⊕ t`.
    ///
    /// For `k ≥ 3` such a `t` is unique and exists exactly when the property
    /// triple holds; for `k = 2` both `00` and `11` translate `{01, 10}` to itself.
    pub fn classify_translate(&self) -> Option<u32> {
        let &first = self.tuples.iter().next()?;
        if self.len() != self.arity {
            return None;
        }
        let base = r_one_in_k(self.arity).ok()?;
        let mut candidates: Vec<u32> = (0..self.arity).map(|i| first ^ (1 << i)).collect();
        candidates.sort_unstable();
        candidates.into_iter().find(|&t| base.translate(t).map(|r| r == *self).unwrap_or(false))
    }

    pub fn format_tuple(&self, t: u32) -> String {
        (0..self.arity).map(|i| if self.bit(t, i) { '1' } else { '0' }).collect()
    }

    /// The structure `({0,1}; R)`.
    pub fn to_structure(&self, name: &str) -> Structure {
        let tuples =
            self.tuples.iter().map(|&t| (0..self.arity).map(|i| usize::from(self.bit(t, i))).collect()).collect();
        Structure::numbered(name, Signature::single("R", self.arity), 2, vec![tuples]).expect("boolean structure")
    }
}

impl fmt::Display for BoolRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tuples.iter().map(|&t| self.format_tuple(t)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn parse_bits(s: &str, arity: usize) -> Result<u32> {
    if s.len() != arity {
        return Err(invalid(format!("`{s}` does not have length {arity}")));
    }
    s.chars().try_fold(0u32, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(invalid(format!("`{s}` is not a binary string"))),
    })
}

/// Weight-one tuples of length `k`.
pub fn r_one_in_k(k: usize) -> Result<BoolRelation> {
    BoolRelation::new(k, (0..k).map(|i| 1u32 << i))
}

pub fn translate(r: &BoolRelation, t: u32) -> Result<BoolRelation> {
    r.translate(t)
}

/// `O_t = ({0,1}; R_{1/k} ⊕ t)` for `t` given as a binary string.
pub fn o_t(t: &str) -> Result<Structure> {
    let k = t.len();
    let rel = r_one_in_k(k)?.translate(parse_bits(t, k)?)?;
    Ok(rel.to_structure(&format!("O_{t}")))
}

/// `({0,1}; S₀₀, S₁₁, S₁₀)` with `S_ab = {0,1}² ∖ {(a,b)}`.
pub fn build_b() -> Structure {
    let sig = Signature::new(vec![("S00".into(), 2), ("S11".into(), 2), ("S10".into(), 2)]).expect("signature");
    let rel = |a: usize, b: usize| -> BTreeSet<Vec<usize>> {
        (0..2).flat_map(|x| (0..2).map(move |y| vec![x, y])).filter(|t| *t != vec![a, b]).collect()
    };
    Structure::numbered("B", sig, 2, vec![rel(0, 0), rel(1, 1), rel(1, 0)]).expect("structure B")
}

/// Index of `S ⊆ [n]` (1-based elements) among the elements of `{0,1}ⁿ`.
pub fn subset_index(n: usize, elements: &[usize]) -> usize {
    elements.iter().fold(0, |acc, &i| acc | 1 << (n - i))
}

/// The 1-based elements of the subset with index `idx`.
pub fn subset_elements(n: usize, idx: usize) -> Vec<usize> {
    (1..=n).filter(|&i| idx >> (n - i) & 1 == 1).collect()
}

/// Unordered pairs `S ≠ T` (smaller element list first, sorted) such that neither `(S,T)` nor `(T,S)`
/// lies in a relation of `Bⁿ`, checked position by position.
pub fn forced_commutation_cover(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let bit = |s: usize, i: usize| s >> (n - 1 - i) & 1;
    let avoids = |s: usize, t: usize, a: usize, b: usize| (0..n).all(|i| (bit(s, i), bit(t, i)) != (a, b));
    let related = |s: usize, t: usize| avoids(s, t, 0, 0) || avoids(s, t, 1, 1) || avoids(s, t, 1, 0);
    let mut out = Vec::new();
    for s in 0..1usize << n {
        for t in s + 1..1usize << n {
            if !related(s, t) && !related(t, s) {
                out.push(ordered_pair(n, s, t));
            }
        }
    }
    out.sort();
    out
}

/// The pair with the lexicographically smaller element list first.
fn ordered_pair(n: usize, s: usize, t: usize) -> (Vec<usize>, Vec<usize>) {
    let (a, b) = (subset_elements(n, s), subset_elements(n, t));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Projectors `Q_S` (outcome 1) of a quantum function `{0,1}ⁿ ⇒ {0,1}`;
/// outcome 0 is `I − Q_S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetIndexedQF<T> {
    n: usize,
    dim: usize,
    q: Vec<Matrix<T>>,
}

impl<T: Scalar> SubsetIndexedQF<T> {
    pub fn new(n: usize, q: Vec<Matrix<T>>) -> Result<Self> {
        if q.len() != 1 << n {
            return Err(invalid(format!("need {} projectors for n = {n}", 1 << n)));
        }
        let dim = q.first().map(Matrix::rows).unwrap_or(0);
        for (idx, p) in q.iter().enumerate() {
            if p.rows() != dim || !is_projector(p)? {
                return Err(Error::NotPvm(format!("{:?}", subset_elements(n, idx))));
            }
        }
        Ok(SubsetIndexedQF { n, dim, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, elements: &[usize]) -> &Matrix<T> {
        &self.q[subset_index(self.n, elements)]
    }

    pub fn at(&self, idx: usize) -> &Matrix<T> {
        &self.q[idx]
    }

    fn complement(&self, idx: usize) -> usize {
        !idx & ((1 << self.n) - 1)
    }

    /// `(flip Q)_S = I − Q_{[n]∖S}`.
    pub fn flip_dual(&self) -> Self {
        let id = Matrix::identity(self.dim);
        let q = (0..self.q.len()).map(|s| &id - &self.q[self.complement(s)]).collect();
        SubsetIndexedQF { n: self.n, dim: self.dim, q }
    }

    pub fn to_quantum_function(&self) -> Result<QuantumFunction<T>> {
        let source: Vec<String> = (0..1usize << self.n)
            .map(|s| (0..self.n).map(|i| if s >> (self.n - 1 - i) & 1 == 1 { '1' } else { '0' }).collect::<Vec<_>>())
            .map(|bits| bits.iter().map(char::to_string).collect::<Vec<_>>().join("."))
            .collect();
        let id = Matrix::identity(self.dim);
        let pvms = self.q.iter().map(|p| vec![&id - p, p.clone()]).collect();
        QuantumFunction::new(source, vec!["0".into(), "1".into()], self.dim, pvms)
    }

    pub fn from_quantum_function(qf: &QuantumFunction<T>, n: usize) -> Result<Self> {
        if qf.source().len() != 1 << n || qf.target().len() != 2 {
            return Err(Error::LabelMismatch(format!("expected {{0,1}}^{n} => {{0,1}}")));
        }
        Self::new(n, (0..1 << n).map(|s| qf.proj(s, 1).clone()).collect())
    }

    pub fn is_noncontextual(&self) -> bool {
        self.q.iter().enumerate().all(|(i, p)| self.q[i + 1..].iter().all(|r| (p * r) == (r * p)))
    }
}

/// `Q_T = I` for `|T| ≥ 3`, `Q_{12} = A`, `Q_{13} = B`, `Q_{14} = C`, and
/// `Q_T = I − Q_{[4]∖T}` otherwise.
pub fn build_arity4_contextual<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, c: &Matrix<T>) -> Result<SubsetIndexedQF<T>> {
    let d = a.rows();
    for m in [a, b, c] {
        if m.rows() != d || !is_projector(m)? {
            return Err(invalid("inputs must be projectors of a common dimension"));
        }
    }
    let id = Matrix::identity(d);
    let fixed = |idx: usize| -> Option<Matrix<T>> {
        let elems = subset_elements(4, idx);
        match elems.as_slice() {
            e if e.len() >= 3 => Some(id.clone()),
            [1, 2] => Some(a.clone()),
            [1, 3] => Some(b.clone()),
            [1, 4] => Some(c.clone()),
            _ => None,
        }
    };
    let q = (0..16)
        .map(|idx| fixed(idx).unwrap_or_else(|| &id - &fixed(!idx & 15).expect("complement is fixed")))
        .collect();
    SubsetIndexedQF::new(4, q)
}

/// The defaults `diag(1,0)`, `½[[1,1],[1,1]]`, `½[[1,-1],[-1,1]]`.
pub fn default_arity4_inputs<T: Scalar>() -> [Matrix<T>; 3] {
    let one = T::one();
    let half = one.clone() / (one.clone() + one.clone());
    let a = Matrix::diagonal(vec![one.clone(), T::zero()]);
    let b = Matrix::from_fn(2, 2, |_, _| half.clone());
    let c = Matrix::from_fn(2, 2, |i, j| if i == j { half.clone() } else { -half.clone() });
    [a, b, c]
}

/// An exact failure of one of the four identities for polymorphisms of `O_{100}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFailure {
    pub identity: u8,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

/// Checks, for a non-oracular quantum polymorphism of `O_{100}`:
/// 1. `S ∩ T = ∅ ⇒ Q_S Q_T = 0`;
/// 2. `S ∩ T = ∅ ⇒ Q_{S∪T} = Q_{S∪T}(Q_S + Q_T)`;
/// 3. `Q_S = Q_{S∪T} Q_S`;
/// 4. `Q_S = Σ_{i∈S} Q_{{i}}`.
pub fn check_polys100<T: Scalar>(q: &SubsetIndexedQF<T>) -> Result<Vec<IdentityFailure>> {
    let o100 = o_t("100")?;
    if !is_quantum_polymorphism(&o100, q.n, &q.to_quantum_function()?, Mode::NonOracular)?.passed() {
        return Err(Error::Precondition("not a non-oracular quantum polymorphism of O_100".into()));
    }
    let n = q.n;
    let full = 1usize << n;
    let mut out = Vec::new();
    let fail = |id: u8, s: usize, t: usize| IdentityFailure {
        identity: id,
        s: subset_elements(n, s),
        t: subset_elements(n, t),
    };
    for s in 0..full {
        for t in 0..full {
            let (qs, qt, qu) = (&q.q[s], &q.q[t], &q.q[s | t]);
            if s & t == 0 {
                if !(qs * qt).is_zero() {
                    out.push(fail(1, s, t));
                }
                if *qu != qu * &(qs + qt) {
                    out.push(fail(2, s, t));
                }
            }
            if *qs != qu * qs {
                out.push(fail(3, s, t));
            }
        }
        let sum = subset_elements(n, s).iter().fold(Matrix::zeros(q.dim, q.dim), |acc, &i| &acc + q.get(&[i]));
        if q.q[s] != sum {
            out.push(fail(4, s, 0));
        }
    }
    Ok(out)
}

/// A pp-definition used by the Boolean classification, with the relation it
/// should define over its structure.
#[derive(Clone, Debug)]
pub struct BooleanPpDefinition {
    pub name: String,
    pub over: Structure,
    pub formula: PPFormula,
    pub defines: BoolRelation,
}

fn vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// The pp-definitions among translates of 1-in-k for a given `k ≥ 3`.
pub fn pp_definitions(k: usize) -> Result<Vec<BooleanPpDefinition>> {
    if k < 3 {
        return Err(invalid("pp-definitions need k >= 3"));
    }
    let e1 = 1u32 << (k - 1);
    let e1_str = BoolRelation::new(k, [e1])?.format_tuple(e1);
    let o_e1 = o_t(&e1_str)?;
    let mut defs = Vec::new();

    // 0 from R(a, …, a).
    defs.push(BooleanPpDefinition {
        name: format!("zero_in_O_{e1_str}"),
        over: o_e1.clone(),
        formula: PPFormula { free: vec!["a".into()], exists: vec![], atoms: vec![("R".into(), vec!["a".into(); k])] },
        defines: BoolRelation::new(1, [0])?,
    });

    // R_100(x,y,z) from R(x, y, z, w, …, w) with w = 0.
    let mut long = vec!["x".to_string(), "y".into(), "z".into()];
    long.extend(std::iter::repeat_n("w".to_string(), k - 3));
    let mut atoms = vec![("R".to_string(), long)];
    if k > 3 {
        atoms.push(("R".into(), vec!["w".into(); k]));
    }
    defs.push(BooleanPpDefinition {
        name: format!("r100_in_O_{e1_str}"),
        over: o_e1.clone(),
        formula: PPFormula {
            free: vec!["x".into(), "y".into(), "z".into()],
            exists: if k > 3 { vec!["w".into()] } else { vec![] },
            atoms,
        },
        defines: BoolRelation::from_strs(3, &["000", "110", "101"])?,
    });

    // R_t for t = e_l by permuting the arguments of R_{e_1}.
    for l in 2..=k {
        let xs = vars("x", k);
        let mut args = vec![xs[l - 1].clone()];
        args.extend(xs.iter().enumerate().filter(|&(i, _)| i != l - 1).map(|(_, v)| v.clone()));
        let t = 1u32 << (k - l);
        defs.push(BooleanPpDefinition {
            name: format!("r_e{l}_in_O_{e1_str}"),
            over: o_e1.clone(),
            formula: PPFormula { free: xs, exists: vec![], atoms: vec![("R".into(), args)] },
            defines: r_one_in_k(k)?.translate(t)?,
        });
    }

    // For t = 1ˡ0ᵏ⁻ˡ with 2 ≤ l ≤ k−2, the atom R_t(xˡ⁺¹, yᵏ⁻ˡ⁻¹) pins (x, y) = (1, 0).
    // Fixing positions 3..k to those of t then leaves exactly x ≠ y on positions 1, 2.
    for l in 2..=k - 2 {
        let t = ((1u32 << l) - 1) << (k - l);
        let rel = r_one_in_k(k)?.translate(t)?;
        let t_str = rel.format_tuple(t);
        let over = rel.to_structure(&format!("O_{t_str}"));
        let pin = |a: &str, b: &str| -> Vec<String> {
            let mut args = vec![a.to_string(); l + 1];
            args.extend(std::iter::repeat_n(b.to_string(), k - l - 1));
            args
        };
        let neq_atom = |a: &str, b: &str| -> Vec<String> {
            let mut args = vec![a.to_string(), b.to_string()];
            args.extend(std::iter::repeat_n("o".to_string(), l - 2));
            args.extend(std::iter::repeat_n("z".to_string(), k - l));
            args
        };
        defs.push(BooleanPpDefinition {
            name: format!("one_zero_in_O_{t_str}"),
            over: over.clone(),
            formula: PPFormula {
                free: vec!["x".into(), "y".into()],
                exists: vec![],
                atoms: vec![("R".into(), pin("x", "y"))],
            },
            defines: BoolRelation::from_strs(2, &["10"])?,
        });
        defs.push(BooleanPpDefinition {
            name: format!("neq_in_O_{t_str}"),
            over: over.clone(),
            formula: PPFormula {
                free: vec!["x".into(), "y".into()],
                exists: vec!["o".into(), "z".into()],
                atoms: vec![("R".into(), neq_atom("x", "y")), ("R".into(), pin("o", "z"))],
            },
            defines: BoolRelation::from_strs(2, &["01", "10"])?,
        });
        // R_{t'} with t' = t ⊕ e₁: ∃q R_t(q, s₂…s_k) ∧ q ≠ s₁.
        let s = vars("s", k);
        let mut first = vec!["q".to_string()];
        first.extend(s[1..].iter().cloned());
        defs.push(BooleanPpDefinition {
            name: format!("switch_first_in_O_{t_str}"),
            over,
            formula: PPFormula {
                free: s.clone(),
                exists: vec!["q".into(), "o".into(), "z".into()],
                atoms: vec![("R".into(), first), ("R".into(), neq_atom("q", &s[0])), ("R".into(), pin("o", "z"))],
            },
            defines: r_one_in_k(k)?.translate(t ^ (1 << (k - 1)))?,
        });
    }
    Ok(defs)
}

/// Relation defined by a pp-formula over a Boolean structure, as a `BoolRelation`.
pub fn evaluate_boolean(formula: &PPFormula, over: &Structure) -> Result<BoolRelation> {
    let k = formula.free.len();
    let tuples = formula.evaluate(over)?;
    BoolRelation::new(k, tuples.iter().map(|t| t.iter().fold(0u32, |acc, &b| acc << 1 | b as u32)))
}

/// `Bⁿ` membership oracle for pairs, used to cross-check the positionwise cover.
pub fn cover_by_power(n: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let bn = direct_power(&build_b(), n)?;
    let related = |s: usize, t: usize| bn.relations().iter().any(|r| r.contains(&vec![s, t]));
    let mut out = Vec::new();
    for s in 0..bn.size() {
        for t in s + 1..bn.size() {
            if !related(s, t) && !related(t, s) {
                out.push(ordered_pair(n, s, t));
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    #[test]
    fn translates() {
        let r = r_one_in_k(3).unwrap();
        assert_eq!(r, BoolRelation::from_strs(3, &["100", "010", "001"]).unwrap());
        let t = r.translate(parse_bits("100", 3).unwrap()).unwrap();
        assert_eq!(t, BoolRelation::from_strs(3, &["000", "110", "101"]).unwrap());
        assert_eq!(r.translate(0).unwrap(), r);
        assert!(r.translate(0b1000).is_err());
        assert!(parse_bits("10", 3).is_err());
    }

    #[test]
    fn majority_examples() {
        let r = r_one_in_k(3).unwrap();
        let w = r.majority_witness().unwrap();
        assert!(!r.contains(majority(w[0], w[1], w[2])));
        assert_eq!(majority(0b100, 0b010, 0b001), 0);
        let s10 = BoolRelation::from_strs(2, &["00", "01", "11"]).unwrap();
        assert!(s10.majority_preserves());
        assert!(BoolRelation::new(3, [5]).unwrap().majority_preserves());
    }

    #[test]
    fn projections() {
        let r = r_one_in_k(3).unwrap();
        assert!(!r.binary_projection_full(1, 2).unwrap());
        assert!(BoolRelation::full(2).unwrap().binary_projection_full(1, 2).unwrap());
        assert!(r.binary_projection_full(2, 2).is_err());
        assert!(r.binary_projection_full(1, 4).is_err());
    }

    #[test]
    fn classification_examples() {
        let r = BoolRelation::from_strs(3, &["000", "110", "101"]).unwrap();
        assert_eq!(r.classify_translate(), Some(0b100));
        assert_eq!(BoolRelation::full(3).unwrap().classify_translate(), None);
        // Arity two: {00, 11} is a translate but majority-closed.
        let eq = BoolRelation::from_strs(2, &["00", "11"]).unwrap();
        assert_eq!(eq.classify_translate(), Some(0b01));
        assert!(!eq.property_triple());
    }

    #[test]
    fn subsets_match_power_order() {
        assert_eq!(subset_index(4, &[1]), 8);
        assert_eq!(subset_index(4, &[1, 2, 3, 4]), 15);
        assert_eq!(subset_elements(4, 6), vec![2, 3]);
    }

    #[test]
    fn cover() {
        for n in 1..=3 {
            assert!(forced_commutation_cover(n).is_empty());
        }
        let c4 = forced_commutation_cover(4);
        assert!(c4.contains(&(vec![1, 2], vec![1, 3])));
        assert_eq!(c4, cover_by_power(4).unwrap());
    }

    #[test]
    fn arity4_construction() {
        let [a, b, c] = default_arity4_inputs::<Q>();
        let q = build_arity4_contextual(&a, &b, &c).unwrap();
        let id = Matrix::<Q>::identity(2);
        assert_eq!(q.get(&[2, 3]), &(&id - &c));
        assert!(q.get(&[1]).is_zero());
        assert!(q.get(&[]).is_zero());
        assert_eq!(q.get(&[1, 2, 4]), &id);
        assert!(!q.is_noncontextual());
        let r = is_quantum_polymorphism(&build_b(), 4, &q.to_quantum_function().unwrap(), Mode::Oracular).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn flip_is_involution() {
        let [a, b, c] = default_arity4_inputs::<Q>();
        let q = build_arity4_contextual(&a, &b, &c).unwrap();
        assert_eq!(q.flip_dual().flip_dual(), q);
        assert_eq!(q.flip_dual().is_noncontextual(), q.is_noncontextual());
    }

    #[test]
    fn pp_definitions_hold() {
        for k in 3..=5 {
            for d in pp_definitions(k).unwrap() {
                assert_eq!(evaluate_boolean(&d.formula, &d.over).unwrap(), d.defines, "{}", d.name);
            }
        }
    }
}
