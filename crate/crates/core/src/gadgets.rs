//! Commutativity gadgets, q-definitions and the certificates attached to them.
//!
//! Conditions (c1) and (q1) are decided exactly by classical extension search. A quantum
//! function at the distinguished vertices that satisfies the relevant commutation is a direct
//! sum of classical maps; extending each summand classically and summing the extensions gives
//! the quantum extension on the same space, and dimension 1 shows the classical condition is
//! necessary. Conditions (c2) and (q2) quantify over all dimensions and are only ever refuted
//! by a witness or certified by a known result; everything else is reported as inconclusive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::assembly::Assembly;
use crate::catalog::{flags_for, Flag};
use crate::error::{invalid, Error, Result};
use crate::hom::{automorphisms, hom_search_pinned, ClassicalHom};
use crate::linalg::Matrix;
use crate::qhom::{verify, Mode, QHomCandidate};
use crate::scalar::Scalar;
use crate::structures::{
    checked_pow, direct_power_capped, is_tree, power_digits, power_index, GadgetSpec, Structure, Tuple,
};

/// Default bound on the size of constructed gadgets.
pub const GADGET_CAP: usize = 10_000;

/// Largest number of tuples `A^r \ S` scanned for classical escapes.
const ESCAPE_SCAN_CAP: usize = 100_000;

/// A gadget with two distinct distinguished vertices `u`, `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommGadget {
    gadget: GadgetSpec,
}

impl CommGadget {
    pub fn new(gadget: GadgetSpec) -> Result<Self> {
        if gadget.arity() != 2 {
            return Err(invalid(format!(
                "commutativity gadget needs 2 distinguished vertices, got {}",
                gadget.arity()
            )));
        }
        if gadget.distinguished[0] == gadget.distinguished[1] {
            return Err(invalid("commutativity gadget needs u != v"));
        }
        Ok(CommGadget { gadget })
    }

    pub fn from_parts(structure: Structure, u: usize, v: usize) -> Result<Self> {
        Self::new(GadgetSpec::new(structure, vec![u, v])?)
    }

    pub fn gadget(&self) -> &GadgetSpec {
        &self.gadget
    }

    pub fn structure(&self) -> &Structure {
        &self.gadget.structure
    }

    pub fn u(&self) -> usize {
        self.gadget.distinguished[0]
    }

    pub fn v(&self) -> usize {
        self.gadget.distinguished[1]
    }
}

/// Coordinate pairs `(aᵢ, bᵢ)`; an `n`-ary polymorphism is evaluated at `a⃗` and `b⃗`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pairs: Vec<(usize, usize)>,
}

impl GeneratorSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("generator set must be nonempty"));
        }
        Ok(GeneratorSet { pairs })
    }

    /// All `|A|²` pairs, in lexicographic order.
    pub fn all_pairs(size: usize) -> Result<Self> {
        Self::new((0..size).flat_map(|c| (0..size).map(move |d| (c, d))).collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn left(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn right(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

/// How a pair `(c, d)` is reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorWitness {
    Projection {
        coordinate: usize,
    },
    /// `σ ∘ πᵢ` for an automorphism `σ`.
    TwistedProjection {
        coordinate: usize,
        automorphism: ClassicalHom,
    },
    Polymorphism(ClassicalHom),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorCheck {
    pub witnesses: Vec<((usize, usize), GeneratorWitness)>,
    pub missing: Vec<(usize, usize)>,
}

impl GeneratorCheck {
    pub fn holds(&self) -> bool {
        self.missing.is_empty()
    }
}

/// For every `(c, d) ∈ A²`, looks for a polymorphism `g` with `g(a⃗) = c` and `g(b⃗) = d`.
///
/// Projections and automorphism-twisted projections are tried first; the remaining pairs are
/// searched on `Aⁿ`, which must then fit under [`GADGET_CAP`].
pub fn check_generators(a: &Structure, gs: &GeneratorSet) -> Result<GeneratorCheck> {
    if let Some(&(x, y)) = gs.pairs.iter().find(|p| p.0 >= a.size() || p.1 >= a.size()) {
        return Err(invalid(format!("generator pair ({x}, {y}) outside the domain")));
    }
    let auts = automorphisms(a)?;
    let mut witnesses = Vec::new();
    let mut open = Vec::new();
    for c in 0..a.size() {
        for d in 0..a.size() {
            if let Some(i) = gs.pairs.iter().position(|&p| p == (c, d)) {
                witnesses.push(((c, d), GeneratorWitness::Projection { coordinate: i }));
                continue;
            }
            let twisted = gs.pairs.iter().enumerate().find_map(|(i, &(x, y))| {
                auts.iter()
                    .find(|s| s.apply(x) == c && s.apply(y) == d)
                    .map(|s| GeneratorWitness::TwistedProjection { coordinate: i, automorphism: s.clone() })
            });
            match twisted {
                Some(w) => witnesses.push(((c, d), w)),
                None => open.push((c, d)),
            }
        }
    }
    let mut missing = Vec::new();
    if !open.is_empty() {
        let power = direct_power_capped(a, gs.n(), GADGET_CAP)?;
        let u = power_index(&gs.left(), a.size());
        let v = power_index(&gs.right(), a.size());
        for (c, d) in open {
            match hom_search_pinned(&power, a, &[(u, c), (v, d)])? {
                Some(g) => witnesses.push(((c, d), GeneratorWitness::Polymorphism(g))),
                None => missing.push((c, d)),
            }
        }
        witnesses.sort_by_key(|w| w.0);
    }
    Ok(GeneratorCheck { witnesses, missing })
}

/// `Aⁿ` with `u = (a₁…aₙ)` and `v = (b₁…bₙ)`.
pub fn build_power_comm_gadget(a: &Structure, gs: &GeneratorSet, cap: usize) -> Result<CommGadget> {
    if checked_pow(a.size(), gs.n()).is_none_or(|s| s > cap) {
        return Err(Error::SizeCap(format!("{}^{} exceeds gadget cap {cap}", a.size(), gs.n())));
    }
    let check = check_generators(a, gs)?;
    if let Some(&(c, d)) = check.missing.first() {
        return Err(Error::Precondition(format!("no polymorphism reaches ({}, {})", a.label(c), a.label(d))));
    }
    let power = direct_power_capped(a, gs.n(), cap)?;
    CommGadget::from_parts(power, power_index(&gs.left(), a.size()), power_index(&gs.right(), a.size()))
}

/// Tuples whose pinned extension search failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionCheck {
    pub checked: usize,
    pub failures: Vec<Tuple>,
}

impl ExtensionCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn extension_check(g: &Structure, dist: &[usize], a: &Structure, tuples: Vec<Tuple>) -> Result<ExtensionCheck> {
    g.check_same_signature(a)?;
    let results: Vec<Result<Option<Tuple>>> = tuples
        .par_iter()
        .map(|t| {
            let pins: Vec<(usize, usize)> = dist.iter().copied().zip(t.iter().copied()).collect();
            Ok(hom_search_pinned(g, a, &pins)?.is_none().then(|| t.clone()))
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(ExtensionCheck { checked: tuples.len(), failures })
}

/// (c1): every pair `(a, b) ∈ A²` extends to a homomorphism `G → A` with `u ↦ a`, `v ↦ b`.
pub fn check_c1(g: &CommGadget, a: &Structure) -> Result<ExtensionCheck> {
    let n = a.size();
    let pairs = (0..n).flat_map(|x| (0..n).map(move |y| vec![x, y])).collect();
    extension_check(g.structure(), &g.gadget.distinguished, a, pairs)
}

/// (c1′), where only witnesses with `Q_{u,a} = Q_{v,b} = I` are needed. In dimension 1 this is
/// the same classical extension question, so the answer coincides with [`check_c1`].
pub fn check_c1_prime(g: &CommGadget, a: &Structure) -> Result<ExtensionCheck> {
    check_c1(g, a)
}

/// (q1): every tuple of `S` extends to a homomorphism `G → A` pinned at the distinguished vertices.
pub fn check_q1(g: &GadgetSpec, a: &Structure, s: &BTreeSet<Tuple>) -> Result<ExtensionCheck> {
    check_arity(g, a, s)?;
    extension_check(&g.structure, &g.distinguished, a, s.iter().cloned().collect())
}

fn check_arity(g: &GadgetSpec, a: &Structure, s: &BTreeSet<Tuple>) -> Result<()> {
    if let Some(t) = s.iter().find(|t| t.len() != g.arity()) {
        return Err(invalid(format!("tuple of length {} for a gadget of arity {}", t.len(), g.arity())));
    }
    if s.iter().flatten().any(|&x| x >= a.size()) {
        return Err(invalid("relation tuple outside the domain"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CertificateKind {
    /// Decided by an exact finite computation.
    ClassicalExact,
    TreeBacked,
    TheoremBacked,
    WitnessRefuted,
    Inconclusive,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::ClassicalExact => "classical-exact",
            CertificateKind::TreeBacked => "tree-backed",
            CertificateKind::TheoremBacked => "theorem-backed",
            CertificateKind::WitnessRefuted => "witness-refuted",
            CertificateKind::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            CertificateKind::ClassicalExact,
            CertificateKind::TreeBacked,
            CertificateKind::TheoremBacked,
            CertificateKind::WitnessRefuted,
            CertificateKind::Inconclusive,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    fn strength(self) -> u8 {
        match self {
            CertificateKind::Inconclusive => 0,
            CertificateKind::WitnessRefuted => 2,
            _ => 1,
        }
    }

    /// The condition is known to hold.
    pub fn is_pass(self) -> bool {
        self.strength() == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// Theorem flags backing the verdict.
    pub tags: Vec<String>,
    pub detail: String,
}

impl Certificate {
    pub fn new(kind: CertificateKind, detail: impl Into<String>) -> Self {
        Certificate { kind, tags: Vec::new(), detail: detail.into() }
    }

    pub fn inconclusive(detail: impl Into<String>) -> Self {
        Self::new(CertificateKind::Inconclusive, detail)
    }

    pub fn refuted(detail: impl Into<String>) -> Self {
        Self::new(CertificateKind::WitnessRefuted, detail)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tags.push(tag.into());
        self
    }

    /// Refutations dominate, then passes, then inconclusive; ties keep `self`.
    pub fn merge(self, other: Certificate) -> Certificate {
        if other.kind.strength() > self.kind.strength() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if !self.tags.is_empty() {
            write!(f, " [{}]", self.tags.join(", "))?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Append-only record of verdicts keyed by (gadget, structure, condition).
#[derive(Clone, Debug, Default)]
pub struct CertificateStore {
    entries: BTreeMap<(String, String, String), Certificate>,
}

impl CertificateStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Merges into any existing verdict and returns the stored one.
    pub fn record(&mut self, gadget: &str, structure: &str, condition: &str, cert: Certificate) -> &Certificate {
        let key = (gadget.to_string(), structure.to_string(), condition.to_string());
        let merged = match self.entries.remove(&key) {
            Some(old) => old.merge(cert),
            None => cert,
        };
        self.entries.entry(key).or_insert(merged)
    }

    pub fn get(&self, gadget: &str, structure: &str, condition: &str) -> Option<&Certificate> {
        self.entries.get(&(gadget.to_string(), structure.to_string(), condition.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String, String), &Certificate)> {
        self.entries.iter()
    }
}

fn check_candidates<T: Scalar>(
    g: &Structure,
    a: &Structure,
    candidates: &[QHomCandidate<T>],
    mode: Mode,
) -> Result<()> {
    for (i, c) in candidates.iter().enumerate() {
        if c.source != *g || c.target != *a {
            return Err(Error::Precondition(format!("candidate {i} is not a map {} => {}", g.name(), a.name())));
        }
        let c = c.clone().with_mode(mode);
        if !verify(&c).passed() {
            return Err(Error::Precondition(format!("candidate {i} is not a {} quantum homomorphism", mode.name())));
        }
    }
    Ok(())
}

fn flag_for(mode: Mode) -> Flag {
    match mode {
        Mode::Oracular => Flag::QpolEqQcpol,
        Mode::NonOracular => Flag::QnopolEqQcpol,
    }
}

/// The generator set `G` is the power of, if `G = Aⁿ` with generating `u`, `v`.
pub fn generator_power_of(g: &CommGadget, a: &Structure) -> Result<Option<GeneratorSet>> {
    let (m, size) = (a.size(), g.structure().size());
    if m < 2 {
        return Ok(None);
    }
    let Some(n) = (1..=64).find(|&n| checked_pow(m, n) == Some(size)) else {
        return Ok(None);
    };
    let power = direct_power_capped(a, n, GADGET_CAP)?;
    if !g.structure().same_shape(&power) {
        return Ok(None);
    }
    let pairs = power_digits(g.u(), m, n).into_iter().zip(power_digits(g.v(), m, n)).collect();
    let gs = GeneratorSet::new(pairs)?;
    Ok(check_generators(a, &gs)?.holds().then_some(gs))
}

/// (c2): commutation of `Q_{u,a}` and `Q_{v,b}` for every quantum homomorphism `G → A`.
///
/// Candidates must verify in `mode`; any non-commuting pair refutes. In oracular mode adjacent
/// `u`, `v` commute by definition. Otherwise a pass needs a structure flag for `mode` and `G`
/// being a generator power.
pub fn check_c2<T: Scalar>(
    g: &CommGadget,
    a: &Structure,
    candidates: &[QHomCandidate<T>],
    mode: Mode,
) -> Result<Certificate> {
    check_candidates(g.structure(), a, candidates, mode)?;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(w) = c.qf.commutation_witness_at(g.u(), g.v()) {
            return Ok(Certificate::refuted(format!(
                "candidate {i}: [Q({},{}), Q({},{})] != 0",
                g.structure().label(w.a),
                a.label(w.b),
                g.structure().label(w.a2),
                a.label(w.b2)
            )));
        }
    }
    if mode == Mode::Oracular && g.structure().gaifman_adjacency()[g.u()].contains(&g.v()) {
        return Ok(Certificate::new(CertificateKind::ClassicalExact, "u and v are adjacent"));
    }
    let flag = flag_for(mode);
    if flags_for(a).contains(&flag) {
        if let Some(gs) = generator_power_of(g, a)? {
            return Ok(Certificate::new(
                CertificateKind::TheoremBacked,
                format!("{} is the generator power of {} with n = {}", g.structure().name(), a.name(), gs.n()),
            )
            .with_tag(flag.tag()));
        }
        return Ok(Certificate::inconclusive(format!(
            "{} is flagged but the gadget is not a generator power",
            a.name()
        )));
    }
    Ok(Certificate::inconclusive(format!("no witness and no {} result for {}", flag.tag(), a.name())))
}

/// A homomorphism `G → A` whose restriction to the distinguished vertices leaves `S`.
/// `None` when no such map exists or `A^r \ S` is too large to scan.
pub fn classical_escape(g: &GadgetSpec, a: &Structure, s: &BTreeSet<Tuple>) -> Result<Option<(Tuple, ClassicalHom)>> {
    check_arity(g, a, s)?;
    let r = g.arity();
    let total = checked_pow(a.size(), r).filter(|&t| t <= ESCAPE_SCAN_CAP);
    if total.is_none() {
        return Ok(None);
    }
    for idx in 0..total.unwrap_or(0) {
        let t = power_digits(idx, a.size(), r);
        if s.contains(&t) {
            continue;
        }
        let pins: Vec<(usize, usize)> = g.distinguished.iter().copied().zip(t.iter().copied()).collect();
        if let Some(h) = hom_search_pinned(&g.structure, a, &pins)? {
            return Ok(Some((t, h)));
        }
    }
    Ok(None)
}

/// First tuple outside `S` with `Q_{g₁,t₁}⋯Q_{g_r,t_r} ≠ 0`.
fn restriction_escape<T: Scalar>(c: &QHomCandidate<T>, dist: &[usize], s: &BTreeSet<Tuple>) -> Option<Tuple> {
    fn go<T: Scalar>(
        c: &QHomCandidate<T>,
        dist: &[usize],
        s: &BTreeSet<Tuple>,
        prefix: &mut Tuple,
        acc: &Matrix<T>,
    ) -> Option<Tuple> {
        if prefix.len() == dist.len() {
            return (!s.contains(prefix)).then(|| prefix.clone());
        }
        for b in 0..c.target.size() {
            let next = acc * c.qf.proj(dist[prefix.len()], b);
            if next.is_zero() {
                continue;
            }
            prefix.push(b);
            let found = go(c, dist, s, prefix, &next);
            prefix.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    go(c, dist, s, &mut Vec::new(), &Matrix::identity(c.qf.dim()))
}

/// (q2): every quantum homomorphism `G → A` restricts to one from the one-tuple structure into `(A; S)`.
///
/// Refutations come from a classical escape or a supplied candidate; a non-oracular tree gadget
/// of arity at most 2 passes; an inherited pass is kept.
pub fn check_q2<T: Scalar>(
    g: &GadgetSpec,
    a: &Structure,
    s: &BTreeSet<Tuple>,
    candidates: &[QHomCandidate<T>],
    mode: Mode,
    inherited: Option<&Certificate>,
) -> Result<Certificate> {
    check_arity(g, a, s)?;
    check_candidates(&g.structure, a, candidates, mode)?;
    if let Some((t, _)) = classical_escape(g, a, s)? {
        let shown: Vec<&str> = t.iter().map(|&x| a.label(x)).collect();
        return Ok(Certificate::refuted(format!(
            "classical homomorphism restricts to ({}) outside S",
            shown.join(" ")
        )));
    }
    let dist = &g.distinguished;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(t) = restriction_escape(c, dist, s) {
            let shown: Vec<&str> = t.iter().map(|&x| a.label(x)).collect();
            return Ok(Certificate::refuted(format!("candidate {i} restricts to ({}) outside S", shown.join(" "))));
        }
        if mode == Mode::Oracular {
            for p in 0..dist.len() {
                for q in p + 1..dist.len() {
                    if let Some(w) = c.qf.commutation_witness_at(dist[p], dist[q]) {
                        return Ok(Certificate::refuted(format!(
                            "candidate {i}: distinguished {} and {} do not commute (outcomes {}, {})",
                            g.structure.label(w.a),
                            g.structure.label(w.a2),
                            a.label(w.b),
                            a.label(w.b2)
                        )));
                    }
                }
            }
        }
    }
    let escape_scanned = checked_pow(a.size(), g.arity()).is_some_and(|t| t <= ESCAPE_SCAN_CAP);
    if mode == Mode::NonOracular && g.arity() <= 2 && escape_scanned && is_tree(&g.structure) {
        return Ok(Certificate::new(CertificateKind::TreeBacked, format!("{} is a tree", g.structure.name()))
            .with_tag(Flag::Tree.tag()));
    }
    if let Some(c) = inherited {
        if c.kind.is_pass() {
            return Ok(c.clone());
        }
    }
    Ok(Certificate::inconclusive(format!("no witness and no tree or theorem for {}", g.structure.name())))
}

/// A q-definition together with the verdict on its (q2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QDefinition {
    pub gadget: GadgetSpec,
    pub certificate: Certificate,
}

/// Glues a copy of `H` onto every unordered pair of distinct vertices of the classical gadget `G`.
pub fn build_qdef(g: &GadgetSpec, h: &CommGadget, a: &Structure, s: &BTreeSet<Tuple>) -> Result<QDefinition> {
    build_qdef_capped(g, h, a, s, GADGET_CAP)
}

pub fn build_qdef_capped(
    g: &GadgetSpec,
    h: &CommGadget,
    a: &Structure,
    s: &BTreeSet<Tuple>,
    cap: usize,
) -> Result<QDefinition> {
    let gs = &g.structure;
    gs.check_same_signature(h.structure())?;
    let n = gs.size();
    let size = n + n * n.saturating_sub(1) / 2 * (h.structure().size() - 2);
    if size > cap {
        return Err(Error::SizeCap(format!("q-definition would have {size} > {cap} vertices")));
    }
    let q1 = check_q1(g, a, s)?;
    if let Some(t) = q1.failures.first() {
        return Err(Error::Precondition(format!("tuple {t:?} of S does not extend to {}", gs.name())));
    }
    if let Some((t, _)) = classical_escape(g, a, s)? {
        return Err(Error::Precondition(format!("{} admits a homomorphism restricting to {t:?} outside S", gs.name())));
    }
    let mut asm: Assembly<()> = Assembly::new(gs.signature().clone());
    asm.add_copy(gs, &[], |v| gs.label(v).to_string(), |_| ());
    let hs = h.structure();
    for x in 0..n {
        for y in x + 1..n {
            let tag = format!("h:{}-{}", gs.label(x), gs.label(y));
            asm.add_copy(hs, &[(h.u(), x), (h.v(), y)], |l| format!("{tag}:{}", hs.label(l)), |_| ());
        }
    }
    let (structure, _, map) = asm.finish(&format!("{}+{}", gs.name(), hs.name()))?;
    let distinguished = g.distinguished.iter().map(|&d| map[d]).collect();
    let gadget = GadgetSpec::new(structure, distinguished)?;

    let c1 = check_c1(h, a)?;
    let certificate = if !c1.holds() {
        Certificate::inconclusive(format!("{} fails c1 over {}", hs.name(), a.name()))
    } else {
        let c2 = check_c2::<num_rational::BigRational>(h, a, &[], Mode::Oracular)?;
        if c2.kind.is_pass() {
            Certificate { kind: c2.kind, tags: c2.tags, detail: format!("classical gadget glued with {}", hs.name()) }
        } else {
            Certificate::inconclusive(format!("c2 for {} is {}", hs.name(), c2.kind.name()))
        }
    };
    Ok(QDefinition { gadget, certificate })
}

/// A gadget question for the non-oracular checks.
#[derive(Clone, Copy, Debug)]
pub enum GadgetQuery<'a> {
    Comm(&'a CommGadget),
    QDef { gadget: &'a GadgetSpec, relation: &'a BTreeSet<Tuple> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantReport {
    /// noc1 or noq1; the classical extension question is the same as in the oracular case.
    pub extension: ExtensionCheck,
    /// noc2 or noq2.
    pub certificate: Certificate,
}

pub fn check_nonoracular_variants<T: Scalar>(
    query: GadgetQuery<'_>,
    a: &Structure,
    candidates: &[QHomCandidate<T>],
    inherited: Option<&Certificate>,
) -> Result<VariantReport> {
    match query {
        GadgetQuery::Comm(g) => Ok(VariantReport {
            extension: check_c1(g, a)?,
            certificate: check_c2(g, a, candidates, Mode::NonOracular)?,
        }),
        GadgetQuery::QDef { gadget, relation } => Ok(VariantReport {
            extension: check_q1(gadget, a, relation)?,
            certificate: check_q2(gadget, a, relation, candidates, Mode::NonOracular, inherited)?,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::k2_contextual_poly;
    use crate::structures::direct_power;
    use num_rational::BigRational as Q;

    fn neq(m: usize) -> BTreeSet<Tuple> {
        (0..m).flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| vec![a, b])).collect()
    }

    fn k3_gadget() -> CommGadget {
        build_power_comm_gadget(&Structure::clique(3), &GeneratorSet::new(vec![(0, 0), (0, 1)]).unwrap(), GADGET_CAP)
            .unwrap()
    }

    #[test]
    fn generators_of_k3() {
        let k3 = Structure::clique(3);
        assert!(check_generators(&k3, &GeneratorSet::new(vec![(0, 0), (0, 1)]).unwrap()).unwrap().holds());
        let single = check_generators(&k3, &GeneratorSet::new(vec![(0, 0)]).unwrap()).unwrap();
        assert!(single.missing.contains(&(0, 1)));
        let c5 = Structure::cycle(5);
        assert!(check_generators(&c5, &GeneratorSet::all_pairs(5).unwrap()).unwrap().holds());
        assert!(matches!(
            build_power_comm_gadget(&c5, &GeneratorSet::all_pairs(5).unwrap(), GADGET_CAP),
            Err(Error::SizeCap(_))
        ));
    }

    #[test]
    fn k3_power_gadget() {
        let g = k3_gadget();
        assert_eq!((g.structure().size(), g.u(), g.v()), (9, 0, 1));
        let c1 = check_c1(&g, &Structure::clique(3)).unwrap();
        assert!(c1.holds());
        assert_eq!(c1.checked, 9);
        let c2 = check_c2::<Q>(&g, &Structure::clique(3), &[], Mode::Oracular).unwrap();
        assert_eq!(c2.kind, CertificateKind::TheoremBacked);
        assert_eq!(c2.tags, vec!["qpol-eq-qcpol".to_string()]);
    }

    #[test]
    fn single_edge_fails_c1() {
        let g = CommGadget::from_parts(Structure::clique(2), 0, 1).unwrap();
        let c1 = check_c1(&g, &Structure::clique(2)).unwrap();
        assert_eq!(c1.failures, vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(check_c1_prime(&g, &Structure::clique(2)).unwrap(), c1);
    }

    #[test]
    fn k2_gadget_refuted_and_unflagged_inconclusive() {
        let k2 = Structure::clique(2);
        let g = CommGadget::from_parts(direct_power(&k2, 2).unwrap(), 0, 1).unwrap();
        let cert = check_c2(&g, &k2, &[k2_contextual_poly().unwrap()], Mode::Oracular).unwrap();
        assert_eq!(cert.kind, CertificateKind::WitnessRefuted);
        let c4 = Structure::cycle(4);
        let g4 = CommGadget::from_parts(direct_power(&c4, 2).unwrap(), 0, 1).unwrap();
        assert_eq!(check_c2::<Q>(&g4, &c4, &[], Mode::Oracular).unwrap().kind, CertificateKind::Inconclusive);
    }

    #[test]
    fn unverified_candidate_is_rejected() {
        let k2 = Structure::clique(2);
        let g = CommGadget::from_parts(direct_power(&k2, 2).unwrap(), 0, 1).unwrap();
        let bad = k2_contextual_poly().unwrap();
        let swapped = bad.qf.with_pvm(0, vec![bad.qf.proj(0, 1).clone(), bad.qf.proj(0, 0).clone()]).unwrap();
        let bad = QHomCandidate::new(bad.source.clone(), bad.target.clone(), swapped, Mode::Oracular).unwrap();
        assert!(matches!(check_c2(&g, &k2, &[bad], Mode::Oracular), Err(Error::Precondition(_))));
    }

    #[test]
    fn path_over_c5() {
        let c5 = Structure::cycle(5);
        let p = GadgetSpec::new(Structure::directed_path(3), vec![0, 3]).unwrap();
        assert!(check_q1(&p, &c5, &neq(5)).unwrap().holds());
        let all: BTreeSet<Tuple> = (0..5).flat_map(|a| (0..5).map(move |b| vec![a, b])).collect();
        let q1 = check_q1(&p, &c5, &all).unwrap();
        assert_eq!(q1.failures, (0..5).map(|a| vec![a, a]).collect::<Vec<_>>());
        let q2 = check_q2::<Q>(&p, &c5, &neq(5), &[], Mode::NonOracular, None).unwrap();
        assert_eq!(q2.kind, CertificateKind::TreeBacked);
        let q2o = check_q2::<Q>(&p, &c5, &neq(5), &[], Mode::Oracular, None).unwrap();
        assert_eq!(q2o.kind, CertificateKind::Inconclusive);
    }

    #[test]
    fn identity_gadget_defines_its_relation() {
        let c5 = Structure::cycle(5);
        let id = GadgetSpec::identity(c5.signature(), 0);
        assert!(check_q1(&id, &c5, c5.relation(0)).unwrap().holds());
        assert!(classical_escape(&id, &c5, c5.relation(0)).unwrap().is_none());
    }

    #[test]
    fn apex_corruption_is_refuted() {
        // 0 → 1 → 2, apex 4 with 4 → 2 and 4 → 3: the endpoints are 4 apart and may coincide.
        let s = Structure::digraph("P3*", 5, &[(0, 1), (1, 2), (4, 2), (4, 3)]).unwrap();
        let g = GadgetSpec::new(s, vec![0, 3]).unwrap();
        let c5 = Structure::cycle(5);
        let cert = check_q2::<Q>(&g, &c5, &neq(5), &[], Mode::NonOracular, None).unwrap();
        assert_eq!(cert.kind, CertificateKind::WitnessRefuted);
    }

    #[test]
    fn qdef_from_edge_and_k3_gadget() {
        let k3 = Structure::clique(3);
        let edge = GadgetSpec::new(Structure::clique(2), vec![0, 1]).unwrap();
        let q = build_qdef(&edge, &k3_gadget(), &k3, &neq(3)).unwrap();
        assert_eq!(q.gadget.structure.size(), 9);
        assert_eq!(q.certificate.kind, CertificateKind::TheoremBacked);
        assert!(check_q1(&q.gadget, &k3, &neq(3)).unwrap().holds());
        let inherited = check_q2::<Q>(&q.gadget, &k3, &neq(3), &[], Mode::Oracular, Some(&q.certificate)).unwrap();
        assert_eq!(inherited.kind, CertificateKind::TheoremBacked);
    }

    #[test]
    fn qdef_size_formula() {
        let k3 = Structure::clique(3);
        let p = GadgetSpec::new(Structure::directed_path(3), vec![0, 3]).unwrap();
        // a 4-vertex path over K3 defines all pairs
        let all: BTreeSet<Tuple> = (0..3).flat_map(|a| (0..3).map(move |b| vec![a, b])).collect();
        let q = build_qdef(&p, &k3_gadget(), &k3, &all).unwrap();
        assert_eq!(q.gadget.structure.size(), 4 + 6 * 7);
        assert!(check_q1(&q.gadget, &k3, &all).unwrap().holds());
        let bad = GadgetSpec::new(Structure::directed_path(1), vec![0, 1]).unwrap();
        assert!(matches!(build_qdef(&bad, &k3_gadget(), &k3, &all), Err(Error::Precondition(_))));
    }

    #[test]
    fn certificates_are_monotone() {
        let refuted = Certificate::refuted("w");
        let theorem = Certificate::new(CertificateKind::TheoremBacked, "t");
        assert_eq!(refuted.clone().merge(theorem.clone()), refuted);
        assert_eq!(theorem.clone().merge(refuted.clone()), refuted);
        assert_eq!(Certificate::inconclusive("").merge(theorem.clone()), theorem);
        let mut store = CertificateStore::new();
        store.record("G", "A", "c2", refuted.clone());
        assert_eq!(store.record("G", "A", "c2", theorem), &refuted);
    }

    #[test]
    fn nonoracular_variants_for_o100() {
        let o = crate::boolean::o_t("100").unwrap();
        let g = build_power_comm_gadget(&o, &GeneratorSet::all_pairs(2).unwrap(), GADGET_CAP).unwrap();
        let r = check_nonoracular_variants::<Q>(GadgetQuery::Comm(&g), &o, &[], None).unwrap();
        assert!(r.extension.holds());
        assert_eq!(r.certificate.kind, CertificateKind::TheoremBacked);
        assert_eq!(r.certificate.tags, vec!["qnopol-eq-qcpol".to_string()]);
        let c4 = Structure::cycle(4);
        let g4 = CommGadget::from_parts(direct_power(&c4, 2).unwrap(), 0, 1).unwrap();
        let r4 = check_nonoracular_variants::<Q>(GadgetQuery::Comm(&g4), &c4, &[], None).unwrap();
        assert_eq!(r4.certificate.kind, CertificateKind::Inconclusive);
    }
}
