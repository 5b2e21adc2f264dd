//! Finite relational structures.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{invalid, Error, Result};

pub type Tuple = Vec<usize>;

/// Largest domain `direct_power` and `product` will materialize.
pub const MAX_DOMAIN: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(symbols: Vec<(String, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, arity) in &symbols {
            if *arity == 0 {
                return Err(invalid(format!("symbol {name} has arity 0")));
            }
            if !seen.insert(name.as_str()) {
                return Err(invalid(format!("duplicate symbol {name}")));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn single(name: &str, arity: usize) -> Self {
        Signature::new(vec![(name.to_string(), arity)]).expect("one symbol of positive arity")
    }

    /// One binary symbol `E`.
    pub fn graph() -> Self {
        Self::single("E", 2)
    }

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.symbols[i].0
    }

    pub fn arity(&self, i: usize) -> usize {
        self.symbols[i].1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|(n, _)| n == name)
    }

    pub fn is_binary(&self) -> bool {
        self.symbols.iter().all(|&(_, a)| a == 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    name: String,
    signature: Signature,
    labels: Vec<String>,
    relations: Vec<BTreeSet<Tuple>>,
}

/// Label of a tuple of elements in powers and products.
pub fn join_labels<S: AsRef<str>>(parts: &[S]) -> String {
    parts.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(".")
}

impl Structure {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        labels: Vec<String>,
        relations: Vec<BTreeSet<Tuple>>,
    ) -> Result<Self> {
        if relations.len() != signature.len() {
            return Err(Error::SignatureMismatch(format!(
                "{} relations for {} symbols",
                relations.len(),
                signature.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if l.is_empty() {
                return Err(invalid("empty element label"));
            }
            if !seen.insert(l.as_str()) {
                return Err(invalid(format!("duplicate element label {l}")));
            }
        }
        for (i, rel) in relations.iter().enumerate() {
            let arity = signature.arity(i);
            for t in rel {
                if t.len() != arity {
                    return Err(invalid(format!("tuple of length {} in {}/{}", t.len(), signature.name(i), arity)));
                }
                if let Some(&bad) = t.iter().find(|&&e| e >= labels.len()) {
                    return Err(invalid(format!("element index {bad} out of range")));
                }
            }
        }
        Ok(Structure { name: name.into(), signature, labels, relations })
    }

    /// Structure with elements labelled `0..n-1`.
    pub fn numbered(
        name: impl Into<String>,
        signature: Signature,
        n: usize,
        relations: Vec<BTreeSet<Tuple>>,
    ) -> Result<Self> {
        Self::new(name, signature, (0..n).map(|i| i.to_string()).collect(), relations)
    }

    /// A digraph on `0..n-1` with the given edges.
    pub fn digraph(name: impl Into<String>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let rel = edges.iter().map(|&(a, b)| vec![a, b]).collect();
        Self::numbered(name, Signature::graph(), n, vec![rel])
    }

    /// Undirected graph: both orientations of every edge.
    pub fn graph(name: impl Into<String>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let rel = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]).collect();
        Self::numbered(name, Signature::graph(), n, vec![rel])
    }

    pub fn clique(m: usize) -> Self {
        let edges: Vec<_> = (0..m).flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        Self::digraph(format!("K{m}"), m, &edges).expect("valid clique")
    }

    pub fn cycle(m: usize) -> Self {
        let edges: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        Self::graph(format!("C{m}"), m, &edges).expect("valid cycle")
    }

    /// Directed path `0 → 1 → … → len`.
    pub fn directed_path(len: usize) -> Self {
        let edges: Vec<_> = (0..len).map(|i| (i, i + 1)).collect();
        Self::digraph(format!("P{len}"), len + 1, &edges).expect("valid path")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn relation(&self, symbol: usize) -> &BTreeSet<Tuple> {
        &self.relations[symbol]
    }

    pub fn relation_named(&self, name: &str) -> Option<&BTreeSet<Tuple>> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    /// Same relations up to names and labels.
    pub fn same_shape(&self, other: &Structure) -> bool {
        self.size() == other.size()
            && self.signature.symbols.iter().map(|s| s.1).eq(other.signature.symbols.iter().map(|s| s.1))
            && self.relations == other.relations
    }

    pub fn check_same_signature(&self, other: &Structure) -> Result<()> {
        if self.signature != other.signature {
            return Err(Error::SignatureMismatch(format!(
                "{} and {} have different signatures",
                self.name, other.name
            )));
        }
        Ok(())
    }

    /// Substructure induced on `vertices`, in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Structure {
        let mut pos = vec![usize::MAX; self.size()];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .filter(|t| t.iter().all(|&e| pos[e] != usize::MAX))
                    .map(|t| t.iter().map(|&e| pos[e]).collect())
                    .collect()
            })
            .collect();
        Structure {
            name: format!("{}[sub]", self.name),
            signature: self.signature.clone(),
            labels: vertices.iter().map(|&v| self.labels[v].clone()).collect(),
            relations,
        }
    }

    /// Symmetric adjacency of the Gaifman graph.
    pub fn gaifman_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.size()];
        for rel in &self.relations {
            for t in rel {
                for &a in t {
                    for &b in t {
                        if a != b {
                            adj[a].insert(b);
                        }
                    }
                }
            }
        }
        adj
    }

    /// BFS distances from `x` in the Gaifman graph; `None` for unreachable.
    pub fn distances_from(&self, x: usize) -> Vec<Option<usize>> {
        bfs(&self.gaifman_adjacency(), x)
    }

    pub fn is_connected(&self) -> bool {
        self.size() == 0 || self.distances_from(0).iter().all(Option::is_some)
    }
}

fn bfs(adj: &[BTreeSet<usize>], x: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[x] = Some(0);
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

pub(crate) fn checked_pow(base: usize, n: usize) -> Option<usize> {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Index of the tuple `digits` in lexicographic order over `base`.
pub fn power_index(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

/// Inverse of [`power_index`].
pub fn power_digits(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    digits
}

/// Calls `f` on every tuple in `choices[0] × … × choices[k-1]`, lexicographically.
fn for_each_product<T: Clone>(choices: &[Vec<T>], mut f: impl FnMut(&[T])) {
    if choices.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0; choices.len()];
    let mut current: Vec<T> = choices.iter().map(|c| c[0].clone()).collect();
    loop {
        f(&current);
        let mut k = choices.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                current[k] = choices[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            current[k] = choices[k][0].clone();
        }
    }
}

pub fn direct_power(a: &Structure, n: usize) -> Result<Structure> {
    direct_power_capped(a, n, MAX_DOMAIN)
}

/// `Aⁿ`, refusing to build more than `cap` elements.
pub fn direct_power_capped(a: &Structure, n: usize, cap: usize) -> Result<Structure> {
    if n == 0 {
        return Err(invalid("direct power of exponent 0"));
    }
    let size = checked_pow(a.size(), n)
        .filter(|&s| s <= cap)
        .ok_or_else(|| Error::SizeCap(format!("{}^{} exceeds {cap} elements", a.size(), n)))?;
    let base = a.size();
    let labels = (0..size)
        .map(|i| {
            let parts: Vec<&str> = power_digits(i, base, n).iter().map(|&d| a.label(d)).collect();
            join_labels(&parts)
        })
        .collect();
    let relations = a
        .relations
        .iter()
        .enumerate()
        .map(|(s, rel)| {
            let rows: Vec<Tuple> = rel.iter().cloned().collect();
            let choices = vec![rows; n];
            let arity = a.signature.arity(s);
            let mut out = BTreeSet::new();
            for_each_product(&choices, |picked| {
                let t = (0..arity)
                    .map(|p| power_index(&picked.iter().map(|row| row[p]).collect::<Vec<_>>(), base))
                    .collect();
                out.insert(t);
            });
            out
        })
        .collect();
    Ok(Structure { name: format!("{}^{}", a.name, n), signature: a.signature.clone(), labels, relations })
}

/// Categorical product; element `(x, y)` has index `x·|B| + y`.
pub fn product(a: &Structure, b: &Structure) -> Result<Structure> {
    a.check_same_signature(b)?;
    if a.size().checked_mul(b.size()).is_none_or(|s| s > MAX_DOMAIN) {
        return Err(Error::SizeCap("product too large".into()));
    }
    let labels = a.labels.iter().flat_map(|x| b.labels.iter().map(move |y| join_labels(&[x, y]))).collect();
    let relations = a
        .relations
        .iter()
        .zip(&b.relations)
        .map(|(ra, rb)| {
            ra.iter()
                .flat_map(|s| rb.iter().map(move |t| s.iter().zip(t).map(|(&x, &y)| x * b.size() + y).collect()))
                .collect()
        })
        .collect();
    Ok(Structure { name: format!("{}x{}", a.name, b.name), signature: a.signature.clone(), labels, relations })
}

/// Loopless symmetric digraph joining elements that share a tuple.
pub fn gaifman(x: &Structure) -> Structure {
    let edges =
        x.gaifman_adjacency().iter().enumerate().flat_map(|(a, nbrs)| nbrs.iter().map(move |&b| vec![a, b])).collect();
    Structure {
        name: format!("Gaif({})", x.name),
        signature: Signature::graph(),
        labels: x.labels.clone(),
        relations: vec![edges],
    }
}

/// Symmetric closure of a digraph (all binary symbols merged), loops kept.
pub fn undirected_reduct(x: &Structure) -> Result<Structure> {
    if !x.signature.is_binary() {
        return Err(invalid("undirected reduct needs a binary signature"));
    }
    let edges = x.relations.iter().flatten().flat_map(|t| [vec![t[0], t[1]], vec![t[1], t[0]]]).collect();
    Ok(Structure {
        name: format!("{}^u", x.name),
        signature: Signature::graph(),
        labels: x.labels.clone(),
        relations: vec![edges],
    })
}

pub fn distance(x: &Structure, a: usize, b: usize) -> Option<usize> {
    x.distances_from(a)[b]
}

/// Largest pairwise distance, `None` when disconnected.
pub fn diameter(x: &Structure) -> Option<usize> {
    let adj = x.gaifman_adjacency();
    let mut best = 0;
    for v in 0..x.size() {
        for d in bfs(&adj, v) {
            best = best.max(d?);
        }
    }
    Some(best)
}

/// Single-symbol structure `R` on the domain of `a`.
pub fn with_relation(a: &Structure, tuples: BTreeSet<Tuple>) -> Result<Structure> {
    let arity = match tuples.iter().next() {
        Some(t) => t.len(),
        None => 1,
    };
    if tuples.iter().any(|t| t.len() != arity) {
        return Err(invalid("ragged tuple arities"));
    }
    Structure::new(format!("{}_S", a.name), Signature::single("R", arity), a.labels.clone(), vec![tuples])
}

/// Like [`with_relation`], but with an explicit arity so the empty relation keeps it.
pub fn with_relation_of_arity(a: &Structure, arity: usize, tuples: BTreeSet<Tuple>) -> Result<Structure> {
    if arity == 0 {
        return Err(invalid("arity 0"));
    }
    if tuples.iter().any(|t| t.len() != arity) {
        return Err(invalid("ragged tuple arities"));
    }
    Structure::new(format!("{}_S", a.name), Signature::single("R", arity), a.labels.clone(), vec![tuples])
}

/// Forest test on the element/tuple incidence multigraph.
///
/// A tuple that repeats an element contributes a double edge and so a cycle,
/// which matches the counting definition.
pub fn is_tree(x: &Structure) -> bool {
    let n = x.size();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for t in x.relations.iter().flatten() {
        // Each tuple node joins its elements; it closes a cycle as soon as two
        // of them are already connected.
        let mut roots = BTreeSet::new();
        for &e in t {
            if !roots.insert(find(&mut parent, e)) {
                return false;
            }
        }
        let mut it = roots.into_iter();
        if let Some(first) = it.next() {
            for r in it {
                parent[r] = first;
            }
        }
    }
    true
}

/// A structure together with distinguished elements `g₁ … g_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetSpec {
    pub structure: Structure,
    pub distinguished: Vec<usize>,
}

impl GadgetSpec {
    pub fn new(structure: Structure, distinguished: Vec<usize>) -> Result<Self> {
        if distinguished.is_empty() {
            return Err(invalid("gadget needs at least one distinguished element"));
        }
        if let Some(&bad) = distinguished.iter().find(|&&g| g >= structure.size()) {
            return Err(invalid(format!("distinguished index {bad} out of range")));
        }
        Ok(GadgetSpec { structure, distinguished })
    }

    pub fn arity(&self) -> usize {
        self.distinguished.len()
    }

    /// The one-tuple structure on `[r]`: it defines exactly its relation.
    pub fn identity(signature: &Signature, symbol: usize) -> Self {
        let r = signature.arity(symbol);
        let mut relations = vec![BTreeSet::new(); signature.len()];
        relations[symbol].insert((0..r).collect());
        let s = Structure::numbered(format!("R_{}", signature.name(symbol)), signature.clone(), r, relations)
            .expect("valid one-tuple structure");
        GadgetSpec { structure: s, distinguished: (0..r).collect() }
    }
}

/// Primitive positive formula `∃ y⃗ . ⋀ atoms` with free variables `x⃗`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPFormula {
    pub free: Vec<String>,
    pub exists: Vec<String>,
    pub atoms: Vec<(String, Vec<String>)>,
}

impl PPFormula {
    pub fn new(free: &[&str], exists: &[&str], atoms: &[(&str, &[&str])]) -> Self {
        PPFormula {
            free: free.iter().map(|s| s.to_string()).collect(),
            exists: exists.iter().map(|s| s.to_string()).collect(),
            atoms: atoms.iter().map(|(r, vs)| (r.to_string(), vs.iter().map(|s| s.to_string()).collect())).collect(),
        }
    }

    fn variables(&self) -> Vec<&str> {
        self.free.iter().chain(&self.exists).map(String::as_str).collect()
    }

    /// Atoms resolved to symbol indices and variable positions.
    fn resolve(&self, sig: &Signature) -> Result<Vec<(usize, Vec<usize>)>> {
        let vars = self.variables();
        let unique: BTreeSet<&str> = vars.iter().copied().collect();
        if unique.len() != vars.len() {
            return Err(invalid("free and bound variables must be distinct"));
        }
        let pos: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        self.atoms
            .iter()
            .map(|(sym, args)| {
                let s = sig.index_of(sym).ok_or_else(|| invalid(format!("unknown symbol {sym}")))?;
                if sig.arity(s) != args.len() {
                    return Err(invalid(format!("atom {sym} has {} arguments", args.len())));
                }
                let idx = args
                    .iter()
                    .map(|v| pos.get(v.as_str()).copied().ok_or_else(|| invalid(format!("unbound variable {v}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok((s, idx))
            })
            .collect()
    }

    /// The canonical structure of the formula: one element per variable, one tuple per atom.
    pub fn to_gadget(&self, sig: &Signature) -> Result<GadgetSpec> {
        let atoms = self.resolve(sig)?;
        let mut relations = vec![BTreeSet::new(); sig.len()];
        for (s, t) in atoms {
            relations[s].insert(t);
        }
        let labels = self.variables().iter().map(|s| s.to_string()).collect();
        let structure = Structure::new("pp", sig.clone(), labels, relations)?;
        GadgetSpec::new(structure, (0..self.free.len()).collect())
    }

    /// Relation defined in `a`, by direct evaluation of the formula.
    pub fn evaluate(&self, a: &Structure) -> Result<BTreeSet<Tuple>> {
        let atoms = self.resolve(a.signature())?;
        let nf = self.free.len();
        let nvars = nf + self.exists.len();
        let domain: Vec<usize> = (0..a.size()).collect();
        let mut out = BTreeSet::new();
        for_each_product(&vec![domain.clone(); nf], |free| {
            let mut found = false;
            let mut assignment = free.to_vec();
            assignment.resize(nvars, 0);
            let holds = |asg: &[usize]| {
                atoms.iter().all(|(s, vs)| a.relation(*s).contains(&vs.iter().map(|&v| asg[v]).collect::<Vec<_>>()))
            };
            if nvars == nf {
                found = holds(&assignment);
            } else {
                for_each_product(&vec![domain.clone(); nvars - nf], |bound| {
                    if !found {
                        assignment[nf..].copy_from_slice(bound);
                        found = holds(&assignment);
                    }
                });
            }
            if found {
                out.insert(free.to_vec());
            }
        });
        Ok(out)
    }
}

pub fn pp_to_gadget(phi: &PPFormula, sig: &Signature) -> Result<GadgetSpec> {
    phi.to_gadget(sig)
}
