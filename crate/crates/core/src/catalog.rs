//! Built-in structures, gadgets and verified quantum homomorphisms.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::boolean::{build_arity4_contextual, build_b, default_arity4_inputs, o_t, BoolRelation};
use crate::error::{invalid, Error, Result};
use crate::gadgets::{build_power_comm_gadget, GeneratorSet, GADGET_CAP};
use crate::linalg::Matrix;
use crate::qfun::QuantumFunction;
use crate::qhom::{verify, Mode, QHomCandidate};
use crate::structures::{direct_power, GadgetSpec, Structure};

type Q = BigRational;

/// Known results attached to catalog entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    /// Every oracular quantum polymorphism is a direct sum of classical ones.
    QpolEqQcpol,
    /// Same for non-oracular quantum polymorphisms.
    QnopolEqQcpol,
    /// The gadget is a tree, so it is a non-oracular q-definition of what it defines.
    Tree,
    /// Some quantum polymorphism is contextual; no commutativity gadget exists.
    HasContextualPolymorphisms,
}

impl Flag {
    pub fn tag(self) -> &'static str {
        match self {
            Flag::QpolEqQcpol => "qpol-eq-qcpol",
            Flag::QnopolEqQcpol => "qnopol-eq-qcpol",
            Flag::Tree => "tree",
            Flag::HasContextualPolymorphisms => "has-contextual-polymorphisms",
        }
    }

    pub fn parse(s: &str) -> Option<Flag> {
        [Flag::QpolEqQcpol, Flag::QnopolEqQcpol, Flag::Tree, Flag::HasContextualPolymorphisms]
            .into_iter()
            .find(|f| f.tag() == s)
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Neighbourhoods of a single-symbol, symmetric, loopless binary structure.
fn simple_graph(a: &Structure) -> Option<Vec<BTreeSet<usize>>> {
    if a.signature().len() != 1 || a.signature().arity(0) != 2 {
        return None;
    }
    let rel = a.relation(0);
    let mut adj = vec![BTreeSet::new(); a.size()];
    for t in rel {
        if t[0] == t[1] || !rel.contains(&vec![t[1], t[0]]) {
            return None;
        }
        adj[t[0]].insert(t[1]);
    }
    Some(adj)
}

fn as_boolean_relation(a: &Structure) -> Option<BoolRelation> {
    if a.size() != 2 || a.signature().len() != 1 {
        return None;
    }
    let k = a.signature().arity(0);
    if k > 31 {
        return None;
    }
    let bits = a.relation(0).iter().map(|t| t.iter().fold(0u32, |acc, &x| acc << 1 | x as u32));
    BoolRelation::new(k, bits).ok()
}

/// Flags recognised from the shape of `a`, independent of labels.
///
/// Cliques `K_m` with `m ≥ 3`, odd cycles and Boolean `O_t` of arity at least 3 have all quantum
/// polymorphisms in the quantum closure. For `O_t` every translate is covered; `t` of co-weight
/// one reduces to weight one by swapping 0 and 1.
pub fn flags_for(a: &Structure) -> BTreeSet<Flag> {
    let mut flags = BTreeSet::new();
    if let Some(adj) = simple_graph(a) {
        let m = a.size();
        let complete = adj.iter().all(|n| n.len() + 1 == m);
        if complete && m >= 3 {
            flags.insert(Flag::QpolEqQcpol);
        }
        if complete && m == 2 {
            flags.insert(Flag::HasContextualPolymorphisms);
        }
        let odd_cycle = m >= 3 && m % 2 == 1 && adj.iter().all(|n| n.len() == 2) && a.is_connected();
        if odd_cycle {
            flags.insert(Flag::QpolEqQcpol);
            flags.insert(Flag::QnopolEqQcpol);
        }
    }
    if let Some(r) = as_boolean_relation(a) {
        if r.arity() >= 3 && r.classify_translate().is_some() {
            flags.insert(Flag::QpolEqQcpol);
            flags.insert(Flag::QnopolEqQcpol);
        }
    }
    if a.same_shape(&build_b()) {
        flags.insert(Flag::HasContextualPolymorphisms);
    }
    flags
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Structure(Structure),
    Gadget(GadgetSpec),
    Candidate(QHomCandidate<Q>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub payload: Payload,
    pub flags: BTreeSet<Flag>,
}

/// Entry templates with a one-line description.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("clique(m)", "complete graph K_m"),
        ("cycle(m)", "undirected cycle C_m"),
        ("o_t(k,t)", "Boolean structure with the translate of 1-in-k by the bit string t"),
        ("b_structure", "Boolean structure with the three binary relations S00, S11, S10"),
        ("k2_contextual_poly", "contextual binary quantum polymorphism of K_2, dimension 2"),
        ("c7_to_c5", "contextual quantum homomorphism C_7 => C_5, dimension 2"),
        ("b4_contextual", "contextual 4-ary quantum polymorphism of b_structure, dimension 2"),
        ("km_power_gadget(m,n)", "K_m^n with u = 0...0 and v = 0 1...1"),
        ("path_gadget(l)", "directed path of length l with its endpoints distinguished"),
        ("cycle_power_gadget(m)", "C_m^((m+1)/2) with u = 0...0 and v = 0 1 ... (m-1)/2"),
    ]
}

/// Concrete names covering every template, as used by `catalog export --all` and the tests.
pub fn default_names() -> Vec<&'static str> {
    vec![
        "clique(2)",
        "clique(3)",
        "clique(4)",
        "cycle(4)",
        "cycle(5)",
        "cycle(7)",
        "o_t(3,100)",
        "o_t(4,1100)",
        "b_structure",
        "k2_contextual_poly",
        "c7_to_c5",
        "b4_contextual",
        "km_power_gadget(3,2)",
        "path_gadget(3)",
        "cycle_power_gadget(5)",
    ]
}

fn parse_name(name: &str) -> Result<(&str, Vec<&str>)> {
    let name = name.trim();
    match name.find('(') {
        None => Ok((name, Vec::new())),
        Some(open) => {
            let inner = name[open + 1..].strip_suffix(')').ok_or_else(|| Error::UnknownEntry(name.to_string()))?;
            Ok((&name[..open], inner.split(',').map(str::trim).collect()))
        }
    }
}

fn number(s: &str, name: &str) -> Result<usize> {
    s.parse().map_err(|_| invalid(format!("`{s}` is not a number in {name}")))
}

/// Looks up an entry such as `clique(4)` or `c7_to_c5`. Candidates are re-verified.
pub fn get(name: &str) -> Result<CatalogEntry> {
    let (base, params) = parse_name(name)?;
    let unknown = || Error::UnknownEntry(name.to_string());
    let want = |n: usize| if params.len() == n { Ok(()) } else { Err(unknown()) };
    let payload = match base {
        "clique" => {
            want(1)?;
            let m = number(params[0], name)?;
            if m < 1 {
                return Err(invalid("clique needs m >= 1"));
            }
            Payload::Structure(Structure::clique(m))
        }
        "cycle" => {
            want(1)?;
            let m = number(params[0], name)?;
            if m < 3 {
                return Err(invalid("cycle needs m >= 3"));
            }
            Payload::Structure(Structure::cycle(m))
        }
        "o_t" => {
            want(2)?;
            let k = number(params[0], name)?;
            if params[1].len() != k {
                return Err(invalid(format!("t = {} does not have length {k}", params[1])));
            }
            Payload::Structure(o_t(params[1])?)
        }
        "b_structure" => {
            want(0)?;
            Payload::Structure(build_b())
        }
        "k2_contextual_poly" => {
            want(0)?;
            Payload::Candidate(k2_contextual_poly()?)
        }
        "c7_to_c5" => {
            want(0)?;
            Payload::Candidate(c7_to_c5()?)
        }
        "b4_contextual" => {
            want(0)?;
            Payload::Candidate(b4_contextual()?)
        }
        "km_power_gadget" => {
            want(2)?;
            let (m, n) = (number(params[0], name)?, number(params[1], name)?);
            if m < 2 || n < 2 {
                return Err(invalid("km_power_gadget needs m >= 2 and n >= 2"));
            }
            let pairs = (0..n).map(|i| (0, usize::from(i > 0))).collect();
            let g = build_power_comm_gadget(&Structure::clique(m), &GeneratorSet::new(pairs)?, GADGET_CAP)?;
            Payload::Gadget(g.gadget().clone())
        }
        "path_gadget" => {
            want(1)?;
            let l = number(params[0], name)?;
            if l < 1 {
                return Err(invalid("path_gadget needs l >= 1"));
            }
            Payload::Gadget(path_gadget(l)?)
        }
        "cycle_power_gadget" => {
            want(1)?;
            let m = number(params[0], name)?;
            if m < 3 || m % 2 == 0 {
                return Err(invalid("cycle_power_gadget needs odd m >= 3"));
            }
            let pairs = (0..m.div_ceil(2)).map(|i| (0, i)).collect();
            let g = build_power_comm_gadget(&Structure::cycle(m), &GeneratorSet::new(pairs)?, GADGET_CAP)?;
            Payload::Gadget(g.gadget().clone())
        }
        _ => return Err(unknown()),
    };
    let flags = match &payload {
        Payload::Structure(s) => flags_for(s),
        Payload::Gadget(g) if base == "path_gadget" => {
            debug_assert!(crate::structures::is_tree(&g.structure));
            BTreeSet::from([Flag::Tree])
        }
        Payload::Gadget(_) => BTreeSet::new(),
        Payload::Candidate(c) => flags_for(&c.target),
    };
    if let Payload::Candidate(c) = &payload {
        if !verify(c).passed() {
            return Err(Error::Precondition(format!("catalog candidate {name} fails verification")));
        }
    }
    Ok(CatalogEntry { name: name.trim().to_string(), payload, flags })
}

fn half() -> Q {
    Q::new(1.into(), 2.into())
}

fn plus() -> Matrix<Q> {
    Matrix::from_fn(2, 2, |_, _| half())
}

fn minus() -> Matrix<Q> {
    Matrix::from_fn(2, 2, |i, j| if i == j { half() } else { -half() })
}

fn e(i: usize) -> Matrix<Q> {
    let mut d = vec![Q::zero(); 2];
    d[i] = Q::one();
    Matrix::diagonal(d)
}

/// The binary polymorphism of `K₂` on `ℂ²` whose projectors at `(0,0)` and `(1,0)` do not commute.
pub fn k2_contextual_poly() -> Result<QHomCandidate<Q>> {
    let k2 = Structure::clique(2);
    let source = direct_power(&k2, 2)?;
    // element order (0,0), (0,1), (1,0), (1,1)
    let pvms = vec![vec![e(0), e(1)], vec![minus(), plus()], vec![plus(), minus()], vec![e(1), e(0)]];
    let qf = QuantumFunction::new(source.labels().to_vec(), k2.labels().to_vec(), 2, pvms)?;
    QHomCandidate::new(source, k2, qf, Mode::Oracular)
}

/// `C₇ ⇒ C₅` on `ℂ²`. `C₅` has domain `{0,1,2,5,6}` with cycle order 0-1-2-5-6.
///
/// On `5,6,0,1,2` the map is `h ⊕ g` for the rotation `h` with `h(5) = 0` and the reflection `g`
/// fixing 6. Vertex 3 copies vertex 5, and vertex 4 measures in the `±` basis with outcomes 1 and 6.
pub fn c7_to_c5() -> Result<QHomCandidate<Q>> {
    let c7 = Structure::cycle(7);
    let labels: Vec<String> = ["0", "1", "2", "5", "6"].iter().map(|s| s.to_string()).collect();
    let c5 = Structure::new(
        "C5",
        Structure::cycle(5).signature().clone(),
        labels,
        Structure::cycle(5).relations().to_vec(),
    )?;
    let idx = |l: &str| c5.index_of(l).expect("C5 label");
    let h = |x: usize| ["2", "5", "6", "", "", "0", "1"][x];
    let g = |x: usize| ["5", "2", "1", "", "", "0", "6"][x];
    let mut pvms = Vec::new();
    for x in 0..7 {
        let x_eff = if x == 3 { 5 } else { x };
        let pvm = if x == 4 {
            (0..5)
                .map(|b| match c5.label(b) {
                    "1" => plus(),
                    "6" => minus(),
                    _ => Matrix::zeros(2, 2),
                })
                .collect()
        } else {
            (0..5)
                .map(|b| {
                    let d = [h(x_eff), g(x_eff)].map(|v| if idx(v) == b { Q::one() } else { Q::zero() });
                    Matrix::diagonal(d.to_vec())
                })
                .collect()
        };
        pvms.push(pvm);
    }
    let qf = QuantumFunction::new(c7.labels().to_vec(), c5.labels().to_vec(), 2, pvms)?;
    QHomCandidate::new(c7, c5, qf, Mode::Oracular)
}

/// The 4-ary contextual polymorphism of `B` built from the default projectors.
pub fn b4_contextual() -> Result<QHomCandidate<Q>> {
    let b = build_b();
    let [x, y, z] = default_arity4_inputs::<Q>();
    let qf = build_arity4_contextual(&x, &y, &z)?.to_quantum_function()?;
    QHomCandidate::new(direct_power(&b, 4)?, b, qf, Mode::Oracular)
}

/// Directed path `0 → … → l` with both endpoints distinguished.
pub fn path_gadget(l: usize) -> Result<GadgetSpec> {
    GadgetSpec::new(Structure::directed_path(l), vec![0, l])
}
