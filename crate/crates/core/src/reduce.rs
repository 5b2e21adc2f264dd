//! Gadget substitution: compile an instance over one signature into an instance over another.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;

use crate::assembly::Assembly;
use crate::error::{invalid, Error, Result};
use crate::gadgets::{check_c1, check_c2, check_q2, Certificate, CommGadget};
use crate::hom::{hom_search_budgeted, ClassicalHom};
use crate::qhom::Mode;
use crate::structures::{GadgetSpec, Signature, Structure};

/// Search-node budget per side of [`classical_equivalence_check`].
pub const EQUIVALENCE_BUDGET: u64 = 10_000_000;

/// Where a vertex of a compiled instance came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    Instance {
        label: String,
    },
    GadgetCopy {
        symbol: String,
        tuple_index: usize,
        local: String,
    },
    CommCopy {
        from: String,
        to: String,
        local: String,
    },
    /// A fresh vertex added by the clique lift.
    Added {
        label: String,
    },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Instance { label } => write!(f, "x:{label}"),
            Origin::GadgetCopy { symbol, tuple_index, local } => write!(f, "g:{symbol}:{tuple_index}:{local}"),
            Origin::CommCopy { from, to, local } => write!(f, "h:{from}-{to}:{local}"),
            Origin::Added { label } => write!(f, "y:{label}"),
        }
    }
}

/// Gadgets for each source symbol, plus the commutativity gadget used in non-oracular mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionRecipe {
    pub source_signature: Signature,
    pub target_signature: Signature,
    pub gadgets: Vec<GadgetSpec>,
    pub comm_gadget: Option<CommGadget>,
    pub mode: Mode,
    /// One commutativity-gadget copy per unordered adjacent pair instead of per directed edge.
    pub dedupe_pairs: bool,
    /// (q2) verdict per source symbol.
    pub certificates: Vec<Option<Certificate>>,
    /// (c2) verdict for the commutativity gadget.
    pub comm_certificate: Option<Certificate>,
}

impl ReductionRecipe {
    pub fn new(
        source_signature: Signature,
        target_signature: Signature,
        gadgets: Vec<GadgetSpec>,
        comm_gadget: Option<CommGadget>,
        mode: Mode,
    ) -> Result<Self> {
        if gadgets.len() != source_signature.len() {
            return Err(invalid(format!("{} gadgets for {} symbols", gadgets.len(), source_signature.len())));
        }
        for (i, g) in gadgets.iter().enumerate() {
            if g.arity() != source_signature.arity(i) {
                return Err(invalid(format!(
                    "gadget for {} has {} distinguished vertices, arity is {}",
                    source_signature.name(i),
                    g.arity(),
                    source_signature.arity(i)
                )));
            }
            if *g.structure.signature() != target_signature {
                return Err(Error::SignatureMismatch(format!("gadget for {}", source_signature.name(i))));
            }
        }
        if let Some(h) = &comm_gadget {
            if *h.structure().signature() != target_signature {
                return Err(Error::SignatureMismatch("commutativity gadget".into()));
            }
        }
        let n = gadgets.len();
        let recipe = ReductionRecipe {
            source_signature,
            target_signature,
            gadgets,
            comm_gadget,
            mode,
            dedupe_pairs: false,
            certificates: vec![None; n],
            comm_certificate: None,
        };
        recipe.check_mode(mode)?;
        Ok(recipe)
    }

    fn check_mode(&self, mode: Mode) -> Result<()> {
        if mode == Mode::NonOracular && self.comm_gadget.is_none() {
            return Err(invalid("non-oracular recipes need a commutativity gadget"));
        }
        Ok(())
    }

    pub fn with_mode(mut self, mode: Mode) -> Result<Self> {
        self.check_mode(mode)?;
        self.mode = mode;
        Ok(self)
    }

    pub fn with_dedupe_pairs(mut self, dedupe: bool) -> Self {
        self.dedupe_pairs = dedupe;
        self
    }

    /// Every gadget certificate, and in non-oracular mode the commutativity one, is a pass.
    pub fn is_certified(&self) -> bool {
        let pass = |c: &Option<Certificate>| c.as_ref().is_some_and(|c| c.kind.is_pass());
        self.certificates.iter().all(pass) && (self.mode == Mode::Oracular || pass(&self.comm_certificate))
    }

    /// Fills in certificates for reducing `CSP(B)` to `CSP(A)`, merging with any present.
    pub fn certify(&mut self, b: &Structure, a: &Structure) -> Result<()> {
        if *b.signature() != self.source_signature || *a.signature() != self.target_signature {
            return Err(Error::SignatureMismatch("recipe and structures".into()));
        }
        for (i, g) in self.gadgets.iter().enumerate() {
            let prior = self.certificates[i].take();
            let fresh = check_q2::<BigRational>(g, a, b.relation(i), &[], self.mode, prior.as_ref())?;
            self.certificates[i] = Some(match prior {
                Some(p) => p.merge(fresh),
                None => fresh,
            });
        }
        if let Some(h) = &self.comm_gadget {
            let fresh = if check_c1(h, a)?.holds() {
                check_c2::<BigRational>(h, a, &[], self.mode)?
            } else {
                Certificate::refuted(format!("{} fails c1 over {}", h.structure().name(), a.name()))
            };
            self.comm_certificate = Some(match self.comm_certificate.take() {
                Some(p) => p.merge(fresh),
                None => fresh,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledInstance {
    pub instance: Structure,
    /// Origins of the vertices identified into each output vertex.
    pub provenance: Vec<Vec<Origin>>,
    /// Output vertex of each input vertex.
    pub instance_map: Vec<usize>,
    pub certified: bool,
}

impl CompiledInstance {
    /// The primary origin tag of each output vertex.
    pub fn provenance_tags(&self) -> Vec<String> {
        self.provenance.iter().map(|o| o[0].to_string()).collect()
    }
}

pub fn compile_oracular(x: &Structure, recipe: &ReductionRecipe) -> Result<CompiledInstance> {
    if recipe.mode != Mode::Oracular {
        return Err(invalid("recipe is not oracular"));
    }
    compile_with(x, recipe, false)
}

pub fn compile_nonoracular(x: &Structure, recipe: &ReductionRecipe) -> Result<CompiledInstance> {
    if recipe.mode != Mode::NonOracular {
        return Err(invalid("recipe is not non-oracular"));
    }
    compile_with(x, recipe, true)
}

/// Compiles according to the recipe's mode.
pub fn compile(x: &Structure, recipe: &ReductionRecipe) -> Result<CompiledInstance> {
    compile_with(x, recipe, recipe.mode == Mode::NonOracular)
}

fn compile_with(x: &Structure, recipe: &ReductionRecipe, with_comm: bool) -> Result<CompiledInstance> {
    if *x.signature() != recipe.source_signature {
        return Err(Error::SignatureMismatch(format!("{} is not over the recipe's source signature", x.name())));
    }
    let mut asm = Assembly::new(recipe.target_signature.clone());
    let xs: Vec<usize> = (0..x.size())
        .map(|v| asm.add_vertex(format!("x:{}", x.label(v)), Origin::Instance { label: x.label(v).to_string() }))
        .collect();
    for (s, rel) in x.relations().iter().enumerate() {
        let g = &recipe.gadgets[s];
        let symbol = x.signature().name(s);
        for (idx, t) in rel.iter().enumerate() {
            let glue: Vec<(usize, usize)> = g.distinguished.iter().zip(t).map(|(&gi, &xi)| (gi, xs[xi])).collect();
            let gs = &g.structure;
            asm.add_copy(
                gs,
                &glue,
                |l| format!("g:{symbol}:{idx}:{}", gs.label(l)),
                |l| Origin::GadgetCopy { symbol: symbol.to_string(), tuple_index: idx, local: gs.label(l).to_string() },
            );
        }
    }
    if with_comm {
        let h = recipe.comm_gadget.as_ref().ok_or_else(|| invalid("no commutativity gadget"))?;
        let hs = h.structure();
        for (v, nbrs) in x.gaifman_adjacency().iter().enumerate() {
            for &w in nbrs {
                if recipe.dedupe_pairs && w < v {
                    continue;
                }
                let (from, to) = (x.label(v), x.label(w));
                asm.add_copy(
                    hs,
                    &[(h.u(), xs[v]), (h.v(), xs[w])],
                    |l| format!("h:{from}-{to}:{}", hs.label(l)),
                    |l| Origin::CommCopy { from: from.to_string(), to: to.to_string(), local: hs.label(l).to_string() },
                );
            }
        }
    }
    let (instance, provenance, map) = asm.finish(&format!("{}_reduced", x.name()))?;
    let instance_map = xs.iter().map(|&v| map[v]).collect();
    Ok(CompiledInstance { instance, provenance, instance_map, certified: recipe.is_certified() })
}

/// Lifts a `K₃` instance to a `K_m` instance: new vertices `y₄…y_m` complete every vertex
/// to a clique, and a copy of `H` joins each `yᵢ` to every other vertex.
pub fn clique_lift(x: &Structure, m: usize, h: &CommGadget) -> Result<CompiledInstance> {
    if m < 3 {
        return Err(invalid("clique lift needs m >= 3"));
    }
    if *x.signature() != Signature::graph() || *h.structure().signature() != Signature::graph() {
        return Err(Error::SignatureMismatch("clique lift works on graphs".into()));
    }
    if x.relation(0).iter().any(|t| t[0] == t[1]) {
        return Err(invalid("instance has a loop"));
    }
    let adj = x.gaifman_adjacency();
    if let Some(v) = (0..x.size()).find(|&v| adj[v].is_empty()) {
        return Err(invalid(format!("vertex {} is isolated", x.label(v))));
    }
    let mut asm = Assembly::new(Signature::graph());
    let mut labels: Vec<String> = Vec::new();
    let mut edges: BTreeSet<(usize, usize)> = x.relation(0).iter().map(|t| (t[0], t[1])).collect();
    for v in 0..x.size() {
        labels.push(x.label(v).to_string());
        asm.add_vertex(format!("x:{}", x.label(v)), Origin::Instance { label: x.label(v).to_string() });
    }
    let ys: Vec<usize> = (4..=m)
        .map(|i| {
            let label = format!("y{i}");
            labels.push(label.clone());
            asm.add_vertex(format!("y:{label}"), Origin::Added { label })
        })
        .collect();
    for (i, &y) in ys.iter().enumerate() {
        for w in (0..x.size()).chain(ys[i + 1..].iter().copied()) {
            edges.insert((y, w));
            edges.insert((w, y));
        }
    }
    for (a, b) in edges {
        asm.add_tuple(0, vec![a, b]);
    }
    let hs = h.structure();
    for (i, &y) in ys.iter().enumerate() {
        for w in (0..x.size()).chain(ys[i + 1..].iter().copied()) {
            let (from, to) = (labels[y].clone(), labels[w].clone());
            asm.add_copy(
                hs,
                &[(h.u(), y), (h.v(), w)],
                |l| format!("h:{from}-{to}:{}", hs.label(l)),
                |l| Origin::CommCopy { from: from.clone(), to: to.clone(), local: hs.label(l).to_string() },
            );
        }
    }
    let (instance, provenance, map) = asm.finish(&format!("{}_lift{m}", x.name()))?;
    let km = Structure::clique(m);
    let certified = check_c1(h, &km)?.holds() && check_c2::<BigRational>(h, &km, &[], Mode::Oracular)?.kind.is_pass();
    Ok(CompiledInstance { instance, provenance, instance_map: map[..x.size()].to_vec(), certified })
}

/// Whether `X → B` and `Y → A` agree classically, for `Y` the compiled instance.
pub fn classical_equivalence_check(
    x: &Structure,
    recipe: &ReductionRecipe,
    b: &Structure,
    a: &Structure,
) -> Result<bool> {
    let y = compile(x, recipe)?;
    classical_agreement(x, b, &y.instance, a)
}

/// `(X → B) ⇔ (Y → A)`, each side searched with [`EQUIVALENCE_BUDGET`] nodes.
pub fn classical_agreement(x: &Structure, b: &Structure, y: &Structure, a: &Structure) -> Result<bool> {
    let left = hom_search_budgeted(x, b, &[], Some(EQUIVALENCE_BUDGET))?.is_some();
    let right = hom_search_budgeted(y, a, &[], Some(EQUIVALENCE_BUDGET))?.is_some();
    Ok(left == right)
}

/// Extends a homomorphism `X → B` through the compiled instance to `Y → A`.
pub fn lift_hom(compiled: &CompiledInstance, a: &Structure, h: &ClassicalHom) -> Result<Option<ClassicalHom>> {
    let pins: Vec<(usize, usize)> = compiled.instance_map.iter().enumerate().map(|(v, &y)| (y, h.apply(v))).collect();
    hom_search_budgeted(&compiled.instance, a, &pins, Some(EQUIVALENCE_BUDGET))
}

/// `certified` or `uncertified`.
pub fn stamp(c: &CompiledInstance) -> &'static str {
    if c.certified {
        "certified"
    } else {
        "uncertified"
    }
}
