//! Classical homomorphism search.

use std::collections::BTreeSet;

use crate::error::{invalid, Error, Result};
use crate::structures::{direct_power, Structure};

/// A map from the domain of a source structure to the domain of a target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalHom {
    pub map: Vec<usize>,
}

impl ClassicalHom {
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_bijective(&self, target_size: usize) -> bool {
        self.map.len() == target_size && self.map.iter().collect::<BTreeSet<_>>().len() == target_size
    }

    pub fn compose(&self, first: &ClassicalHom) -> ClassicalHom {
        ClassicalHom { map: first.map.iter().map(|&x| self.map[x]).collect() }
    }
}

pub fn is_homomorphism(x: &Structure, a: &Structure, map: &[usize]) -> bool {
    map.len() == x.size()
        && map.iter().all(|&v| v < a.size())
        && x.relations()
            .iter()
            .zip(a.relations())
            .all(|(rx, ra)| rx.iter().all(|t| ra.contains(&t.iter().map(|&e| map[e]).collect::<Vec<_>>())))
}

/// Largest target the solver accepts (domains are `u128` bitsets).
pub const MAX_TARGET: usize = 128;

struct Constraint {
    rel: usize,
    vars: Vec<usize>,
}

/// Constraint network for homomorphisms `X → A`.
struct Csp<'a> {
    target: &'a Structure,
    constraints: Vec<Constraint>,
    var_constraints: Vec<Vec<usize>>,
    rel_tuples: Vec<Vec<&'a [usize]>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Order {
    /// Smallest domain first, ties by index.
    FailFirst,
    /// Index order, giving lexicographically sorted solutions.
    Lex,
}

struct State {
    dom: Vec<u128>,
    trail: Vec<(usize, u128)>,
    nodes: u64,
    budget: Option<u64>,
    exhausted: bool,
}

impl<'a> Csp<'a> {
    fn new(x: &Structure, a: &'a Structure) -> Result<Self> {
        x.check_same_signature(a)?;
        if a.size() > MAX_TARGET {
            return Err(invalid(format!("target has {} > {MAX_TARGET} elements", a.size())));
        }
        let mut constraints = Vec::new();
        let mut var_constraints = vec![Vec::new(); x.size()];
        for (rel, tuples) in x.relations().iter().enumerate() {
            for t in tuples {
                let id = constraints.len();
                let distinct: BTreeSet<usize> = t.iter().copied().collect();
                for v in distinct {
                    var_constraints[v].push(id);
                }
                constraints.push(Constraint { rel, vars: t.clone() });
            }
        }
        let rel_tuples = a.relations().iter().map(|r| r.iter().map(Vec::as_slice).collect()).collect();
        Ok(Csp { target: a, constraints, var_constraints, rel_tuples })
    }

    fn initial_state(&self, n: usize, pins: &[(usize, usize)], budget: Option<u64>) -> Result<State> {
        let full = if self.target.size() == MAX_TARGET { u128::MAX } else { (1u128 << self.target.size()) - 1 };
        let mut dom = vec![full; n];
        for &(x, a) in pins {
            if x >= n || a >= self.target.size() {
                return Err(invalid(format!("pin ({x}, {a}) out of range")));
            }
            dom[x] &= 1u128 << a;
        }
        Ok(State { dom, trail: Vec::new(), nodes: 0, budget, exhausted: false })
    }

    fn set(st: &mut State, v: usize, value: u128) {
        st.trail.push((v, st.dom[v]));
        st.dom[v] = value;
    }

    fn undo(st: &mut State, mark: usize) {
        while st.trail.len() > mark {
            let (v, old) = st.trail.pop().expect("trail entry");
            st.dom[v] = old;
        }
    }

    /// Generalized arc consistency from the given constraints to a fixpoint.
    fn propagate(&self, st: &mut State, mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.constraints.len()];
        for &c in &queue {
            queued[c] = true;
        }
        let mut support = Vec::new();
        while let Some(c) = queue.pop() {
            queued[c] = false;
            let con = &self.constraints[c];
            support.clear();
            support.resize(con.vars.len(), 0u128);
            'tuples: for t in &self.rel_tuples[con.rel] {
                for (p, &v) in con.vars.iter().enumerate() {
                    if st.dom[v] & (1u128 << t[p]) == 0 {
                        continue 'tuples;
                    }
                    // Repeated variables need equal values.
                    if con.vars[..p].iter().zip(t.iter()).any(|(&w, &tw)| w == v && tw != t[p]) {
                        continue 'tuples;
                    }
                }
                for (p, s) in support.iter_mut().enumerate() {
                    *s |= 1u128 << t[p];
                }
            }
            for (p, &v) in con.vars.iter().enumerate() {
                let narrowed = st.dom[v] & support[p];
                if narrowed != st.dom[v] {
                    if narrowed == 0 {
                        return false;
                    }
                    Self::set(st, v, narrowed);
                    for &d in &self.var_constraints[v] {
                        if d != c && !queued[d] {
                            queued[d] = true;
                            queue.push(d);
                        }
                    }
                }
            }
        }
        true
    }

    fn pick(&self, st: &State, order: Order) -> Option<usize> {
        let open = (0..st.dom.len()).filter(|&v| st.dom[v].count_ones() > 1);
        match order {
            Order::Lex => open.take(1).next(),
            Order::FailFirst => open.min_by_key(|&v| (st.dom[v].count_ones(), v)),
        }
    }

    /// Depth-first search; `emit` returns `false` to stop.
    fn search(&self, st: &mut State, order: Order, emit: &mut dyn FnMut(Vec<usize>) -> bool) -> bool {
        st.nodes += 1;
        if let Some(b) = st.budget {
            if st.nodes > b {
                st.exhausted = true;
                return false;
            }
        }
        let Some(v) = self.pick(st, order) else {
            let map = st.dom.iter().map(|d| d.trailing_zeros() as usize).collect();
            return emit(map);
        };
        let mut values = st.dom[v];
        while values != 0 {
            let a = values.trailing_zeros() as usize;
            values &= values - 1;
            let mark = st.trail.len();
            Self::set(st, v, 1u128 << a);
            let keep_going =
                if self.propagate(st, self.var_constraints[v].clone()) { self.search(st, order, emit) } else { true };
            Self::undo(st, mark);
            if !keep_going {
                return false;
            }
        }
        true
    }

    fn run(
        &self,
        n: usize,
        pins: &[(usize, usize)],
        order: Order,
        budget: Option<u64>,
        emit: &mut dyn FnMut(Vec<usize>) -> bool,
    ) -> Result<()> {
        let mut st = self.initial_state(n, pins, budget)?;
        if st.dom.contains(&0) {
            return Ok(());
        }
        if self.propagate(&mut st, (0..self.constraints.len()).collect()) {
            self.search(&mut st, order, emit);
        }
        if st.exhausted {
            return Err(Error::SizeCap(format!("search exceeded {} nodes", budget.unwrap_or(0))));
        }
        Ok(())
    }
}

/// Some homomorphism `X → A`, or `None`.
pub fn hom_search(x: &Structure, a: &Structure) -> Result<Option<ClassicalHom>> {
    hom_search_pinned(x, a, &[])
}

/// Some homomorphism sending each pinned `x` to its `a`.
pub fn hom_search_pinned(x: &Structure, a: &Structure, pins: &[(usize, usize)]) -> Result<Option<ClassicalHom>> {
    hom_search_budgeted(x, a, pins, None)
}

/// As [`hom_search_pinned`], failing with `SizeCap` after `budget` search nodes.
pub fn hom_search_budgeted(
    x: &Structure,
    a: &Structure,
    pins: &[(usize, usize)],
    budget: Option<u64>,
) -> Result<Option<ClassicalHom>> {
    let csp = Csp::new(x, a)?;
    let mut found = None;
    csp.run(x.size(), pins, Order::FailFirst, budget, &mut |map| {
        found = Some(ClassicalHom { map });
        false
    })?;
    Ok(found)
}

/// All homomorphisms in lexicographic order of the assignment vector.
pub fn hom_enumerate(x: &Structure, a: &Structure) -> Result<Vec<ClassicalHom>> {
    hom_enumerate_pinned(x, a, &[])
}

pub fn hom_enumerate_pinned(x: &Structure, a: &Structure, pins: &[(usize, usize)]) -> Result<Vec<ClassicalHom>> {
    let csp = Csp::new(x, a)?;
    let mut out = Vec::new();
    csp.run(x.size(), pins, Order::Lex, None, &mut |map| {
        out.push(ClassicalHom { map });
        true
    })?;
    Ok(out)
}

/// Number of homomorphisms, without storing them.
pub fn hom_count(x: &Structure, a: &Structure) -> Result<usize> {
    let csp = Csp::new(x, a)?;
    let mut count = 0;
    csp.run(x.size(), &[], Order::Lex, None, &mut |_| {
        count += 1;
        true
    })?;
    Ok(count)
}

/// Polymorphisms of arity `n`: homomorphisms `Aⁿ → A`.
pub fn polymorphisms(a: &Structure, n: usize) -> Result<Vec<ClassicalHom>> {
    hom_enumerate(&direct_power(a, n)?, a)
}

pub fn automorphisms(a: &Structure) -> Result<Vec<ClassicalHom>> {
    Ok(hom_enumerate(a, a)?.into_iter().filter(|h| h.is_bijective(a.size())).collect())
}

/// True iff every endomorphism is surjective.
pub fn is_core(x: &Structure) -> Result<bool> {
    let csp = Csp::new(x, x)?;
    for v in 0..x.size() {
        // An endomorphism missing v in its image: forbid v everywhere.
        let mut st = csp.initial_state(x.size(), &[], None)?;
        for d in st.dom.iter_mut() {
            *d &= !(1u128 << v);
        }
        if st.dom.contains(&0) {
            continue;
        }
        let mut found = false;
        if csp.propagate(&mut st, (0..csp.constraints.len()).collect()) {
            csp.search(&mut st, Order::FailFirst, &mut |_| {
                found = true;
                false
            });
        }
        if found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest structure `core` will search exhaustively.
pub const CORE_LIMIT: usize = 10;

/// Core of `X`, as the lexicographically least minimal retract.
///
/// Returns the induced core, its vertex set in `X`, and a retraction
/// `X → core` that is the identity on the core.
pub fn core(x: &Structure) -> Result<(Structure, Vec<usize>, ClassicalHom)> {
    let n = x.size();
    if n > CORE_LIMIT {
        return Err(Error::SizeCap(format!("core search limited to {CORE_LIMIT} elements, got {n}")));
    }
    for k in 0..=n {
        for subset in subsets_of_size(n, k) {
            let sub = x.induced(&subset);
            let Some(h) = hom_search(x, &sub)? else { continue };
            // h restricted to the subset is an automorphism of a core; undo it.
            let restricted = ClassicalHom { map: subset.iter().map(|&v| h.map[v]).collect() };
            let inverse = invert(&restricted);
            let retraction = inverse.compose(&h);
            return Ok((sub, subset, retraction));
        }
    }
    unreachable!("the full vertex set is always a retract")
}

fn invert(p: &ClassicalHom) -> ClassicalHom {
    let mut inv = vec![0; p.map.len()];
    for (i, &j) in p.map.iter().enumerate() {
        inv[j] = i;
    }
    ClassicalHom { map: inv }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
