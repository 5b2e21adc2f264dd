//! Helpers shared by the integration tests: random fixtures and brute-force oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::BigRational;
use qcsp_core::hom::ClassicalHom;
use qcsp_core::linalg::{gram_schmidt, Matrix};
use qcsp_core::qfun::QuantumFunction;
use qcsp_core::structures::{Signature, Structure, Tuple};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Q = BigRational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Orthogonal (unnormalised) rational basis of `Q^d` from small random integer vectors.
pub fn random_basis(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<Q>> {
    loop {
        let raw: Vec<Vec<Q>> =
            (0..d).map(|_| (0..d).map(|_| Q::from_integer(rng.gen_range(-3i64..=3).into())).collect()).collect();
        if Matrix::from_rows(raw.clone()).expect("square").rank() == d {
            return gram_schmidt(&raw);
        }
    }
}

/// A direct sum of `d` randomly chosen homomorphisms in a random orthogonal basis.
pub fn random_family(
    rng: &mut ChaCha8Rng,
    x: &Structure,
    a: &Structure,
    homs: &[ClassicalHom],
    d: usize,
) -> QuantumFunction<Q> {
    let maps: Vec<Vec<usize>> = (0..d).map(|_| homs.choose(rng).expect("some homomorphism").map.clone()).collect();
    let basis = random_basis(rng, d);
    QuantumFunction::from_classical_family(x.labels(), a.labels(), &maps, Some(&basis)).expect("classical family")
}

fn respects(x: &Structure, a: &Structure, map: &[usize]) -> bool {
    x.relations()
        .iter()
        .zip(a.relations())
        .all(|(rx, ra)| rx.iter().all(|t| ra.contains(&t.iter().map(|&v| map[v]).collect::<Tuple>())))
}

/// Every homomorphism `X → A`, by scanning all `|A|^|X|` maps.
pub fn brute_force_homs(x: &Structure, a: &Structure) -> Vec<Vec<usize>> {
    let (n, m) = (x.size(), a.size());
    let mut out = Vec::new();
    if m == 0 {
        return if n == 0 { vec![Vec::new()] } else { out };
    }
    let mut map = vec![0usize; n];
    loop {
        if respects(x, a, &map) {
            out.push(map.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            map[i] += 1;
            if map[i] < m {
                break;
            }
            map[i] = 0;
        }
    }
}

/// Images of the distinguished tuple under all homomorphisms.
pub fn brute_force_restrictions(x: &Structure, dist: &[usize], a: &Structure) -> BTreeSet<Tuple> {
    brute_force_homs(x, a).into_iter().map(|h| dist.iter().map(|&d| h[d]).collect()).collect()
}

pub fn random_structure(rng: &mut ChaCha8Rng, sig: &Signature, n: usize, density: f64) -> Structure {
    let relations = (0..sig.len())
        .map(|s| {
            let r = sig.arity(s);
            let total = n.pow(r as u32);
            (0..total)
                .filter(|_| rng.gen_bool(density))
                .map(|mut i| {
                    let mut t = vec![0; r];
                    for p in (0..r).rev() {
                        t[p] = i % n;
                        i /= n;
                    }
                    t
                })
                .collect()
        })
        .collect();
    Structure::numbered("R", sig.clone(), n, relations).expect("random structure")
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Connected loopless undirected graphs on `1..=max_n` vertices, one per isomorphism class.
pub fn connected_graphs(max_n: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let canon = perms
                .iter()
                .map(|p| {
                    let mut es: Vec<(usize, usize)> =
                        edges.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
                    es.sort();
                    es
                })
                .min()
                .unwrap_or_default();
            if !seen.insert(canon) {
                continue;
            }
            let g = Structure::graph(format!("G{n}_{mask}"), n, &edges).expect("graph");
            if g.is_connected() {
                out.push(g);
            }
        }
    }
    out
}
