//! Incremental construction of glued structures: disjoint copies plus identifications.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::structures::{Signature, Structure, Tuple};

pub(crate) struct Assembly<O> {
    signature: Signature,
    labels: Vec<String>,
    origins: Vec<O>,
    parent: Vec<usize>,
    tuples: Vec<BTreeSet<Tuple>>,
}

impl<O: Clone> Assembly<O> {
    pub fn new(signature: Signature) -> Self {
        let tuples = vec![BTreeSet::new(); signature.len()];
        Assembly { signature, labels: Vec::new(), origins: Vec::new(), parent: Vec::new(), tuples }
    }

    pub fn add_vertex(&mut self, label: String, origin: O) -> usize {
        let id = self.labels.len();
        self.labels.push(label);
        self.origins.push(origin);
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index stays the representative
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    pub fn add_tuple(&mut self, symbol: usize, tuple: Tuple) {
        self.tuples[symbol].insert(tuple);
    }

    /// Adds a copy of `g`. Vertices listed in `glue` are identified with existing vertices
    /// instead of receiving fresh ones. Returns the local-to-global map.
    pub fn add_copy(
        &mut self,
        g: &Structure,
        glue: &[(usize, usize)],
        mut label: impl FnMut(usize) -> String,
        mut origin: impl FnMut(usize) -> O,
    ) -> Vec<usize> {
        let mut map: Vec<Option<usize>> = vec![None; g.size()];
        for &(local, existing) in glue {
            match map[local] {
                None => map[local] = Some(existing),
                Some(prev) => self.union(prev, existing),
            }
        }
        let map: Vec<usize> = (0..g.size())
            .map(|v| match map[v] {
                Some(e) => e,
                None => self.add_vertex(label(v), origin(v)),
            })
            .collect();
        for (s, rel) in g.relations().iter().enumerate() {
            for t in rel {
                self.tuples[s].insert(t.iter().map(|&v| map[v]).collect());
            }
        }
        map
    }

    /// Collapses identification classes. Output vertices are ordered by their smallest member;
    /// each carries the origins of every member. Also returns the raw-to-output index map.
    pub fn finish(mut self, name: &str) -> Result<(Structure, Vec<Vec<O>>, Vec<usize>)> {
        let n = self.labels.len();
        let roots: Vec<usize> = (0..n).map(|v| self.find(v)).collect();
        let mut out_index = vec![usize::MAX; n];
        let mut labels = Vec::new();
        for v in 0..n {
            if roots[v] == v {
                out_index[v] = labels.len();
                labels.push(self.labels[v].clone());
            }
        }
        let map: Vec<usize> = roots.iter().map(|&r| out_index[r]).collect();
        let mut provenance = vec![Vec::new(); labels.len()];
        for v in 0..n {
            provenance[map[v]].push(self.origins[v].clone());
        }
        let relations =
            self.tuples.iter().map(|rel| rel.iter().map(|t| t.iter().map(|&v| map[v]).collect()).collect()).collect();
        let s = Structure::new(name, self.signature.clone(), labels, relations)?;
        Ok((s, provenance, map))
    }
}
