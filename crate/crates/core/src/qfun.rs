//! Quantum functions: one projective measurement per source element.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{invalid, Error, Result};
use crate::linalg::{commutator, dot, gram_schmidt, is_pvm, normalize_leading, Matrix};
use crate::scalar::Scalar;
use crate::structures::join_labels;

static DIM_CAP: AtomicUsize = AtomicUsize::new(64);

/// Largest Hilbert-space dimension any constructor will produce.
pub fn dim_cap() -> usize {
    DIM_CAP.load(Ordering::Relaxed)
}

pub fn set_dim_cap(cap: usize) {
    DIM_CAP.store(cap, Ordering::Relaxed);
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d > dim_cap() {
        return Err(Error::SizeCap(format!("dimension {d} exceeds cap {}", dim_cap())));
    }
    Ok(())
}

/// Projectors indexed by outcome, summing to the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pvm<T> {
    pub projectors: Vec<Matrix<T>>,
}

impl<T: Scalar> Pvm<T> {
    pub fn new(projectors: Vec<Matrix<T>>) -> Result<Self> {
        if !is_pvm(&projectors)? {
            return Err(invalid("projectors do not form a PVM"));
        }
        Ok(Pvm { projectors })
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumFunction<T> {
    source: Vec<String>,
    target: Vec<String>,
    dim: usize,
    pvms: Vec<Pvm<T>>,
}

/// Two non-commuting projectors `Q_{a,b}` and `Q_{a2,b2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextualityWitness<T> {
    pub a: usize,
    pub b: usize,
    pub a2: usize,
    pub b2: usize,
    pub commutator: Matrix<T>,
}

/// `Q = h₁ ⊕ … ⊕ h_d` in an orthogonal basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalDecomposition<T> {
    pub basis: Vec<Vec<T>>,
    pub components: Vec<Vec<usize>>,
}

impl<T: Scalar> QuantumFunction<T> {
    /// Validates every PVM; `pvms[a][b]` is `Q_{a,b}`.
    pub fn new(source: Vec<String>, target: Vec<String>, dim: usize, pvms: Vec<Vec<Matrix<T>>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        check_dim(dim)?;
        if pvms.len() != source.len() {
            return Err(Error::LabelMismatch(format!("{} PVMs for {} source labels", pvms.len(), source.len())));
        }
        let mut out = Vec::with_capacity(pvms.len());
        for (a, projectors) in pvms.into_iter().enumerate() {
            if projectors.len() != target.len() {
                return Err(Error::LabelMismatch(format!("PVM at {} has {} outcomes", source[a], projectors.len())));
            }
            if projectors.iter().any(|p| p.rows() != dim || p.cols() != dim) {
                return Err(Error::DimensionMismatch(format!("PVM at {} is not {dim}x{dim}", source[a])));
            }
            if !is_pvm(&projectors)? {
                return Err(Error::NotPvm(source[a].clone()));
            }
            out.push(Pvm { projectors });
        }
        Ok(QuantumFunction { source, target, dim, pvms: out })
    }

    /// Skips PVM validation; callers guarantee it by construction.
    fn assemble(source: Vec<String>, target: Vec<String>, dim: usize, pvms: Vec<Vec<Matrix<T>>>) -> Self {
        debug_assert!(pvms.iter().all(|p| is_pvm(p).unwrap_or(false)));
        let pvms = pvms.into_iter().map(|projectors| Pvm { projectors }).collect();
        QuantumFunction { source, target, dim, pvms }
    }

    /// A classical function as a quantum function over a 1-dimensional space.
    pub fn classical(source: &[String], target: &[String], map: &[usize]) -> Result<Self> {
        Self::from_classical_family(source, target, &[map.to_vec()], None)
    }

    /// `Q_{a,b} = Σᵢ [hᵢ(a) = b] eᵢeᵢᵀ/⟨eᵢ,eᵢ⟩`, with the standard basis by default.
    pub fn from_classical_family(
        source: &[String],
        target: &[String],
        maps: &[Vec<usize>],
        basis: Option<&[Vec<T>]>,
    ) -> Result<Self> {
        let d = maps.len();
        if d == 0 {
            return Err(invalid("empty classical family"));
        }
        check_dim(d)?;
        for m in maps {
            if m.len() != source.len() || m.iter().any(|&b| b >= target.len()) {
                return Err(invalid("classical map does not match the labels"));
            }
        }
        let lines: Vec<Matrix<T>> = match basis {
            None => (0..d)
                .map(|i| Matrix::from_fn(d, d, |r, c| if r == i && c == i { T::one() } else { T::zero() }))
                .collect(),
            Some(vs) => {
                if vs.len() != d || vs.iter().any(|v| v.len() != d) {
                    return Err(Error::DimensionMismatch(format!("basis must have {d} vectors of length {d}")));
                }
                for (i, u) in vs.iter().enumerate() {
                    if dot(u, u).is_zero() {
                        return Err(invalid("zero basis vector"));
                    }
                    if vs[i + 1..].iter().any(|v| !dot(u, v).is_zero()) {
                        return Err(invalid("basis is not orthogonal"));
                    }
                }
                vs.iter().map(|v| Matrix::line_projector(v)).collect()
            }
        };
        let pvms = (0..source.len())
            .map(|a| {
                (0..target.len())
                    .map(|b| {
                        maps.iter()
                            .zip(&lines)
                            .filter(|(m, _)| m[a] == b)
                            .fold(Matrix::zeros(d, d), |acc, (_, l)| &acc + l)
                    })
                    .collect()
            })
            .collect();
        Ok(Self::assemble(source.to_vec(), target.to_vec(), d, pvms))
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pvm(&self, a: usize) -> &Pvm<T> {
        &self.pvms[a]
    }

    /// `Q_{a,b}`.
    pub fn proj(&self, a: usize, b: usize) -> &Matrix<T> {
        &self.pvms[a].projectors[b]
    }

    /// The underlying map when `d = 1`.
    pub fn classical_map(&self) -> Option<Vec<usize>> {
        if self.dim != 1 {
            return None;
        }
        self.pvms.iter().map(|p| p.projectors.iter().position(|m| !m.is_zero())).collect()
    }

    /// Replaces the PVM at `a`, validating it.
    pub fn with_pvm(&self, a: usize, projectors: Vec<Matrix<T>>) -> Result<Self> {
        let mut pvms = self.matrices();
        pvms[a] = projectors;
        Self::new(self.source.clone(), self.target.clone(), self.dim, pvms)
    }

    pub fn matrices(&self) -> Vec<Vec<Matrix<T>>> {
        self.pvms.iter().map(|p| p.projectors.clone()).collect()
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::LabelMismatch("direct sum needs equal source and target labels".into()));
        }
        let d = self.dim + other.dim;
        check_dim(d)?;
        let pvms = self
            .pvms
            .iter()
            .zip(&other.pvms)
            .map(|(p, q)| p.projectors.iter().zip(&q.projectors).map(|(x, y)| x.direct_sum(y)).collect())
            .collect();
        Ok(Self::assemble(self.source.clone(), self.target.clone(), d, pvms))
    }

    /// `(Q⊗Q')_{x,(b,c)} = Q_{x,b} ⊗ Q'_{x,c}`, into the product of the targets.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.source != other.source {
            return Err(Error::LabelMismatch("tensor needs equal source labels".into()));
        }
        let d = self.dim * other.dim;
        check_dim(d)?;
        let target = self.target.iter().flat_map(|b| other.target.iter().map(move |c| join_labels(&[b, c]))).collect();
        let pvms = self
            .pvms
            .iter()
            .zip(&other.pvms)
            .map(|(p, q)| p.projectors.iter().flat_map(|x| q.projectors.iter().map(move |y| x.kron(y))).collect())
            .collect();
        Ok(Self::assemble(self.source.clone(), target, d, pvms))
    }

    /// `R • Q` with `(R•Q)_{a,c} = Σ_b R_{b,c} ⊗ Q_{a,b}`.
    pub fn compose(r: &Self, q: &Self) -> Result<Self> {
        if q.target != r.source {
            return Err(Error::LabelMismatch("compose needs target(Q) = source(R)".into()));
        }
        let d = r.dim * q.dim;
        check_dim(d)?;
        let pvms = (0..q.source.len())
            .map(|a| {
                (0..r.target.len())
                    .map(|c| {
                        (0..q.target.len())
                            .filter(|&b| !q.proj(a, b).is_zero() && !r.proj(b, c).is_zero())
                            .fold(Matrix::zeros(d, d), |acc, b| &acc + &r.proj(b, c).kron(q.proj(a, b)))
                    })
                    .collect()
            })
            .collect();
        Ok(Self::assemble(q.source.clone(), r.target.clone(), d, pvms))
    }

    /// First non-commuting pair between the PVMs at `a` and `a2`.
    pub fn commutation_witness_at(&self, a: usize, a2: usize) -> Option<ContextualityWitness<T>> {
        for b in 0..self.target.len() {
            for b2 in 0..self.target.len() {
                let c = commutator(self.proj(a, b), self.proj(a2, b2)).expect("shared dimension");
                if !c.is_zero() {
                    return Some(ContextualityWitness { a, b, a2, b2, commutator: c });
                }
            }
        }
        None
    }

    /// The lexicographically least witness of contextuality, if any.
    pub fn contextuality_witness(&self) -> Option<ContextualityWitness<T>> {
        if self.dim == 1 {
            return None;
        }
        (0..self.source.len())
            .flat_map(|a| (a + 1..self.source.len()).map(move |a2| (a, a2)))
            .find_map(|(a, a2)| self.commutation_witness_at(a, a2))
    }

    pub fn is_noncontextual(&self) -> bool {
        self.contextuality_witness().is_none()
    }

    /// Joint eigenbasis of a commuting family and the classical functions it diagonalizes.
    pub fn decompose_noncontextual(&self) -> Result<ClassicalDecomposition<T>> {
        if let Some(w) = self.contextuality_witness() {
            return Err(Error::Precondition(format!(
                "contextual: [Q({},{}), Q({},{})] != 0",
                self.source[w.a], self.target[w.b], self.source[w.a2], self.target[w.b2]
            )));
        }
        let d = self.dim;
        let id = Matrix::<T>::identity(d);
        let standard: Vec<Vec<T>> = (0..d).map(|i| id.column(i)).collect();
        let mut spaces = vec![standard];
        // Every projector commutes with the earlier ones, so it maps each
        // joint eigenspace into itself and splits it into image and kernel.
        for pvm in &self.pvms {
            for p in &pvm.projectors {
                if p.is_zero() || p.is_identity() {
                    continue;
                }
                let complement = &id - p;
                spaces = spaces
                    .into_iter()
                    .flat_map(|basis| {
                        let b = Matrix::from_columns(d, &basis);
                        [(p * &b).column_space(), (&complement * &b).column_space()]
                    })
                    .filter(|s| !s.is_empty())
                    .collect();
            }
        }
        let mut basis: Vec<Vec<T>> =
            spaces.iter().flat_map(|s| gram_schmidt(s)).map(|v| normalize_leading(&v)).collect();
        basis.sort_by_key(|v| v.iter().position(|x| !x.is_zero()));
        let components = basis
            .iter()
            .map(|e| {
                (0..self.source.len())
                    .map(|a| {
                        (0..self.target.len())
                            .find(|&b| {
                                let pe: Vec<T> = (0..d).map(|i| dot(self.proj(a, b).row(i), e)).collect();
                                pe == *e
                            })
                            .expect("joint eigenvector lies in some outcome projector")
                    })
                    .collect()
            })
            .collect();
        Ok(ClassicalDecomposition { basis, components })
    }
}

impl<T: Scalar> ClassicalDecomposition<T> {
    pub fn reconstruct(&self, source: &[String], target: &[String]) -> Result<QuantumFunction<T>> {
        QuantumFunction::from_classical_family(source, target, &self.components, Some(&self.basis))
    }
}
