//! The orthomodular lattice of projections.
//!
//! Joins are carriers of sums, meets follow by De Morgan, and the
//! commutator of a finite set is the meet of all `2^n` signed joins.

use crate::calculus::{lattice_carrier, Symmetry};
use crate::error::{Error, Result};
use crate::linalg::{ensure_same_dim, sym_eigen, Matrix, SymmetricElement};
use crate::tolerance::{ToleranceConfig, DEFAULT_SET_CAP};

/// An idempotent symmetric element, `p = p²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    element: SymmetricElement,
    rank: usize,
}

impl Projection {
    /// Validates that every eigenvalue of `a` sits at 0 or 1 (within
    /// `rank_eps`) and snaps it there.
    pub fn new(a: SymmetricElement, tol: &ToleranceConfig) -> Result<Self> {
        let eig = sym_eigen(&a, tol)?;
        let threshold = tol.zero_threshold(eig.spectral_radius());
        if let Some(bad) = eig
            .eigenvalues
            .iter()
            .find(|&&l| l.abs() > threshold && (l - 1.0).abs() > threshold)
        {
            return Err(Error::InvalidProjection(format!(
                "eigenvalue {bad} is neither 0 nor 1 (idempotence p² = p fails)"
            )));
        }
        let (element, rank) = eig.projector(|_, l| (l - 1.0).abs() <= threshold);
        Ok(Self { element, rank })
    }

    pub(crate) fn from_parts(element: SymmetricElement, rank: usize) -> Self {
        Self { element, rank }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            element: SymmetricElement::zeros(n),
            rank: 0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            element: SymmetricElement::identity(n),
            rank: n,
        }
    }

    /// Diagonal projection onto the listed coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let mut d = vec![0.0; n];
        for &i in axes {
            d[i] = 1.0;
        }
        let rank = d.iter().filter(|&&x| x == 1.0).count();
        Self {
            element: SymmetricElement::diag(&d),
            rank,
        }
    }

    /// Rank-one projection onto the line through `v`.
    pub fn onto_vector(v: &[f64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidProjection("cannot project onto the zero vector".into()));
        }
        Ok(Self {
            element: SymmetricElement::outer(v).scale(1.0 / norm2),
            rank: 1,
        })
    }

    /// Projection `V Vᵀ` onto the span of orthonormal columns `V`.
    pub fn from_orthonormal_columns(v: &Matrix) -> Self {
        Self {
            element: v.matmul(&v.transpose()).symmetrize(),
            rank: v.cols(),
        }
    }

    pub fn element(&self) -> &SymmetricElement {
        &self.element
    }

    pub fn into_element(self) -> SymmetricElement {
        self.element
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    pub fn is_identity(&self) -> bool {
        self.rank == self.dim()
    }

    /// `p⊥ = 1 - p`.
    pub fn ortho(&self) -> Projection {
        Projection {
            element: &SymmetricElement::identity(self.dim()) - &self.element,
            rank: self.dim() - self.rank,
        }
    }

    /// Lattice order `self ≤ other`, i.e. `other · self = self`.
    pub fn leq(&self, other: &Projection, tol: &ToleranceConfig) -> bool {
        if self.rank > other.rank {
            return false;
        }
        let residual = (&other.element.product(&self.element) - self.element.as_matrix()).frobenius_norm();
        residual <= tol.agreement(1.0)
    }

    pub fn approx_eq(&self, other: &Projection, tol: &ToleranceConfig) -> bool {
        self.rank == other.rank && self.element.distance(&other.element) <= tol.agreement(1.0)
    }

    /// `p ⊥ q`, i.e. `pq = 0`.
    pub fn is_orthogonal_to(&self, other: &Projection, tol: &ToleranceConfig) -> bool {
        self.element.product(&other.element).frobenius_norm() <= tol.agreement(1.0)
    }

    /// Orthonormal basis of the range, as an `n × rank` matrix.
    pub fn range_basis(&self, tol: &ToleranceConfig) -> Result<Matrix> {
        let eig = sym_eigen(&self.element, tol)?;
        let n = self.dim();
        let cols: Vec<Vec<f64>> = ((n - self.rank)..n).map(|k| eig.eigenvector(k)).collect();
        Ok(Matrix::from_columns(n, &cols))
    }

    /// Mutually orthogonal atoms summing to this projection.
    pub fn atoms(&self, tol: &ToleranceConfig) -> Result<Vec<Projection>> {
        let basis = self.range_basis(tol)?;
        Ok((0..basis.cols())
            .map(|k| {
                let v = basis.column(k);
                Projection {
                    element: SymmetricElement::outer(&v),
                    rank: 1,
                }
            })
            .collect())
    }
}

impl From<Projection> for SymmetricElement {
    fn from(p: Projection) -> Self {
        p.element
    }
}

fn check(p: &Projection, q: &Projection) -> Result<()> {
    ensure_same_dim(p.element(), q.element())
}

/// `p ∨ q = (p + q)°`, with the carrier taken at the lattice threshold.
pub fn join(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    check(p, q)?;
    lattice_carrier(&(p.element() + q.element()), tol)
}

/// `p ∧ q = (p⊥ ∨ q⊥)⊥`.
pub fn meet(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    check(p, q)?;
    Ok(join(&p.ortho(), &q.ortho(), tol)?.ortho())
}

pub fn ortho(p: &Projection) -> Projection {
    p.ortho()
}

/// Join of a non-empty family, computed as one carrier of the sum.
pub fn join_all(ps: &[Projection], tol: &ToleranceConfig) -> Result<Projection> {
    let first = ps
        .first()
        .ok_or_else(|| Error::Precondition("join of an empty family needs a dimension".into()))?;
    let mut sum = first.element().clone();
    for p in &ps[1..] {
        check(first, p)?;
        sum = &sum + p.element();
    }
    lattice_carrier(&sum, tol)
}

/// Meet of a non-empty family.
pub fn meet_all(ps: &[Projection], tol: &ToleranceConfig) -> Result<Projection> {
    let complements: Vec<Projection> = ps.iter().map(Projection::ortho).collect();
    Ok(join_all(&complements, tol)?.ortho())
}

/// Atoms are exactly the rank-one projections.
pub fn is_atom(p: &Projection) -> bool {
    p.rank() == 1
}

/// `u p u = q`.
pub fn exchanged_by(p: &Projection, q: &Projection, u: &Symmetry, tol: &ToleranceConfig) -> bool {
    if p.dim() != q.dim() || p.dim() != u.dim() {
        return false;
    }
    u.conjugate(p.element()).distance(q.element()) <= tol.agreement(1.0)
}

/// Marsden commutator `(p∨q) ∧ (p∨q⊥) ∧ (p⊥∨q) ∧ (p⊥∨q⊥)`.
pub fn marsden_commutator(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    check(p, q)?;
    let (pc, qc) = (p.ortho(), q.ortho());
    let joins = [
        join(p, q, tol)?,
        join(p, &qc, tol)?,
        join(&pc, q, tol)?,
        join(&pc, &qc, tol)?,
    ];
    meet_all(&joins, tol)
}

/// Drops `0`, `1`, repeats, and orthocomplements of earlier members; none of
/// these change the commutator.
pub(crate) fn reduce_commutator_set(set: &[Projection], tol: &ToleranceConfig) -> Vec<Projection> {
    let mut kept: Vec<Projection> = Vec::with_capacity(set.len());
    for w in set {
        if w.is_zero() || w.is_identity() {
            continue;
        }
        let wc = w.ortho();
        if kept.iter().any(|k| k.approx_eq(w, tol) || k.approx_eq(&wc, tol)) {
            continue;
        }
        kept.push(w.clone());
    }
    kept
}

/// Commutator `[F]` of a finite set of projections in dimension `n`, with
/// the default cap.
pub fn finite_set_commutator(n: usize, set: &[Projection], tol: &ToleranceConfig) -> Result<Projection> {
    finite_set_commutator_with_cap(n, set, DEFAULT_SET_CAP, tol)
}

/// `[F] = ⋀_{d ∈ {±1}^n} (w₁^{d₁} ∨ … ∨ wₙ^{dₙ})`, `[∅] = 0`.
///
/// Sign vectors are visited in Gray-code order so each step updates the
/// running sum `Σ wᵢ^{dᵢ}` by a single `±(1 - 2wᵢ)`. The meet of the joins is
/// taken as `(Σ J_d⊥)°⊥`.
pub fn finite_set_commutator_with_cap(
    n: usize,
    set: &[Projection],
    cap: usize,
    tol: &ToleranceConfig,
) -> Result<Projection> {
    for w in set {
        if w.dim() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: w.dim(),
            });
        }
    }
    let f = reduce_commutator_set(set, tol);
    if f.len() > cap {
        return Err(Error::ResourceLimit {
            size: f.len(),
            cap,
        });
    }
    if f.len() < 2 {
        return Ok(Projection::zero(n));
    }

    let one = SymmetricElement::identity(n);
    let flips: Vec<SymmetricElement> = f.iter().map(|w| &one - &w.element().scale(2.0)).collect();
    let mut sum = f
        .iter()
        .skip(1)
        .fold(f[0].element().clone(), |acc, w| &acc + w.element());
    let mut positive = vec![true; f.len()];
    let mut complements = SymmetricElement::zeros(n);

    for g in 0u64..(1u64 << f.len()) {
        if g > 0 {
            let i = g.trailing_zeros() as usize;
            sum = if positive[i] {
                &sum + &flips[i]
            } else {
                &sum - &flips[i]
            };
            positive[i] = !positive[i];
        }
        let joined = lattice_carrier(&sum, tol)?;
        complements = &complements + joined.ortho().element();
    }
    Ok(lattice_carrier(&complements, tol)?.ortho())
}
