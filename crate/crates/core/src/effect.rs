//! Effects `0 ≤ e ≤ 1`, their largest subprojections, and components in
//! corner algebras `qAq`.

use crate::calculus::carrier;
use crate::error::{Error, Result};
use crate::lattice::Projection;
use crate::linalg::{commutes, ensure_same_dim, sym_eigen, Matrix, SymmetricElement};
use crate::tolerance::ToleranceConfig;

/// A symmetric element with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    element: SymmetricElement,
}

impl Effect {
    /// Validates `-psd_eps ≤ spectrum ≤ 1 + psd_eps`; eigenvalues in the
    /// slack are clamped into `[0, 1]`.
    pub fn new(a: SymmetricElement, tol: &ToleranceConfig) -> Result<Self> {
        let eig = sym_eigen(&a, tol)?;
        let slack = tol.psd_threshold(eig.spectral_radius());
        if let Some(bad) = eig
            .eigenvalues
            .iter()
            .find(|&&l| l < -slack || l > 1.0 + slack)
        {
            return Err(Error::InvalidEffect(format!(
                "eigenvalue {bad} outside [0, 1] (0 ≤ e ≤ 1 fails)"
            )));
        }
        if eig.eigenvalues.iter().all(|&l| (0.0..=1.0).contains(&l)) {
            return Ok(Self { element: a });
        }
        Ok(Self {
            element: eig.map(|l| l.clamp(0.0, 1.0)),
        })
    }

    /// Wraps an element already known to be an effect.
    pub(crate) fn trusted(element: SymmetricElement) -> Self {
        Self { element }
    }

    pub fn zero(n: usize) -> Self {
        Self::trusted(SymmetricElement::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self::trusted(SymmetricElement::identity(n))
    }

    /// `λ·1` for `λ ∈ [0, 1]`.
    pub fn scalar(n: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidEffect(format!("scalar {lambda} outside [0, 1]")));
        }
        Ok(Self::trusted(SymmetricElement::identity(n).scale(lambda)))
    }

    pub fn element(&self) -> &SymmetricElement {
        &self.element
    }

    pub fn into_element(self) -> SymmetricElement {
        self.element
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }
}

impl From<Projection> for Effect {
    fn from(p: Projection) -> Self {
        Effect::trusted(p.into_element())
    }
}

impl From<&Projection> for Effect {
    fn from(p: &Projection) -> Self {
        Effect::trusted(p.element().clone())
    }
}

/// `e⊥ = 1 - e`.
pub fn orthosupplement(e: &Effect) -> Effect {
    Effect::trusted(&SymmetricElement::identity(e.dim()) - e.element())
}

/// `z`: largest projection below `e`; `t`: largest projection below `e⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubprojectionPair {
    pub z: Projection,
    pub t: Projection,
}

/// `z = ((e⊥)°)⊥` and `t = (e°)⊥`, cross-checked against the eigenvalue-1
/// and eigenvalue-0 eigenspaces of `e`. The carrier route is returned.
pub fn largest_subprojections(e: &Effect, tol: &ToleranceConfig) -> Result<SubprojectionPair> {
    let z = carrier(orthosupplement(e).element(), tol)?.ortho();
    let t = carrier(e.element(), tol)?.ortho();

    let eig = sym_eigen(e.element(), tol)?;
    let near_one = tol.zero_threshold(eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max((1.0 - l).abs())));
    let near_zero = tol.zero_threshold(eig.spectral_radius());
    let (z_elem, z_rank) = eig.projector(|_, l| (1.0 - l).abs() <= near_one);
    let (t_elem, t_rank) = eig.projector(|_, l| l.abs() <= near_zero);
    let z_eig = Projection::from_parts(z_elem, z_rank);
    let t_eig = Projection::from_parts(t_elem, t_rank);
    if !z.approx_eq(&z_eig, tol) {
        return Err(Error::violation(
            "largest subprojection z: carrier and eigenspace routes disagree",
            z.element().distance(z_eig.element()),
        ));
    }
    if !t.approx_eq(&t_eig, tol) {
        return Err(Error::violation(
            "largest subprojection t: carrier and eigenspace routes disagree",
            t.element().distance(t_eig.element()),
        ));
    }
    Ok(SubprojectionPair { z, t })
}

/// An effect is projection-free when no nonzero projection lies below it.
pub fn is_projection_free(e: &Effect, tol: &ToleranceConfig) -> Result<bool> {
    Ok(largest_subprojections(e, tol)?.z.is_zero())
}

/// Component `a_q = qaq` of an element commuting with `q`.
pub fn restrict_to_corner(
    a: &SymmetricElement,
    q: &Projection,
    tol: &ToleranceConfig,
) -> Result<SymmetricElement> {
    ensure_same_dim(a, q.element())?;
    if !commutes(a, q.element(), tol)? {
        return Err(Error::Precondition(
            "restriction to qAq needs an element commuting with q".into(),
        ));
    }
    Ok(a.sandwich(q.element()))
}

/// The corner algebra `qAq`, realized in coordinates of an orthonormal basis
/// `V` of the range of `q`: `a ↦ Vᵀ a V` and back via `b ↦ V b Vᵀ`.
#[derive(Debug, Clone)]
pub struct Corner {
    q: Projection,
    basis: Matrix,
}

impl Corner {
    pub fn new(q: &Projection, tol: &ToleranceConfig) -> Result<Self> {
        Ok(Self {
            q: q.clone(),
            basis: q.range_basis(tol)?,
        })
    }

    pub fn unit(&self) -> &Projection {
        &self.q
    }

    /// Dimension of the corner, the rank of `q`.
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    /// Local coordinates of `qaq`; `None` for the zero corner.
    pub fn compress(&self, a: &SymmetricElement) -> Option<SymmetricElement> {
        (!self.is_trivial()).then(|| a.congruence(&self.basis))
    }

    /// Embeds a local element back as an element of `qAq ⊆ A`.
    pub fn lift(&self, local: &SymmetricElement) -> SymmetricElement {
        self.basis
            .matmul(local.as_matrix())
            .matmul(&self.basis.transpose())
            .symmetrize()
    }

    pub fn compress_projection(&self, p: &Projection, tol: &ToleranceConfig) -> Result<Option<Projection>> {
        self.compress(p.element())
            .map(|local| Projection::new(local, tol))
            .transpose()
    }

    pub fn compress_effect(&self, e: &Effect, tol: &ToleranceConfig) -> Result<Option<Effect>> {
        self.compress(e.element())
            .map(|local| Effect::new(local, tol))
            .transpose()
    }

    pub fn lift_projection(&self, local: &Projection) -> Projection {
        Projection::from_parts(self.lift(local.element()), local.rank())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::psd_leq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn validation() {
        let t = tol();
        assert!(Effect::new(SymmetricElement::diag(&[0.2, 1.0, 0.0]), &t).is_ok());
        assert!(matches!(
            Effect::new(SymmetricElement::diag(&[1.2, 0.0]), &t),
            Err(Error::InvalidEffect(_))
        ));
        assert!(Effect::new(SymmetricElement::diag(&[-0.1, 0.5]), &t).is_err());
        let clamped = Effect::new(SymmetricElement::diag(&[-1e-12, 1.0 + 1e-12]), &t).unwrap();
        assert!(clamped
            .element()
            .distance(&SymmetricElement::diag(&[0.0, 1.0]))
            < 1e-15);
    }

    #[test]
    fn orthosupplement_examples() {
        let t = tol();
        assert_eq!(orthosupplement(&Effect::zero(2)).element(), &SymmetricElement::identity(2));
        let p = Projection::onto_vector(&[1.0, -1.0, 3.0]).unwrap();
        let pe = Effect::from(&p);
        assert!(orthosupplement(&pe).element().distance(p.ortho().element()) < 1e-15);
        let e = Effect::new(SymmetricElement::diag(&[0.25, 0.5, 0.75]), &t).unwrap();
        assert_eq!(
            orthosupplement(&e).element(),
            &SymmetricElement::diag(&[0.75, 0.5, 0.25])
        );
        assert_eq!(orthosupplement(&orthosupplement(&e)), e);
    }

    #[test]
    fn largest_subprojections_examples() {
        let t = tol();
        let p = Projection::onto_vector(&[1.0, 2.0, 0.0]).unwrap();
        let pair = largest_subprojections(&Effect::from(&p), &t).unwrap();
        assert!(pair.z.approx_eq(&p, &t));
        assert!(pair.t.approx_eq(&p.ortho(), &t));

        let e = Effect::new(SymmetricElement::diag(&[0.25, 0.5, 0.75]), &t).unwrap();
        let pair = largest_subprojections(&e, &t).unwrap();
        assert!(pair.z.is_zero() && pair.t.is_zero());

        let e = Effect::new(SymmetricElement::diag(&[1.0, 0.5, 0.0]), &t).unwrap();
        let pair = largest_subprojections(&e, &t).unwrap();
        assert!(pair.z.approx_eq(&Projection::coordinate(3, &[0]), &t));
        assert!(pair.t.approx_eq(&Projection::coordinate(3, &[2]), &t));
        assert!(psd_leq(pair.z.element(), e.element(), &t).unwrap());
        assert!(pair.z.is_orthogonal_to(&pair.t, &t));
    }

    #[test]
    fn projection_free_examples() {
        let t = tol();
        assert!(is_projection_free(&Effect::scalar(3, 0.5).unwrap(), &t).unwrap());
        let p = Projection::coordinate(3, &[1]);
        assert!(!is_projection_free(&Effect::from(&p), &t).unwrap());
        let e = Effect::new(SymmetricElement::diag(&[1.0, 0.3, 1.0]), &t).unwrap();
        let z = largest_subprojections(&e, &t).unwrap().z;
        let rest = Effect::new(e.element() - z.element(), &t).unwrap();
        assert!(is_projection_free(&rest, &t).unwrap());
    }

    #[test]
    fn corner_restriction_examples() {
        let t = tol();
        let e = SymmetricElement::diag(&[0.25, 0.5, 0.75]);
        assert_eq!(restrict_to_corner(&e, &Projection::identity(3), &t).unwrap(), e);
        assert_eq!(
            restrict_to_corner(&e, &Projection::zero(3), &t).unwrap().frobenius_norm(),
            0.0
        );
        let q = Projection::coordinate(3, &[0, 1]);
        assert_eq!(
            restrict_to_corner(&e, &q, &t).unwrap(),
            SymmetricElement::diag(&[0.25, 0.5, 0.0])
        );
        let line = Projection::onto_vector(&[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            restrict_to_corner(&e, &line, &t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn corner_round_trip() {
        let t = tol();
        let q = Projection::onto_vector(&[1.0, 1.0, 0.0]).unwrap();
        let corner = Corner::new(&q, &t).unwrap();
        assert_eq!(corner.dim(), 1);
        let a = SymmetricElement::diag(&[2.0, 2.0, 5.0]);
        let local = corner.compress(&a).unwrap();
        assert!((local.get(0, 0) - 2.0).abs() < 1e-14);
        assert!(corner.lift(&local).distance(&a.sandwich(q.element())) < 1e-14);
        assert!(Corner::new(&Projection::zero(3), &t).unwrap().compress(&a).is_none());
    }
}
