//! Closed-form infima `e ∧ p⊥` for an atom `p`, folded over atoms to get
//! `e ∧ q` for any projection `q`.

use serde::Serialize;

use crate::cbs::{identity_limit, off_diagonal};
use crate::effect::{orthosupplement, Effect};
use crate::error::{Error, Result};
use crate::lattice::{is_atom, Projection};
use crate::linalg::{ensure_same_dim, psd_leq, sym_eigen, Matrix, SymmetricElement};
use crate::tolerance::ToleranceConfig;

/// Which side of the `α = 0` dichotomy a computation took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfimumBranch {
    AlphaZero,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomInfimumRecord {
    /// `pep = αp`
    pub alpha: f64,
    /// `a = α⁻¹(pep⊥ + p⊥ep)`, present when `α > 0`.
    pub a_element: Option<SymmetricElement>,
    pub infimum: Effect,
    pub branch: InfimumBranch,
}

fn require_atom(p: &Projection) -> Result<()> {
    if is_atom(p) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "expected an atom, got a projection of rank {}",
            p.rank()
        )))
    }
}

fn unit_vector(p: &Projection, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    Ok(p.range_basis(tol)?.column(0))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `α` with `pep = αp`, read off as `vᵀev` for a unit vector `v` spanning `p`.
pub fn atom_mean(p: &Projection, e: &Effect, tol: &ToleranceConfig) -> Result<f64> {
    require_atom(p)?;
    ensure_same_dim(p.element(), e.element())?;
    let v = unit_vector(p, tol)?;
    let alpha = dot(&v, &e.element().as_matrix().mul_vec(&v));
    let r = e.element().sandwich(p.element()).distance(&p.element().scale(alpha));
    if r > tol.agreement(e.element().frobenius_norm()) {
        return Err(Error::violation("pep = αp", r));
    }
    Ok(alpha.clamp(0.0, 1.0))
}

/// Tolerance for identities that divide by `α`.
fn alpha_scaled_limit(e: &Effect, alpha: f64, tol: &ToleranceConfig) -> f64 {
    identity_limit(tol, 1.0 + e.element().frobenius_norm()) * alpha.recip().max(1.0)
}

/// `y e y*` with `y = p⊥(1 - a)`, `y* = (1 - a)p⊥`.
fn y_conjugate(p: &Projection, a: &SymmetricElement, f: &SymmetricElement) -> Matrix {
    let n = p.dim();
    let one_minus_a = (&SymmetricElement::identity(n) - a).into_matrix();
    let pc = p.ortho().into_element().into_matrix();
    let y = pc.matmul(&one_minus_a);
    let y_star = one_minus_a.matmul(&pc);
    y.matmul(f.as_matrix()).matmul(&y_star)
}

/// `e` with the eigenvalues at or below the zero threshold set to zero.
///
/// `α = vᵀev` is quadratic in the weight of `e` on `v`, so when that weight
/// is small, eigenvalues at rounding level shift `α` by a large relative
/// amount. On the cleaned element `α = Σλᵢ(uᵢ·v)²` is a sum of non-negative
/// terms and keeps its relative accuracy.
fn numerical_part(e: &Effect, tol: &ToleranceConfig) -> Result<SymmetricElement> {
    let eig = sym_eigen(e.element(), tol)?;
    let cut = tol.zero_threshold(eig.spectral_radius());
    Ok(eig.map(|l| if l > cut { l } else { 0.0 }))
}

/// `e ∧ p⊥ = e - α⁻¹epe` for an atom `p` (or `e` itself when `α = 0`).
///
/// The branch is decided by `‖ev‖` (`v` spanning `p`), which is linear in
/// the weight of `e` on `v`, rather than by `α`. The general branch works on
/// [`numerical_part`] of `e` and is cross-checked against
/// `(s² - α⁻¹b²)p⊥` and `y e y*`. Those identities divide by `α`, so their
/// tolerance grows like `1/α`.
pub fn inf_with_atom_complement(p: &Projection, e: &Effect, tol: &ToleranceConfig) -> Result<AtomInfimumRecord> {
    let mean = atom_mean(p, e, tol)?;
    let pc = p.ortho();
    let v = unit_vector(p, tol)?;
    let clean = numerical_part(e, tol)?;
    let ev = clean.as_matrix().mul_vec(&v);
    if dot(&ev, &ev).sqrt() <= tol.zero_threshold(e.element().norm()) {
        return Ok(AtomInfimumRecord {
            alpha: mean,
            a_element: None,
            infimum: e.clone(),
            branch: InfimumBranch::AlphaZero,
        });
    }

    let alpha = dot(&v, &ev);
    let epe = SymmetricElement::outer(&ev);
    let inf = &clean - &epe.scale(alpha.recip());
    let limit = alpha_scaled_limit(e, alpha, tol);

    let offdiag = off_diagonal(p, &Effect::trusted(clean.clone()));
    let s2 = &(&SymmetricElement::identity(p.dim()) - &clean).sandwich(p.element()) + &clean.sandwich(pc.element());
    let b2 = offdiag.square();
    let other = (&s2 - &b2.scale(alpha.recip())).product(pc.element());
    let r = (inf.as_matrix() - &other).frobenius_norm();
    if r > limit {
        return Err(Error::violation("e - α⁻¹epe = (s² - α⁻¹b²)p⊥", r));
    }

    let a = offdiag.scale(alpha.recip());
    let r = (inf.as_matrix() - &y_conjugate(p, &a, &clean)).frobenius_norm();
    if r > limit {
        return Err(Error::violation("y e y* = e - α⁻¹epe", r));
    }

    Ok(AtomInfimumRecord {
        alpha,
        a_element: Some(a),
        infimum: Effect::new(inf, tol)?,
        branch: InfimumBranch::General,
    })
}

/// For `0 ≤ f ≤ p⊥`, `f ≤ e` implies `y f y* = f` and `f ≤ e ∧ p⊥`.
///
/// Returns the residual `‖y f y* - f‖_F` when `α > 0` (0 otherwise) together
/// with whether `f ≤ e ∧ p⊥` holds.
pub fn maximality_check(
    p: &Projection,
    e: &Effect,
    f: &Effect,
    tol: &ToleranceConfig,
) -> Result<(f64, bool)> {
    ensure_same_dim(e.element(), f.element())?;
    if !psd_leq(f.element(), e.element(), tol)? || !psd_leq(f.element(), p.ortho().element(), tol)? {
        return Err(Error::Precondition("maximality needs f ≤ e and f ≤ p⊥".into()));
    }
    let rec = inf_with_atom_complement(p, e, tol)?;
    let residual = match &rec.a_element {
        Some(a) => (&y_conjugate(p, a, f.element()) - f.element().as_matrix()).frobenius_norm(),
        None => 0.0,
    };
    Ok((residual, psd_leq(f.element(), rec.infimum.element(), tol)?))
}

/// Residuals of the identities tying `α`, `a`, `b`, `s` together for an atom
/// `p` with `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomIdentityResiduals {
    /// `e = αp + αa + s²p⊥`
    pub decomposition: f64,
    /// `α²a² = b²`
    pub a_squared: f64,
    /// `epe = α²p + α²a + b²p⊥`
    pub epe: f64,
    /// `(ap)² = 0`
    pub ap_nilpotent: f64,
    /// `(pa)² = 0`
    pub pa_nilpotent: f64,
}

impl AtomIdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.decomposition,
            self.a_squared,
            self.epe,
            self.ap_nilpotent,
            self.pa_nilpotent,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `None` when `α = 0`, where `a` is undefined.
pub fn atom_identity_residuals(
    p: &Projection,
    e: &Effect,
    tol: &ToleranceConfig,
) -> Result<Option<AtomIdentityResiduals>> {
    let rec = inf_with_atom_complement(p, e, tol)?;
    let Some(a) = rec.a_element else {
        return Ok(None);
    };
    let alpha = rec.alpha;
    let pp = p.element().as_matrix();
    let pc = p.ortho();
    let s2 = &orthosupplement(e).element().sandwich(p.element()) + &e.element().sandwich(pc.element());
    let b2 = off_diagonal(p, e).square();
    let s2pc = s2.product(pc.element());
    let b2pc = b2.product(pc.element());

    let decomposition = &(&pp.scale(alpha) + &a.as_matrix().scale(alpha)) + &s2pc;
    let epe_formula = &(&pp.scale(alpha * alpha) + &a.as_matrix().scale(alpha * alpha)) + &b2pc;
    let epe = p.element().sandwich(e.element());
    let ap = a.as_matrix().matmul(pp);
    let pa = pp.matmul(a.as_matrix());

    Ok(Some(AtomIdentityResiduals {
        decomposition: (e.element().as_matrix() - &decomposition).frobenius_norm(),
        a_squared: a.square().scale(alpha * alpha).distance(&b2),
        epe: (epe.as_matrix() - &epe_formula).frobenius_norm(),
        ap_nilpotent: ap.matmul(&ap).frobenius_norm(),
        pa_nilpotent: pa.matmul(&pa).frobenius_norm(),
    }))
}

/// `e ∧ (w₁ ∨ … ∨ w_m)⊥` for mutually orthogonal atoms `wᵢ`, folded left to
/// right through [`inf_with_atom_complement`].
pub fn inf_with_atom_sequence(e: &Effect, atoms: &[Projection], tol: &ToleranceConfig) -> Result<Effect> {
    for (i, w) in atoms.iter().enumerate() {
        require_atom(w)?;
        ensure_same_dim(e.element(), w.element())?;
        if atoms[..i].iter().any(|u| !u.is_orthogonal_to(w, tol)) {
            return Err(Error::Precondition("atoms must be mutually orthogonal".into()));
        }
    }
    atoms.iter().try_fold(e.clone(), |acc, w| {
        Ok(inf_with_atom_complement(w, &acc, tol)?.infimum)
    })
}

/// `e ∧ q`, with `q⊥` split into atoms along its eigenbasis.
pub fn inf_with_projection(e: &Effect, q: &Projection, tol: &ToleranceConfig) -> Result<Effect> {
    ensure_same_dim(e.element(), q.element())?;
    if q.is_identity() {
        return Ok(e.clone());
    }
    let inf = inf_with_atom_sequence(e, &q.ortho().atoms(tol)?, tol)?;
    if !psd_leq(inf.element(), e.element(), tol)? || !psd_leq(inf.element(), q.element(), tol)? {
        return Err(Error::violation(
            "e ∧ q ≤ e and e ∧ q ≤ q",
            inf.element().commuting_product(&q.ortho().into_element()).frobenius_norm(),
        ));
    }
    Ok(inf)
}

/// Bisection step target for [`atom_lower_bound_oracle`].
pub const ORACLE_RESOLUTION: f64 = 1e-12;

/// Largest `t ∈ [0, 1]` with `e - t·g ⪰ 0`, for positive `g`, by bisection on
/// the least eigenvalue.
///
/// The test runs on the range of `e + g` (eigenvalues above rounding level):
/// on the common kernel of `e` and `g` the least eigenvalue is zero for
/// every `t` and its computed sign is noise.
/// On that range the test is exact, `λ_min ≥ 0` with no slack. Near a
/// tangency `λ_min` moves with `t` only at rate `(g·n)²` (`n` the kernel
/// direction of `e - t*g`), so a slack `σ` would shift the result by
/// `σ/(g·n)²`.
fn largest_fitting_scale(e: &SymmetricElement, g: &SymmetricElement, tol: &ToleranceConfig) -> Result<f64> {
    let sum = sym_eigen(&(e + g), tol)?;
    let noise = 64.0 * f64::EPSILON * (1.0 + sum.spectral_radius());
    let basis = sum.basis(|l| l > noise);
    if basis.cols() == 0 {
        return Ok(1.0);
    }
    let fits = |t: f64| -> Result<bool> {
        let local = (e - &g.scale(t)).congruence(&basis);
        Ok(sym_eigen(&local, tol)?.min_eigenvalue() >= 0.0)
    };
    if fits(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > ORACLE_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `β* = max{β ∈ [0,1] : e - βw ⪰ 0}` by bisection on the least eigenvalue.
/// Everything below an atom `w` is a multiple of `w`, so `β*w = e ∧ w`.
pub fn atom_lower_bound_oracle(e: &Effect, w: &Projection, tol: &ToleranceConfig) -> Result<f64> {
    require_atom(w)?;
    ensure_same_dim(e.element(), w.element())?;
    largest_fitting_scale(e.element(), w.element(), tol)
}

/// Largest `t ≤ 1/‖g‖` with `t·g ≤ e`, where `g = p⊥hp⊥`; `None` if `g = 0`.
///
/// The result touches the boundary of `{f : f ≤ e}` inside `p⊥Ap⊥`, which
/// makes it a sharp test of maximality for `e ∧ p⊥`.
pub fn boundary_lower_bound(
    e: &Effect,
    p: &Projection,
    h: &SymmetricElement,
    tol: &ToleranceConfig,
) -> Result<Option<Effect>> {
    ensure_same_dim(e.element(), h)?;
    let g = h.sandwich(p.ortho().element());
    let eig = sym_eigen(&g, tol)?;
    if eig.min_eigenvalue() < -tol.psd_threshold(eig.spectral_radius()) {
        return Err(Error::Precondition("boundary direction must be positive".into()));
    }
    let norm = eig.spectral_radius();
    if norm <= tol.zero_threshold(0.0) {
        return Ok(None);
    }
    let g = g.scale(norm.recip());
    let t = largest_fitting_scale(e.element(), &g, tol)?;
    Ok(Some(Effect::new(g.scale(t), tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn r3() -> (Projection, Effect) {
        (
            Projection::onto_vector(&[1.0, 1.0, 1.0]).unwrap(),
            Effect::new(SymmetricElement::diag(&[0.25, 0.5, 0.75]), &tol()).unwrap(),
        )
    }

    #[test]
    fn atom_mean_examples() {
        let t = tol();
        let (p, e) = r3();
        assert!((atom_mean(&p, &Effect::identity(3), &t).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(atom_mean(&p, &Effect::zero(3), &t).unwrap(), 0.0);
        assert!((atom_mean(&p, &e, &t).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            atom_mean(&Projection::coordinate(3, &[0, 1]), &e, &t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn atom_infimum_examples() {
        let t = tol();
        let p = Projection::coordinate(3, &[0]);
        let below = Effect::new(SymmetricElement::diag(&[0.0, 0.4, 0.9]), &t).unwrap();
        let rec = inf_with_atom_complement(&p, &below, &t).unwrap();
        assert_eq!(rec.branch, InfimumBranch::AlphaZero);
        assert_eq!(rec.infimum, below);

        let rec = inf_with_atom_complement(&p, &Effect::identity(3), &t).unwrap();
        assert!(rec.infimum.element().distance(p.ortho().element()) < 1e-14);

        let (p, e) = r3();
        let rec = inf_with_atom_complement(&p, &e, &t).unwrap();
        assert_eq!(rec.branch, InfimumBranch::General);
        assert!((rec.infimum.element().trace() - 11.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn projection_infimum_examples() {
        let t = tol();
        let (_, e) = r3();
        assert_eq!(inf_with_projection(&e, &Projection::identity(3), &t).unwrap(), e);
        let zero = inf_with_projection(&e, &Projection::zero(3), &t).unwrap();
        assert!(zero.element().frobenius_norm() < 1e-12);

        let q = Projection::coordinate(3, &[0, 2]);
        let inf = inf_with_projection(&e, &q, &t).unwrap();
        assert!(inf.element().distance(&e.element().commuting_product(q.element())) < 1e-12);
    }

    #[test]
    fn oracle_examples() {
        let t = tol();
        let w = Projection::onto_vector(&[1.0, 1.0]).unwrap();
        assert_eq!(atom_lower_bound_oracle(&Effect::identity(2), &w, &t).unwrap(), 1.0);
        let half = atom_lower_bound_oracle(&Effect::scalar(2, 0.5).unwrap(), &w, &t).unwrap();
        assert!((half - 0.5).abs() < 1e-11);

        let e = Effect::new(SymmetricElement::diag(&[1.0, 0.25]), &t).unwrap();
        let beta = atom_lower_bound_oracle(&e, &w, &t).unwrap();
        let closed = inf_with_atom_complement(&w.ortho(), &e, &t).unwrap();
        assert!(closed.infimum.element().distance(&w.element().scale(beta)) < 1e-9);
        // β* = 1/(wᵀe⁻¹w) = 2/5
        assert!((beta - 0.4).abs() < 1e-11);
    }

    #[test]
    fn maximality_on_r3() {
        let t = tol();
        let (p, e) = r3();
        let h = SymmetricElement::diag(&[1.0, 2.0, 0.5]);
        let f = boundary_lower_bound(&e, &p, &h, &t).unwrap().unwrap();
        let (res, below) = maximality_check(&p, &e, &f, &t).unwrap();
        assert!(res < 1e-10);
        assert!(below);
    }

    #[test]
    fn atom_identities_on_r3() {
        let t = tol();
        let (p, e) = r3();
        let r = atom_identity_residuals(&p, &e, &t).unwrap().unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
    }
}
