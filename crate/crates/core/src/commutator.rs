//! The pair commutator `[p, e]`: the commutator of `p` together with the
//! spectral cuts of `e`, the smallest projection splitting the pair into a
//! commuting corner and a totally noncompatible corner.

use crate::calculus::{carrier, spectral_resolution};
use crate::cbs::{cbs_decompose, commutator_effect, CbsDecomposition};
use crate::effect::{Corner, Effect};
use crate::error::{Error, Result};
use crate::lattice::{finite_set_commutator, join, meet, Projection};
use crate::linalg::{commutes, ensure_same_dim, psd_leq, Matrix};
use crate::tolerance::ToleranceConfig;

/// `[p, e] = [{p} ∪ {cuts of e}]`, with the cuts `0` and `1` left out.
pub fn pair_commutator(p: &Projection, e: &Effect, tol: &ToleranceConfig) -> Result<Projection> {
    ensure_same_dim(p.element(), e.element())?;
    let res = spectral_resolution(e.element(), tol)?;
    let mut set = vec![p.clone()];
    set.extend(res.proper_cuts().cloned());
    finite_set_commutator(p.dim(), &set, tol)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonalizes `v` against `basis` (two passes) and returns it normalized
/// if anything above `floor` survives.
fn extend_basis(basis: &[Vec<f64>], mut v: Vec<f64>, floor: f64) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    let norm = dot(&v, &v).sqrt();
    (norm > floor).then(|| v.into_iter().map(|x| x / norm).collect())
}

/// `[p, e]` as the projection onto the smallest subspace containing the range
/// of `b°` and invariant under `p` and `e`.
///
/// Invariance under `e` is the same as invariance under its eigenprojections,
/// which are polynomials in `e`. Those are used as generators instead of `e`
/// itself: multiplying by `e` separates two eigendirections only in
/// proportion to the gap between their eigenvalues, so nearly equal
/// eigenvalues would hide directions. A new direction counts when its
/// orthogonal residual exceeds the square root of the lattice threshold, the
/// angular resolution of the joins in [`pair_commutator`].
pub fn pair_commutator_via_closure(p: &Projection, e: &Effect, tol: &ToleranceConfig) -> Result<Projection> {
    ensure_same_dim(p.element(), e.element())?;
    let n = p.dim();
    let (b, _) = commutator_effect(p, e, tol)?;
    let start = carrier(b.element(), tol)?;
    let seed = start.range_basis(tol)?;
    let floor = tol.lattice_threshold(1.0).sqrt();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..seed.cols() {
        if let Some(v) = extend_basis(&basis, seed.column(k), floor) {
            basis.push(v);
        }
    }
    let cuts = spectral_resolution(e.element(), tol)?.cuts;
    let mut generators = vec![p.element().as_matrix().clone()];
    for (k, cut) in cuts.iter().enumerate() {
        let below = match k {
            0 => Matrix::zeros(n, n),
            _ => cuts[k - 1].element().as_matrix().clone(),
        };
        generators.push(cut.element().as_matrix() - &below);
    }
    let mut next = 0;
    while next < basis.len() {
        let v = basis[next].clone();
        for g in &generators {
            if let Some(w) = extend_basis(&basis, g.mul_vec(&v), floor) {
                basis.push(w);
                if basis.len() > n {
                    return Err(Error::NumericalFailure {
                        sweeps: basis.len(),
                        residual: floor,
                    });
                }
            }
        }
        next += 1;
    }
    Ok(Projection::from_orthonormal_columns(&Matrix::from_columns(n, &basis)))
}

/// `vCp`, `vCe` and `(p ∧ v⊥) C (e ∧ v⊥)`, where `e ∧ v⊥ = ev⊥` because `v`
/// commutes with `e`.
pub fn satisfies_commutator_conditions(
    p: &Projection,
    e: &Effect,
    v: &Projection,
    tol: &ToleranceConfig,
) -> Result<bool> {
    if !commutes(v.element(), p.element(), tol)? || !commutes(v.element(), e.element(), tol)? {
        return Ok(false);
    }
    let vc = v.ortho();
    let p_part = meet(p, &vc, tol)?;
    let e_part = e.element().commuting_product(vc.element());
    commutes(p_part.element(), &e_part, tol)
}

/// Candidates `v` for the minimality half of the characterization. Every one
/// that satisfies the three conditions has to dominate `r`.
fn minimality_candidates(
    d: &CbsDecomposition,
    r: &Projection,
    tol: &ToleranceConfig,
) -> Result<Vec<Projection>> {
    let (p, e) = (&d.p, &d.e);
    let mut out = vec![
        d.s_carrier.clone(),
        d.c_carrier.clone(),
        meet(&d.c_carrier, &d.s_carrier, tol)?,
        d.b_carrier.clone(),
        pair_commutator_via_closure(p, e, tol)?,
    ];
    // projections commuting with both p and e
    let pc = p.ortho();
    let mut commuting = vec![d.z.clone(), d.t.clone()];
    for x in [p, &pc] {
        for y in [&d.z, &d.t] {
            commuting.push(meet(x, y, tol)?);
        }
    }
    for cut in spectral_resolution(e.element(), tol)?.proper_cuts() {
        if commutes(cut.element(), p.element(), tol)? {
            commuting.push(cut.clone());
            commuting.push(cut.ortho());
        }
    }
    for w in &commuting {
        out.push(join(r, w, tol)?);
        out.push(meet(r, w, tol)?);
    }
    Ok(out)
}

/// Checks that `r` satisfies the defining conditions of `[p, e]` and lies
/// below every candidate that also satisfies them.
pub fn characterization_check(p: &Projection, e: &Effect, r: &Projection, tol: &ToleranceConfig) -> Result<bool> {
    ensure_same_dim(p.element(), r.element())?;
    if !satisfies_commutator_conditions(p, e, r, tol)? {
        return Ok(false);
    }
    let d = cbs_decompose(p, e, tol)?;
    for v in minimality_candidates(&d, r, tol)? {
        if satisfies_commutator_conditions(p, e, &v, tol)? && !r.leq(&v, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A pair compressed into a corner algebra, in local coordinates. Both parts
/// are `None` for the zero corner.
#[derive(Debug, Clone)]
pub struct CornerPair {
    pub corner: Corner,
    pub p: Option<Projection>,
    pub e: Option<Effect>,
}

impl CornerPair {
    fn new(p: &Projection, e: &Effect, q: &Projection, tol: &ToleranceConfig) -> Result<Self> {
        let corner = Corner::new(q, tol)?;
        Ok(Self {
            p: corner.compress_projection(p, tol)?,
            e: corner.compress_effect(e, tol)?,
            corner,
        })
    }

    /// Operator norm of `p_q e_q - e_q p_q`; 0 for the zero corner.
    pub fn commutation_residual(&self) -> f64 {
        match (&self.p, &self.e) {
            (Some(p), Some(e)) => p.element().commutator(e.element()).operator_norm(),
            _ => 0.0,
        }
    }

    /// The commutator of the local pair, lifted back into `A`.
    pub fn commutator(&self, tol: &ToleranceConfig) -> Result<Projection> {
        match (&self.p, &self.e) {
            (Some(p), Some(e)) => Ok(self.corner.lift_projection(&pair_commutator(p, e, tol)?)),
            _ => Ok(Projection::zero(self.corner.unit().dim())),
        }
    }
}

/// `(p_r, e_r)` in `rAr` and `(p_{r⊥}, e_{r⊥})` in `r⊥Ar⊥`, `r = [p, e]`.
#[derive(Debug, Clone)]
pub struct Splitting {
    pub r: Projection,
    pub noncompatible: CornerPair,
    pub compatible: CornerPair,
    /// Commutation residual of the `r⊥` corner pair.
    pub compatible_residual: f64,
}

/// Splits the pair along `r = [p, e]` and checks that the `r⊥` corner pair
/// commutes and that the `r` corner pair is totally noncompatible.
pub fn split_by_commutator(p: &Projection, e: &Effect, tol: &ToleranceConfig) -> Result<Splitting> {
    let r = pair_commutator(p, e, tol)?;
    split_along(p, e, r, tol)
}

fn split_along(p: &Projection, e: &Effect, r: Projection, tol: &ToleranceConfig) -> Result<Splitting> {
    if !commutes(r.element(), p.element(), tol)? || !commutes(r.element(), e.element(), tol)? {
        return Err(Error::violation(
            "[p,e] commutes with p and e",
            r.element().commutator(e.element()).operator_norm(),
        ));
    }
    let compatible = CornerPair::new(p, e, &r.ortho(), tol)?;
    let residual = compatible.commutation_residual();
    if residual > tol.comm_threshold(1.0, 1.0) {
        return Err(Error::violation("r⊥ corner pair commutes", residual));
    }
    let noncompatible = CornerPair::new(p, e, &r, tol)?;
    let inner = noncompatible.commutator(tol)?;
    if !inner.approx_eq(&r, tol) {
        return Err(Error::violation(
            "corner commutator in rAr equals r",
            inner.element().distance(r.element()),
        ));
    }
    Ok(Splitting {
        r,
        noncompatible,
        compatible,
        compatible_residual: residual,
    })
}

/// `[p_q, e_q]` computed inside `qAq` and lifted; equals `[p, e] ∧ q`.
pub fn corner_commutator(p: &Projection, e: &Effect, q: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    ensure_same_dim(p.element(), q.element())?;
    if !commutes(q.element(), p.element(), tol)? || !commutes(q.element(), e.element(), tol)? {
        return Err(Error::Precondition(
            "corner commutator needs q commuting with p and e".into(),
        ));
    }
    CornerPair::new(p, e, q, tol)?.commutator(tol)
}

/// Everything known about `[p, e]` for one pair.
#[derive(Debug, Clone)]
pub struct PairCommutatorReport {
    pub r: Projection,
    pub b_carrier: Projection,
    pub c_carrier: Projection,
    pub s_carrier: Projection,
    /// `b ≤ b° ≤ [p,e] ≤ c° ∧ s°`; an error is returned instead of `false`.
    pub chain_ok: bool,
    /// `[p, e] = 1`
    pub totally_noncompatible: bool,
    /// `b° = 1`
    pub generic_position: bool,
    /// `e C b°`, equivalent to `b° = [p, e]`.
    pub e_commutes_with_b_carrier: bool,
    pub splitting: Splitting,
}

/// Asserts `b ≤ b° ≤ [p,e] ≤ c° ∧ s°` and `b° = [p,e] ⇔ e C b°`, and fills
/// the report.
pub fn inequality_chain(p: &Projection, e: &Effect, tol: &ToleranceConfig) -> Result<PairCommutatorReport> {
    let d = cbs_decompose(p, e, tol)?;
    let r = pair_commutator(p, e, tol)?;
    let cs = meet(&d.c_carrier, &d.s_carrier, tol)?;

    if !psd_leq(d.b.element(), d.b_carrier.element(), tol)? {
        return Err(Error::violation("b ≤ b°", d.b.element().distance(d.b_carrier.element())));
    }
    if !d.b_carrier.leq(&r, tol) {
        return Err(Error::violation(
            "b° ≤ [p,e]",
            (d.b_carrier.rank() as f64 - r.rank() as f64).max(0.0),
        ));
    }
    if !r.leq(&cs, tol) {
        return Err(Error::violation(
            "[p,e] ≤ c° ∧ s°",
            (r.rank() as f64 - cs.rank() as f64).max(0.0),
        ));
    }
    let e_commutes = commutes(e.element(), d.b_carrier.element(), tol)?;
    if e_commutes != d.b_carrier.approx_eq(&r, tol) {
        return Err(Error::violation(
            "b° = [p,e] iff e C b°",
            d.b_carrier.element().distance(r.element()),
        ));
    }
    Ok(PairCommutatorReport {
        totally_noncompatible: r.is_identity(),
        generic_position: d.b_carrier.is_identity(),
        e_commutes_with_b_carrier: e_commutes,
        chain_ok: true,
        splitting: split_along(p, e, r.clone(), tol)?,
        r,
        b_carrier: d.b_carrier,
        c_carrier: d.c_carrier,
        s_carrier: d.s_carrier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::marsden_commutator;
    use crate::linalg::SymmetricElement;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn r3() -> (Projection, Effect) {
        (
            Projection::onto_vector(&[1.0, 1.0, 1.0]).unwrap(),
            Effect::new(SymmetricElement::diag(&[0.25, 0.5, 0.75]), &tol()).unwrap(),
        )
    }

    fn plane() -> (Projection, Effect) {
        (
            Projection::coordinate(2, &[0]),
            Effect::from(Projection::onto_vector(&[1.0, 1.0]).unwrap()),
        )
    }

    /// commuting 2×2 block ⊕ the plane example
    fn block_pair() -> (Projection, Effect) {
        let t = tol();
        let p = Projection::coordinate(4, &[0, 2]);
        let e = Effect::new(
            SymmetricElement::from_rows(&[
                vec![0.3, 0.0, 0.0, 0.0],
                vec![0.0, 0.8, 0.0, 0.0],
                vec![0.0, 0.0, 0.5, 0.5],
                vec![0.0, 0.0, 0.5, 0.5],
            ])
            .unwrap(),
            &t,
        )
        .unwrap();
        (p, e)
    }

    fn commuting() -> (Projection, Effect) {
        let t = tol();
        (
            Projection::coordinate(3, &[1]),
            Effect::new(SymmetricElement::diag(&[0.2, 0.9, 0.4]), &t).unwrap(),
        )
    }

    #[test]
    fn pair_commutator_examples() {
        let t = tol();
        let (p, e) = commuting();
        assert!(pair_commutator(&p, &e, &t).unwrap().is_zero());
        let (p, e) = r3();
        assert!(pair_commutator(&p, &e, &t).unwrap().is_identity());

        let p = Projection::onto_vector(&[1.0, 0.0, 2.0]).unwrap();
        let q = Projection::onto_vector(&[1.0, 1.0, 0.0]).unwrap();
        let r = pair_commutator(&p, &Effect::from(&q), &t).unwrap();
        assert!(r.approx_eq(&marsden_commutator(&p, &q, &t).unwrap(), &t));
    }

    #[test]
    fn closure_examples() {
        let t = tol();
        let (p, e) = commuting();
        assert!(pair_commutator_via_closure(&p, &e, &t).unwrap().is_zero());
        let (p, e) = r3();
        assert!(pair_commutator_via_closure(&p, &e, &t).unwrap().is_identity());
        let (p, e) = plane();
        assert!(pair_commutator_via_closure(&p, &e, &t).unwrap().is_identity());
        let (p, e) = block_pair();
        let r = pair_commutator_via_closure(&p, &e, &t).unwrap();
        assert!(r.approx_eq(&Projection::coordinate(4, &[2, 3]), &t));
        assert!(r.approx_eq(&pair_commutator(&p, &e, &t).unwrap(), &t));
    }

    #[test]
    fn characterization_examples() {
        let t = tol();
        let (p, e) = block_pair();
        let r = pair_commutator(&p, &e, &t).unwrap();
        assert!(characterization_check(&p, &e, &r, &t).unwrap());
        assert!(!characterization_check(&p, &e, &Projection::identity(4), &t).unwrap());
        assert!(!characterization_check(&p, &e, &Projection::zero(4), &t).unwrap());

        let (p, e) = r3();
        assert!(characterization_check(&p, &e, &Projection::identity(3), &t).unwrap());
        assert!(!characterization_check(&p, &e, &Projection::zero(3), &t).unwrap());
    }

    #[test]
    fn chain_examples() {
        let t = tol();
        let (p, e) = commuting();
        let rep = inequality_chain(&p, &e, &t).unwrap();
        assert!(rep.r.is_zero() && rep.b_carrier.is_zero());
        assert!(rep.e_commutes_with_b_carrier);

        let (p, e) = r3();
        let rep = inequality_chain(&p, &e, &t).unwrap();
        assert_eq!(rep.b_carrier.rank(), 2);
        assert!(rep.r.is_identity());
        assert!(rep.totally_noncompatible && !rep.generic_position);
        assert!(!rep.e_commutes_with_b_carrier);

        let (p, e) = plane();
        let rep = inequality_chain(&p, &e, &t).unwrap();
        assert!(rep.generic_position && rep.totally_noncompatible);
        assert!(rep.b_carrier.approx_eq(&rep.r, &t));
    }

    #[test]
    fn splitting_examples() {
        let t = tol();
        let (p, e) = commuting();
        let s = split_by_commutator(&p, &e, &t).unwrap();
        assert!(s.r.is_zero() && s.noncompatible.p.is_none());
        assert_eq!(s.compatible.corner.dim(), 3);

        let (p, e) = r3();
        let s = split_by_commutator(&p, &e, &t).unwrap();
        assert!(s.compatible.p.is_none());

        let (p, e) = block_pair();
        let s = split_by_commutator(&p, &e, &t).unwrap();
        assert!(s.r.approx_eq(&Projection::coordinate(4, &[2, 3]), &t));
        assert!(s.compatible_residual < 1e-12);
    }

    #[test]
    fn corner_commutator_is_meet_with_r() {
        let t = tol();
        let (p, e) = block_pair();
        let r = pair_commutator(&p, &e, &t).unwrap();
        for q in [
            Projection::coordinate(4, &[0, 2, 3]),
            Projection::coordinate(4, &[1]),
            Projection::identity(4),
        ] {
            let v = corner_commutator(&p, &e, &q, &t).unwrap();
            assert!(v.approx_eq(&meet(&r, &q, &t).unwrap(), &t));
        }
        let line = Projection::onto_vector(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            corner_commutator(&p, &e, &line, &t),
            Err(Error::Precondition(_))
        ));
    }
}
