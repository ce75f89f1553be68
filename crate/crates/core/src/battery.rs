//! Randomized verification battery: every structural identity the crate
//! relies on, run on seeded random instances.
//!
//! Trial `i` runs at dimension `dims[i mod len]`, and each check draws its
//! instance from a stream derived from `(seed, check, trial)`, so a check
//! sees the same instances whether or not other checks are enabled.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{carrier, peirce_decompose, spectral_resolution};
use crate::cbs::{cbs_carriers, cbs_decompose, commutator_effect, cosine_sine, j_effect, off_diagonal, restrict_cbs, atom_structure, IDENTITY_TOL};
use crate::commutator::{
    characterization_check, corner_commutator, inequality_chain, pair_commutator, pair_commutator_via_closure,
    split_by_commutator,
};
use crate::effect::{largest_subprojections, Effect};
use crate::error::{Error, Result};
use crate::infimum::{
    atom_identity_residuals, atom_lower_bound_oracle, boundary_lower_bound, inf_with_atom_complement,
    inf_with_atom_sequence, inf_with_projection, maximality_check,
};
use crate::lattice::{is_atom, join, join_all, marsden_commutator, meet, Projection};
use crate::linalg::{commutes, psd_leq, sym_eigen, Matrix, SymmetricElement};
use crate::sampling::{self, trial_rng};
use crate::tolerance::ToleranceConfig;

/// Limit on serialized failing instances per report.
pub const MAX_RECORDED_FAILURES: usize = 25;

/// Agreement required between the closed-form infimum and the bisection
/// oracle, and between two atom orderings.
pub const INFIMUM_AGREEMENT: f64 = 1e-9;

/// Residual limit for the commutation of the `r⊥` corner pair.
pub const SPLIT_RESIDUAL: f64 = 1e-9;

/// What a check runs on.
#[derive(Debug, Clone)]
pub struct Instance {
    pub p: Option<Projection>,
    pub e: Option<Effect>,
    pub q: Option<Projection>,
    pub extra: Vec<SymmetricElement>,
}

impl Instance {
    fn pair(p: Projection, e: Effect) -> Self {
        Self {
            p: Some(p),
            e: Some(e),
            q: None,
            extra: Vec::new(),
        }
    }

    fn elements(extra: Vec<SymmetricElement>) -> Self {
        Self {
            p: None,
            e: None,
            q: None,
            extra,
        }
    }

    fn dim(&self) -> usize {
        self.p
            .as_ref()
            .map(Projection::dim)
            .or_else(|| self.e.as_ref().map(Effect::dim))
            .or_else(|| self.extra.first().map(SymmetricElement::dim))
            .unwrap_or(0)
    }

    fn p(&self) -> Result<&Projection> {
        self.p.as_ref().ok_or_else(|| Error::Precondition("instance has no p".into()))
    }

    fn e(&self) -> Result<&Effect> {
        self.e.as_ref().ok_or_else(|| Error::Precondition("instance has no e".into()))
    }

    fn q(&self) -> Result<&Projection> {
        self.q.as_ref().ok_or_else(|| Error::Precondition("instance has no q".into()))
    }

    fn extra(&self, k: usize) -> Result<&SymmetricElement> {
        self.extra
            .get(k)
            .ok_or_else(|| Error::Precondition(format!("instance needs {} extra elements", k + 1)))
    }

    pub fn to_record(&self) -> InstanceRecord {
        InstanceRecord {
            dim: self.dim(),
            p: self.p.as_ref().map(|p| p.element().to_rows()),
            e: self.e.as_ref().map(|e| e.element().to_rows()),
            q: self.q.as_ref().map(|q| q.element().to_rows()),
            extra: self.extra.iter().map(SymmetricElement::to_rows).collect(),
        }
    }
}

/// Serialized form of an [`Instance`]; `p` and `e` sit at the top level so a
/// record can be fed straight to the single-pair commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<Vec<Vec<f64>>>,
}

impl InstanceRecord {
    pub fn to_instance(&self, tol: &ToleranceConfig) -> Result<Instance> {
        let sym = |rows: &Vec<Vec<f64>>| -> Result<SymmetricElement> {
            let a = SymmetricElement::from_rows(rows)?;
            if a.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    left: self.dim,
                    right: a.dim(),
                });
            }
            Ok(a)
        };
        let proj = |rows: &Vec<Vec<f64>>| Projection::new(sym(rows)?, tol);
        Ok(Instance {
            p: self.p.as_ref().map(proj).transpose()?,
            e: self
                .e
                .as_ref()
                .map(|rows| Effect::new(sym(rows)?, tol))
                .transpose()?,
            q: self.q.as_ref().map(proj).transpose()?,
            extra: self.extra.iter().map(sym).collect::<Result<_>>()?,
        })
    }
}

/// How a check draws its instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// projection of proper rank and an effect
    Pair,
    /// atom and an effect
    AtomPair,
    /// atom and an effect in dimension 2, whatever the trial dimension
    PlaneAtomPair,
    /// two projections
    ProjectionPair,
    /// pair plus a projection `q` commuting with both
    ReduciblePair,
    /// effect plus an unrelated projection `q`
    EffectAndProjection,
    /// effect plus a projection `q` commuting with it
    CommutingEffectAndProjection,
    /// positive elements in `extra`
    PositiveFamily,
    /// two commuting elements in `extra`
    CommutingElements,
    /// three projections in `extra`, two pairs of which commute
    DistributiveTriple,
    /// projection plus a positive element in `extra`
    PositiveAndProjection,
    /// projection plus an element that commutes with it half the time
    ElementAndProjection,
    /// nested projections `p ≤ q`
    NestedProjections,
}

impl Sampler {
    fn draw<R: Rng>(self, rng: &mut R, n: usize) -> Instance {
        match self {
            Sampler::Pair => {
                let (p, e) = sampling::random_pair(rng, n);
                Instance::pair(p, e)
            }
            Sampler::AtomPair => {
                let (p, e) = sampling::random_atom_pair(rng, n);
                Instance::pair(p, e)
            }
            Sampler::PlaneAtomPair => {
                let (p, e) = sampling::random_atom_pair(rng, 2);
                Instance::pair(p, e)
            }
            Sampler::ProjectionPair => {
                let (p, q) = sampling::random_projection_pair(rng, n);
                Instance::pair(p, Effect::from(q))
            }
            Sampler::ReduciblePair => {
                let (p, e, q) = sampling::random_reducible_pair(rng, n);
                Instance {
                    q: Some(q),
                    ..Instance::pair(p, e)
                }
            }
            Sampler::EffectAndProjection => {
                let e = sampling::random_effect(rng, n);
                let rank = rng.random_range(0..=n);
                let q = sampling::random_projection(rng, n, rank);
                Instance {
                    p: None,
                    e: Some(e),
                    q: Some(q),
                    extra: Vec::new(),
                }
            }
            Sampler::CommutingEffectAndProjection => {
                let u = sampling::random_orthogonal(rng, n);
                let e = Effect::trusted(sampling::with_spectrum(&u, &sampling::random_spectrum(rng, n)));
                let rank = rng.random_range(0..=n);
                let q = sampling::leading_columns(&u, rank);
                Instance {
                    p: None,
                    e: Some(e),
                    q: Some(q),
                    extra: Vec::new(),
                }
            }
            Sampler::PositiveFamily => {
                let m = rng.random_range(2..=4);
                Instance::elements((0..m).map(|_| sampling::random_psd(rng, n)).collect())
            }
            Sampler::CommutingElements => {
                let (a, b) = sampling::random_commuting_elements(rng, n);
                Instance::elements(vec![a, b])
            }
            Sampler::DistributiveTriple => {
                let t = sampling::random_distributive_triple(rng, n);
                Instance::elements(t.into_iter().map(Projection::into_element).collect())
            }
            Sampler::PositiveAndProjection => {
                let rank = sampling::random_proper_rank(rng, n);
                let p = sampling::random_projection(rng, n, rank);
                let a = if rng.random_bool(0.2) {
                    SymmetricElement::zeros(n)
                } else {
                    sampling::random_psd(rng, n)
                };
                Instance {
                    p: Some(p),
                    e: None,
                    q: None,
                    extra: vec![a],
                }
            }
            Sampler::ElementAndProjection => {
                let u = sampling::random_orthogonal(rng, n);
                let p = sampling::leading_columns(&u, sampling::random_proper_rank(rng, n));
                let a = if rng.random_bool(0.5) {
                    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                    sampling::with_spectrum(&u, &values)
                } else {
                    sampling::random_symmetric(rng, n)
                };
                Instance {
                    p: Some(p),
                    e: None,
                    q: None,
                    extra: vec![a],
                }
            }
            Sampler::NestedProjections => {
                let u = sampling::random_orthogonal(rng, n);
                let big = rng.random_range(0..=n);
                let small = rng.random_range(0..=big);
                Instance {
                    p: Some(sampling::leading_columns(&u, small)),
                    e: None,
                    q: Some(sampling::leading_columns(&u, big)),
                    extra: Vec::new(),
                }
            }
        }
    }

    /// Whether a replayed instance has what this sampler would provide.
    fn accepts(self, inst: &Instance, tol: &ToleranceConfig) -> bool {
        let pair = inst.p.is_some() && inst.e.is_some();
        match self {
            Sampler::Pair => pair,
            Sampler::AtomPair => pair && inst.p.as_ref().is_some_and(is_atom),
            Sampler::PlaneAtomPair => pair && inst.dim() == 2 && inst.p.as_ref().is_some_and(is_atom),
            Sampler::ProjectionPair => {
                pair && inst
                    .e
                    .as_ref()
                    .is_some_and(|e| Projection::new(e.element().clone(), tol).is_ok())
            }
            Sampler::ReduciblePair => {
                pair && inst.q.as_ref().is_some_and(|q| {
                    let (p, e) = (inst.p.as_ref().unwrap(), inst.e.as_ref().unwrap());
                    commutes(q.element(), p.element(), tol).unwrap_or(false)
                        && commutes(q.element(), e.element(), tol).unwrap_or(false)
                })
            }
            Sampler::EffectAndProjection => inst.e.is_some() && inst.q.is_some(),
            Sampler::CommutingEffectAndProjection => {
                inst.e.is_some()
                    && inst.q.as_ref().is_some_and(|q| {
                        commutes(q.element(), inst.e.as_ref().unwrap().element(), tol).unwrap_or(false)
                    })
            }
            Sampler::PositiveFamily => inst.extra.len() >= 2 && inst.p.is_none(),
            Sampler::CommutingElements => inst.extra.len() == 2 && inst.p.is_none(),
            Sampler::DistributiveTriple => inst.extra.len() == 3,
            Sampler::PositiveAndProjection | Sampler::ElementAndProjection => {
                inst.p.is_some() && inst.extra.len() == 1
            }
            Sampler::NestedProjections => {
                inst.e.is_none()
                    && inst.extra.is_empty()
                    && matches!((&inst.p, &inst.q), (Some(p), Some(q)) if p.leq(q, tol))
            }
        }
    }
}

/// Result of one check on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub residual: f64,
    pub passed: bool,
}

impl Outcome {
    fn within(residual: f64, limit: f64) -> Self {
        Self {
            residual,
            passed: residual <= limit,
        }
    }

    fn holds(ok: bool) -> Self {
        Self {
            residual: if ok { 0.0 } else { 1.0 },
            passed: ok,
        }
    }

    fn and(self, other: Outcome) -> Self {
        Self {
            residual: self.residual.max(other.residual),
            passed: self.passed && other.passed,
        }
    }

    fn all(items: impl IntoIterator<Item = Outcome>) -> Self {
        items.into_iter().fold(Outcome::holds(true), Outcome::and)
    }
}

type CheckFn = fn(&Instance, &ToleranceConfig) -> Result<Outcome>;

pub struct Check {
    pub name: &'static str,
    pub summary: &'static str,
    pub sampler: Sampler,
    run: CheckFn,
}

impl Check {
    pub fn run(&self, inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
        (self.run)(inst, tol)
    }

    /// `name` matches the filter exactly or the filter names its group.
    pub fn matches(&self, filter: &str) -> bool {
        self.name == filter
            || self
                .name
                .strip_prefix(filter)
                .is_some_and(|rest| rest.starts_with('.'))
    }
}

fn limit_for(e: &Effect) -> f64 {
    IDENTITY_TOL * (1.0 + e.element().frobenius_norm())
}

fn mat_gap(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).frobenius_norm()
}

fn same_projection(a: &Projection, b: &Projection, tol: &ToleranceConfig) -> Outcome {
    Outcome {
        residual: a.element().distance(b.element()),
        passed: a.approx_eq(b, tol),
    }
}

fn order(a: &SymmetricElement, b: &SymmetricElement, tol: &ToleranceConfig) -> Result<Outcome> {
    Ok(Outcome::holds(psd_leq(a, b, tol)?))
}

fn cos_sin(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let (c, s) = cosine_sine(p, e, tol)?;
    let n = p.dim();
    let one = Matrix::identity(n);
    let pm = p.element().as_matrix();
    let em = e.element().as_matrix();
    let pe = pm.matmul(em);
    let ep = em.matmul(pm);
    let cross = &pe + &ep;
    // c² = 1 - p + pe + ep - e, s² = p - pe - ep + e
    let c2_formula = &(&(&one - pm) + &cross) - em;
    let s2_formula = &(pm - &cross) + em;
    let c2 = c.element().square();
    let s2 = s.element().square();
    let limit = limit_for(e);
    Ok(Outcome::all([
        Outcome::within(mat_gap(c2.as_matrix(), &c2_formula), limit),
        Outcome::within(mat_gap(s2.as_matrix(), &s2_formula), limit),
        Outcome::within((&c2 + &s2).distance(&SymmetricElement::identity(n)), limit),
    ]))
}

fn cos_sin_compress(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let (c, s) = cosine_sine(p, e, tol)?;
    let c2 = c.element().square();
    let s2 = s.element().square();
    let pc = p.ortho();
    let limit = limit_for(e);
    Ok(Outcome::all([
        Outcome::within(
            mat_gap(&c2.product(p.element()), e.element().sandwich(p.element()).as_matrix()),
            limit,
        ),
        Outcome::within(
            mat_gap(&s2.product(pc.element()), e.element().sandwich(pc.element()).as_matrix()),
            limit,
        ),
        order(&c2, c.element(), tol)?,
        order(&s2, s.element(), tol)?,
    ]))
}

fn square_identity(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let (c, s) = cosine_sine(p, e, tol)?;
    let j = j_effect(p, e, tol)?;
    let lhs = c.element().square().commuting_product(&s.element().square());
    let rhs = &j.element().square() + &off_diagonal(p, e).square();
    Ok(Outcome::within(lhs.distance(&rhs), limit_for(e)))
}

fn reconstruction(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let d = cbs_decompose(p, e, tol)?;
    let pm = p.element().as_matrix();
    let pc = p.ortho();
    let bk = d.b.element().product(d.k.element());
    let limit = limit_for(e);
    let pe_pc = pm.matmul(e.element().as_matrix()).matmul(pc.element().as_matrix());
    let pc_ep = pc.element().product(e.element()).matmul(pm);
    Ok(Outcome::all([
        Outcome::within(d.reconstruction_residual(), limit),
        Outcome::within(mat_gap(&pm.matmul(&bk), &pe_pc), limit),
        Outcome::within(mat_gap(&pc.element().as_matrix().matmul(&bk), &pc_ep), limit),
    ]))
}

fn commutator_effect_check(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let (b, _) = commutator_effect(p, e, tol)?;
    let b_zero = carrier(b.element(), tol)?.is_zero();
    Ok(Outcome::holds(b_zero == commutes(p.element(), e.element(), tol)?))
}

fn carriers(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let d = cbs_decompose(p, e, tol)?;
    cbs_carriers(&d, tol)?;
    let sc = d.s_carrier.ortho();
    let cc = d.c_carrier.ortho();
    let lim = tol.agreement(1.0);
    let sc_p = meet(&sc, p, tol)?;
    let cc_pc = meet(&cc, &p.ortho(), tol)?;
    Ok(Outcome::all([
        order(sc.element(), &d.c_squared(), tol)?,
        order(cc.element(), &d.s_squared(), tol)?,
        Outcome::within(mat_gap(&sc.element().product(e.element()), &sc.element().product(p.element())), lim),
        Outcome::within(mat_gap(&e.element().product(sc.element()), sc_p.element().as_matrix()), lim),
        Outcome::within(mat_gap(&cc.element().product(e.element()), cc_pc.element().as_matrix()), lim),
    ]))
}

fn generic_position(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let d = cbs_decompose(p, e, tol)?;
    if !d.generic_position() {
        return Ok(Outcome::holds(true));
    }
    let kpk = d.k.conjugate(p.element());
    let r = pair_commutator(p, e, tol)?;
    Ok(Outcome::all([
        Outcome::holds(d.c_carrier.is_identity() && d.s_carrier.is_identity()),
        Outcome::within(kpk.distance(p.ortho().element()), tol.agreement(1.0)),
        Outcome::holds(r.is_identity()),
    ]))
}

fn projection_case(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let q = Projection::new(e.element().clone(), tol)?;
    let d = cbs_decompose(p, e, tol)?;
    let r = pair_commutator(p, e, tol)?;
    let lim = 2.0 * tol.zero_threshold(1.0).sqrt();
    Ok(Outcome::all([
        Outcome::within(d.j.element().frobenius_norm(), lim),
        Outcome::within(d.b.element().distance(&d.cs()), lim),
        same_projection(&r, &marsden_commutator(p, &q, tol)?, tol),
        same_projection(&d.b_carrier, &r, tol),
    ]))
}

fn atom_structure_check(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    if commutes(p.element(), e.element(), tol)? {
        return Ok(Outcome::holds(true));
    }
    let a = atom_structure(p, e, tol)?;
    Ok(Outcome::holds(
        a.b_carrier.rank() == 2 && p.leq(&a.b_carrier, tol) && a.v.leq(&a.b_carrier, tol),
    ))
}

fn corner_restriction(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e, q) = (inst.p()?, inst.e()?, inst.q()?);
    let d = cbs_decompose(p, e, tol)?;
    restrict_cbs(&d, q, tol)?;
    restrict_cbs(&d, &q.ortho(), tol)?;
    Ok(Outcome::holds(true))
}

fn zero_iff_commuting(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let r = pair_commutator(p, e, tol)?;
    Ok(Outcome::holds(r.is_zero() == commutes(p.element(), e.element(), tol)?))
}

fn closure_agrees(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let a = pair_commutator(p, e, tol)?;
    let b = pair_commutator_via_closure(p, e, tol)?;
    Ok(same_projection(&a, &b, tol))
}

fn chain(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let rep = inequality_chain(p, e, tol)?;
    Ok(Outcome::holds(rep.chain_ok))
}

fn reducing(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let d = cbs_decompose(p, e, tol)?;
    let r = pair_commutator(p, e, tol)?;
    let parts = [
        p.element(),
        e.element(),
        d.c.element(),
        d.s.element(),
        d.j.element(),
        d.b.element(),
        d.k.element(),
    ];
    let mut ok = true;
    for x in parts {
        ok &= commutes(r.element(), x, tol)?;
    }
    Ok(Outcome::holds(ok))
}

fn characterization(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let r = pair_commutator(p, e, tol)?;
    Ok(Outcome::holds(characterization_check(p, e, &r, tol)?))
}

fn splitting(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let s = split_by_commutator(p, e, tol)?;
    Ok(Outcome::within(s.compatible_residual, SPLIT_RESIDUAL))
}

fn corner_commutator_check(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e, q) = (inst.p()?, inst.e()?, inst.q()?);
    let r = pair_commutator(p, e, tol)?;
    let v = corner_commutator(p, e, q, tol)?;
    let w = corner_commutator(p, e, &q.ortho(), tol)?;
    Ok(Outcome::all([
        Outcome::holds(commutes(q.element(), r.element(), tol)?),
        same_projection(&v, &meet(&r, q, tol)?, tol),
        same_projection(&w, &meet(&r, &q.ortho(), tol)?, tol),
    ]))
}

fn totally_noncompatible(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let d = cbs_decompose(p, e, tol)?;
    let r = pair_commutator(p, e, tol)?;
    let mut out = Outcome::holds(!d.generic_position() || r.is_identity());
    if r.is_identity() {
        let pair = largest_subprojections(e, tol)?;
        let pc = p.ortho();
        let mut zero = d.c_carrier.is_identity() && d.s_carrier.is_identity();
        for x in [p, &pc] {
            for y in [&pair.z, &pair.t] {
                zero &= meet(x, y, tol)?.is_zero();
            }
        }
        out = out.and(Outcome::holds(zero));
    }
    Ok(out)
}

fn infimum_lower_bound(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let rec = inf_with_atom_complement(p, e, tol)?;
    Ok(order(rec.infimum.element(), e.element(), tol)?.and(order(
        rec.infimum.element(),
        p.ortho().element(),
        tol,
    )?))
}

/// Directions for boundary lower bounds: the standard axes' atoms and a few
/// pseudo-random positive elements derived from `e` itself.
fn boundary_directions(p: &Projection, e: &Effect) -> Vec<SymmetricElement> {
    let n = p.dim();
    let mut dirs: Vec<SymmetricElement> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            SymmetricElement::outer(&v)
        })
        .collect();
    dirs.push(SymmetricElement::identity(n));
    dirs.push(e.element().clone());
    dirs.push(e.element().square());
    dirs
}

fn infimum_maximality(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let mut out = Outcome::holds(true);
    for h in boundary_directions(p, e) {
        let Some(f) = boundary_lower_bound(e, p, &h, tol)? else {
            continue;
        };
        let (residual, below) = maximality_check(p, e, &f, tol)?;
        out = out
            .and(Outcome::within(residual, limit_for(e) * 100.0))
            .and(Outcome::holds(below));
    }
    Ok(out)
}

fn infimum_oracle(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let w = p.ortho();
    let beta = atom_lower_bound_oracle(e, &w, tol)?;
    let rec = inf_with_atom_complement(p, e, tol)?;
    let gap = rec.infimum.element().distance(&w.element().scale(beta));
    Ok(Outcome::within(gap, INFIMUM_AGREEMENT))
}

fn infimum_order_independence(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (e, q) = (inst.e()?, inst.q()?);
    let first = inf_with_projection(e, q, tol)?;
    // a different atom basis of q⊥: rotate its range basis, then reverse
    let qc = q.ortho();
    let basis = qc.range_basis(tol)?;
    let k = basis.cols();
    let mut atoms = Vec::with_capacity(k);
    for j in 0..k {
        let next = (j + 1) % k;
        let (ca, sa) = (0.6f64, 0.8f64);
        let v: Vec<f64> = if k > 1 {
            (0..basis.rows())
                .map(|i| ca * basis.get(i, j) + if j % 2 == 0 { sa } else { -sa } * basis.get(i, next))
                .collect()
        } else {
            basis.column(0)
        };
        atoms.push(v);
    }
    // Gram-Schmidt keeps them an orthonormal basis of the same range
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(k);
    for mut v in atoms.into_iter().rev() {
        for u in &ortho {
            let c: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            ortho.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    if ortho.len() != k {
        return Err(Error::violation("rotated atom basis lost rank", (k - ortho.len()) as f64));
    }
    let atoms: Vec<Projection> = ortho
        .iter()
        .map(|v| Projection::from_orthonormal_columns(&Matrix::from_columns(v.len(), std::slice::from_ref(v))))
        .collect();
    let second = inf_with_atom_sequence(e, &atoms, tol)?;
    Ok(Outcome::within(first.element().distance(second.element()), INFIMUM_AGREEMENT))
}

fn atom_identities(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, e) = (inst.p()?, inst.e()?);
    let rec = inf_with_atom_complement(p, e, tol)?;
    match atom_identity_residuals(p, e, tol)? {
        Some(r) => Ok(Outcome::within(r.max(), limit_for(e) * rec.alpha.recip().max(1.0))),
        None => Ok(Outcome::holds(true)),
    }
}

fn infimum_commuting(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (e, q) = (inst.e()?, inst.q()?);
    let inf = inf_with_projection(e, q, tol)?;
    let eq = e.element().commuting_product(q.element());
    Ok(Outcome::within(inf.element().distance(&eq), INFIMUM_AGREEMENT))
}

fn carrier_sum(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let mut sum = SymmetricElement::zeros(inst.dim());
    let mut carriers = Vec::new();
    for a in &inst.extra {
        sum = &sum + a;
        carriers.push(carrier(a, tol)?);
    }
    let whole = carrier(&sum, tol)?;
    let joined = join_all(&carriers, tol)?;
    let out = same_projection(&whole, &joined, tol);
    if out.passed || !whole.leq(&joined, tol) {
        return Ok(out);
    }
    // The join resolves finer than the carrier of the sum. Any extra
    // direction must be one the sum itself treats as zero.
    let extra = Projection::new(joined.element() - whole.element(), tol)?;
    let radius = sym_eigen(&sum, tol)?.spectral_radius();
    let seen = sym_eigen(&sum.congruence(&extra.range_basis(tol)?), tol)?.max_eigenvalue();
    Ok(Outcome {
        residual: seen,
        passed: seen <= tol.zero_threshold(radius),
    })
}

fn carrier_product(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (a, b) = (inst.extra(0)?, inst.extra(1)?);
    let ab = a.commuting_product(b);
    let (ac, bc) = (carrier(a, tol)?, carrier(b, tol)?);
    let prod = carrier(&ab, tol)?;
    let m = meet(&ac, &bc, tol)?;
    Ok(Outcome::all([
        same_projection(&prod, &m, tol),
        Outcome::within(
            mat_gap(&ac.element().product(bc.element()), m.element().as_matrix()),
            tol.agreement(1.0),
        ),
    ]))
}

fn distributive(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let proj = |k: usize| -> Result<Projection> { Projection::new(inst.extra(k)?.clone(), tol) };
    let (p, q, r) = (proj(0)?, proj(1)?, proj(2)?);
    let lhs = meet(&p, &join(&q, &r, tol)?, tol)?;
    let rhs = join(&meet(&p, &q, tol)?, &meet(&p, &r, tol)?, tol)?;
    let lhs2 = join(&p, &meet(&q, &r, tol)?, tol)?;
    let rhs2 = meet(&join(&p, &q, tol)?, &join(&p, &r, tol)?, tol)?;
    Ok(same_projection(&lhs, &rhs, tol).and(same_projection(&lhs2, &rhs2, tol)))
}

fn diagonal_zero(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, a) = (inst.p()?, inst.extra(0)?);
    let parts = peirce_decompose(a, p)?;
    let a_zero = carrier(a, tol)?.is_zero();
    let d_zero = carrier(&parts.diagonal(), tol)?.is_zero();
    Ok(Outcome::holds(a_zero == d_zero))
}

fn offdiagonal_zero(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, a) = (inst.p()?, inst.extra(0)?);
    let parts = peirce_decompose(a, p)?;
    let threshold = tol.comm_threshold(a.norm(), 1.0);
    let commuting = commutes(p.element(), a, tol)?;
    let off_zero = parts.off_diagonal.norm() <= threshold;
    let corner = p
        .element()
        .as_matrix()
        .matmul(a.as_matrix())
        .matmul(p.ortho().element().as_matrix())
        .operator_norm()
        <= threshold;
    Ok(Outcome::holds(commuting == off_zero && off_zero == corner))
}

fn spectral(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let e = inst.e()?;
    let res = spectral_resolution(e.element(), tol)?;
    let mut ok = res.cuts.last().is_some_and(Projection::is_identity);
    for w in res.cuts.windows(2) {
        ok &= w[0].leq(&w[1], tol) && w[0].rank() < w[1].rank();
    }
    for cut in &res.cuts {
        ok &= commutes(cut.element(), e.element(), tol)?;
    }
    ok &= res.thresholds.windows(2).all(|w| w[0] < w[1]);
    Ok(Outcome::holds(ok))
}

fn orthomodular(inst: &Instance, tol: &ToleranceConfig) -> Result<Outcome> {
    let (p, q) = (inst.p()?, inst.q()?);
    let rhs = join(p, &meet(q, &p.ortho(), tol)?, tol)?;
    Ok(same_projection(q, &rhs, tol))
}

macro_rules! check {
    ($name:literal, $summary:literal, $sampler:ident, $run:expr) => {
        Check {
            name: $name,
            summary: $summary,
            sampler: Sampler::$sampler,
            run: $run,
        }
    };
}

/// Every check, in report order.
pub fn all_checks() -> Vec<Check> {
    vec![
        check!("calculus.carrier_sum", "(Σaᵢ)° = ⋁aᵢ° for aᵢ ≥ 0", PositiveFamily, carrier_sum),
        check!("calculus.carrier_product", "(ab)° = a°b° = a° ∧ b° for commuting a, b", CommutingElements, carrier_product),
        check!("calculus.distributive", "distributive laws when two of three projections commute", DistributiveTriple, distributive),
        check!("calculus.diagonal_zero", "a ≥ 0 vanishes iff its diagonal part does", PositiveAndProjection, diagonal_zero),
        check!("calculus.offdiagonal_zero", "pCa iff off-diagonal part is 0 iff pap⊥ = 0", ElementAndProjection, offdiagonal_zero),
        check!("calculus.spectral", "spectral cuts increase, commute with e, end at 1", EffectAndProjection, spectral),
        check!("lattice.orthomodular", "p ≤ q implies q = p ∨ (q ∧ p⊥)", NestedProjections, orthomodular),
        check!("cbs.cos_sin", "c² = 1 - p + pe + ep - e, s² = p - pe - ep + e, c² + s² = 1", Pair, cos_sin),
        check!("cbs.compressions", "c²p = pep, s²p⊥ = p⊥ep⊥, c² ≤ c, s² ≤ s", Pair, cos_sin_compress),
        check!("cbs.square_identity", "c²s² = j² + (pep⊥ + p⊥ep)²", Pair, square_identity),
        check!("cbs.reconstruction", "e = c²p + bk + s²p⊥, pbk = pep⊥, p⊥bk = p⊥ep", Pair, reconstruction),
        check!("cbs.commutator_effect", "b by both routes; b = 0 iff pCe", Pair, commutator_effect_check),
        check!("cbs.carriers", "carrier formulas, (s°)⊥ ≤ c², (s°)⊥e = (s°)⊥ ∧ p", Pair, carriers),
        check!("cbs.generic_position", "b° = 1 implies c° = s° = 1, kpk = p⊥, [p,e] = 1", Pair, generic_position),
        check!("cbs.projection_case", "e ∈ P: j = 0, b = cs, [p,e] = b° = Marsden commutator", ProjectionPair, projection_case),
        check!("cbs.atom_structure", "atom p: b° = p + kpk, b = βb°", AtomPair, atom_structure_check),
        check!("cbs.corner", "decomposition in qAq is the restriction", ReduciblePair, corner_restriction),
        check!("commutator.zero_iff_commuting", "[p,e] = 0 iff pCe", Pair, zero_iff_commuting),
        check!("commutator.closure", "lattice formula and subspace closure agree", Pair, closure_agrees),
        check!("commutator.chain", "b ≤ b° ≤ [p,e] ≤ c° ∧ s°; b° = [p,e] iff eCb°", Pair, chain),
        check!("commutator.reducing", "[p,e] commutes with p, e, c, s, j, b, k", Pair, reducing),
        check!("commutator.characterization", "[p,e] satisfies the conditions and is minimal", Pair, characterization),
        check!("commutator.splitting", "r⊥ corner commutes; r corner is totally noncompatible", Pair, splitting),
        check!("commutator.corner", "commutator in qAq is [p,e] ∧ q", ReduciblePair, corner_commutator_check),
        check!("commutator.totally_noncompatible", "generic implies [p,e] = 1; [p,e] = 1 forces trivial meets", Pair, totally_noncompatible),
        check!("infimum.lower_bound", "e ∧ p⊥ ≤ e and ≤ p⊥", AtomPair, infimum_lower_bound),
        check!("infimum.maximality", "boundary lower bounds f satisfy yfy* = f and f ≤ e ∧ p⊥", AtomPair, infimum_maximality),
        check!("infimum.oracle", "dimension 2: closed form equals bisection β*p⊥", PlaneAtomPair, infimum_oracle),
        check!("infimum.order_independence", "e ∧ q does not depend on the atom basis of q⊥", EffectAndProjection, infimum_order_independence),
        check!("infimum.atom_identities", "e = αp + αa + s²p⊥, α²a² = b², (ap)² = 0", AtomPair, atom_identities),
        check!("infimum.commuting", "eCq implies e ∧ q = eq", CommutingEffectAndProjection, infimum_commuting),
    ]
}

/// Pass/fail tally and worst residual of one check.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub passed: u64,
    pub failed: u64,
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub check: String,
    pub trial: u64,
    pub message: String,
    pub instance: InstanceRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub trials: u64,
    pub dims: Vec<usize>,
    pub total_checks: u64,
    pub passed: u64,
    pub failed: u64,
    pub checks: BTreeMap<String, CheckSummary>,
    pub failures: Vec<FailureRecord>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    fn record(&mut self, check: &Check, trial: u64, inst: &Instance, result: Result<Outcome>) {
        let summary = self.checks.entry(check.name.to_string()).or_default();
        self.total_checks += 1;
        let message = match result {
            Ok(o) => {
                if o.residual.is_finite() {
                    summary.worst_residual = summary.worst_residual.max(o.residual);
                }
                if o.passed {
                    summary.passed += 1;
                    self.passed += 1;
                    return;
                }
                format!("residual {:e}", o.residual)
            }
            Err(err) => err.to_string(),
        };
        summary.failed += 1;
        self.failed += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(FailureRecord {
                check: check.name.to_string(),
                trial,
                message,
                instance: inst.to_record(),
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub seed: u64,
    pub trials: u64,
    pub dims: RangeInclusive<usize>,
    pub filter: Option<String>,
}

fn selected<'a>(checks: &'a [Check], filter: Option<&str>) -> Result<Vec<(usize, &'a Check)>> {
    let chosen: Vec<(usize, &Check)> = checks
        .iter()
        .enumerate()
        .filter(|(_, c)| filter.is_none_or(|f| c.matches(f)))
        .collect();
    if chosen.is_empty() {
        return Err(Error::Precondition(format!(
            "no check matches {:?}",
            filter.unwrap_or_default()
        )));
    }
    Ok(chosen)
}

fn check_stream(seed: u64, check_index: usize) -> u64 {
    seed ^ (check_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `trials` trials of every selected check.
pub fn run_battery(config: &BatteryConfig, tol: &ToleranceConfig) -> Result<VerificationReport> {
    if config.trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    if *config.dims.start() < 2 || config.dims.is_empty() {
        return Err(Error::Precondition(format!(
            "dimensions must be a non-empty range starting at 2 or more, got {}..{}",
            config.dims.start(),
            config.dims.end()
        )));
    }
    tol.validate()?;
    let checks = all_checks();
    let chosen = selected(&checks, config.filter.as_deref())?;
    let dims: Vec<usize> = config.dims.clone().collect();
    let mut report = VerificationReport {
        seed: config.seed,
        trials: config.trials,
        dims: dims.clone(),
        total_checks: 0,
        passed: 0,
        failed: 0,
        checks: BTreeMap::new(),
        failures: Vec::new(),
    };
    for trial in 0..config.trials {
        let n = dims[(trial % dims.len() as u64) as usize];
        for &(index, check) in &chosen {
            let mut rng = trial_rng(check_stream(config.seed, index), trial);
            let inst = check.sampler.draw(&mut rng, n);
            let result = check.run(&inst, tol);
            report.record(check, trial, &inst, result);
        }
    }
    Ok(report)
}

/// Runs every selected check whose sampler could have produced `record`.
pub fn replay(record: &InstanceRecord, filter: Option<&str>, tol: &ToleranceConfig) -> Result<VerificationReport> {
    let inst = record.to_instance(tol)?;
    let checks = all_checks();
    let mut report = VerificationReport {
        seed: 0,
        trials: 1,
        dims: vec![record.dim],
        total_checks: 0,
        passed: 0,
        failed: 0,
        checks: BTreeMap::new(),
        failures: Vec::new(),
    };
    for (_, check) in selected(&checks, filter)? {
        if check.sampler.accepts(&inst, tol) {
            report.record(check, 0, &inst, check.run(&inst, tol));
        }
    }
    if report.total_checks == 0 {
        return Err(Error::Precondition("no selected check applies to this instance".into()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(trials: u64, filter: Option<&str>) -> BatteryConfig {
        BatteryConfig {
            seed: 42,
            trials,
            dims: 2..=5,
            filter: filter.map(String::from),
        }
    }

    #[test]
    fn names_are_unique_and_grouped() {
        let checks = all_checks();
        let mut names: Vec<_> = checks.iter().map(|c| c.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), checks.len());
        assert!(checks.iter().all(|c| c.name.contains('.')));
    }

    #[test]
    fn filter_by_name_and_group() {
        let t = ToleranceConfig::default();
        let r = run_battery(&config(3, Some("commutator.chain")), &t).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert_eq!(r.total_checks, 3);
        let r = run_battery(&config(2, Some("infimum")), &t).unwrap();
        assert!(r.checks.keys().all(|k| k.starts_with("infimum.")));
        assert!(run_battery(&config(2, Some("nope")), &t).is_err());
        assert!(run_battery(&config(0, None), &t).is_err());
    }

    #[test]
    fn short_battery_passes_and_is_deterministic() {
        let t = ToleranceConfig::default();
        let a = run_battery(&config(24, None), &t).unwrap();
        assert!(a.all_passed(), "{:#?}", a.failures);
        assert_eq!(a.total_checks, 24 * all_checks().len() as u64);
        let b = run_battery(&config(24, None), &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn selection_does_not_change_instances() {
        let t = ToleranceConfig::default();
        let all = run_battery(&config(6, None), &t).unwrap();
        let one = run_battery(&config(6, Some("cbs.reconstruction")), &t).unwrap();
        assert_eq!(all.checks["cbs.reconstruction"], one.checks["cbs.reconstruction"]);
    }

    #[test]
    fn replay_runs_applicable_checks() {
        let t = ToleranceConfig::default();
        let record = InstanceRecord {
            dim: 3,
            p: Some(Projection::onto_vector(&[1.0, 1.0, 1.0]).unwrap().element().to_rows()),
            e: Some(SymmetricElement::diag(&[0.25, 0.5, 0.75]).to_rows()),
            q: None,
            extra: Vec::new(),
        };
        let r = replay(&record, None, &t).unwrap();
        assert!(r.all_passed(), "{:#?}", r.failures);
        assert!(r.checks.contains_key("infimum.maximality"));
        assert!(!r.checks.contains_key("infimum.oracle"));
    }
}
