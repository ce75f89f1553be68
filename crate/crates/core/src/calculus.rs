//! Calculus on single elements: carriers, square roots, absolute values,
//! signum and polar decomposition, spectral resolutions, Peirce splitting.

use crate::error::{Error, Result};
use crate::lattice::Projection;
use crate::linalg::{sym_eigen, EigenDecomposition, SymmetricElement};
use crate::tolerance::ToleranceConfig;

/// An element `t` with `t²` a projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSymmetry {
    element: SymmetricElement,
    support: Projection,
}

impl PartialSymmetry {
    pub fn new(t: SymmetricElement, tol: &ToleranceConfig) -> Result<Self> {
        let support = Projection::new(t.square(), tol)
            .map_err(|e| Error::InvalidSymmetry(format!("t² is not a projection ({e})")))?;
        let residual = t.commuting_product(support.element()).distance(&t);
        if residual > tol.agreement(1.0) {
            return Err(Error::InvalidSymmetry(format!(
                "t·t² differs from t by {residual:e}"
            )));
        }
        Ok(Self {
            element: t,
            support,
        })
    }

    pub fn element(&self) -> &SymmetricElement {
        &self.element
    }

    /// The projection `t²`.
    pub fn support(&self) -> &Projection {
        &self.support
    }
}

/// An element `u` with `u² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry {
    element: SymmetricElement,
}

impl Symmetry {
    pub fn new(u: SymmetricElement, tol: &ToleranceConfig) -> Result<Self> {
        let residual = u.square().distance(&SymmetricElement::identity(u.dim()));
        if residual > tol.agreement(1.0) {
            return Err(Error::InvalidSymmetry(format!(
                "u² differs from 1 by {residual:e}"
            )));
        }
        Ok(Self { element: u })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            element: SymmetricElement::identity(n),
        }
    }

    /// `p - p⊥`.
    pub fn reflection(p: &Projection) -> Self {
        Self {
            element: p.element() - p.ortho().element(),
        }
    }

    pub fn element(&self) -> &SymmetricElement {
        &self.element
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    /// `u a u`.
    pub fn conjugate(&self, a: &SymmetricElement) -> SymmetricElement {
        a.sandwich(&self.element)
    }
}

fn zeroed(eig: &EigenDecomposition, tol: &ToleranceConfig, f: impl Fn(f64) -> f64) -> SymmetricElement {
    let threshold = tol.zero_threshold(eig.spectral_radius());
    eig.map(|l| if l.abs() <= threshold { 0.0 } else { f(l) })
}

pub(crate) fn carrier_of_eigen(eig: &EigenDecomposition, tol: &ToleranceConfig) -> Projection {
    let threshold = tol.zero_threshold(eig.spectral_radius());
    let (element, rank) = eig.projector(|_, l| l.abs() > threshold);
    Projection::from_parts(element, rank)
}

/// Carrier of a sum of projections, at the lattice threshold.
pub(crate) fn lattice_carrier(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<Projection> {
    let eig = sym_eigen(a, tol)?;
    let threshold = tol.lattice_threshold(eig.spectral_radius());
    let (element, rank) = eig.projector(|_, l| l.abs() > threshold);
    Ok(Projection::from_parts(element, rank))
}

/// The carrier `a°`: projection onto the span of eigenvectors with
/// non-negligible eigenvalue.
pub fn carrier(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<Projection> {
    Ok(carrier_of_eigen(&sym_eigen(a, tol)?, tol))
}

/// Square root of a positive element. Eigenvalues in `[-psd_eps, 0)` are
/// clamped; eigenvalues below the zero threshold become exactly zero so the
/// root keeps the carrier of its argument.
pub fn sqrt_psd(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<SymmetricElement> {
    let eig = sym_eigen(a, tol)?;
    sqrt_of_eigen(&eig, tol)
}

pub(crate) fn sqrt_of_eigen(eig: &EigenDecomposition, tol: &ToleranceConfig) -> Result<SymmetricElement> {
    let radius = eig.spectral_radius();
    let floor = -tol.psd_threshold(radius);
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < floor) {
        return Err(Error::Domain {
            function: "sqrt",
            value: bad,
        });
    }
    Ok(zeroed(eig, tol, |l| l.max(0.0).sqrt()))
}

/// `|a| = (a²)^{1/2}`, computed directly on the spectrum of `a`.
pub fn abs_value(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<SymmetricElement> {
    Ok(zeroed(&sym_eigen(a, tol)?, tol, f64::abs))
}

/// `a⁺ = (|a| + a)/2`.
pub fn positive_part(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<SymmetricElement> {
    Ok(zeroed(&sym_eigen(a, tol)?, tol, |l| l.max(0.0)))
}

fn signum_of_eigen(eig: &EigenDecomposition, tol: &ToleranceConfig) -> PartialSymmetry {
    let threshold = tol.zero_threshold(eig.spectral_radius());
    let element = eig.map(|l| if l.abs() <= threshold { 0.0 } else { l.signum() });
    PartialSymmetry {
        element,
        support: carrier_of_eigen(eig, tol),
    }
}

/// The signum of `a`: `+1` on the positive eigenspaces, `-1` on the negative ones.
pub fn signum(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<PartialSymmetry> {
    Ok(signum_of_eigen(&sym_eigen(a, tol)?, tol))
}

/// `u = t + (t²)⊥`.
pub fn canonical_extension(t: &PartialSymmetry) -> Symmetry {
    Symmetry {
        element: t.element() + t.support().ortho().element(),
    }
}

/// Polar decomposition `a = |a| u = u |a|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomposition {
    pub abs: SymmetricElement,
    pub symmetry: Symmetry,
}

pub fn polar_decompose(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<PolarDecomposition> {
    let eig = sym_eigen(a, tol)?;
    Ok(polar_of_eigen(&eig, tol))
}

pub(crate) fn polar_of_eigen(eig: &EigenDecomposition, tol: &ToleranceConfig) -> PolarDecomposition {
    PolarDecomposition {
        abs: zeroed(eig, tol, f64::abs),
        symmetry: canonical_extension(&signum_of_eigen(eig, tol)),
    }
}

/// Distinct eigenvalue thresholds of an element and the cut projections
/// `p_λ = 1 - ((a - λ)⁺)°` at each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResolution {
    pub thresholds: Vec<f64>,
    pub cuts: Vec<Projection>,
    pub source_dim: usize,
}

impl SpectralResolution {
    /// Cut projections other than `0` and `1`.
    pub fn proper_cuts(&self) -> impl Iterator<Item = &Projection> {
        self.cuts
            .iter()
            .filter(|c| !c.is_zero() && !c.is_identity())
    }
}

/// Spectral resolution with both constructions cross-checked: the cut at
/// each threshold is read off the eigenbasis and recomputed as
/// `1 - carrier((a - λ)⁺)`; disagreement is an invariant violation.
pub fn spectral_resolution(a: &SymmetricElement, tol: &ToleranceConfig) -> Result<SpectralResolution> {
    let n = a.dim();
    let eig = sym_eigen(a, tol)?;
    let merge = tol.merge_threshold(eig.spectral_radius());

    // last index of each cluster of near-equal eigenvalues
    let mut ends = Vec::new();
    for k in 1..n {
        if eig.eigenvalues[k] - eig.eigenvalues[k - 1] > merge {
            ends.push(k - 1);
        }
    }
    ends.push(n - 1);

    let mut thresholds = Vec::with_capacity(ends.len());
    let mut cuts = Vec::with_capacity(ends.len());
    for (i, &end) in ends.iter().enumerate() {
        let lambda = eig.eigenvalues[end];
        thresholds.push(lambda);
        if i + 1 == ends.len() {
            cuts.push(Projection::identity(n));
            continue;
        }
        let (element, rank) = eig.projector(|k, _| k <= end);
        let by_eigenspace = Projection::from_parts(element, rank);

        let shifted = a - &SymmetricElement::identity(n).scale(lambda);
        let by_carrier = carrier(&positive_part(&shifted, tol)?, tol)?.ortho();
        if !by_eigenspace.approx_eq(&by_carrier, tol) {
            return Err(Error::violation(
                format!("spectral cut at {lambda}: eigenspace and carrier constructions disagree"),
                by_eigenspace.element().distance(by_carrier.element()),
            ));
        }
        cuts.push(by_eigenspace);
    }
    Ok(SpectralResolution {
        thresholds,
        cuts,
        source_dim: n,
    })
}

/// `a = pap + (pap⊥ + p⊥ap) + p⊥ap⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeirceDecomposition {
    pub compression: SymmetricElement,
    pub off_diagonal: SymmetricElement,
    pub complement_compression: SymmetricElement,
}

impl PeirceDecomposition {
    pub fn sum(&self) -> SymmetricElement {
        &(&self.compression + &self.off_diagonal) + &self.complement_compression
    }

    /// `pap + p⊥ap⊥`.
    pub fn diagonal(&self) -> SymmetricElement {
        &self.compression + &self.complement_compression
    }
}

pub fn peirce_decompose(a: &SymmetricElement, p: &Projection) -> Result<PeirceDecomposition> {
    crate::linalg::ensure_same_dim(a, p.element())?;
    let pp = p.element();
    let q = p.ortho();
    let qq = q.element();
    let cross = pp.product(a).matmul(qq.as_matrix());
    let off_diagonal = (&cross + &cross.transpose()).symmetrize();
    Ok(PeirceDecomposition {
        compression: a.sandwich(pp),
        off_diagonal,
        complement_compression: a.sandwich(qq),
    })
}
