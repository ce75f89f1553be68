//! Computation in finite-dimensional synaptic algebras, modeled as real
//! symmetric matrices.
//!
//! The crate covers the element calculus (carriers, roots, polar and
//! spectral decompositions), the orthomodular lattice of projections, the
//! CBS-decomposition `e = c²p + bk + s²p⊥` of an effect with respect to a
//! projection, the pair commutator `[p, e]`, and closed-form infima
//! `e ∧ p⊥` for atoms `p`.

pub mod battery;
pub mod calculus;
pub mod cbs;
pub mod commutator;
pub mod effect;
pub mod error;
pub mod infimum;
pub mod lattice;
pub mod linalg;
pub mod sampling;
pub mod tolerance;

pub use calculus::{
    abs_value, canonical_extension, carrier, peirce_decompose, polar_decompose, positive_part,
    signum, spectral_resolution, sqrt_psd, PartialSymmetry, PeirceDecomposition,
    PolarDecomposition, SpectralResolution, Symmetry,
};
pub use cbs::{
    atom_structure, cbs_carriers, cbs_decompose, commutator_effect, cosine_sine, identity_limit,
    j_effect,
    off_diagonal, restrict_cbs, AtomStructure, CbsCarriers, CbsDecomposition, CornerDecomposition,
};
pub use commutator::{
    characterization_check, corner_commutator, inequality_chain, pair_commutator,
    pair_commutator_via_closure, satisfies_commutator_conditions, split_by_commutator, CornerPair,
    PairCommutatorReport, Splitting,
};
pub use effect::{
    is_projection_free, largest_subprojections, orthosupplement, restrict_to_corner, Corner,
    Effect, SubprojectionPair,
};
pub use error::{Error, Result};
pub use infimum::{
    atom_identity_residuals, atom_lower_bound_oracle, atom_mean, boundary_lower_bound,
    inf_with_atom_complement, inf_with_atom_sequence, inf_with_projection, maximality_check,
    AtomIdentityResiduals, AtomInfimumRecord, InfimumBranch,
};
pub use lattice::{
    exchanged_by, finite_set_commutator, finite_set_commutator_with_cap, is_atom, join, join_all,
    marsden_commutator, meet, meet_all, ortho, Projection,
};
pub use linalg::{
    apply_scalar_function, commutes, psd_leq, sym_eigen, try_apply_scalar_function,
    EigenDecomposition, Matrix, SymmetricElement,
};
pub use tolerance::ToleranceConfig;
