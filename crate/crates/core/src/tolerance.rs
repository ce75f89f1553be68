use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sweep limit of the Jacobi eigensolver.
pub const MAX_SWEEPS: usize = 100;

/// Largest set accepted by the finite-set commutator (cost is `2^n` joins).
pub const DEFAULT_SET_CAP: usize = 12;

/// Lowest eigenvalue threshold for sums of projections, kept well above the
/// eigensolver's off-diagonal target.
pub const LATTICE_FLOOR: f64 = 1e-12;

/// Numerical thresholds shared by every module.
///
/// All thresholds are relative: a value `x` is compared against
/// `eps * (1 + scale)` where `scale` is the norm of the operands involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// An eigenvalue with `|λ| <= rank_eps * (1 + ‖a‖)` counts as zero.
    pub rank_eps: f64,
    /// `‖ab - ba‖ <= comm_eps * (1 + ‖a‖‖b‖)` counts as commuting.
    pub comm_eps: f64,
    /// Allowed negative eigenvalue magnitude in order checks.
    pub psd_eps: f64,
    /// Relative off-diagonal Frobenius target of the eigensolver.
    pub eig_off_eps: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_eps: 1e-9,
            comm_eps: 1e-8,
            psd_eps: 1e-9,
            eig_off_eps: 1e-13,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank_eps", self.rank_eps),
            ("comm_eps", self.comm_eps),
            ("psd_eps", self.psd_eps),
            ("eig_off_eps", self.eig_off_eps),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if self.rank_eps >= 0.5 {
            return Err(Error::InvalidTolerance(format!(
                "rank_eps must be below 0.5, got {}",
                self.rank_eps
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn zero_threshold(&self, norm: f64) -> f64 {
        self.rank_eps * (1.0 + norm)
    }

    #[inline]
    pub fn comm_threshold(&self, norm_a: f64, norm_b: f64) -> f64 {
        self.comm_eps * (1.0 + norm_a * norm_b)
    }

    #[inline]
    pub fn psd_threshold(&self, norm: f64) -> f64 {
        self.psd_eps * (1.0 + norm)
    }

    /// Threshold for "these two computed elements agree".
    #[inline]
    pub fn agreement(&self, scale: f64) -> f64 {
        self.comm_eps * (1.0 + scale)
    }

    /// Zero threshold for eigenvalues of a sum of projections. Along a
    /// direction at principal angle `θ` to a summand such a sum has an
    /// eigenvalue of order `θ²`, so the threshold is `rank_eps²` (floored at
    /// [`LATTICE_FLOOR`]) to resolve angles down to `rank_eps`.
    #[inline]
    pub fn lattice_threshold(&self, norm: f64) -> f64 {
        (self.rank_eps * self.rank_eps).max(LATTICE_FLOOR) * (1.0 + norm)
    }

    /// Distinct eigenvalues closer than this are merged into one.
    #[inline]
    pub fn merge_threshold(&self, norm: f64) -> f64 {
        2.0 * self.rank_eps * (1.0 + norm)
    }
}
