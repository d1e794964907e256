//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by lattice construction, state preparation, operator
/// assembly, evolution, and analysis routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A structural parameter (dimension, extent, particle count, ...) is out
    /// of range or inconsistent.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A phase parameter that must lie on the unit circle does not.
    #[error("phase parameter {name} has modulus {modulus} (must be 1 within {tol})")]
    NonUnitPhase { name: &'static str, modulus: f64, tol: f64 },

    /// A matrix expected to be unitary failed the residual check.
    #[error("operator is not unitary: max residual {residual:.3e} exceeds {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    /// A requested object exceeds a hard size cap.  `required` names the size
    /// that would have been needed.
    #[error("capacity exceeded: required size {required} exceeds cap {cap}")]
    CapacityExceeded { required: u128, cap: usize },

    /// The requested (dimension, particle-count) sector is not supported.
    #[error("unsupported sector: D = {dimension} with n = {particles} (multi-particle evolution is one-dimensional only)")]
    UnsupportedSector { dimension: usize, particles: usize },

    /// A wavepacket is too narrow for the lattice to resolve.
    #[error("packet width sigma = {sigma} is below the one-site resolution floor")]
    ResolutionTooCoarse { sigma: f64 },

    /// A mass formula was evaluated at parameters where it degenerates.
    #[error("mass formula degenerates: {0}")]
    DegenerateMass(String),

    /// A formula that must produce a real mass produced a complex one.
    #[error("mass has non-negligible imaginary part {imaginary:.3e}")]
    NonRealMass { imaginary: f64 },

    /// An iterative numerical procedure failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Dispersion branch tracking could not decide between eigenvalue
    /// branches at this wavenumber.
    #[error("eigenvalue branch ambiguity at k = {k}")]
    BranchAmbiguity { k: f64 },

    /// A numerical quantity violated a guaranteed tolerance at run time.
    #[error("tolerance violation: {0}")]
    ToleranceViolation(String),
}

/// Convenience alias used by every fallible routine in the crate.
pub type Result<T> = std::result::Result<T, Error>;
