//! Resource estimates: how much work the automaton costs on classical and
//! quantum hardware.
//!
//! Counts are reported in log10 always, plus an exact integer when it fits
//! in `u128`.  `q` is the number of sites per axis, `d` the spatial
//! dimension, and `n` the particle count; a lattice then has `q^d` sites and
//! `2 d q^d` slots.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

const LN_10: f64 = std::f64::consts::LN_10;

/// Exact binomial coefficient, `None` when an intermediate overflows u128.
fn binomial_exact(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // The prefix product is itself a binomial coefficient, so the
        // division is always exact.
        acc = acc.checked_mul(n - k + i + 1)? / (i + 1);
    }
    Some(acc)
}

/// Which cost expression produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// Amplitudes a classical integrator must store and update.
    Variables,
    /// Classical per-step work, `q^(2 + d n) (2 d)^n / n!`.
    Classical,
    /// Quantum per-step work for one-body terms, `2 d q^(2 + d)`.
    Quantum,
    /// Quantum per-step work with pairwise terms, `4 d^2 q^(2 + 2 d)`.
    QuantumPairwise,
}

/// One cost figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceEstimate {
    pub formula: Formula,
    /// log10 of the operation count.
    pub log10_ops: f64,
    /// The exact count when it fits in a `u128`.
    pub exact_ops: Option<u128>,
}

/// Storage cost of the classical representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableCount {
    /// Total slots `2 d q^d`.
    pub slots: u128,
    /// log10 of the exact amplitude count `C(slots, n)`.
    pub log10_exact: f64,
    /// log10 of the distinguishable-particle approximation `slots^n / n!`.
    pub log10_approx: f64,
    /// Exact `C(slots, n)` when it fits in a `u128`.
    pub exact: Option<u128>,
}

fn validate(q: u64, d: u32, n: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("per-axis size q = {q} must be at least 2")));
    }
    if d < 1 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("particle count must be at least 1".into()));
    }
    Ok(())
}

fn log10_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) / LN_10
}

fn log10_binomial(n: u128, k: u128) -> f64 {
    let (n, k) = (n as f64, k as f64);
    (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / LN_10
}

/// `q^e` in u128, `None` on overflow.
fn checked_pow(q: u64, e: u32) -> Option<u128> {
    (q as u128).checked_pow(e)
}

/// Slot count `2 d q^d`, or an error when it overflows u128.
fn slot_count(q: u64, d: u32) -> Result<u128> {
    checked_pow(q, d)
        .and_then(|sites| sites.checked_mul(2 * d as u128))
        .ok_or_else(|| Error::InvalidParameter(format!("slot count 2*{d}*{q}^{d} overflows u128")))
}

/// Number of amplitudes a classical simulation stores for `n` particles.
pub fn count_variables(q: u64, d: u32, n: u64) -> Result<VariableCount> {
    validate(q, d, n)?;
    let slots = slot_count(q, d)?;
    if (n as u128) > slots {
        return Err(Error::InvalidParameter(format!(
            "cannot place {n} particles in {slots} slots"
        )));
    }
    let log10_approx = n as f64 * (slots as f64).log10() - log10_factorial(n);
    let log10_exact = log10_binomial(slots, n as u128);
    let exact = binomial_exact(slots, n as u128);
    Ok(VariableCount { slots, log10_exact, log10_approx, exact })
}

/// Classical per-step cost `q^(2 + d n) (2 d)^n / n!` (log10 only; the
/// factorial division rarely lands on an integer).
pub fn t_classical(q: u64, d: u32, n: u64) -> Result<ResourceEstimate> {
    validate(q, d, n)?;
    let exponent = 2.0 + d as f64 * n as f64;
    let log10_ops =
        exponent * (q as f64).log10() + n as f64 * (2.0 * d as f64).log10() - log10_factorial(n);
    Ok(ResourceEstimate { formula: Formula::Classical, log10_ops, exact_ops: None })
}

/// Quantum per-step cost for one-body dynamics, `2 d q^(2 + d)`.
pub fn t_quantum(q: u64, d: u32) -> Result<ResourceEstimate> {
    validate(q, d, 1)?;
    let log10_ops = (2.0 * d as f64).log10() + (2.0 + d as f64) * (q as f64).log10();
    let exact_ops = checked_pow(q, d + 2).and_then(|p| p.checked_mul(2 * d as u128));
    Ok(ResourceEstimate { formula: Formula::Quantum, log10_ops, exact_ops })
}

/// Quantum per-step cost including pairwise interactions, `4 d^2 q^(2 + 2 d)`.
pub fn t_quantum_pairwise(q: u64, d: u32) -> Result<ResourceEstimate> {
    validate(q, d, 1)?;
    let log10_ops =
        (4.0 * d as f64 * d as f64).log10() + (2.0 + 2.0 * d as f64) * (q as f64).log10();
    let exact_ops =
        checked_pow(q, 2 * d + 2).and_then(|p| p.checked_mul(4 * (d as u128) * (d as u128)));
    Ok(ResourceEstimate { formula: Formula::QuantumPairwise, log10_ops, exact_ops })
}

/// All four estimates for one problem size, in a fixed order:
/// variables, classical, quantum, quantum-pairwise.
pub fn estimate_all(q: u64, d: u32, n: u64) -> Result<(VariableCount, [ResourceEstimate; 3])> {
    let variables = count_variables(q, d, n)?;
    Ok((variables, [t_classical(q, d, n)?, t_quantum(q, d)?, t_quantum_pairwise(q, d)?]))
}

/// Check a lattice/sector pair against the closed-form variable count.
pub fn verify_against_basis(lattice: &LatticeSpec, n: usize) -> Result<bool> {
    let vars = count_variables(lattice.extent() as u64, lattice.dimension() as u32, n as u64)?;
    let direct = binomial_exact(lattice.slot_count() as u128, n as u128);
    Ok(vars.exact == direct)
}
