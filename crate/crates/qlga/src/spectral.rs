//! Spectral analysis of the one-step operator.
//!
//! The automaton's stationary states are eigenvectors of the step unitary.
//! Because one step maps each parity sublattice onto the other, physical
//! bound states are extracted from the two-step operator restricted to a
//! single parity class; `oscillator_eigenstate_experiment` does exactly that
//! for a harmonic well and compares the results against the continuum
//! eigenfunctions computed in the `oracle` module.

use ndarray::Array2;

use crate::collision::{mass_1d, UnitaryOperator};
use crate::error::{Error, Result};
use crate::evolve::{basis_parity_classes, step_matrix_with_cap, CollisionRule, QlgaModel};
use crate::lattice::LatticeSpec;
use crate::linalg::normal_eigen;
use crate::oracle::ho_eigenfunction;
use crate::state::SectorBasis;
use crate::C64;

/// Default cap on eigendecomposition dimension.
pub const DEFAULT_SPECTRUM_CAP: usize = 4096;

/// Eigenvalue tolerance: every eigenvalue of a step unitary must sit on the
/// unit circle within this bound.
const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// Eigendecomposition of a unitary operator.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Unit-modulus eigenvalues, sorted by principal argument.
    pub eigenvalues: Vec<C64>,
    /// Matching eigenvectors in the columns.
    pub eigenvectors: Array2<C64>,
    /// Per-pair residuals `max |U v - lambda v|`.
    pub residuals: Vec<f64>,
}

/// Diagonalize a unitary operator and validate the result.
pub fn eigendecompose(u: &UnitaryOperator, tol: f64) -> Result<Eigensystem> {
    if u.dim() > DEFAULT_SPECTRUM_CAP {
        return Err(Error::CapacityExceeded {
            required: u.dim() as u128,
            cap: DEFAULT_SPECTRUM_CAP,
        });
    }
    let (eigenvalues, eigenvectors, residuals) = normal_eigen(u.matrix())?;
    for (i, r) in residuals.iter().enumerate() {
        if *r > tol {
            return Err(Error::ToleranceViolation(format!(
                "eigenpair {i} residual {r:.3e} exceeds {tol:.3e}"
            )));
        }
    }
    for lambda in &eigenvalues {
        let off = (lambda.norm() - 1.0).abs();
        if off > UNIT_CIRCLE_TOL {
            return Err(Error::NotUnitary { residual: off, tol: UNIT_CIRCLE_TOL });
        }
    }
    Ok(Eigensystem { eigenvalues, eigenvectors, residuals })
}

/// Wrap an angle to (-pi, pi].
fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Convert a `steps`-step eigenvalue to an energy.
///
/// The rest-frame phase `global_phase` accumulated over the same number of
/// steps is divided out first; the remaining phase advance per unit physical
/// time `steps * eps^2` is the energy.
pub fn eigenphase_to_energy(lambda: C64, global_phase: C64, steps: usize, eps: f64) -> f64 {
    let g = global_phase.powu(steps as u32);
    -wrap_angle((lambda * g.conj()).arg()) / (steps as f64 * eps * eps)
}

/// Two-step operator restricted to one parity class of the one-particle
/// sector.  Returns the dense block and the basis indices it spans, and
/// checks that every cross-class element of the squared matrix is exactly
/// zero (the advection structure guarantees it).
pub fn two_step_parity_block(
    model: &QlgaModel,
    parity: usize,
    cap: usize,
) -> Result<(Array2<C64>, Vec<usize>)> {
    let u = step_matrix_with_cap(model, 1, cap)?;
    let u2 = u.matrix().dot(u.matrix());
    let basis = SectorBasis::new(model.lattice().clone(), 1)?;
    let classes = basis_parity_classes(&basis)?;
    let keep: Vec<usize> = (0..basis.len()).filter(|&i| classes[i] == Some(parity)).collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if classes[i] != classes[j] && u2[[i, j]] != C64::ZERO {
                return Err(Error::ToleranceViolation(format!(
                    "two-step operator leaks across parity classes at ({i}, {j})"
                )));
            }
        }
    }
    let dim = keep.len();
    let mut block = Array2::<C64>::zeros((dim, dim));
    for (bi, &i) in keep.iter().enumerate() {
        for (bj, &j) in keep.iter().enumerate() {
            block[[bi, bj]] = u2[[i, j]];
        }
    }
    Ok((block, keep))
}

/// One matched level of the oscillator experiment.
#[derive(Debug, Clone)]
pub struct OscillatorLevel {
    /// Continuum level index this automaton state was matched to.
    pub level: usize,
    /// Energy from the two-step eigenphase.
    pub energy: f64,
    /// Overlap magnitude with the continuum eigenfunction on the even grid.
    pub overlap: f64,
    /// Sign changes of the phase-aligned site profile.
    pub node_count: usize,
    /// Per-site total amplitude (sum of both directions), normalized.
    pub profile: Vec<C64>,
}

/// Result of the harmonic-well eigenstate comparison.
#[derive(Debug, Clone)]
pub struct OscillatorReport {
    /// Physical positions of the even-parity sites the profiles live on.
    pub grid: Vec<f64>,
    /// Continuum frequency `sqrt(2 a / m)` implied by the model parameters.
    pub expected_spacing: f64,
    /// Particle mass implied by the collision angle.
    pub mass: f64,
    /// Matched levels, one entry per requested continuum level.
    pub levels: Vec<OscillatorLevel>,
}

/// Count sign changes of the phase-aligned real part of a profile, ignoring
/// entries below `threshold` times the peak magnitude.
pub fn count_profile_nodes(profile: &[C64], threshold: f64) -> usize {
    let peak = profile.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let anchor =
        profile.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).copied().unwrap_or(C64::ONE);
    let align = anchor.conj() / anchor.norm();
    let mut nodes = 0;
    let mut last_sign = 0i32;
    for c in profile {
        if c.norm() < threshold * peak {
            continue;
        }
        let re = (align * c).re;
        let sign = if re > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            nodes += 1;
        }
        last_sign = sign;
    }
    nodes
}

/// Diagonalize the two-step even-parity block of a 1D harmonic-well model
/// and match the lowest automaton states to continuum oscillator levels.
///
/// For each requested continuum level the overlap is taken against the span
/// of each nearly degenerate eigenphase cluster (phases within 1e-8), and
/// the best-matching cluster supplies the state, its energy, and its node
/// count.
pub fn oscillator_eigenstate_experiment(
    model: &QlgaModel,
    n_levels: usize,
) -> Result<OscillatorReport> {
    let lat = model.lattice();
    if lat.dimension() != 1 {
        return Err(Error::InvalidParameter(
            "the oscillator experiment is defined for 1D models".into(),
        ));
    }
    let params = match model.collision() {
        CollisionRule::OneD(p) => p.clone(),
        CollisionRule::Isotropic(_) => {
            return Err(Error::InvalidParameter(
                "the oscillator experiment requires the 1D collision rule".into(),
            ));
        }
    };
    let a = match model.potential() {
        Some(spec) => match spec.form {
            crate::collision::Potential::Quadratic { coefficient } => coefficient,
        },
        None => {
            return Err(Error::InvalidParameter(
                "the oscillator experiment requires a quadratic potential".into(),
            ));
        }
    };
    let mass = mass_1d(&params)?;
    if mass <= 0.0 || a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bound states need positive mass and well curvature (mass = {mass}, a = {a})"
        )));
    }
    let omega = (2.0 * a / mass).sqrt();

    let (block, keep) = two_step_parity_block(model, 0, DEFAULT_SPECTRUM_CAP)?;
    let block_u = UnitaryOperator::new(block)?;
    let eig = eigendecompose(&block_u, 1e-8)?;
    let dim = keep.len();
    if n_levels > dim / 2 {
        return Err(Error::InvalidParameter(format!(
            "cannot resolve {n_levels} levels from a {dim}-dimensional block"
        )));
    }

    // Physical positions of the even-parity sites, and the basis rows
    // (slot indices) that live on each of those sites.
    let basis = SectorBasis::new(lat.clone(), 1)?;
    let mut sites: Vec<usize> = Vec::new();
    for &row in &keep {
        let site = lat.slot_site(basis.config(row)[0] as usize);
        if sites.last() != Some(&site) {
            sites.push(site);
        }
    }
    let grid: Vec<f64> = sites.iter().map(|&s| model.site_position(s)[0]).collect();

    // Cluster nearly degenerate eigenphases.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..dim {
        let phase = eig.eigenvalues[i].arg();
        match clusters.last_mut() {
            Some(cluster)
                if (phase - eig.eigenvalues[*cluster.last().unwrap()].arg()).abs() < 1e-8 =>
            {
                cluster.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    // Site profile of a block vector: sum the two direction amplitudes on
    // each even site.
    let site_profile = |vector: &[C64]| -> Vec<C64> {
        let mut profile = vec![C64::ZERO; sites.len()];
        for (pos, &row) in keep.iter().enumerate() {
            let site = lat.slot_site(basis.config(row)[0] as usize);
            let at = sites.iter().position(|&s| s == site).expect("site seen above");
            profile[at] += vector[pos];
        }
        profile
    };

    let normalize = |v: &mut [C64]| {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in v.iter_mut() {
                *c /= norm;
            }
        }
    };

    let mut levels = Vec::with_capacity(n_levels);
    for level in 0..n_levels {
        // Continuum eigenfunction sampled and normalized on the even grid.
        let mut target: Vec<C64> =
            grid.iter().map(|&x| C64::new(ho_eigenfunction(level, mass, omega, x), 0.0)).collect();
        normalize(&mut target);

        // Project the target onto each cluster's span of site profiles.
        let mut best: Option<(f64, Vec<C64>, f64)> = None;
        for cluster in &clusters {
            // Orthonormalize the cluster's site profiles (Gram-Schmidt).
            let mut span: Vec<Vec<C64>> = Vec::new();
            for &idx in cluster {
                let column: Vec<C64> = eig.eigenvectors.column(idx).to_vec();
                let mut profile = site_profile(&column);
                for existing in &span {
                    let overlap: C64 =
                        existing.iter().zip(&profile).map(|(e, p)| e.conj() * p).sum();
                    for (p, e) in profile.iter_mut().zip(existing) {
                        *p -= overlap * e;
                    }
                }
                let norm = profile.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for c in profile.iter_mut() {
                        *c /= norm;
                    }
                    span.push(profile);
                }
            }
            if span.is_empty() {
                continue;
            }
            // Projection of the target onto the span.
            let mut projection = vec![C64::ZERO; grid.len()];
            for basis_vec in &span {
                let coeff: C64 = basis_vec.iter().zip(&target).map(|(b, t)| b.conj() * t).sum();
                for (p, b) in projection.iter_mut().zip(basis_vec) {
                    *p += coeff * b;
                }
            }
            let overlap = projection.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let energy = eigenphase_to_energy(
                eig.eigenvalues[cluster[0]],
                model.global_phase(),
                2,
                model.eps(),
            );
            if best.as_ref().is_none_or(|(o, _, _)| overlap > *o) {
                let mut state = projection;
                normalize(&mut state);
                best = Some((overlap, state, energy));
            }
        }
        let (overlap, profile, energy) = best.ok_or_else(|| {
            Error::Convergence("no eigenphase cluster matched the continuum level".into())
        })?;
        let node_count = count_profile_nodes(&profile, 0.02);
        levels.push(OscillatorLevel { level, energy, overlap, node_count, profile });
    }

    Ok(OscillatorReport { grid, expected_spacing: omega, mass, levels })
}

/// Build the standard oscillator model used by the experiment entry points.
pub fn oscillator_model(l: usize, theta: f64, a: f64, eps: f64) -> Result<QlgaModel> {
    let lattice = LatticeSpec::new(1, l)?;
    QlgaModel::oscillator_1d(lattice, theta, a, eps)
}
