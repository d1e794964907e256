//! Independent continuum references and dispersion measurements.
//!
//! Everything here is computed without running the automaton's update rule:
//! closed-form continuum solutions (free Gaussian packets, harmonic-well
//! eigenfunctions) and plane-wave spectra of the one-step operator.  The
//! rest of the crate is validated against these references, never the other
//! way around.

use ndarray::Array2;

use crate::collision::{build_c_dd, mass_dd, mass_dd_alternate, CollisionDDParams};
use crate::error::{Error, Result};
use crate::evolve::{CollisionRule, QlgaModel};
use crate::lattice::LatticeSpec;
use crate::linalg::normal_eigen;
use crate::state::WavepacketParams;
use crate::C64;

/// Free-particle Gaussian packet at continuous position `x` and time `t`
/// (lattice units; mass in the same units).
///
/// Separable product over axes of
/// `(1+b)^{-1/2} exp(-(dx - k t / m)^2 / (4 s^2 (1+b)) + i (k dx - k^2 t / (2 m)))`
/// with `b = i t / (2 m s^2)` and `dx` the displacement from the packet
/// center.  Unnormalized; callers normalize on their grid.
pub fn free_gaussian(x: &[f64], t: f64, packet: &WavepacketParams, mass: f64) -> Result<C64> {
    if x.len() != packet.center.len() {
        return Err(Error::InvalidParameter(format!(
            "position arity {} does not match packet arity {}",
            x.len(),
            packet.center.len()
        )));
    }
    if mass == 0.0 {
        return Err(Error::DegenerateMass("free propagation needs a nonzero mass".into()));
    }
    let s2 = packet.sigma * packet.sigma;
    let b = C64::new(0.0, t / (2.0 * mass * s2));
    let one_b = C64::ONE + b;
    let prefactor = one_b.sqrt().finv();
    let mut value = C64::ONE;
    for ((&xi, &k), &center) in x.iter().zip(&packet.wavenumber).zip(&packet.center) {
        let dx = xi - center;
        let drift = dx - k * t / mass;
        let envelope = -(drift * drift) / (4.0 * s2) * one_b.finv();
        let phase = C64::new(0.0, k * dx - k * k * t / (2.0 * mass));
        value *= prefactor * (envelope + phase).exp();
    }
    Ok(value)
}

/// Harmonic-well eigenfunction `H_n(y) exp(-y^2/2)` with `y = sqrt(m w) x`,
/// by the Hermite recurrence `H_{n+1} = 2 y H_n - 2 n H_{n-1}`.
/// Unnormalized; callers normalize on their grid.
pub fn ho_eigenfunction(n: usize, mass: f64, omega: f64, x: f64) -> f64 {
    let y = (mass * omega).sqrt() * x;
    let mut h_prev = 1.0;
    if n == 0 {
        return h_prev * (-0.5 * y * y).exp();
    }
    let mut h = 2.0 * y;
    for level in 1..n {
        let next = 2.0 * y * h - 2.0 * level as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h * (-0.5 * y * y).exp()
}

/// One measured point of the automaton's dispersion relation.
#[derive(Debug, Clone)]
pub struct DispersionPoint {
    /// Wavevector (lattice units, one component per axis).
    pub k: Vec<f64>,
    /// Phase advance per step above the rest phase, `-arg(lambda g*)`.
    pub omega: f64,
    /// The selected one-step eigenvalue.
    pub eigenvalue: C64,
    /// Distance gap to the next-nearest branch; small gaps are rejected.
    pub margin: f64,
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

/// Margin below which branch selection is considered ambiguous.
const BRANCH_MARGIN_TOL: f64 = 1e-9;

/// Measure the automaton dispersion at one wavevector by diagonalizing the
/// plane-wave one-step matrix and selecting the branch nearest the model's
/// rest phase.  Any potentials on the model are ignored: the dispersion is
/// a property of the free collision.
pub fn measure_dispersion(model: &QlgaModel, k: &[f64]) -> Result<DispersionPoint> {
    let d = model.lattice().dimension();
    if k.len() != d {
        return Err(Error::InvalidParameter(format!(
            "wavevector arity {} does not match lattice dimension {d}",
            k.len()
        )));
    }
    let eigenvalues: Vec<C64> = match model.collision() {
        CollisionRule::OneD(params) => {
            // 2x2 plane-wave matrix: trace 2 q cos k, determinant 1.
            let half_trace = params.q() * k[0].cos();
            let discriminant = (1.0 - half_trace * half_trace).max(0.0).sqrt();
            vec![C64::new(half_trace, discriminant), C64::new(half_trace, -discriminant)]
        }
        CollisionRule::Isotropic(params) => {
            let c = build_c_dd(params)?.into_matrix();
            let m = 2 * d;
            // Advection phase per direction: slot 2i moves +e_i, 2i+1 -e_i.
            let mut a = Array2::<C64>::zeros((m, m));
            for dir in 0..m {
                let axis = dir / 2;
                let sign = if dir % 2 == 0 { -1.0 } else { 1.0 };
                a[[dir, dir]] = C64::from_polar(1.0, sign * k[axis]);
            }
            let (values, _, _) = normal_eigen(&c.dot(&a))?;
            values
        }
    };
    let g = model.global_phase();
    let mut ranked: Vec<(f64, C64)> = eigenvalues
        .iter()
        .map(|&lambda| (wrap_angle((lambda * g.conj()).arg()).abs(), lambda))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let margin = if ranked.len() > 1 { ranked[1].0 - ranked[0].0 } else { f64::INFINITY };
    if margin < BRANCH_MARGIN_TOL {
        let k_norm = k.iter().map(|c| c * c).sum::<f64>().sqrt();
        return Err(Error::BranchAmbiguity { k: k_norm });
    }
    let lambda = ranked[0].1;
    Ok(DispersionPoint {
        k: k.to_vec(),
        omega: -wrap_angle((lambda * g.conj()).arg()),
        eigenvalue: lambda,
        margin,
    })
}

/// Measure the dispersion along one axis at several wavenumbers.
pub fn dispersion_curve(
    model: &QlgaModel,
    ks: &[f64],
    axis: usize,
) -> Result<Vec<DispersionPoint>> {
    let d = model.lattice().dimension();
    if axis >= d {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range for dimension {d}")));
    }
    ks.iter()
        .map(|&k| {
            let mut kv = vec![0.0; d];
            kv[axis] = k;
            measure_dispersion(model, &kv)
        })
        .collect()
}

/// Least-squares fit of `omega = c k^2` through the origin.
#[derive(Debug, Clone)]
pub struct MassFit {
    /// Fitted curvature `c`.
    pub curvature: f64,
    /// Implied mass `1 / (2 c)`.
    pub mass: f64,
    /// Coefficient of determination against the mean-omega baseline.
    pub r_squared: f64,
}

/// Fit `omega = c k^2` to measured `(k, omega)` pairs and read off the mass.
pub fn fit_mass(points: &[(f64, f64)]) -> Result<MassFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("mass fit needs at least two points".into()));
    }
    let sum_wk2: f64 = points.iter().map(|(k, w)| w * k * k).sum();
    let sum_k4: f64 = points.iter().map(|(k, _)| k.powi(4)).sum();
    if sum_k4 == 0.0 {
        return Err(Error::InvalidParameter("mass fit needs nonzero wavenumbers".into()));
    }
    let curvature = sum_wk2 / sum_k4;
    if curvature.abs() < 1e-300 {
        return Err(Error::DegenerateMass("fitted curvature is zero".into()));
    }
    let mean = points.iter().map(|(_, w)| w).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|(k, w)| (w - curvature * k * k).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, w)| (w - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(MassFit { curvature, mass: 1.0 / (2.0 * curvature), r_squared })
}

/// One wavenumber row of an arbitration run.
#[derive(Debug, Clone)]
pub struct ArbitrationRow {
    pub k: f64,
    pub omega_measured: f64,
    /// `k^2 / (2 m)` using the primary closed-form mass.
    pub omega_primary: f64,
    /// `k^2 / (2 m)` using the alternate closed-form mass.
    pub omega_alternate: f64,
}

/// Outcome of comparing the two closed-form mass expressions against the
/// mass measured from the dispersion.
#[derive(Debug, Clone)]
pub struct ArbitrationReport {
    pub dimension: usize,
    pub mass_measured: f64,
    pub mass_primary: f64,
    pub mass_alternate: f64,
    pub rel_err_primary: f64,
    pub rel_err_alternate: f64,
    /// `"primary"` or `"alternate"`, whichever lands nearer the measurement.
    pub winner: &'static str,
    pub fit: MassFit,
    pub rows: Vec<ArbitrationRow>,
}

/// Decide between the two closed-form mass expressions by measuring the
/// dispersion of the given collision along the first axis.
pub fn arbitrate_mass_formulas(
    params: &CollisionDDParams,
    ks: &[f64],
) -> Result<ArbitrationReport> {
    let d = params.dimension();
    let lattice = LatticeSpec::new(d, 4)?;
    let model = QlgaModel::new(lattice, CollisionRule::Isotropic(params.clone()), None, None, 1.0)?;
    let mass_primary = mass_dd(params.mu(), params.nu(), d)?;
    let mass_alternate = mass_dd_alternate(params.mu(), d)?;
    let points = dispersion_curve(&model, ks, 0)?;
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.k[0], p.omega)).collect();
    let fit = fit_mass(&pairs)?;
    let mass_measured = fit.mass;
    let rows = pairs
        .iter()
        .map(|&(k, omega_measured)| ArbitrationRow {
            k,
            omega_measured,
            omega_primary: k * k / (2.0 * mass_primary),
            omega_alternate: k * k / (2.0 * mass_alternate),
        })
        .collect();
    let rel = |m: f64| (m - mass_measured).abs() / mass_measured.abs();
    let rel_err_primary = rel(mass_primary);
    let rel_err_alternate = rel(mass_alternate);
    let winner = if rel_err_primary <= rel_err_alternate { "primary" } else { "alternate" };
    Ok(ArbitrationReport {
        dimension: d,
        mass_measured,
        mass_primary,
        mass_alternate,
        rel_err_primary,
        rel_err_alternate,
        winner,
        fit,
        rows,
    })
}
