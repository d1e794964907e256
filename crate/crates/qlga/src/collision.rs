//! Per-site collision operators, potentials, and the masses they induce.
//!
//! The one-dimensional collision acts on the four occupancy states of a
//! site's two slots, ordered (empty, right-only, left-only, both); a single
//! particle mixes between the slots with amplitudes `q = cos(theta)` and
//! `p = -i sin(theta)`, and a doubly occupied site acquires the phase `phi`.
//! The D-dimensional one-particle collision is assembled from its symmetry
//! eigenspaces: the uniform direction vector carries the phase `mu`,
//! parity-odd vectors carry `nu`, and the remaining parity-even vectors
//! carry `lambda`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::unitarity_residual;
use crate::C64;

/// Hard unitarity tolerance for every operator constructor.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Tolerance for phase parameters that must lie on the unit circle.
const UNIT_PHASE_TOL: f64 = 1e-12;

fn check_unit_phase(name: &'static str, z: C64) -> Result<()> {
    let modulus = z.norm();
    if (modulus - 1.0).abs() > UNIT_PHASE_TOL {
        return Err(Error::NonUnitPhase { name, modulus, tol: UNIT_PHASE_TOL });
    }
    Ok(())
}

/// A validated unitary matrix.
#[derive(Debug, Clone)]
pub struct UnitaryOperator {
    matrix: Array2<C64>,
}

impl UnitaryOperator {
    /// Wrap a matrix, failing if `max |U†U - I|` exceeds 1e-12.
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidParameter(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = unitarity_residual(&matrix);
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual, tol: UNITARITY_TOL });
        }
        Ok(UnitaryOperator { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    /// Recomputed residual `max |U†U - I|`.
    pub fn residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }
}

/// Parameters of the 1D collision: mixing angle and double-occupancy phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision1DParams {
    theta: f64,
    phi: C64,
}

impl Collision1DParams {
    pub fn new(theta: f64, phi: C64) -> Result<Self> {
        check_unit_phase("phi", phi)?;
        Ok(Collision1DParams { theta, phi })
    }

    /// Build from angles; `phi_angle` is the argument of the
    /// double-occupancy phase in radians.
    pub fn from_angles(theta: f64, phi_angle: f64) -> Result<Self> {
        Self::new(theta, C64::from_polar(1.0, phi_angle))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Forward (slot-preserving) amplitude, real.
    pub fn q(&self) -> f64 {
        self.theta.cos()
    }

    /// Slot-exchanging amplitude, `-i sin(theta)`.
    pub fn p(&self) -> C64 {
        C64::new(0.0, -self.theta.sin())
    }

    pub fn phi(&self) -> C64 {
        self.phi
    }
}

/// Parameters of the D-dimensional one-particle collision: three unit
/// phases attached to the symmetry eigenspaces of the direction set.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionDDParams {
    dimension: usize,
    mu: C64,
    nu: C64,
    lambda: C64,
}

impl CollisionDDParams {
    pub fn new(dimension: usize, mu: C64, nu: C64, lambda: C64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "collision dimension must be 1, 2, or 3 (got {dimension})"
            )));
        }
        check_unit_phase("mu", mu)?;
        check_unit_phase("nu", nu)?;
        check_unit_phase("lambda", lambda)?;
        Ok(CollisionDDParams { dimension, mu, nu, lambda })
    }

    pub fn from_angles(dimension: usize, mu: f64, nu: f64, lambda: f64) -> Result<Self> {
        Self::new(
            dimension,
            C64::from_polar(1.0, mu),
            C64::from_polar(1.0, nu),
            C64::from_polar(1.0, lambda),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }
}

/// Four-state collision matrix of a 1D site in the basis
/// (empty, right-only, left-only, both).
pub fn build_t1(params: &Collision1DParams) -> Result<UnitaryOperator> {
    let q = C64::new(params.q(), 0.0);
    let p = params.p();
    let mut m = Array2::<C64>::zeros((4, 4));
    m[[0, 0]] = C64::ONE;
    m[[1, 1]] = q;
    m[[1, 2]] = p;
    m[[2, 1]] = p;
    m[[2, 2]] = q;
    m[[3, 3]] = params.phi();
    UnitaryOperator::new(m)
}

/// One-particle collision matrix over the `2D` directions of a site,
/// assembled as `mu P_uniform + nu P_odd + lambda P_even-complement`.
pub fn build_c_dd(params: &CollisionDDParams) -> Result<UnitaryOperator> {
    let d = params.dimension();
    let m = 2 * d;
    let uniform = (params.mu() - params.lambda()) / m as f64;
    let diag = (params.nu() + params.lambda()) * 0.5;
    let swap = (params.lambda() - params.nu()) * 0.5;
    let mut c = Array2::<C64>::zeros((m, m));
    for u in 0..m {
        for v in 0..m {
            let mut entry = uniform;
            if u == v {
                entry += diag;
            }
            if u == v ^ 1 {
                entry += swap;
            }
            c[[u, v]] = entry;
        }
    }
    UnitaryOperator::new(c)
}

/// Mass induced by the 1D collision: `i p / q = tan(theta)`.
pub fn mass_1d(params: &Collision1DParams) -> Result<f64> {
    let q = params.q();
    if q.abs() < 1e-12 {
        return Err(Error::DegenerateMass(
            "forward amplitude q = cos(theta) vanishes; the mass diverges".into(),
        ));
    }
    // i * (-i sin) / cos reduces to tan(theta), which is exactly real.
    Ok(params.theta().tan())
}

/// Mass induced by the D-dimensional collision, from the ratio of the
/// uniform and parity-odd eigenphases: `m = i D (mu - nu) / (mu + nu)`.
pub fn mass_dd(mu: C64, nu: C64, dimension: usize) -> Result<f64> {
    check_unit_phase("mu", mu)?;
    check_unit_phase("nu", nu)?;
    if (mu - nu).norm() < 1e-12 {
        return Err(Error::DegenerateMass("mu = nu gives a zero mass".into()));
    }
    if (mu + nu).norm() < 1e-12 {
        return Err(Error::DegenerateMass("mu = -nu makes the mass diverge".into()));
    }
    let m = C64::new(0.0, dimension as f64) * (mu - nu) / (mu + nu);
    if m.im.abs() > 1e-10 * m.re.abs().max(1.0) {
        return Err(Error::NonRealMass { imaginary: m.im });
    }
    Ok(m.re)
}

/// Alternate closed-form mass quoted for the direction-reversal rule
/// (`nu = 1, lambda = -1`): `m = i (mu - 1) / (D (mu + 1))`.  Disagrees with
/// [`mass_dd`] by a factor `D^2`; `arbitrate_mass_formulas` in the oracle
/// module settles which one matches the measured dispersion.
pub fn mass_dd_alternate(mu: C64, dimension: usize) -> Result<f64> {
    check_unit_phase("mu", mu)?;
    if (mu + C64::ONE).norm() < 1e-12 {
        return Err(Error::DegenerateMass("mu = -1 makes the mass diverge".into()));
    }
    if (mu - C64::ONE).norm() < 1e-12 {
        return Err(Error::DegenerateMass("mu = 1 gives a zero mass".into()));
    }
    let m = C64::new(0.0, 1.0) * (mu - C64::ONE) / ((mu + C64::ONE) * dimension as f64);
    if m.im.abs() > 1e-10 * m.re.abs().max(1.0) {
        return Err(Error::NonRealMass { imaginary: m.im });
    }
    Ok(m.re)
}

/// External potential forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V(x) = a |x|^2` (harmonic well centered at the origin).
    Quadratic { coefficient: f64 },
}

impl Potential {
    /// Potential value at a physical position.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Quadratic { coefficient } => {
                coefficient * x.iter().map(|c| c * c).sum::<f64>()
            }
        }
    }
}

/// An external potential together with the lattice scale `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub form: Potential,
    pub eps: f64,
}

impl PotentialSpec {
    pub fn new(form: Potential, eps: f64) -> Result<Self> {
        if eps <= 0.0 || eps.is_nan() {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        Ok(PotentialSpec { form, eps })
    }

    /// Phase applied to one occupied slot at physical position `x`:
    /// `exp(-i eps^2 V(x))`.
    pub fn phase(&self, x: &[f64]) -> C64 {
        C64::from_polar(1.0, -self.eps * self.eps * self.form.eval(x))
    }
}

/// Single-slot potential operator `diag(1, exp(-i eps^2 V(x)))` acting on
/// (unoccupied, occupied).
pub fn potential_phase_op(spec: &PotentialSpec, x: &[f64]) -> Result<UnitaryOperator> {
    let mut m = Array2::<C64>::zeros((2, 2));
    m[[0, 0]] = C64::ONE;
    m[[1, 1]] = spec.phase(x);
    UnitaryOperator::new(m)
}

/// Combined 1D site matrix for a gas in an external quadratic well
/// `V(x) = a x^2`: the collision with `mu` replacing the single-particle
/// eigenphase, with the potential phase folded into the occupied entries.
pub fn gas_t(mu: C64, phi: C64, a: f64, eps: f64, x: f64) -> Result<UnitaryOperator> {
    check_unit_phase("mu", mu)?;
    check_unit_phase("phi", phi)?;
    let g = C64::from_polar(1.0, -a * eps * eps * x * x);
    let keep = (mu + C64::ONE) * 0.5 * g;
    let flip = (mu - C64::ONE) * 0.5 * g;
    let mut m = Array2::<C64>::zeros((4, 4));
    m[[0, 0]] = C64::ONE;
    m[[1, 1]] = keep;
    m[[1, 2]] = flip;
    m[[2, 1]] = flip;
    m[[2, 2]] = keep;
    m[[3, 3]] = phi * g * g;
    UnitaryOperator::new(m)
}

/// Pairwise interaction potential forms.
#[derive(Debug, Clone, PartialEq)]
pub enum PairPotential {
    /// `V(x, y) = c |x - y|^2`.
    QuadraticDistance { coefficient: f64 },
    /// Tabulated by separation: `values[round(|x - y| / spacing)]`, zero
    /// beyond the table.
    Table { spacing: f64, values: Vec<f64> },
}

/// A symmetric two-body potential.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPotentialSpec {
    pub form: PairPotential,
}

impl PairPotentialSpec {
    pub fn new(form: PairPotential) -> Result<Self> {
        if let PairPotential::Table { spacing, .. } = &form {
            if *spacing <= 0.0 || spacing.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "table spacing {spacing} must be positive"
                )));
            }
        }
        Ok(PairPotentialSpec { form })
    }

    /// Potential value for a pair at physical positions `x` and `y`.
    /// Symmetric in its arguments by construction (it depends only on the
    /// separation).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        match &self.form {
            PairPotential::QuadraticDistance { coefficient } => coefficient * dist2,
            PairPotential::Table { spacing, values } => {
                let index = (dist2.sqrt() / spacing).round() as usize;
                values.get(index).copied().unwrap_or(0.0)
            }
        }
    }
}

/// Phase acquired by one occupied pair: `exp(-i eps^2 V(x, y))`.
pub fn pair_interaction_phase(spec: &PairPotentialSpec, x: &[f64], y: &[f64], eps: f64) -> C64 {
    C64::from_polar(1.0, -eps * eps * spec.eval(x, y))
}

/// Two-slot pair operator `diag(1, 1, 1, exp(-i eps^2 V(x, y)))`: only the
/// both-occupied state feels the interaction.
pub fn pair_interaction_op(
    spec: &PairPotentialSpec,
    x: &[f64],
    y: &[f64],
    eps: f64,
) -> Result<UnitaryOperator> {
    let mut m = Array2::<C64>::eye(4);
    m[[3, 3]] = pair_interaction_phase(spec, x, y, eps);
    UnitaryOperator::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn t1_identity_at_theta_zero() {
        let params = Collision1DParams::from_angles(0.0, 0.0).unwrap();
        let t = build_t1(&params).unwrap();
        assert_eq!(t.matrix(), &Array2::<C64>::eye(4));
    }

    #[test]
    fn t1_is_unitary_across_parameters() {
        for theta in [0.0, 0.3, FRAC_PI_4, 1.2, PI / 2.0] {
            for phi_angle in [0.0, 1.0, PI] {
                let params = Collision1DParams::from_angles(theta, phi_angle).unwrap();
                let t = build_t1(&params).unwrap();
                assert!(t.residual() < 1e-15);
            }
        }
    }

    #[test]
    fn t1_rejects_off_circle_phi() {
        let err = Collision1DParams::new(0.3, C64::new(0.5, 0.0));
        assert!(matches!(err, Err(Error::NonUnitPhase { name: "phi", .. })));
    }

    #[test]
    fn c_dd_reduces_to_t1_block_in_one_dimension() {
        // With mu = q + p and nu = q - p the 2x2 one-particle block of the
        // 1D collision is recovered.
        let params1 = Collision1DParams::from_angles(0.9, 0.0).unwrap();
        let q = C64::new(params1.q(), 0.0);
        let p = params1.p();
        let dd = CollisionDDParams::new(1, q + p, q - p, C64::ONE).unwrap();
        let c = build_c_dd(&dd).unwrap();
        assert!((c.matrix()[[0, 0]] - q).norm() < 1e-15);
        assert!((c.matrix()[[0, 1]] - p).norm() < 1e-15);
        assert!((c.matrix()[[1, 0]] - p).norm() < 1e-15);
        assert!((c.matrix()[[1, 1]] - q).norm() < 1e-15);
    }

    #[test]
    fn c_dd_identity_when_all_phases_are_one() {
        for d in 1..=3 {
            let params = CollisionDDParams::new(d, C64::ONE, C64::ONE, C64::ONE).unwrap();
            let c = build_c_dd(&params).unwrap();
            let eye = Array2::<C64>::eye(2 * d);
            for (a, b) in c.matrix().iter().zip(eye.iter()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn c_dd_reversal_rule_entries_in_two_dimensions() {
        // nu = 1, lambda = -1: amplitude (mu+1)/4 - 1 for direction reversal
        // and (mu+1)/4 for every other transition.
        let mu = C64::from_polar(1.0, 1.1);
        let params = CollisionDDParams::new(2, mu, C64::ONE, -C64::ONE).unwrap();
        let c = build_c_dd(&params).unwrap();
        let base = (mu + C64::ONE) / 4.0;
        for u in 0..4 {
            for v in 0..4 {
                let expect = if u == v ^ 1 { base - C64::ONE } else { base };
                assert!((c.matrix()[[u, v]] - expect).norm() < 1e-15, "entry ({u},{v})");
            }
        }
    }

    #[test]
    fn c_dd_symmetry_eigenvectors() {
        let params = CollisionDDParams::from_angles(3, 0.8, -1.3, 2.1).unwrap();
        let c = build_c_dd(&params).unwrap();
        let m = 6;
        // Uniform vector carries mu.
        let ones = Array1::<C64>::from_elem(m, C64::ONE);
        let image = c.matrix().dot(&ones);
        for i in 0..m {
            assert!((image[i] - params.mu()).norm() < 1e-14);
        }
        // A parity-odd vector (+e_1 minus -e_1) carries nu.
        let mut odd = Array1::<C64>::zeros(m);
        odd[2] = C64::ONE;
        odd[3] = -C64::ONE;
        let image = c.matrix().dot(&odd);
        for i in 0..m {
            assert!((image[i] - params.nu() * odd[i]).norm() < 1e-14);
        }
        // A parity-even, sum-free vector carries lambda.
        let mut even = Array1::<C64>::zeros(m);
        even[0] = C64::ONE;
        even[1] = C64::ONE;
        even[4] = -C64::ONE;
        even[5] = -C64::ONE;
        let image = c.matrix().dot(&even);
        for i in 0..m {
            assert!((image[i] - params.lambda() * even[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn c_dd_unitary_for_random_phase_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let d = rng.random_range(1..=3);
            let params = CollisionDDParams::from_angles(
                d,
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
            .unwrap();
            let c = build_c_dd(&params).unwrap();
            assert!(c.residual() < 1e-14, "D = {d}");
        }
    }

    #[test]
    fn mass_1d_is_tan_theta() {
        let params = Collision1DParams::from_angles(FRAC_PI_4, 0.0).unwrap();
        assert!((mass_1d(&params).unwrap() - 1.0).abs() < 1e-15);
        let params = Collision1DParams::from_angles(0.3, 0.0).unwrap();
        assert!((mass_1d(&params).unwrap() - 0.3f64.tan()).abs() < 1e-15);
        let params = Collision1DParams::from_angles(PI / 2.0, 0.0).unwrap();
        assert!(matches!(mass_1d(&params), Err(Error::DegenerateMass(_))));
    }

    #[test]
    fn mass_dd_matches_one_dimensional_mass() {
        for theta in [0.2, FRAC_PI_4, 1.1] {
            let params = Collision1DParams::from_angles(theta, 0.0).unwrap();
            let q = C64::new(params.q(), 0.0);
            let p = params.p();
            let m = mass_dd(q + p, q - p, 1).unwrap();
            assert!((m - mass_1d(&params).unwrap()).abs() < 1e-12, "theta = {theta}");
        }
    }

    #[test]
    fn mass_dd_with_unit_nu_is_minus_tan_half() {
        for gamma in [0.4, 1.0, 2.0] {
            let mu = C64::from_polar(1.0, gamma);
            let m = mass_dd(mu, C64::ONE, 1).unwrap();
            assert!((m + (gamma / 2.0).tan()).abs() < 1e-12, "gamma = {gamma}");
        }
    }

    #[test]
    fn mass_dd_is_real_for_unit_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = rng.random_range(-3.0..3.0);
            let b = rng.random_range(-3.0..3.0);
            let mu = C64::from_polar(1.0, a);
            let nu = C64::from_polar(1.0, b);
            if (mu - nu).norm() < 1e-6 || (mu + nu).norm() < 1e-6 {
                continue;
            }
            let d = rng.random_range(1..=3);
            mass_dd(mu, nu, d).expect("unit phases give a real mass");
        }
    }

    #[test]
    fn mass_dd_degenerate_parameters_error() {
        assert!(matches!(mass_dd(C64::ONE, C64::ONE, 2), Err(Error::DegenerateMass(_))));
        assert!(matches!(mass_dd(C64::ONE, -C64::ONE, 2), Err(Error::DegenerateMass(_))));
    }

    #[test]
    fn alternate_mass_agrees_in_one_dimension_and_scales_by_d_squared() {
        let mu = C64::from_polar(1.0, 0.9);
        let a1 = mass_dd_alternate(mu, 1).unwrap();
        let m1 = mass_dd(mu, C64::ONE, 1).unwrap();
        assert!((a1 - m1).abs() < 1e-12);
        let a3 = mass_dd_alternate(mu, 3).unwrap();
        let m3 = mass_dd(mu, C64::ONE, 3).unwrap();
        assert!((m3 / a3 - 9.0).abs() < 1e-9);
    }

    #[test]
    fn potential_phase_values() {
        let spec = PotentialSpec::new(Potential::Quadratic { coefficient: 0.0 }, 1.0).unwrap();
        let op = potential_phase_op(&spec, &[2.0]).unwrap();
        assert_eq!(op.matrix(), &Array2::<C64>::eye(2));
        // eps = 1, V = pi at x = 1 with a = pi: phase -1.
        let spec = PotentialSpec::new(Potential::Quadratic { coefficient: PI }, 1.0).unwrap();
        let op = potential_phase_op(&spec, &[1.0]).unwrap();
        assert!((op.matrix()[[1, 1]] + C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn gas_t_factors_into_collision_times_potential() {
        // The combined site matrix equals the bare collision followed by the
        // per-occupied-slot potential phase (squared for double occupancy).
        let mu = C64::from_polar(1.0, 0.7);
        let phi = C64::from_polar(1.0, -1.9);
        let (a, eps, x) = (0.013, 0.5, 3.0);
        let combined = gas_t(mu, phi, a, eps, x).unwrap();
        let g = C64::from_polar(1.0, -a * eps * eps * x * x);
        let keep = (mu + C64::ONE) * 0.5;
        let flip = (mu - C64::ONE) * 0.5;
        let mut bare = Array2::<C64>::zeros((4, 4));
        bare[[0, 0]] = C64::ONE;
        bare[[1, 1]] = keep;
        bare[[1, 2]] = flip;
        bare[[2, 1]] = flip;
        bare[[2, 2]] = keep;
        bare[[3, 3]] = phi;
        let mut diag = Array2::<C64>::eye(4);
        diag[[1, 1]] = g;
        diag[[2, 2]] = g;
        diag[[3, 3]] = g * g;
        let product = diag.dot(&bare);
        for (lhs, rhs) in combined.matrix().iter().zip(product.iter()) {
            assert!((lhs - rhs).norm() < 1e-15);
        }
        assert!(combined.residual() < 1e-15);
    }

    #[test]
    fn gas_t_without_potential_matches_c_dd_block() {
        let mu = C64::from_polar(1.0, 1.3);
        let t = gas_t(mu, C64::ONE, 0.0, 1.0, 5.0).unwrap();
        let dd = CollisionDDParams::new(1, mu, C64::ONE, C64::ONE).unwrap();
        let c = build_c_dd(&dd).unwrap();
        assert!((t.matrix()[[1, 1]] - c.matrix()[[0, 0]]).norm() < 1e-15);
        assert!((t.matrix()[[1, 2]] - c.matrix()[[0, 1]]).norm() < 1e-15);
    }

    #[test]
    fn pair_phase_values_and_symmetry() {
        let spec =
            PairPotentialSpec::new(PairPotential::QuadraticDistance { coefficient: 0.0 }).unwrap();
        assert_eq!(pair_interaction_phase(&spec, &[1.0], &[4.0], 1.0), C64::ONE);
        // eps = 1, V = pi/2: phase -i.
        let spec =
            PairPotentialSpec::new(PairPotential::QuadraticDistance { coefficient: PI / 2.0 })
                .unwrap();
        let phase = pair_interaction_phase(&spec, &[0.0], &[1.0], 1.0);
        assert!((phase - C64::new(0.0, -1.0)).norm() < 1e-15);
        // Symmetry under argument exchange.
        let phase_xy = pair_interaction_phase(&spec, &[0.3], &[2.1], 0.7);
        let phase_yx = pair_interaction_phase(&spec, &[2.1], &[0.3], 0.7);
        assert!((phase_xy - phase_yx).norm() < 1e-15);
        // Only the doubly occupied entry of the pair operator is non-trivial.
        let op = pair_interaction_op(&spec, &[0.0], &[1.0], 1.0).unwrap();
        assert_eq!(op.matrix()[[0, 0]], C64::ONE);
        assert_eq!(op.matrix()[[1, 1]], C64::ONE);
        assert_eq!(op.matrix()[[2, 2]], C64::ONE);
        assert!((op.matrix()[[3, 3]] - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn table_pair_potential_lookup() {
        let spec =
            PairPotentialSpec::new(PairPotential::Table { spacing: 1.0, values: vec![2.0, 0.5] })
                .unwrap();
        assert_eq!(spec.eval(&[3.0], &[3.0]), 2.0);
        assert_eq!(spec.eval(&[3.0], &[4.0]), 0.5);
        assert_eq!(spec.eval(&[3.0], &[9.0]), 0.0);
    }

    #[test]
    fn unitary_wrapper_rejects_non_unitary_input() {
        let mut m = Array2::<C64>::eye(3);
        m[[0, 0]] = C64::new(0.9, 0.0);
        match UnitaryOperator::new(m) {
            Err(Error::NotUnitary { residual, .. }) => assert!(residual > 0.1),
            other => panic!("expected unitarity failure, got {other:?}"),
        }
    }
}
