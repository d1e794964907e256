//! One automaton time step and whole-run evolution.
//!
//! A step applies, in order: advection (slot permutation), the per-site
//! collision, the external-potential phase on every occupied slot, and the
//! pair-interaction phase on every occupied pair.  `step` evaluates each
//! output amplitude independently by gathering from its source
//! configurations in a fixed order, so results are bitwise reproducible for
//! any worker count.  `step_matrix` materializes the same operator by an
//! independent route (explicit permutation, entrywise tensor-product
//! collision, diagonal phases) and is cross-checked against `step` in tests.

use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;

use crate::collision::{
    build_c_dd, Collision1DParams, CollisionDDParams, PairPotentialSpec, Potential, PotentialSpec,
    UnitaryOperator,
};
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::state::{SectorBasis, SectorState};
use crate::C64;

/// Default cap on the dense one-step matrix dimension.
pub const DEFAULT_MATRIX_CAP: usize = 4096;

/// Minimum basis size before `step` switches to parallel gathering.
const PARALLEL_THRESHOLD: usize = 4096;

/// Which per-site collision the model uses.
#[derive(Debug, Clone)]
pub enum CollisionRule {
    /// 1D two-slot collision with double-occupancy phase; supports any n.
    OneD(Collision1DParams),
    /// D-dimensional one-particle collision from symmetry eigenphases.
    Isotropic(CollisionDDParams),
}

/// A complete automaton model: geometry, collision, potentials, scale.
#[derive(Debug, Clone)]
pub struct QlgaModel {
    lattice: LatticeSpec,
    collision: CollisionRule,
    potential: Option<PotentialSpec>,
    pair_potential: Option<PairPotentialSpec>,
    eps: f64,
}

impl QlgaModel {
    pub fn new(
        lattice: LatticeSpec,
        collision: CollisionRule,
        potential: Option<Potential>,
        pair_potential: Option<PairPotentialSpec>,
        eps: f64,
    ) -> Result<Self> {
        if eps <= 0.0 || eps.is_nan() {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        match &collision {
            CollisionRule::OneD(_) => {
                if lattice.dimension() != 1 {
                    return Err(Error::InvalidParameter(
                        "the 1D collision rule requires a one-dimensional lattice".into(),
                    ));
                }
            }
            CollisionRule::Isotropic(params) => {
                if params.dimension() != lattice.dimension() {
                    return Err(Error::InvalidParameter(format!(
                        "collision dimension {} does not match lattice dimension {}",
                        params.dimension(),
                        lattice.dimension()
                    )));
                }
            }
        }
        let potential = potential.map(|form| PotentialSpec { form, eps });
        Ok(QlgaModel { lattice, collision, potential, pair_potential, eps })
    }

    /// Free 1D model: collision angle `theta`, no potentials.
    pub fn free_1d(lattice: LatticeSpec, theta: f64, eps: f64) -> Result<Self> {
        let params = Collision1DParams::new(theta, C64::ONE)?;
        Self::new(lattice, CollisionRule::OneD(params), None, None, eps)
    }

    /// 1D model in a harmonic well `V(x) = a x^2`.
    pub fn oscillator_1d(lattice: LatticeSpec, theta: f64, a: f64, eps: f64) -> Result<Self> {
        let params = Collision1DParams::new(theta, C64::ONE)?;
        Self::new(
            lattice,
            CollisionRule::OneD(params),
            Some(Potential::Quadratic { coefficient: a }),
            None,
            eps,
        )
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn collision(&self) -> &CollisionRule {
        &self.collision
    }

    pub fn potential(&self) -> Option<&PotentialSpec> {
        self.potential.as_ref()
    }

    pub fn pair_potential(&self) -> Option<&PairPotentialSpec> {
        self.pair_potential.as_ref()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Per-step rest-frame phase: the collision eigenvalue on the uniform
    /// direction vector (`q + p` in 1D, `mu` in general).  Dividing it out
    /// of an eigenphase leaves the physical energy phase.
    pub fn global_phase(&self) -> C64 {
        match &self.collision {
            CollisionRule::OneD(params) => C64::new(params.q(), 0.0) + params.p(),
            CollisionRule::Isotropic(params) => params.mu(),
        }
    }

    /// Physical coordinates of a site: `eps * (coord - extent/2)` per axis.
    pub fn site_position(&self, site: usize) -> Vec<f64> {
        let offset = self.lattice.extent() as f64 / 2.0;
        self.lattice.site_coords(site).iter().map(|&c| self.eps * (c as f64 - offset)).collect()
    }

    /// Check that the n-particle sector can be evolved under this model.
    pub fn validate_sector(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("cannot evolve an empty sector".into()));
        }
        if n > 1 {
            match &self.collision {
                CollisionRule::OneD(_) => {}
                CollisionRule::Isotropic(_) => {
                    return Err(Error::UnsupportedSector {
                        dimension: self.lattice.dimension(),
                        particles: n,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-site gather weights, extracted once per run.
enum LocalRule {
    OneD { q: C64, p: C64, phi: C64 },
    Isotropic { c: Array2<C64> },
}

/// Precomputed per-step phase tables.
struct StepTables {
    rule: LocalRule,
    /// Per-site external-potential phase (applies to each occupied slot).
    site_phase: Option<Vec<C64>>,
    /// Per site-pair interaction phase, row-major `site_count^2`.
    pair_phase: Option<Vec<C64>>,
}

fn build_tables(model: &QlgaModel) -> Result<StepTables> {
    let rule = match model.collision() {
        CollisionRule::OneD(params) => {
            LocalRule::OneD { q: C64::new(params.q(), 0.0), p: params.p(), phi: params.phi() }
        }
        CollisionRule::Isotropic(params) => {
            LocalRule::Isotropic { c: build_c_dd(params)?.into_matrix() }
        }
    };
    let sites = model.lattice().site_count();
    let site_phase = model
        .potential()
        .map(|spec| (0..sites).map(|s| spec.phase(&model.site_position(s))).collect::<Vec<C64>>());
    let pair_phase = match model.pair_potential() {
        Some(spec) => {
            let positions: Vec<Vec<f64>> = (0..sites).map(|s| model.site_position(s)).collect();
            let eps = model.eps();
            let mut table = vec![C64::ONE; sites * sites];
            for x in 0..sites {
                for y in 0..sites {
                    table[x * sites + y] = crate::collision::pair_interaction_phase(
                        spec,
                        &positions[x],
                        &positions[y],
                        eps,
                    );
                }
            }
            Some(table)
        }
        None => None,
    };
    Ok(StepTables { rule, site_phase, pair_phase })
}

/// Diagonal (potential plus pair) phase of one configuration, accumulated in
/// ascending slot order.
fn diagonal_phase(lat: &LatticeSpec, tables: &StepTables, config: &[u32]) -> C64 {
    let mut phase = C64::ONE;
    if let Some(site_phase) = &tables.site_phase {
        for &slot in config {
            phase *= site_phase[lat.slot_site(slot as usize)];
        }
    }
    if let Some(pair_phase) = &tables.pair_phase {
        let sites = lat.site_count();
        for (i, &a) in config.iter().enumerate() {
            let xa = lat.slot_site(a as usize);
            for &b in &config[i + 1..] {
                phase *= pair_phase[xa * sites + lat.slot_site(b as usize)];
            }
        }
    }
    phase
}

/// Gather the post-collision amplitude of one output configuration.
///
/// Walks the configuration's per-site groups; every singly occupied 1D site
/// branches over (kept slot, exchanged slot) and every occupied direction of
/// an isotropic site branches over all source directions, in a fixed order.
/// Each complete source pattern is un-advected, ranked, and accumulated.
fn gather_output(
    basis: &SectorBasis,
    tables: &StepTables,
    input: &[C64],
    config: &[u32],
    source: &mut Vec<u32>,
    scratch: &mut Vec<u32>,
) -> C64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        basis: &SectorBasis,
        tables: &StepTables,
        input: &[C64],
        config: &[u32],
        group_start: usize,
        weight: C64,
        source: &mut Vec<u32>,
        scratch: &mut Vec<u32>,
    ) -> C64 {
        let lat = basis.lattice();
        let dps = lat.directions_per_site() as u32;
        if group_start == config.len() {
            // Complete source pattern: undo advection and look it up.
            scratch.clear();
            scratch.extend(source.iter().map(|&s| lat.unadvect_slot(s as usize) as u32));
            scratch.sort_unstable();
            return weight * input[basis.rank(scratch)];
        }
        let site_of = |slot: u32| slot / dps;
        let site = site_of(config[group_start]);
        let mut group_end = group_start + 1;
        while group_end < config.len() && site_of(config[group_end]) == site {
            group_end += 1;
        }
        let mut acc = C64::ZERO;
        match &tables.rule {
            LocalRule::OneD { q, p, phi } => {
                if group_end - group_start == 2 {
                    // Doubly occupied site: diagonal phi, slots unchanged.
                    source.push(config[group_start]);
                    source.push(config[group_start + 1]);
                    acc += recurse(
                        basis,
                        tables,
                        input,
                        config,
                        group_end,
                        weight * phi,
                        source,
                        scratch,
                    );
                    source.pop();
                    source.pop();
                } else {
                    // Singly occupied: gather from the same slot (q) and the
                    // exchanged slot (p), in that order.
                    let slot = config[group_start];
                    for (src, w) in [(slot, *q), (slot ^ 1, *p)] {
                        source.push(src);
                        acc += recurse(
                            basis,
                            tables,
                            input,
                            config,
                            group_end,
                            weight * w,
                            source,
                            scratch,
                        );
                        source.pop();
                    }
                }
            }
            LocalRule::Isotropic { c } => {
                // Single-particle sectors only: the group is one slot.
                let slot = config[group_start];
                let dir = (slot % dps) as usize;
                let base = slot - slot % dps;
                for u in 0..dps as usize {
                    let w = c[[dir, u]];
                    source.push(base + u as u32);
                    acc += recurse(
                        basis,
                        tables,
                        input,
                        config,
                        group_end,
                        weight * w,
                        source,
                        scratch,
                    );
                    source.pop();
                }
            }
        }
        acc
    }
    recurse(basis, tables, input, config, 0, C64::ONE, source, scratch)
}

fn step_with_tables(state: &SectorState, tables: &StepTables) -> SectorState {
    let basis = state.basis();
    let lat = basis.lattice();
    let input = state.amplitudes();
    let compute = |i: usize| -> C64 {
        let config = basis.config(i);
        let mut source = Vec::with_capacity(config.len());
        let mut scratch = Vec::with_capacity(config.len());
        let gathered = gather_output(basis, tables, input, config, &mut source, &mut scratch);
        diagonal_phase(lat, tables, config) * gathered
    };
    let amplitudes: Vec<C64> = if basis.len() >= PARALLEL_THRESHOLD {
        (0..basis.len()).into_par_iter().map(compute).collect()
    } else {
        (0..basis.len()).map(compute).collect()
    };
    SectorState::from_raw(Arc::clone(basis), amplitudes)
}

/// Apply one automaton step.
pub fn step(state: &SectorState, model: &QlgaModel) -> Result<SectorState> {
    if state.lattice() != model.lattice() {
        return Err(Error::InvalidParameter("state and model lattices differ".into()));
    }
    model.validate_sector(state.n())?;
    let tables = build_tables(model)?;
    Ok(step_with_tables(state, &tables))
}

/// Apply `steps` automaton steps.
pub fn evolve(state: &SectorState, model: &QlgaModel, steps: usize) -> Result<SectorState> {
    evolve_observed(state, model, steps, |_, _, _| {})
}

/// Apply `steps` automaton steps, calling `observer(t, norm, site_marginal)`
/// at t = 0 and after every step.
pub fn evolve_observed(
    state: &SectorState,
    model: &QlgaModel,
    steps: usize,
    mut observer: impl FnMut(usize, f64, &[f64]),
) -> Result<SectorState> {
    if state.lattice() != model.lattice() {
        return Err(Error::InvalidParameter("state and model lattices differ".into()));
    }
    model.validate_sector(state.n())?;
    let tables = build_tables(model)?;
    let mut current = state.clone();
    observer(0, current.norm(), &current.site_marginal());
    for t in 1..=steps {
        current = step_with_tables(&current, &tables);
        observer(t, current.norm(), &current.site_marginal());
    }
    Ok(current)
}

/// Materialize the one-step operator on the n-particle sector as a dense
/// unitary matrix, under the default dimension cap.
pub fn step_matrix(model: &QlgaModel, n: usize) -> Result<UnitaryOperator> {
    step_matrix_with_cap(model, n, DEFAULT_MATRIX_CAP)
}

/// Materialize the one-step operator with an explicit dimension cap.
///
/// Built independently of `step`: the advection permutation is composed with
/// an entrywise tensor-product collision matrix and the diagonal phases.
pub fn step_matrix_with_cap(model: &QlgaModel, n: usize, cap: usize) -> Result<UnitaryOperator> {
    model.validate_sector(n)?;
    let basis = SectorBasis::new(model.lattice().clone(), n)?;
    let dim = basis.len();
    if dim > cap {
        return Err(Error::CapacityExceeded { required: dim as u128, cap });
    }
    let tables = build_tables(model)?;
    let lat = basis.lattice();
    let dps = lat.directions_per_site() as u32;

    // Advection permutation on configurations.
    let mut advected: Vec<usize> = Vec::with_capacity(dim);
    let mut buffer: Vec<u32> = Vec::with_capacity(n);
    for j in 0..dim {
        buffer.clear();
        buffer.extend(basis.config(j).iter().map(|&s| lat.advect_slot(s as usize) as u32));
        buffer.sort_unstable();
        advected.push(basis.rank(&buffer));
    }

    // Entrywise tensor-product collision: the (i, j) element is the product
    // over sites of the local transition amplitude between the two
    // configurations' occupancy patterns.
    let collision_entry = |ci: &[u32], cj: &[u32]| -> C64 {
        let mut entry = C64::ONE;
        let (mut a, mut b) = (0usize, 0usize);
        while a < ci.len() || b < cj.len() {
            let site_a = if a < ci.len() { ci[a] / dps } else { u32::MAX };
            let site_b = if b < cj.len() { cj[b] / dps } else { u32::MAX };
            if site_a != site_b {
                // A site occupied on one side only: particle number at that
                // site differs, so the tensor-product element vanishes.
                return C64::ZERO;
            }
            let site = site_a;
            let mut ga = 0;
            while a + ga < ci.len() && ci[a + ga] / dps == site {
                ga += 1;
            }
            let mut gb = 0;
            while b + gb < cj.len() && cj[b + gb] / dps == site {
                gb += 1;
            }
            if ga != gb {
                return C64::ZERO;
            }
            match &tables.rule {
                LocalRule::OneD { q, p, phi } => match ga {
                    1 => entry *= if ci[a] == cj[b] { *q } else { *p },
                    2 => entry *= phi,
                    _ => unreachable!("1D sites hold at most two slots"),
                },
                LocalRule::Isotropic { c } => {
                    debug_assert_eq!(ga, 1, "isotropic collisions are single-particle");
                    entry *= c[[(ci[a] % dps) as usize, (cj[b] % dps) as usize]];
                }
            }
            a += ga;
            b += gb;
        }
        entry
    };

    let mut m = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        let ci = basis.config(i);
        let di = diagonal_phase(lat, &tables, ci);
        for j in 0..dim {
            let cj = basis.config(advected[j]);
            let entry = collision_entry(ci, cj);
            if entry != C64::ZERO {
                m[[i, j]] = di * entry;
            }
        }
    }
    UnitaryOperator::new(m)
}

/// Mask of sites in the given parity class (coordinate sum mod 2).  Requires
/// an even extent so the classes are well defined on the periodic lattice.
pub fn sublattice_mask(lattice: &LatticeSpec, parity: usize) -> Result<Vec<bool>> {
    if !lattice.extent().is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "parity sublattices require an even lattice extent".into(),
        ));
    }
    if parity > 1 {
        return Err(Error::InvalidParameter(format!("parity class {parity} must be 0 or 1")));
    }
    Ok((0..lattice.site_count()).map(|s| lattice.site_parity(s) == parity).collect())
}

/// Parity class of each basis configuration: `Some(class)` when every
/// occupied slot sits on the same class, `None` for mixed configurations.
pub fn basis_parity_classes(basis: &SectorBasis) -> Result<Vec<Option<usize>>> {
    let lat = basis.lattice();
    if !lat.extent().is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "parity sublattices require an even lattice extent".into(),
        ));
    }
    Ok((0..basis.len())
        .map(|i| {
            let config = basis.config(i);
            let first = lat.site_parity(lat.slot_site(config[0] as usize));
            for &slot in &config[1..] {
                if lat.site_parity(lat.slot_site(slot as usize)) != first {
                    return None;
                }
            }
            Some(first)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::PairPotential;
    use crate::state::{config_state, gaussian_state, point_state, WavepacketParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_state(basis: Arc<SectorBasis>, rng: &mut ChaCha8Rng) -> SectorState {
        let amplitudes: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SectorState::from_unnormalized(basis, amplitudes).unwrap()
    }

    fn model_1d(l: usize, theta: f64, phi_angle: f64) -> QlgaModel {
        let lattice = LatticeSpec::new(1, l).unwrap();
        let params = Collision1DParams::from_angles(theta, phi_angle).unwrap();
        QlgaModel::new(lattice, CollisionRule::OneD(params), None, None, 1.0).unwrap()
    }

    #[test]
    fn zero_theta_streams_a_point_particle() {
        let model = model_1d(6, 0.0, 0.0);
        let lat = model.lattice().clone();
        // Right-mover at site 2.
        let s0 = point_state(&lat, lat.slot_index(2, 0)).unwrap();
        let s1 = step(&s0, &model).unwrap();
        let expect = lat.slot_index(3, 0);
        for (i, amp) in s1.amplitudes().iter().enumerate() {
            let want =
                if s1.basis().config(i)[0] as usize == expect { C64::ONE } else { C64::ZERO };
            assert_eq!(*amp, want);
        }
    }

    #[test]
    fn zero_theta_two_particle_meeting_acquires_phi() {
        let phi_angle = 1.3;
        let model = model_1d(8, 0.0, phi_angle);
        let lat = model.lattice().clone();
        // Right-mover at site 1 and left-mover at site 3 advect onto site 2.
        let s0 = config_state(&lat, &[lat.slot_index(1, 0), lat.slot_index(3, 1)]).unwrap();
        let s1 = step(&s0, &model).unwrap();
        let meeting = [lat.slot_index(2, 0) as u32, lat.slot_index(2, 1) as u32];
        let index = s1.basis().rank(&meeting);
        let expect = C64::from_polar(1.0, phi_angle);
        assert!((s1.amplitudes()[index] - expect).norm() < 1e-15);
        let weight: f64 = s1.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_particle_step_matches_update_equations() {
        // psi_r(x, t+1) = q psi_r(x-1) + p psi_l(x+1)
        // psi_l(x, t+1) = q psi_l(x+1) + p psi_r(x-1)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let l = 8;
        let model = model_1d(l, 0.7, 0.0);
        let lat = model.lattice().clone();
        let params = Collision1DParams::from_angles(0.7, 0.0).unwrap();
        let (q, p) = (C64::new(params.q(), 0.0), params.p());
        let basis = Arc::new(SectorBasis::new(lat.clone(), 1).unwrap());
        for _ in 0..20 {
            let s0 = random_state(Arc::clone(&basis), &mut rng);
            let s1 = step(&s0, &model).unwrap();
            let amp = |state: &SectorState, x: usize, dir: usize| {
                state.amplitudes()[lat.slot_index(x, dir)]
            };
            for x in 0..l {
                let left = (x + l - 1) % l;
                let right = (x + 1) % l;
                let expect_r = q * amp(&s0, left, 0) + p * amp(&s0, right, 1);
                let expect_l = q * amp(&s0, right, 1) + p * amp(&s0, left, 0);
                assert!((amp(&s1, x, 0) - expect_r).norm() < 1e-14);
                assert!((amp(&s1, x, 1) - expect_l).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn step_preserves_norm_over_many_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let lattice = LatticeSpec::new(1, 16).unwrap();
        let params = Collision1DParams::from_angles(0.9, 0.4).unwrap();
        let model = QlgaModel::new(
            lattice.clone(),
            CollisionRule::OneD(params),
            Some(Potential::Quadratic { coefficient: 0.02 }),
            Some(
                PairPotentialSpec::new(PairPotential::QuadraticDistance { coefficient: 0.05 })
                    .unwrap(),
            ),
            0.5,
        )
        .unwrap();
        let basis = Arc::new(SectorBasis::new(lattice, 2).unwrap());
        let mut state = random_state(basis, &mut rng);
        for _ in 0..100 {
            state = step(&state, &model).unwrap();
        }
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn potential_phase_multiplies_occupied_slots() {
        // With theta = 0 the collision is trivial, so one step is advection
        // followed by the diagonal phases; amplitudes pick up exactly
        // exp(-i eps^2 V) per occupied slot.
        let lattice = LatticeSpec::new(1, 8).unwrap();
        let params = Collision1DParams::from_angles(0.0, 0.0).unwrap();
        let eps = 0.5;
        let a = 0.3;
        let model = QlgaModel::new(
            lattice.clone(),
            CollisionRule::OneD(params),
            Some(Potential::Quadratic { coefficient: a }),
            None,
            eps,
        )
        .unwrap();
        let s0 = point_state(&lattice, lattice.slot_index(6, 0)).unwrap();
        let s1 = step(&s0, &model).unwrap();
        // The particle lands on site 7 at physical position eps*(7-4).
        let x = eps * 3.0;
        let expect = C64::from_polar(1.0, -eps * eps * a * x * x);
        let index = s1.basis().rank(&[lattice.slot_index(7, 0) as u32]);
        assert!((s1.amplitudes()[index] - expect).norm() < 1e-15);
    }

    #[test]
    fn pair_phase_applies_when_particles_meet() {
        let lattice = LatticeSpec::new(1, 8).unwrap();
        let params = Collision1DParams::from_angles(0.0, 0.0).unwrap();
        let eps = 1.0;
        let spec =
            PairPotentialSpec::new(PairPotential::Table { spacing: 1.0, values: vec![PI / 2.0] })
                .unwrap();
        let model =
            QlgaModel::new(lattice.clone(), CollisionRule::OneD(params), None, Some(spec), eps)
                .unwrap();
        // Approaching movers at sites 2 and 4 land together on site 3.
        let s0 =
            config_state(&lattice, &[lattice.slot_index(2, 0), lattice.slot_index(4, 1)]).unwrap();
        let s1 = step(&s0, &model).unwrap();
        let meeting = [lattice.slot_index(3, 0) as u32, lattice.slot_index(3, 1) as u32];
        let index = s1.basis().rank(&meeting);
        // Contact potential pi/2 at distance 0: phase exp(-i pi/2) = -i.
        assert!((s1.amplitudes()[index] - C64::new(0.0, -1.0)).norm() < 1e-14);
        // One more step separates them again; no further pair phase.
        let s2 = step(&s1, &model).unwrap();
        let apart = [lattice.slot_index(2, 1) as u32, lattice.slot_index(4, 0) as u32];
        let index = s2.basis().rank(&apart);
        assert!((s2.amplitudes()[index] - C64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn step_agrees_with_step_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let lattice = LatticeSpec::new(1, 4).unwrap();
        let params = Collision1DParams::from_angles(0.8, 0.6).unwrap();
        let model = QlgaModel::new(
            lattice.clone(),
            CollisionRule::OneD(params),
            Some(Potential::Quadratic { coefficient: 0.11 }),
            Some(
                PairPotentialSpec::new(PairPotential::QuadraticDistance { coefficient: 0.07 })
                    .unwrap(),
            ),
            0.9,
        )
        .unwrap();
        for n in 1..=3 {
            let u = step_matrix(&model, n).unwrap();
            let basis = Arc::new(SectorBasis::new(lattice.clone(), n).unwrap());
            for _ in 0..5 {
                let s0 = random_state(Arc::clone(&basis), &mut rng);
                let s1 = step(&s0, &model).unwrap();
                let direct = u.matrix().dot(&ndarray::Array1::from_vec(s0.amplitudes().to_vec()));
                for (a, b) in s1.amplitudes().iter().zip(direct.iter()) {
                    assert!((a - b).norm() < 1e-13, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn step_matrix_is_unitary_for_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10 {
            let l = 2 * rng.random_range(2..=4usize);
            let lattice = LatticeSpec::new(1, l).unwrap();
            let params = Collision1DParams::from_angles(
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
            .unwrap();
            let with_pot = rng.random_range(0..2) == 1;
            let model = QlgaModel::new(
                lattice,
                CollisionRule::OneD(params),
                with_pot.then(|| Potential::Quadratic { coefficient: rng.random_range(0.0..0.3) }),
                None,
                0.7,
            )
            .unwrap();
            let n = rng.random_range(1..=2);
            let u = step_matrix(&model, n).unwrap();
            assert!(u.residual() <= 1e-12);
        }
    }

    #[test]
    fn translation_commutes_with_free_step() {
        // V = 0: translating the initial state one site commutes with the
        // step.  Bitwise for n = 1; within rounding for n = 2 (the source
        // accumulation order changes under the wrap-around relabeling).
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let model = model_1d(8, 1.1, 0.8);
        let lat = model.lattice().clone();
        let translate = |state: &SectorState| {
            let basis = state.basis();
            let mut out = vec![C64::ZERO; basis.len()];
            let mut buf = Vec::new();
            for (i, amp) in state.amplitudes().iter().enumerate() {
                buf.clear();
                for &slot in basis.config(i) {
                    let site = lat.slot_site(slot as usize);
                    let dir = lat.slot_direction(slot as usize);
                    buf.push(lat.slot_index((site + 1) % lat.extent(), dir) as u32);
                }
                buf.sort_unstable();
                out[basis.rank(&buf)] = *amp;
            }
            // A pure permutation: no renormalization, so rounding from a
            // rescale cannot mask the bitwise comparison below.
            SectorState::from_raw(Arc::clone(basis), out)
        };
        let basis1 = Arc::new(SectorBasis::new(lat.clone(), 1).unwrap());
        let s0 = random_state(basis1, &mut rng);
        let a = step(&translate(&s0), &model).unwrap();
        let b = translate(&step(&s0, &model).unwrap());
        assert_eq!(a.amplitudes(), b.amplitudes(), "bitwise at n = 1");
        let basis2 = Arc::new(SectorBasis::new(lat.clone(), 2).unwrap());
        let s0 = random_state(basis2, &mut rng);
        let a = step(&translate(&s0), &model).unwrap();
        let b = translate(&step(&s0, &model).unwrap());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15, "n = 2 within rounding");
        }
    }

    #[test]
    fn two_dimensional_single_particle_evolution() {
        let lattice = LatticeSpec::new(2, 4).unwrap();
        let params = CollisionDDParams::from_angles(2, 0.9, -0.4, 1.7).unwrap();
        let model =
            QlgaModel::new(lattice.clone(), CollisionRule::Isotropic(params), None, None, 1.0)
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let basis = Arc::new(SectorBasis::new(lattice.clone(), 1).unwrap());
        let mut state = random_state(basis, &mut rng);
        for _ in 0..50 {
            state = step(&state, &model).unwrap();
        }
        assert!((state.norm() - 1.0).abs() < 1e-12);
        // Identity collision streams a point particle along its direction.
        let id = CollisionDDParams::new(2, C64::ONE, C64::ONE, C64::ONE).unwrap();
        let streaming =
            QlgaModel::new(lattice.clone(), CollisionRule::Isotropic(id), None, None, 1.0).unwrap();
        let slot = lattice.slot_index(lattice.site_index(&[1, 2]), 2); // +e_1 mover
        let s0 = point_state(&lattice, slot).unwrap();
        let s1 = step(&s0, &streaming).unwrap();
        let expect = lattice.slot_index(lattice.site_index(&[1, 3]), 2);
        let index = s1.basis().rank(&[expect as u32]);
        assert!((s1.amplitudes()[index] - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn sector_guards() {
        // D >= 2 with n >= 2 is rejected.
        let lattice = LatticeSpec::new(2, 4).unwrap();
        let params = CollisionDDParams::from_angles(2, 0.9, -0.4, 1.7).unwrap();
        let model =
            QlgaModel::new(lattice.clone(), CollisionRule::Isotropic(params), None, None, 1.0)
                .unwrap();
        assert!(matches!(
            model.validate_sector(2),
            Err(Error::UnsupportedSector { dimension: 2, particles: 2 })
        ));
        // A 1D collision rule cannot sit on a 2D lattice.
        let params1 = Collision1DParams::from_angles(0.3, 0.0).unwrap();
        assert!(QlgaModel::new(lattice, CollisionRule::OneD(params1), None, None, 1.0).is_err());
    }

    #[test]
    fn evolve_zero_steps_is_identity() {
        let model = model_1d(8, 0.4, 0.0);
        let lat = model.lattice().clone();
        let packet = WavepacketParams::new(vec![4.0], 1.5, vec![0.2]).unwrap();
        let s0 = gaussian_state(&lat, &packet, &[C64::ONE, C64::ONE]).unwrap();
        let s1 = evolve(&s0, &model, 0).unwrap();
        assert_eq!(s0.amplitudes(), s1.amplitudes());
    }

    #[test]
    fn observer_sees_every_step() {
        let model = model_1d(8, 0.4, 0.0);
        let lat = model.lattice().clone();
        let s0 = point_state(&lat, 0).unwrap();
        let mut rows = Vec::new();
        let _ = evolve_observed(&s0, &model, 5, |t, norm, marginal| {
            rows.push((t, norm, marginal.iter().sum::<f64>()));
        })
        .unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].0, 0);
        assert_eq!(rows[5].0, 5);
        for (_, norm, total) in rows {
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_step_flips_parity_class_with_structural_zeros() {
        let model = model_1d(8, 0.6, 0.0);
        let u = step_matrix(&model, 1).unwrap();
        let basis = SectorBasis::new(model.lattice().clone(), 1).unwrap();
        let classes = basis_parity_classes(&basis).unwrap();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if classes[i] == classes[j] {
                    // Same class: the one-step matrix element is exactly 0.
                    assert_eq!(u.matrix()[[i, j]], C64::ZERO);
                }
            }
        }
    }

    #[test]
    fn two_step_matrix_is_parity_block_diagonal() {
        let model = model_1d(8, 0.6, 0.0);
        let u = step_matrix(&model, 1).unwrap();
        let u2 = u.matrix().dot(u.matrix());
        let basis = SectorBasis::new(model.lattice().clone(), 1).unwrap();
        let classes = basis_parity_classes(&basis).unwrap();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if classes[i] != classes[j] {
                    assert_eq!(u2[[i, j]], C64::ZERO, "cross-class entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn capacity_caps_are_enforced() {
        let lattice = LatticeSpec::new(1, 64).unwrap();
        let params = Collision1DParams::from_angles(0.3, 0.0).unwrap();
        let model = QlgaModel::new(lattice, CollisionRule::OneD(params), None, None, 1.0).unwrap();
        match step_matrix_with_cap(&model, 2, 100) {
            Err(Error::CapacityExceeded { required, cap: 100 }) => {
                assert_eq!(required, 8128); // C(128, 2)
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn sublattice_mask_partitions_sites() {
        let lattice = LatticeSpec::new(1, 8).unwrap();
        let even = sublattice_mask(&lattice, 0).unwrap();
        let odd = sublattice_mask(&lattice, 1).unwrap();
        for s in 0..8 {
            assert_eq!(even[s], s % 2 == 0);
            assert!(even[s] ^ odd[s]);
        }
        let odd_extent = LatticeSpec::new(1, 5).unwrap();
        assert!(sublattice_mask(&odd_extent, 0).is_err());
    }
}
