//! Many-body states in the fixed-particle-number sector.
//!
//! A basis configuration is a strictly increasing tuple of `n` occupied slot
//! indices.  Configurations are enumerated in lexicographic order and
//! addressed through combinatorial ranking, so a configuration lookup is
//! O(n) integer arithmetic instead of a table search.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::C64;

/// Default cap on the number of basis configurations.
pub const DEFAULT_BASIS_CAP: usize = 2_000_000;

/// Binomial coefficient as u128, saturating at `u128::MAX` on overflow.
fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - k + i + 1) / (i + 1) stays exact: the prefix product is
        // itself a binomial coefficient.
        let m = (n - k + i + 1) as u128;
        acc = match acc.checked_mul(m) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographically ordered basis of n-particle configurations.
#[derive(Debug)]
pub struct SectorBasis {
    lattice: LatticeSpec,
    n: usize,
    /// Flat configuration storage, stride `n`.
    configs: Vec<u32>,
    /// Pascal table: `binom[m][k]` = C(m, k) for k <= n, saturating.
    binom: Vec<Vec<u64>>,
}

impl SectorBasis {
    /// Enumerate the n-particle sector of `lattice` under the default cap.
    pub fn new(lattice: LatticeSpec, n: usize) -> Result<Self> {
        Self::with_cap(lattice, n, DEFAULT_BASIS_CAP)
    }

    /// Enumerate the n-particle sector, failing with the required size if it
    /// exceeds `cap` configurations.
    pub fn with_cap(lattice: LatticeSpec, n: usize, cap: usize) -> Result<Self> {
        let slots = lattice.slot_count();
        if n == 0 || n > slots {
            return Err(Error::InvalidParameter(format!(
                "particle count n = {n} must satisfy 1 <= n <= {slots}"
            )));
        }
        let required = binomial_u128(slots, n);
        if required > cap as u128 {
            return Err(Error::CapacityExceeded { required, cap });
        }
        let size = required as usize;

        let mut binom = vec![vec![0u64; n + 1]; slots + 1];
        for m in 0..=slots {
            binom[m][0] = 1;
            for k in 1..=n.min(m) {
                binom[m][k] = binom[m - 1][k - 1].saturating_add(binom[m - 1][k]);
            }
        }

        let mut configs = Vec::with_capacity(size * n);
        let mut current: Vec<u32> = (0..n as u32).collect();
        loop {
            configs.extend_from_slice(&current);
            // Advance to the next combination in lexicographic order.
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(SectorBasis { lattice, n, configs, binom });
                }
                i -= 1;
                if (current[i] as usize) < slots - n + i {
                    break;
                }
            }
            current[i] += 1;
            for j in i + 1..n {
                current[j] = current[j - 1] + 1;
            }
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of configurations in the sector.
    pub fn len(&self) -> usize {
        self.configs.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Occupied slots of configuration `index`, strictly increasing.
    pub fn config(&self, index: usize) -> &[u32] {
        &self.configs[index * self.n..(index + 1) * self.n]
    }

    /// Lexicographic rank of a strictly increasing configuration.
    pub fn rank(&self, config: &[u32]) -> usize {
        assert_eq!(config.len(), self.n, "configuration arity mismatch");
        let slots = self.lattice.slot_count();
        let mut rank: u64 = 0;
        let mut next = 0u32;
        for (i, &c) in config.iter().enumerate() {
            assert!(c >= next && (c as usize) < slots, "configuration not strictly increasing");
            for j in next..c {
                rank += self.binom[slots - 1 - j as usize][self.n - 1 - i];
            }
            next = c + 1;
        }
        rank as usize
    }
}

/// Gaussian wavepacket parameters in lattice units.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketParams {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub wavenumber: Vec<f64>,
}

impl WavepacketParams {
    /// Validate center/wavenumber arity and ranges (`sigma > 0`,
    /// `|k_i| <= pi` componentwise).
    pub fn new(center: Vec<f64>, sigma: f64, wavenumber: Vec<f64>) -> Result<Self> {
        if center.len() != wavenumber.len() || center.is_empty() {
            return Err(Error::InvalidParameter(
                "packet center and wavenumber must have equal, nonzero arity".into(),
            ));
        }
        if sigma <= 0.0 || sigma.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "packet sigma = {sigma} must be positive"
            )));
        }
        if wavenumber.iter().any(|k| k.abs() > std::f64::consts::PI) {
            return Err(Error::InvalidParameter(
                "packet wavenumber components must satisfy |k| <= pi".into(),
            ));
        }
        Ok(WavepacketParams { center, sigma, wavenumber })
    }
}

/// State in the n-particle sector: one complex amplitude per configuration.
#[derive(Debug, Clone)]
pub struct SectorState {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<C64>,
}

impl SectorState {
    /// Wrap amplitudes over an existing basis; the norm must already be 1
    /// within 1e-12.
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} does not match basis size {}",
                amplitudes.len(),
                basis.len()
            )));
        }
        let state = SectorState { basis, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::ToleranceViolation(format!(
                "state norm {norm} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(state)
    }

    /// Wrap amplitudes without any norm check.  Evolution outputs use this:
    /// unitarity of the step keeps the norm at 1 up to rounding, and norm
    /// drift is itself an observable worth reporting rather than clamping.
    pub(crate) fn from_raw(basis: Arc<SectorBasis>, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.len());
        SectorState { basis, amplitudes }
    }

    /// Wrap amplitudes and rescale them to unit norm.
    pub fn from_unnormalized(basis: Arc<SectorBasis>, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} does not match basis size {}",
                amplitudes.len(),
                basis.len()
            )));
        }
        let norm2 = tree_sum(&amplitudes.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>());
        if norm2 <= 0.0 {
            return Err(Error::InvalidParameter("cannot normalize the zero state".into()));
        }
        let scale = 1.0 / norm2.sqrt();
        for a in &mut amplitudes {
            *a *= scale;
        }
        Ok(SectorState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn lattice(&self) -> &LatticeSpec {
        self.basis.lattice()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// L2 norm, accumulated in a fixed pairwise-tree order.
    pub fn norm(&self) -> f64 {
        let squares: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        tree_sum(&squares).sqrt()
    }

    /// Inner product `<self|other>`, accumulated pairwise.
    pub fn inner(&self, other: &SectorState) -> C64 {
        assert_eq!(self.amplitudes.len(), other.amplitudes.len(), "basis mismatch");
        let terms: Vec<C64> =
            self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).collect();
        tree_sum_c64(&terms)
    }

    /// Expected particle count per site (sums to n over all sites).
    pub fn site_marginal(&self) -> Vec<f64> {
        let lat = self.basis.lattice();
        let mut marginal = vec![0.0; lat.site_count()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let w = amp.norm_sqr();
            if w == 0.0 {
                continue;
            }
            for &slot in self.basis.config(i) {
                marginal[lat.slot_site(slot as usize)] += w;
            }
        }
        marginal
    }

    /// Position expectation for a single-particle state, in lattice
    /// coordinates (no periodic unwrapping; meaningful away from the seam).
    pub fn position_expectation(&self) -> Result<Vec<f64>> {
        if self.n() != 1 {
            return Err(Error::InvalidParameter(
                "position expectation is defined for single-particle states".into(),
            ));
        }
        let lat = self.basis.lattice();
        let mut mean = vec![0.0; lat.dimension()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let w = amp.norm_sqr();
            let site = lat.slot_site(self.basis.config(i)[0] as usize);
            for (axis, &c) in lat.site_coords(site).iter().enumerate() {
                mean[axis] += w * c as f64;
            }
        }
        Ok(mean)
    }
}

/// Deterministic pairwise-tree sum of real terms.
pub fn tree_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
}

/// Deterministic pairwise-tree sum of complex terms.
pub fn tree_sum_c64(xs: &[C64]) -> C64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    tree_sum_c64(&xs[..mid]) + tree_sum_c64(&xs[mid..])
}

/// Single particle sitting in one slot.
pub fn point_state(lattice: &LatticeSpec, slot: usize) -> Result<SectorState> {
    config_state(lattice, &[slot])
}

/// Product-like basis state occupying exactly the given slots.
pub fn config_state(lattice: &LatticeSpec, slots: &[usize]) -> Result<SectorState> {
    let mut occ: Vec<u32> = Vec::with_capacity(slots.len());
    for &s in slots {
        if s >= lattice.slot_count() {
            return Err(Error::InvalidParameter(format!(
                "slot {s} out of range for {} slots",
                lattice.slot_count()
            )));
        }
        occ.push(s as u32);
    }
    occ.sort_unstable();
    if occ.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("occupied slots must be distinct".into()));
    }
    let basis = Arc::new(SectorBasis::new(lattice.clone(), occ.len())?);
    let mut amplitudes = vec![C64::ZERO; basis.len()];
    let index = basis.rank(&occ);
    amplitudes[index] = C64::ONE;
    SectorState::new(basis, amplitudes)
}

/// Single-particle Gaussian wavepacket with per-direction weights.
///
/// The envelope is `exp(-|x - x0|^2 / (4 sigma^2) + i k . (x - x0))` with the
/// displacement taken through the shortest periodic image; `weights` gives
/// the complex amplitude of each of the `2D` direction slots.  Requires
/// `sigma >= 1` so the packet is resolvable on the lattice.
pub fn gaussian_state(
    lattice: &LatticeSpec,
    packet: &WavepacketParams,
    weights: &[C64],
) -> Result<SectorState> {
    let d = lattice.dimension();
    if packet.center.len() != d {
        return Err(Error::InvalidParameter(format!(
            "packet arity {} does not match lattice dimension {d}",
            packet.center.len()
        )));
    }
    if weights.len() != lattice.directions_per_site() {
        return Err(Error::InvalidParameter(format!(
            "expected {} direction weights, got {}",
            lattice.directions_per_site(),
            weights.len()
        )));
    }
    if packet.sigma < 1.0 {
        return Err(Error::ResolutionTooCoarse { sigma: packet.sigma });
    }
    if weights.iter().all(|w| w.norm_sqr() == 0.0) {
        return Err(Error::InvalidParameter("direction weights must not all vanish".into()));
    }
    let basis = Arc::new(SectorBasis::new(lattice.clone(), 1)?);
    let extent = lattice.extent() as f64;
    let mut amplitudes = vec![C64::ZERO; basis.len()];
    for (index, amp) in amplitudes.iter_mut().enumerate() {
        let slot = basis.config(index)[0] as usize;
        let site = lattice.slot_site(slot);
        let dir = lattice.slot_direction(slot);
        let coords = lattice.site_coords(site);
        let mut dist2 = 0.0;
        let mut phase = 0.0;
        for ((&coord, &center), &k) in coords.iter().zip(&packet.center).zip(&packet.wavenumber) {
            // Shortest periodic displacement from the packet center.
            let mut delta = coord as f64 - center;
            delta -= extent * (delta / extent).round();
            dist2 += delta * delta;
            phase += k * delta;
        }
        let envelope = (-dist2 / (4.0 * packet.sigma * packet.sigma)).exp();
        *amp = weights[dir] * C64::from_polar(envelope, phase);
    }
    SectorState::from_unnormalized(basis, amplitudes)
}

/// Summed per-site amplitude of a single-particle state with the running
/// global phase removed: `Psi(x) = g^{-t} * sum_v psi_v(x)`.
pub fn total_amplitude(state: &SectorState, t: usize, global_phase: C64) -> Result<Vec<C64>> {
    if state.n() != 1 {
        return Err(Error::InvalidParameter(
            "total amplitude is defined for single-particle states".into(),
        ));
    }
    let lat = state.lattice();
    let mut field = vec![C64::ZERO; lat.site_count()];
    for (i, amp) in state.amplitudes().iter().enumerate() {
        let slot = state.basis().config(i)[0] as usize;
        field[lat.slot_site(slot)] += amp;
    }
    let rewind = global_phase.powi(-(t as i32));
    for v in &mut field {
        *v *= rewind;
    }
    Ok(field)
}

/// Serialized form of a sector state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub n: usize,
    pub lattice: LatticeSnapshot,
    /// Amplitudes as `[re, im]` pairs in basis order.
    pub amplitudes: Vec<[f64; 2]>,
}

/// Serialized lattice geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeSnapshot {
    pub dimension: usize,
    pub extent: usize,
}

impl SectorState {
    pub fn to_snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            n: self.n(),
            lattice: LatticeSnapshot {
                dimension: self.lattice().dimension(),
                extent: self.lattice().extent(),
            },
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    /// Rebuild a state from a snapshot.  The stored norm may carry round-off
    /// from a long run, so it is accepted within 1e-9 and kept as is.
    pub fn from_snapshot(snapshot: &StateSnapshot) -> Result<Self> {
        let lattice = LatticeSpec::new(snapshot.lattice.dimension, snapshot.lattice.extent)?;
        let basis = Arc::new(SectorBasis::new(lattice, snapshot.n)?);
        if snapshot.amplitudes.len() != basis.len() {
            return Err(Error::InvalidParameter(format!(
                "snapshot holds {} amplitudes but the sector has {} configurations",
                snapshot.amplitudes.len(),
                basis.len()
            )));
        }
        let amplitudes: Vec<C64> =
            snapshot.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let state = SectorState { basis, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::ToleranceViolation(format!(
                "snapshot norm {norm} deviates from 1 by more than 1e-9"
            )));
        }
        Ok(state)
    }
}
