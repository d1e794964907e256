//! Periodic lattice geometry: sites, direction slots, and advection.
//!
//! A lattice has `extent^dimension` sites with periodic boundaries.  Every site owns
//! `2D` direction slots; slot `2i` points along `+e_i` and slot `2i + 1`
//! along `-e_i`.  Slots are linearized site-major (direction index varies
//! fastest), and sites are linearized row-major with axis 0 slowest.

use crate::error::{Error, Result};

/// Geometry of a periodic cubic lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    dimension: usize,
    extent: usize,
}

/// One direction slot: a site (given by coordinates) plus a direction index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub site: Vec<usize>,
    pub direction: usize,
}

impl LatticeSpec {
    /// Create a lattice with `dimension` axes (1 to 3) and `extent` sites per
    /// axis (at least 2).
    pub fn new(dimension: usize, extent: usize) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "lattice dimension must be 1, 2, or 3 (got {dimension})"
            )));
        }
        if extent < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattice extent must be at least 2 (got {extent})"
            )));
        }
        let spec = LatticeSpec { dimension, extent };
        if spec.checked_site_count().is_none() {
            return Err(Error::InvalidParameter(format!(
                "lattice {extent}^{dimension} overflows the addressable site count"
            )));
        }
        Ok(spec)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    fn checked_site_count(&self) -> Option<usize> {
        self.extent.checked_pow(self.dimension as u32)
    }

    /// Number of sites `extent^dimension`.
    pub fn site_count(&self) -> usize {
        self.checked_site_count().expect("checked at construction")
    }

    /// Direction slots per site, `2D`.
    pub fn directions_per_site(&self) -> usize {
        2 * self.dimension
    }

    /// Total slot count `extent^dimension * 2 * dimension`.
    pub fn slot_count(&self) -> usize {
        self.site_count() * self.directions_per_site()
    }

    /// Signed unit vector of direction `dir`.
    pub fn direction_vector(&self, dir: usize) -> Vec<i64> {
        assert!(dir < self.directions_per_site(), "direction {dir} out of range");
        let mut v = vec![0i64; self.dimension];
        v[dir / 2] = if dir.is_multiple_of(2) { 1 } else { -1 };
        v
    }

    /// All `2D` direction vectors in slot order.
    pub fn directions(&self) -> Vec<Vec<i64>> {
        (0..self.directions_per_site()).map(|d| self.direction_vector(d)).collect()
    }

    /// Direction with the opposite sense (`+e_i <-> -e_i`).
    pub fn opposite(&self, dir: usize) -> usize {
        assert!(dir < self.directions_per_site(), "direction {dir} out of range");
        dir ^ 1
    }

    /// Linear site index of `coords` (row-major, axis 0 slowest).
    pub fn site_index(&self, coords: &[usize]) -> usize {
        assert_eq!(coords.len(), self.dimension, "coordinate arity mismatch");
        let mut index = 0;
        for &c in coords {
            assert!(c < self.extent, "coordinate {c} out of range");
            index = index * self.extent + c;
        }
        index
    }

    /// Coordinates of linear site index `site`.
    pub fn site_coords(&self, site: usize) -> Vec<usize> {
        assert!(site < self.site_count(), "site {site} out of range");
        let mut coords = vec![0; self.dimension];
        let mut rest = site;
        for axis in (0..self.dimension).rev() {
            coords[axis] = rest % self.extent;
            rest /= self.extent;
        }
        coords
    }

    /// Linear slot index of (site, direction): site-major, direction-minor.
    pub fn slot_index(&self, site: usize, dir: usize) -> usize {
        assert!(site < self.site_count() && dir < self.directions_per_site());
        site * self.directions_per_site() + dir
    }

    /// Site part of a linear slot index.
    pub fn slot_site(&self, slot: usize) -> usize {
        assert!(slot < self.slot_count(), "slot {slot} out of range");
        slot / self.directions_per_site()
    }

    /// Direction part of a linear slot index.
    pub fn slot_direction(&self, slot: usize) -> usize {
        assert!(slot < self.slot_count(), "slot {slot} out of range");
        slot % self.directions_per_site()
    }

    /// Structured view of a linear slot index.
    pub fn slot(&self, index: usize) -> Slot {
        Slot {
            site: self.site_coords(self.slot_site(index)),
            direction: self.slot_direction(index),
        }
    }

    /// Linear index of a structured slot.
    pub fn index_of(&self, slot: &Slot) -> usize {
        self.slot_index(self.site_index(&slot.site), slot.direction)
    }

    /// Site reached by moving one step from `site` along direction `dir`,
    /// with periodic wrap-around.
    pub fn neighbor(&self, site: usize, dir: usize) -> usize {
        let mut coords = self.site_coords(site);
        let axis = dir / 2;
        coords[axis] = if dir.is_multiple_of(2) {
            (coords[axis] + 1) % self.extent
        } else {
            (coords[axis] + self.extent - 1) % self.extent
        };
        self.site_index(&coords)
    }

    /// Advect one slot: occupancy at `(x, v)` moves to `(x + v, v)`.
    pub fn advect_slot(&self, slot: usize) -> usize {
        let dir = self.slot_direction(slot);
        self.slot_index(self.neighbor(self.slot_site(slot), dir), dir)
    }

    /// Inverse advection: the slot whose occupancy lands on `slot`.
    pub fn unadvect_slot(&self, slot: usize) -> usize {
        let dir = self.slot_direction(slot);
        let back = self.opposite(dir);
        self.slot_index(self.neighbor(self.slot_site(slot), back), dir)
    }

    /// Full advection permutation: entry `j` is the destination of slot `j`.
    pub fn advect_permutation(&self) -> Vec<usize> {
        (0..self.slot_count()).map(|s| self.advect_slot(s)).collect()
    }

    /// Parity class (0 or 1) of a site: coordinate sum mod 2.
    pub fn site_parity(&self, site: usize) -> usize {
        self.site_coords(site).iter().sum::<usize>() % 2
    }
}
