//! Quantum lattice-gas automaton (QLGA) simulator.
//!
//! A QLGA evolves `n` particles on a periodic lattice of `extent^dimension` sites.
//! Each site carries `2D` direction slots, and one time step is the unitary
//! composition
//!
//! 1. advection: every slot's occupancy moves one site along its direction,
//! 2. collision: a per-site unitary mixes the slots at each site,
//! 3. external potential: occupied slots acquire a phase `exp(-i eps^2 V(x))`,
//! 4. pair interaction: each occupied pair acquires `exp(-i eps^2 V(x, y))`.
//!
//! In the long-wavelength limit the summed per-site amplitude of a single
//! particle obeys a free (or externally forced) Schrodinger equation, with a
//! mass fixed by the collision parameters.  The crate provides the exact
//! lattice dynamics (`lattice`, `state`, `collision`, `evolve`), spectral
//! analysis of the one-step operator (`spectral`), closed-form continuum
//! references used to validate the limit (`oracle`), and resource-count
//! estimates for classical versus quantum realizations (`complexity`).
//!
//! ```
//! use qlga::evolve::{evolve, QlgaModel};
//! use qlga::lattice::LatticeSpec;
//! use qlga::state::{gaussian_state, WavepacketParams};
//!
//! let lattice = LatticeSpec::new(1, 64).unwrap();
//! let model = QlgaModel::free_1d(lattice.clone(), std::f64::consts::FRAC_PI_4, 0.1).unwrap();
//! let packet = WavepacketParams::new(vec![32.0], 4.0, vec![0.3]).unwrap();
//! let psi0 = gaussian_state(&lattice, &packet, &[(1.0).into(), (1.0).into()]).unwrap();
//! let psi = evolve(&psi0, &model, 100).unwrap();
//! assert!((psi.norm() - 1.0).abs() < 1e-12);
//! ```

pub mod collision;
pub mod complexity;
pub mod error;
pub mod evolve;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod spectral;
pub mod state;

pub use error::Error;

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;
