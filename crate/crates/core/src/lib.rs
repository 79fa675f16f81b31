//! Mutual-coupling aware model of a large intelligent surface (LIS).
//!
//! A panel of isotropic or planar (cosine-pattern) elements drives a single
//! receiver. Coupling between elements is captured by the real symmetric
//! impedance matrix `Z`, whose quadratic form `iᴴZi` is the radiated power of
//! the currents `i`. On top of that sit line-of-sight channels, matched-filter
//! precoders with and without coupling awareness, directivity and SNR, and the
//! parameter sweeps driven by the `lis-sim` binary.
//!
//! Dense spacings make `Z` very ill-conditioned, so most entry points accept a
//! [`Precision`] and can run in software floating point.
//!
//! ```
//! use lis_core::prelude::*;
//!
//! let lambda = wavelength(2.6e9);
//! let geom = linear_array(8, 0.5 * lambda, ElementKind::Isotropic, lambda).unwrap();
//! let z = impedance(&geom, Precision::MachineDouble).unwrap();
//! let o = Vec3::new(1e4, 0.0, 0.0);
//! let h = channel(&geom, o).unwrap();
//! let i = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
//! let d = directivity(&i, &z, &h, o, lambda).unwrap();
//! assert!((d - 8.0).abs() < 1e-3);
//! ```

// NaN-rejecting `!(x > 0.0)` checks and index loops over matrix rows are
// deliberate in the numerical code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod coupling;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod precision;
pub mod precoding;
pub mod specfun;

pub use error::{Error, Result};
pub use precision::Precision;

/// The names most programs need.
pub mod prelude {
    pub use crate::channel::{channel, ComplexVector, FieldModel};
    pub use crate::coupling::{impedance, ImpedanceMatrix};
    pub use crate::error::{Error, Result};
    pub use crate::geometry::{linear_array, planar_grid, wavelength, ArrayGeometry, ElementKind, Vec3};
    pub use crate::metrics::{d_nc, directivity, snr, to_dbi, LinkBudget};
    pub use crate::precision::Precision;
    pub use crate::precoding::{ca_mf, ca_pmf, hp_ca_mf, nca_mf, power_normalize, Scheme};
}
