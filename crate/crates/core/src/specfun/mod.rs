//! Spherical special functions and angular coupling coefficients.

mod bessel;
mod gaunt;
mod harmonics;
mod index;

pub use bessel::{
    spherical_bessel_j, spherical_bessel_j_array, spherical_bessel_y_array, spherical_hankel1,
    spherical_hankel1_array, spherical_hankel1_deriv, spherical_hankel1_deriv_array,
};
pub use gaunt::{gaunt, gaunt_cached, wigner_3j};
pub use harmonics::{spherical_harmonic, spherical_harmonics};
pub(crate) use harmonics::harmonics_unchecked;
pub(crate) use index::flat_index;
pub use index::{ModalIndexMap, OrderDegree};
