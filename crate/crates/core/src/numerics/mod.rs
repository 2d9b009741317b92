//! Special functions, quadrature rules and circular grids.

mod circular;
mod quadrature;
mod special;

pub use circular::{circular_convolve, convolve_with_wrapped_gaussian, kl_divergence, AngularGrid};
pub use quadrature::{gauss_hermite, gauss_legendre, QuadratureSpec, UnionGrid};
pub use special::{
    bessel_i0_scaled, bessel_i1_scaled, bessel_ratio, bessel_ratio_sequence, erf, erfc, erfc_inv,
    erfcx, ln_bessel_i0, ln_erfc,
};

pub(crate) use circular::{density_from_coefficients, fft_forward, fft_inverse, signed_frequency};
pub(crate) use special::{erfc_raw, erfcx_raw, i0e, i1_over_i0};
