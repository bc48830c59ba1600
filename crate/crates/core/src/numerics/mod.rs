//! Special functions, quadrature and Bell-polynomial machinery used by the
//! analytic coverage pipeline.

pub mod bell;
pub mod quadrature;
pub mod special;

pub use bell::{complete_bell, power_faa_di_bruno, BellAccumulator};
pub use quadrature::{integrate, integrate_split, Integral, Tolerance};
pub use special::{gamma_cdf, lower_inc_gamma, upper_inc_gamma};
