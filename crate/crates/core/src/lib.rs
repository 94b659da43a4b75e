//! Steering witnesses built from conditional quantum speed limits.
//!
//! * [`assemblage`]: discrete assemblages, LHS models, and the conditional
//!   Mandelstam-Tamm, displacement, and geometric witnesses.
//! * [`gaussian`]: two-mode Gaussian states under homodyne conditioning and the
//!   free-particle criterion.
//! * [`ghz`]: noisy GHZ assemblages, QFI, Bures distance, and GHZ closed forms.
//! * [`oracle`]: brute-force checks of the closed forms.

pub mod assemblage;
pub mod error;
pub mod gaussian;
pub mod ghz;
pub mod linalg;
pub mod oracle;
pub mod random;
pub mod units;

pub use error::{Error, Result};
pub use units::Constants;
