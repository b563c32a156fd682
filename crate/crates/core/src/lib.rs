//! Synchronizing output-feedback synthesis for arrays of identical,
//! output-coupled linear systems
//!
//! ```text
//! x_i' = A x_i + L z_i,   y_i = C x_i,   z_i = sum_j gamma_ij (y_j - y_i)
//! ```
//!
//! together with simulation of the coupled array and numerical checks that
//! confirm (or refute) synchronization.

pub mod error;
pub mod interconnect;
pub mod linops;
pub mod simulate;
pub mod synthesis;
pub mod sysclass;
pub mod verify;

pub use error::{Error, Result};
pub use interconnect::Interconnection;
pub use linops::Mat;
pub use sysclass::SystemPair;
