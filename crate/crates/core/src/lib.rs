//! Detectability and identifiability analysis of attacks on linear
//! descriptor-system models of cyber-physical plants.

pub mod descriptor;
pub mod detect;
pub mod error;
pub mod kron;
pub mod linalg;
pub mod models;
pub mod monitors;
pub mod report;
pub mod signal;
pub mod simulate;
pub mod structural;
pub mod svd;
pub mod synthesis;
pub mod util;
pub mod zeros;

pub use error::{Error, Result};
