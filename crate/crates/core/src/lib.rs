//! Tessarine-domain linear least-mean-squares fusion filtering for
//! multi-sensor systems with multiple packet dropouts.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod experiments;
pub mod filter;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod oracles;
pub mod structural;
pub mod tessarine;

pub use error::{Error, Result};
pub use matrix::{TessarineMatrix, TessarineVector};
pub use structural::{build_structural, ProperOrder, StructuralMatrices};
pub use tessarine::{Conjugation, Tessarine};
