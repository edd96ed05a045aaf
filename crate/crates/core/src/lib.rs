//! Boundary depth of ℝ-filtered chain complexes over Novikov fields.

#![allow(clippy::needless_range_loop)]

pub mod asymptotic;
pub mod commands;
pub mod filtered;
pub mod io;
pub mod matrix;
pub mod morse;
pub mod novikov;
pub mod par;
pub mod quantum;
pub mod random;
pub mod suite;
pub mod tensor;
