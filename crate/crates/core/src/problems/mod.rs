//! Weak forms, data and parameters of the two coupled model problems.

pub mod biot;
pub mod heatwave;
