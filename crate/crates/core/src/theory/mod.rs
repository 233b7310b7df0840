//! Closed-form asymptotics.

pub mod linear;
pub mod nonlinear;
pub mod shape;
