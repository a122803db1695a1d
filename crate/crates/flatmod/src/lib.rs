//! Flat combinatorial model of the moduli space of curves.

pub mod boutroux;
pub mod cover;
pub mod forms;
pub mod linalg;
pub mod moves;
pub mod quad;
pub mod ribbon;
pub mod suite;
pub mod tau;
