//! Collared Bratteli diagrams for one-dimensional substitution tilings.

pub mod exactnum;
pub mod analysis;
pub mod diagram;
pub mod fixtures;
pub mod paths;
pub mod substitution;
pub mod verify;
