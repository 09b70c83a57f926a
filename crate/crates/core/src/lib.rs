//! Algebraic and combinatorial core for pairing cobordism simplices with
//! A-infinity module categories.

pub mod a_infinity;
pub mod b_construction;
pub mod cli;
pub mod cube_model;
pub mod dg_nerve;
pub mod graded_zmod;
pub mod planar_floer;
pub mod rational;
pub mod xi_functor;
