//! Exact computational laboratory for the representation geometry of quantum
//! planes at a root of unity and their blow-up algebras.
//!
//! Everything runs over the cyclotomic field Q(zeta_n) with arbitrary-
//! precision rational coordinates; no floating point enters at any stage.

pub mod atlas;
pub mod equivar;
pub mod field;
pub mod heis;
pub mod invar;
pub mod ncalg;
pub mod reps;
pub mod tanspace;
