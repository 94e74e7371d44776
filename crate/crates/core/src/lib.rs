pub mod arith;
pub mod error;
pub mod lattice;
pub mod lp;
pub mod order;
pub mod cone;
pub mod dynamics;
pub mod states;
pub mod catalog;
pub mod schema;
pub mod verify;
