//! Commuting squares of finite-dimensional C*-algebras, bi-unitary connections,
//! string algebras and the relative-commutant towers of the subfactors they generate.

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod paths;
pub mod square;
pub mod connection;
pub mod catalog;
pub mod flatness;

pub use error::{Error, Result};
