//! Exact canonical forms of tripartite `L x N x N` tensors under invertible
//! local operations, the parametric symmetries acting on those forms, and
//! an oracle harness that checks one against the other.

pub mod canon;
pub mod cli;
pub mod error;
pub mod exactmat;
pub mod harness;
pub mod io;
pub mod nilpoly;
pub mod symmetry;

pub use error::{Error, Result};
