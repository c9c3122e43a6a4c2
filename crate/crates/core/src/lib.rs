//! Numerical wave front set and microlocal Sobolev regularity detection with
//! the scaled wave packet transform.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod detect;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod oracle;
pub mod par;
pub mod quad;
pub mod scenario;
pub mod smooth;
pub mod special;
pub mod suite;
pub mod window;

pub use error::{Result, WfsError};
