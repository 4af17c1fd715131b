//! Construction, verification and search of safe instantiation matrices for
//! two linear-complexity masked multiplication gadgets over GF(2^k).

#![allow(clippy::needless_range_loop, clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]

pub mod error;
pub mod analytic;
pub mod catalog;
pub mod checker;
pub mod field;
pub mod gadgets;
pub mod linalg;
pub mod probes;
pub mod search;
pub mod structures;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElem};
pub use linalg::{Mat, Selection};
pub use probes::{GammaCandidate, LEntry, ProbeSystem, Scheme, Target};
pub use checker::{check, CheckOptions, CheckReport, Method, Verdict, Witness};
