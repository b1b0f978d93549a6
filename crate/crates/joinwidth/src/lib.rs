//! Join decompositions for constraint satisfaction.
//!
//! A join decomposition arranges the constraints of a CSP instance as the
//! leaves of a rooted binary tree; evaluating the tree bottom-up with joins,
//! projections to node boundaries, and semijoin reduction solves the
//! instance, and the largest relation materialized along the way (on a log
//! scale in base `max(tup, 2)`, where `tup` is the largest input relation)
//! is the decomposition's width.
//!
//! The crate provides:
//!
//! * [`relation`]: constraints, instances, and the relational operations;
//! * [`decomposition`]: decomposition trees and their evaluation under
//!   naive, projected, and pruned semantics;
//! * [`engines`]: width-bounded decomposition search and exact width by
//!   recurrences over constraint subsets, and a satisfiability decision
//!   procedure over variable subsets;
//! * [`classes`]: detectors for structured instances (functional
//!   dependencies, root sets, hereditary solution bounds, fixing sets);
//! * [`generators`]: instance families with known widths plus a seeded
//!   random family;
//! * [`oracle`]: exhaustive ground-truth procedures for testing;
//! * [`io`]: JSON instance and decomposition files;
//! * [`bench`]: a CSV benchmark harness.
//!
//! The `jw` binary exposes all of this on the command line.

pub mod bench;
pub mod classes;
pub mod decomposition;
pub mod engines;
pub mod error;
pub mod generators;
pub mod io;
pub mod oracle;
pub mod relation;
pub mod width;

pub use error::{Error, Result};
pub use width::{parse_omega, Omega};
