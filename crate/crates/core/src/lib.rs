//! Graph-generated Temperley-Lieb-Jones categories: planar diagrams over a
//! weighted bi-graph, their evaluation through fundamental solutions, and the
//! classification of those solutions by fair graphs.

// Tolerance checks are written `!(r <= tol)` so that NaN residuals fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod diagram;
pub mod fair;
pub mod fixtures;
pub mod families;
pub mod functor;
pub mod graph;
pub mod io;
pub mod iso;
pub mod linalg;
pub mod mw;
pub mod random;
pub mod report;
pub mod solution;
