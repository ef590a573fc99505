//! Non-monotonic spatial logic programs compiled to SMT.
//!
//! Programs mix answer-set style rules with qualitative spatial relations
//! over circles, points, segments and polygons. Tight programs are reduced
//! to their Clark completion, the spatial relations to polynomial
//! constraints over real unknowns, and the result is handed to an external
//! SMT-LIB solver.

pub mod model;
pub mod numeric;
pub mod parser;
pub mod qs;
pub mod oracle;
pub mod pipeline;
pub mod smt;
pub mod transform;
