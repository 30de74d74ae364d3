//! Knot and link identification of extracted exceptional lines: generic
//! planar projections, exact Kauffman bracket / Jones polynomial, linking
//! numbers, and matching against the torus knot/link table.

mod bracket;
mod classify;
mod diagram;
mod laurent;
mod link;
mod project;

pub use bracket::{jones, kauffman_bracket, MAX_CROSSINGS};
pub use classify::{classify, Chirality, ClassifyOptions, KnotClass, KnotReport};
pub use diagram::{KnotDiagram, Passage};
pub use laurent::{HalfLaurent, LaurentPoly};
pub use link::{gauss_linking_integral, linking_matrix, linking_number};
pub use project::project;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KnotError {
    #[error("no generic projection after {0} attempts")]
    NoGenericProjection(usize),
    #[error("diagram has {0} crossings, over the state-sum budget")]
    TooManyCrossings(usize),
    #[error("linking number methods disagree: projection {projection}, gauss {gauss}")]
    MethodDisagreement { projection: f64, gauss: f64 },
    #[error("curves must be closed")]
    OpenCurve,
    #[error("curve winds around the Brillouin zone; no R³ knot type")]
    WindingCurve,
    #[error("jones differs between generic projections: {first} vs {other}")]
    ProjectionInstability { first: String, other: String },
}
