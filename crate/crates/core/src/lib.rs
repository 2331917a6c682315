//! Composition operators `C_φ f = f ∘ φ` on `L²` of atomic σ-finite measure spaces,
//! computed in exact rational arithmetic.

pub mod error;
pub mod classify;
pub mod document;
pub mod domains;
pub mod exact;
pub mod l2ops;
pub mod moments;
pub mod radon;
pub mod registry;
pub mod space;
pub mod verdict;

pub use error::{Error, Result};
pub use exact::{ComplexRational, ExtRational, Rational};
pub use radon::{h, h_table, Certainty, HTable, HValue};
pub use space::{AtomId, MeasureSpace, Transformation, Window};
pub use verdict::{Verdict, Witness};
