//! Köthe co-echelon spaces and algebras `k_p(V)` over countable index sets.
//!
//! The crate represents weight families symbolically, decides the algebra and
//! amenability criteria with checkable certificates or finite witnesses, and
//! evaluates the constructive objects (diagonal projection, section, dense
//! range approximations) exactly on finite truncations.

pub mod classify;
pub mod conditions;
pub mod error;
pub mod index;
pub mod limits;
pub mod order;
pub mod tensoralg;
pub mod truncation;
pub mod verdict;
pub mod weights;
pub mod witnesses;
pub mod xpos;

pub use error::{Error, Result};
pub use index::{Index, IndexSet};
pub use limits::Limits;
pub use order::Order;
pub use verdict::{Outcome, UnknownReason, Verdict};
pub use weights::predicate::Predicate;
pub use weights::{parse_family, parse_file, WeightFamily};
pub use xpos::{Cmp3, XPos};

/// Exact Gaussian rational, the coefficient type of truncated sequences and tensors.
pub type Coeff = num_complex::Complex<num_rational::BigRational>;
