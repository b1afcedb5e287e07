//! 1-eigenspace distributions of the generalized symplectic groups
//! `Sp^(m)_{2n}(Z/p^f)` and the class-group heuristics built on them.
//!
//! The library has three layers:
//!
//! * exact linear algebra and p-group combinatorics (`matrix`, `intsnf`,
//!   `partition`, `pgroup`): big-integer / rational arithmetic, no floats;
//! * the matrix groups themselves (`symplectic`, `spectrum`): membership,
//!   orders, exhaustive enumeration, provably uniform sampling, and the
//!   empirical distribution of kernel types `ker(g - 1)`;
//! * distribution predictions (`qseries`, `heuristics`): q-Pochhammer
//!   evaluation with certified error bounds, closed-form tables, the
//!   u-probability recursion, and the identity checks tying them together.
//!
//! Scalar-generic approximate values live in [`approx`]; the crate-level
//! aliases [`Approx`] and [`Approx32`] fix the carrier to `f64`/`f32`.

pub mod approx;
pub mod error;
pub mod heuristics;
pub mod intsnf;
pub mod matrix;
pub mod partition;
pub mod pgroup;
pub mod qseries;
pub mod ring;
pub mod spectrum;
pub mod symplectic;
pub mod verify;

pub use approx::{ApproxValue, Scalar};
pub use error::{Error, Result};
pub use matrix::{LocalSnf, RMatrix};
pub use partition::{enumerate_types, GroupType};
pub use ring::RingSpec;
pub use symplectic::GroupSpec;

/// Certified approximate real in double precision (the default carrier).
pub type Approx = ApproxValue<f64>;

/// Certified approximate real in single precision.
pub type Approx32 = ApproxValue<f32>;
