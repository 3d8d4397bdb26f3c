//! Univoque bases of real numbers: expansions of 1, subshift
//! approximations, the collapse maps between them, and certified bounds on
//! the entropy and Hausdorff dimension of univoque sets.

pub mod collapse;
pub mod dimension;
pub mod error;
pub mod expansions;
pub mod interval;
pub mod subshifts;
pub mod words;

pub use error::{Error, Result};
pub use expansions::{AlphaPrefix, AlphaTarget, Base, BaseDefinition, UnivoqueStatus};
pub use interval::{RatInterval, Rational};
pub use words::{Alphabet, EventuallyPeriodicSeq, Sequence, Word};
