//! Exact compactness decisions for linear combinations of composition
//! operators on the Hardy space and weighted Bergman spaces of the disk,
//! with numerical corroboration.

pub mod boundary;
pub mod calkin;
pub mod clark;
pub mod error;
pub mod exact;
pub mod number;
pub mod numerics;
pub mod poly;
pub mod selfmap;
pub mod series;

pub use error::{Error, Result};
pub use number::{Mode, Number};
pub use selfmap::{SelfMap, SpaceSpec};
