//! Rank-1 lattice rules and polynomial lattice rules for quasi-Monte Carlo
//! integration in weighted Korobov and Walsh spaces.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cbc;
pub mod discrepancy;
pub mod error;
pub mod gf;
pub mod korobov;
pub mod oracle;
pub mod points;
pub mod report;
pub mod special;
pub mod stability;
pub mod subset;
pub mod walsh;
pub mod weights;

pub use error::{Error, Result};
pub use korobov::LatticeRule;
pub use points::RationalPoints;
pub use report::{MeritReport, Method, SubsetEntry};
pub use subset::Subset;
pub use weights::{SpaceParams, WeightSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/cbc.md")]
    mod cbc {}
    #[doc = include_str!("../../../book/src/polynomial.md")]
    mod polynomial {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/discrepancy.md")]
    mod discrepancy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
