//! Mod-2 chains in the unit disk and in planar polygons, flat norms of
//! point cycles, localized discrete families over cubical complexes, and
//! the isoperimetric filling constructions, each with its bounds checked
//! at run time.

#![allow(clippy::needless_range_loop)]

pub mod chain;
pub mod coarea;
pub mod cubical;
pub mod error;
pub mod fill;
pub mod flat;
pub mod geom;
pub mod harness;
pub mod localize;
pub mod matching;
pub mod region;

pub use chain::{add_zero, boundary_one, cone_fill, slice_sphere, OneChain, TwoChain, ZeroChain};
pub use error::{Error, Result};
pub use geom::{eps_geom, Point};
pub use region::Region;
