//! Coarse geometry on finite metric spaces.
//!
//! Every unbounded model space (ℤ₊, ℓ¹ grids, trees, Cayley balls) is handled
//! through finite truncations collected in a [`generators::Tower`]; coarse
//! statements become measured constants that must stay put as the tower grows.

pub mod cli;
pub mod cone;
pub mod control;
pub mod error;
pub mod flasque;
pub mod generators;
pub mod geodesic;
pub mod homotopy;
pub mod io;
pub mod maps;
pub mod metric;
pub mod product;
pub mod rays;
pub mod space;
pub mod suite;

pub use control::ControlTable;
pub use error::{CoarseError, Result};
pub use maps::MapWitness;
pub use space::{Combiner, FiniteMetricSpace, TOL};
