//! Counting exact-length point patterns on the integer grid.
//!
//! * [`grid`]: point sets, maximal runs and pattern histograms.
//! * [`queens`]: modular n-queens solutions, their equivalence classes,
//!   lattice solutions and maximum partial placements.
//! * [`constructions`]: rectangles, queens tilings, lattice constellations,
//!   exact ratios and bounds on the limiting ratio f(k).
//! * [`solver`]: certified exact search for a_k(n).

pub mod constructions;
pub mod grid;
pub mod queens;
pub mod solver;

pub use constructions::{BoundReport, BoundRule, Rational, RatioReport};
pub use grid::{Direction, PatternHistogram, Point, PointSet, Run};
pub use queens::{EquivalenceClassReport, PartialPlacement, QueensPermutation};
pub use solver::{SolveResult, Status};
