//! Quadratic stochastic operators on finite Abelian groups.
//!
//! A subgroup `H ⊂ G` and a strictly positive measure `μ` on `G` determine a
//! quadratic stochastic operator on the simplex of probability measures on
//! `G`. This crate builds those operators, iterates them, and checks the
//! regularity picture numerically: the sup-norm never grows along orbits,
//! interior orbits converge to the Haar center, and the only orbits that do
//! not are uniform states on cosets cycling under the doubling map.

pub mod classical;
pub mod cli;
pub mod convolution;
pub mod dynamics;
pub mod error;
pub mod group;
pub mod operator;
pub mod simplex;

pub use error::{Error, Result};
pub use group::{parse_group_spec, Coset, Element, GroupSpec, QuotientGroup, Subgroup};
pub use operator::{build_operator, CoefficientReport, OperatorMode, QsoOperator};
pub use simplex::{haar_center, validate_simplex, SimplexPoint};
