//! Value-of-information frontiers for finite decision problems.
//!
//! The crate computes the best and worst expected utility reachable under
//! an information constraint, for Shannon mutual information
//! ([`shannon`]), deterministic entropy and cardinality constraints
//! ([`deterministic`]) and Bregman information distances ([`bregman`]).
//! [`oracle`] holds brute-force references for small instances and
//! [`curve`] assembles the S-shaped gain/loss curve and the expected-utility
//! level sets on the 2-simplex.

pub mod bregman;
pub mod curve;
pub mod decision;
pub mod deterministic;
pub mod error;
pub mod exec;
pub mod grid;
pub mod oracle;
pub mod paradox;
pub mod prob;
pub mod shannon;

pub use decision::{eu_compare, expected_utility, joint_expected_utility, DecisionProblem, Lottery, Preference};
pub use error::{Result, VoiError};
pub use exec::Execution;
pub use grid::LambdaGrid;
pub use prob::{entropy, kl_divergence, mutual_information, output_marginal, Channel, Distribution};
pub use shannon::{Branch, ValueCurve, ValuePoint};
