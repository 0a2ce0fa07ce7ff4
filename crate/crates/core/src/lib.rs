//! Assume-guarantee contracts for configuring and monitoring simulation setups.
//!
//! Simulation models declare their validity domains as contracts; test cases
//! become contracts whose assumption holds the scenario's operating conditions
//! and whose guarantee holds the validity requirement. The [`configurator`]
//! searches for the cheapest setup whose composed contract refines the test
//! case, and [`monitor`] checks recorded runs against the chosen contracts.

pub mod architecture;
pub mod assertion;
pub mod configurator;
pub mod contract;
pub mod dsl;
pub mod monitor;
