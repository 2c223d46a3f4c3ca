//! Poisson's equation for ergodic birth-death chains.
//!
//! Steady-state and first-passage tables, the exact, forward, backward and
//! mixed recurrence solutions for the marginal relative cost, their error
//! amplification, and the bias and asymptotic variance built on them.

pub mod error;
pub mod gamma;
pub mod numeric;
pub mod mm1m;
pub mod chain;
pub mod model;
pub mod passage;
pub mod poisson;
pub mod error_analysis;
pub mod metrics;
pub mod structure;
pub mod cli;
