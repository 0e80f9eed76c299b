//! Trade-off analysis for dynamic software product lines.
//!
//! A model file describes features, the contexts the system runs in, the
//! rules linking them and the goals the features serve. From it the crate
//! derives per-feature utilities for a prioritization scenario, finds the
//! best configuration for every context state with an exact 0-1 solver,
//! and assembles an adaptation model over the context transitions.
//!
//! ```
//! use toffa_core::{dsl, scenario, optimizer};
//!
//! let m = dsl::parse_model(
//!     "feature f0 \"Root\" root\n\
//!      group g xor of f0 { f1 \"Fast\", f2 \"Frugal\" }\n\
//!      goal g1 \"Serve\"\n\
//!      hardgoal h1 of g1 or binds f1\n\
//!      hardgoal h2 of g1 or binds f2\n\
//!      softgoal s1 \"Battery\"\n\
//!      link h2 s1 ++\n",
//! )?;
//! let s = scenario::parse_scenario("scenario s { goals: g1 ; softgoals: s1 }")?;
//! let w = scenario::scenario_weights(&m, &s)?;
//! let best = optimizer::optimal_configuration(&m, &w, None, &Default::default())?;
//! assert_eq!(best.configuration.notation(), "{f0, ¬f1, f2}");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod ccf;
pub mod contribution;
pub mod diag;
pub mod dsl;
pub mod model;
pub mod optimizer;
pub mod prioritization;
pub mod report;
pub mod scenario;
pub mod tradeoff;
pub mod validate;

pub use diag::{Diagnostic, Severity};
pub use dsl::{parse_model, serialize_model, ParseError};
pub use model::Model;
pub use scenario::{parse_scenario, parse_scenarios, Scenario, ScenarioWeights};

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/ccfs.md")]
    mod ccfs {}
    #[doc = include_str!("../../../book/src/prioritization.md")]
    mod prioritization {}
    #[doc = include_str!("../../../book/src/utilities.md")]
    mod utilities {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/tradeoffs.md")]
    mod tradeoffs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
