//! Kernel ridge regression on relational tasks.
//!
//! Items `1..=n` are presented in ordered pairs `(j, k)` and a model learns a
//! real-valued output `f(j, k)` whose sign says which item wins. The crate
//! provides the tasks ([`tasks`]), the exchangeable pair kernel ([`kernel`]),
//! an exact dual solver ([`oracle`]), closed-form rank predictions
//! ([`closed_form`]), the explicit feature-space view ([`encoding`]), random
//! feature networks ([`features`]) and margin analysis ([`analysis`]).

pub mod analysis;
pub mod closed_form;
pub mod encoding;
pub mod error;
pub mod export;
pub mod features;
mod linalg;
pub mod kernel;
pub mod oracle;
pub mod tasks;

pub use closed_form::{predict_closed_form, rank_profile, ClosedFormParams, RankProfile};
pub use error::{Error, Result};
pub use kernel::{KernelParams, Ridge};
pub use linalg::SINGULAR_CONDITION;
pub use oracle::{dual_solve, DualSolution};
pub use tasks::{build_eval_splits, build_training_set, Dataset, ItemPair, TaskKind, TaskSpec};
