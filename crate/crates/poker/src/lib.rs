//! Heads-up preflop hold'em equity over the 169 starting-hand classes.
//!
//! [`eval`] ranks seven-card hands, [`equity`] turns that into class-level
//! equities and the winningness relation, and [`hierarchy`] samples hand
//! orderings that realize a relational task.

pub mod card;
pub mod class;
pub mod equity;
pub mod error;
pub mod eval;
pub mod hierarchy;

pub use card::{parse_cards, Card};
pub use class::{HoleClass, Suitedness, NUM_CLASSES};
pub use equity::{exact_equity, heads_up_equity, mc_equity, EquityMatrix, EquityMethod};
pub use error::{PokerError, Result};
pub use eval::{eval_mask, evaluate7, Category, HandStrength};
pub use hierarchy::{
    generalization_proportions, sample_hierarchy, verify_sample, Band, HierarchySample, ProportionMatrix,
};
