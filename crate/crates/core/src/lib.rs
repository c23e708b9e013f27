//! Fairness-constrained recommendation policies.
//!
//! The crate computes policies that maximize the worst-off user's normalized
//! utility while guaranteeing each item a share of the best achievable item
//! fairness, along with the resulting price of fairness and the price paid
//! when user utilities are misestimated.
//!
//! ```
//! use fairrec::{population, optimizer, FairnessMeasure, ItemUtilityModel};
//!
//! let w = population::gen_two_type(&[3.0, 2.0, 1.0], 0.5, 10).unwrap();
//! let pof = optimizer::price_of_fairness(
//!     &w,
//!     ItemUtilityModel::SYMMETRIC,
//!     FairnessMeasure::MaxMin,
//! )
//! .unwrap();
//! assert!((pof - 1.0 / 7.0).abs() < 1e-9);
//! ```

pub mod closed_form;
pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod optimizer;
pub mod population;

pub use error::{Error, Result};
pub use model::{
    apply_item_utility_model, item_fairness, item_utilities, normalized_item_utility,
    normalized_user_utility, user_fairness, user_utilities, FairnessMeasure, ItemUtilityModel,
    RecommendationPolicy, UtilityMatrix,
};
pub use optimizer::{
    compute_if_star, compute_uf_star, reduce_by_types, FairProblem, MisestScope, TieBreak,
    TypedPopulation,
};
