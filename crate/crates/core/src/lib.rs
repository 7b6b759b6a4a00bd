//! Truthful auctions that fold consumer welfare into the allocation rule
//! through proper scoring rules.
//!
//! * [`scoring`]: tangent-plane scoring rules from convex functions.
//! * [`single_slot`]: the single-winner deals auction.
//! * [`welfare_catalog`]: named welfare functions.
//! * [`general`]: VCG with scoring-rule transfers over finite outcomes.
//! * [`applications`]: network procurement, delays, principal-agent and
//!   split-information deals compiled into general instances.
//! * [`ic_lab`]: grid-based incentive-compatibility and rationality checks.

pub mod applications;
pub mod error;
pub mod general;
pub mod ic_lab;
pub mod scoring;
pub mod simplex;
pub mod single_slot;
pub mod welfare_catalog;

pub use error::{Error, Result};
