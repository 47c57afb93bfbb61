//! k-median clustering over general metric spaces.
//!
//! The crate builds randomized 2-HSTs (hierarchically well-separated trees)
//! and uses them to pick initial centers, refines centers with single-swap
//! local search, and provides differentially private versions of both steps
//! in which only the demand set is protected.
//!
//! ```
//! use hstkm::{hst_init, local_search, DemandSet, Depth, LocalSearchConfig, MetricSpace, Norm};
//!
//! let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
//! let space = MetricSpace::from_vectors(&pts, Norm::L1).unwrap();
//! let init = hst_init(&space, 2, Depth::Auto, 7).unwrap();
//! let demand = DemandSet::all(&space);
//! let trace = local_search(&space, &demand, &init, LocalSearchConfig::default()).unwrap();
//! assert_eq!(trace.final_cost(), 2.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod dp;
pub mod error;
pub mod harness;
pub mod hst;
pub mod io;
pub mod local_search;
pub mod metric;
pub mod rng;
pub mod seeding;

pub use dp::{dp_hst_init, dp_local_search, DpHstConfig, DpInit, DpRunConfig, PrivacyBudget};
pub use error::{Error, Result};
pub use hst::{build_hst, measure_distortion, Depth, HstNode, HstTree, Level, NodeId};
pub use local_search::{cost, local_search, CostTrace, LocalSearchConfig, Objective};
pub use metric::{DemandSet, MetricSpace, Norm, PointId};
pub use rng::RngSeed;
pub use seeding::{hst_init, kmedianpp_init, random_init, CenterSet, InitOrigin};
