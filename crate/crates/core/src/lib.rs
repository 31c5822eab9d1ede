//! Sharing a fixed reward among a group of agents according to how their
//! peers evaluate them.
//!
//! Two mechanisms are provided:
//!
//! - [`PeerEvaluation`]: every agent splits `M` evaluation points among its
//!   peers; shares are proportional to points received. Budget-balanced and
//!   strategy-proof, but open to collusion.
//! - [`PeerPrediction`]: every agent predicts the histogram of evaluations
//!   each peer will receive. Shares combine the expected evaluation received
//!   with a quadratic-scoring-rule score of the agent's own predictions.
//!
//! All arithmetic is exact ([`Rational`]). The [`analysis`] module checks the
//! incentive properties exhaustively on small instances and [`sim`] runs
//! seeded populations of scripted agents.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod mechanisms;
pub mod rational;
pub mod report;
pub mod scoring;
pub mod sim;

pub use config::{validate_config, AgentId, MechanismConfig, MechanismKind};
pub use error::{Error, Result};
pub use mechanisms::{
    budget_summary, compute_shares, peer_evaluation_shares, peer_prediction_shares, BudgetSummary, PeerEvaluation,
    PeerPrediction, ShareResult, SharingMechanism,
};
pub use rational::Rational;
pub use report::{
    validate_profile, DirectProfile, DirectReport, Histogram, PredictionProfile, PredictionReport, Profile, Report,
    StrategyProfile,
};
pub use scoring::{distribution_from_histogram, nint, quadratic_score, Distribution};
