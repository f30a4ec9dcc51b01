//! Slack-reactant truncation of the chemical master equation.
//!
//! A reaction network is parsed from a small DSL ([`parse_network`]), augmented
//! with slack reactants that enforce `W x <= N` ([`build_slack`]), and the
//! resulting finite chain is enumerated ([`enumerate_states`]), assembled into a
//! sparse generator ([`build_generator`]) and solved for stationary
//! distributions, transient laws and mean first passage times.

pub mod alt_trunc;
pub mod certify;
pub mod error;
pub mod export;
pub mod graph;
pub mod linalg;
pub mod network;
pub mod parse;
pub mod slack;
pub mod solver;
pub mod ssa;
pub mod statespace;
pub mod target;

pub use error::{Error, ParseError, Result};
pub use network::{Complex, Kinetics, Reaction, ReactionNetwork, Species, StructuralMatrices, WeakReversibility};
pub use parse::parse_network;
pub use slack::{
    build_optimized_slack, build_regular_slack, build_slack, default_candidates, score_conservation_vector,
    suggest_conservation_vector, ConservationSpec, SlackMode, SlackNetwork,
};
pub use statespace::{
    accessibility, build_generator, communication_classes, enumerate_states, reachable_from, CommunicationClass,
    Generator, Region, State, StateSpace,
};
pub use solver::{
    closed_classes_from, l1_distance, mfpt, stationary, stationary_from, stationary_on_class, survival, transient, uniformization_rate, Distribution, FptResult,
    LinearMethod, Stationary,
};
pub use alt_trunc::{build_finite_buffer, build_fsp, build_sfsp, half_space_region};
pub use ssa::{empirical_density, estimate_mfpt, occupation_frequencies, simulate, JumpModel, MfptEstimate, Trajectory};
pub use target::Target;
pub use certify::{
    complex_balance_residual, find_complex_balance, lyapunov_certificate, product_form_stationary,
    ComplexBalanceCertificate, LyapunovCertificate, LyapunovOutcome,
};
