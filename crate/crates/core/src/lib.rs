//! Desk-scale verification of coset-code advantages on non-additive
//! multi-terminal channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`finite_math`]: binary entropy, binary convolution, BSC capacity with
//!   cost, entropy algebra over joint pmfs, prime-field arithmetic.
//! - [`channel_models`]: the example channels as transition tables, joint
//!   distributions from product input laws, and the channel file format.
//! - [`region_analysis`]: the iid-infeasibility and coset-achievability
//!   conditions, the constrained optimization for user 1's rate, and
//!   sum-decodability margins.
//! - [`macdstx`]: reconstructed sum-rate bounds for the MAC with
//!   distributed states, and budget sweeps.
//! - [`coset_sim`]: linear and coset codes over `F_q`, the closure property,
//!   and a Monte Carlo demonstration of sum decoding.
//! - [`report`]: the structured report format shared by the CLI.

pub mod channel_models;
pub mod coset_sim;
pub mod error;
pub mod finite_math;
pub mod macdstx;
pub mod region_analysis;
pub mod report;

pub use channel_models::{
    dump_channel, joint_distribution, load_channel, make_ex1, make_ex2, make_ex3, make_ex4, make_ex5, ChannelModel,
    CostFn, MacTable,
};
pub use coset_sim::{CosetCodebook, LinearCode, SimParams, SimReport};
pub use error::{Error, Result};
pub use finite_math::{
    binary_entropy, bconv, bsc_capacity_cost, cond_entropy, cond_mutual_info, entropy, fq_add, fq_mul, fq_neg,
    mutual_info, FieldElem, JointPmf, Pmf, PrimeField, Prob,
};
pub use macdstx::{BoundResult, DstxTestChannel, OptimizerConfig, SweepRow};
pub use region_analysis::{C1Result, IcParams, PropositionReport, SimultaneityReport};
