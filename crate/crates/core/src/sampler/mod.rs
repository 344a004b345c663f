//! MCMC kernels: collapsed Gibbs on `(xi, z, c)` and reversible-jump on
//! `(xi, z, c, u, v)`, plus chain orchestration.

pub mod alloc;
pub mod chain;
pub mod collapsed;
pub mod conditional;
pub mod rj;

pub use alloc::{allocation_probs, gibbs_allocations, AllocationState, Condition};
pub use chain::{
    derive_seed, run_chain, run_ensemble, summarize, BlockUpdates, ChainConfig, ChainOutput, Draw,
    PosteriorSummary, SamplerKind,
};
pub use collapsed::{
    block_log_weights, block_probs, collapsed_allocation_probs, collapsed_allocation_update,
    collapsed_block_update_c, collapsed_update_c, config_log_weights, log_collapsed_marginal, CollapsedState,
    BLOCK_CONFIGS,
};
pub use conditional::{sample_uv_conditional, uv_conditional_params};
pub use rj::{
    rj_acceptance_log_ratio, rj_birth_transform, rj_death_transform, rj_move_probabilities, rj_step,
    BetaMixture, RjSide, RjState,
};
