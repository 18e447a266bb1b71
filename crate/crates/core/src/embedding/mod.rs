//! Translations from the effect calculus into the session calculus.

pub mod bijection;
pub mod names;
pub mod parallel;
pub mod shared;
pub mod store;
pub mod terms;

pub use bijection::{effect_to_session, session_to_effect, NotInImage};
pub use names::ChannelNameSupply;
pub use parallel::{embed_top_optimized, naive_parallel_encode, optimize_commuting, parallel_components};
pub use shared::{embed_shared, shared_get, shared_put, shared_race, shared_store_agent, shared_store_type};
pub use store::store_agent;
pub use terms::{
    compile_for_run, compose_with_store, embed_intermediate, embed_pure, embed_top, top_delta, EmbedError,
    Embedder, EmbeddingResult,
};

#[cfg(test)]
mod tests;
