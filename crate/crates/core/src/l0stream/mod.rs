//! Strict turnstile streams, an L0 sketch, and the layered embedding of gap
//! instances into a single stream.

mod embed;
mod sketch;
mod stream;

pub use embed::{
    decode_top_layer, embed_ghse_layers, embedded_exact_l0, embedded_updates, embedding_totals, generate_layers,
    EmbeddedUpdates, EmbeddingPlan, EmbeddingTotals, GeneratedLayer, LayerPair, TopLayerDecode,
};
pub use sketch::{l0_estimate, median_copies, L0Estimate, L0Sketch, SketchParams};
pub use stream::{exact_l0, exact_l0_dense, random_strict_stream, TurnstileStream, Update};
