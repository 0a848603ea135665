//! Glyph-to-token alignment for text-conditioned image generation.
//!
//! Condition strips of rendered text are mapped onto target-image token
//! coordinates so that rotary position encodings place each condition token
//! where its glyph should appear. Also includes synthetic dataset generation
//! and text precision metrics.

pub mod datagen;
pub mod eval;
pub mod geometry;
pub mod linalg;
pub mod pe;
pub mod warp;
