pub mod eval;
pub mod generate;
pub mod render;
pub mod sample;
pub mod snap;
pub mod stats;
