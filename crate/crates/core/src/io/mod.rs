//! File formats.

pub mod binary;
pub mod plot;
pub mod text;

pub use binary::{
    decode_checkpoint, decode_coefficients, encode_checkpoint, encode_coefficients, read_checkpoint,
    read_coefficients, write_checkpoint, write_coefficients, Checkpoint,
};
pub use text::{parse_graph, read_graph, read_matrix, write_graph, write_matrix};
