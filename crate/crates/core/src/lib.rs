//! Headless engine for gesture-controlled text generation: spread two
//! fingers to stream generated words in at a sentence end, pinch to take
//! words away, confirm or reject the change.

pub mod command;
pub mod engine;
pub mod geom;
pub mod gesture;
pub mod log;
pub mod metrics;
pub mod render;
pub mod replay;
pub mod report;
pub mod rng;
pub mod sim;
pub mod stream;
pub mod text;
