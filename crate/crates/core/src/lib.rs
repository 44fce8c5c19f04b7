pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod intensity;
pub mod localtest;
pub mod pattern;
pub mod secondorder;
pub mod simulate;
pub use error::{Error, Result};
