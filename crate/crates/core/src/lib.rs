pub mod baseline;
pub mod em;
pub mod error;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod mog;
pub mod pipeline;
pub mod segment;

pub use error::{Error, Result};
