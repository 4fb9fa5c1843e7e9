pub mod error;
pub mod f2core;
pub mod funcspace;
pub mod stabilizer;
pub mod sampling;
pub mod learner;
pub mod qgl;
pub mod oracle;

pub use error::{Error, Result};
