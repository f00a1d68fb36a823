pub mod cohft;
pub mod error;
pub mod graphs;
pub mod integrals;
pub mod relcert;
pub mod scalar;
pub mod spin3;
pub mod strata;

pub use error::{Result, TautError};
