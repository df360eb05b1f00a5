pub mod chars;
pub mod cyclo;
pub mod error;
pub mod invariants;
pub mod limitformula;
pub mod modforms;
pub mod numeric;
pub mod numtheory;
pub mod quadfield;
pub mod rayclass;
pub mod report;
pub mod snf;
pub mod theorems;

pub use error::{Error, Result};
