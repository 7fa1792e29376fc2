pub mod bitmat;
pub mod bounds;
pub mod canon;
pub mod classify;
pub mod cli;
pub mod count;
pub mod error;
pub mod exact;
pub mod extend;
pub mod snf;
pub mod spectra;

pub use bitmat::{BitMatrix, Perm, SignMatrix};
pub use error::{Error, Result};
