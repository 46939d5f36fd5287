//! File formats and the `slld` command-line front end over [`slld_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;

pub use error::{Error, Result};
pub use slld_core as core;
