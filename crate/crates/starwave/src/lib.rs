//! File formats, command-line driver and validation suites around
//! [`starwave_core`].

pub mod cli;
pub mod compare;
pub mod config;
pub mod formats;
pub mod reference;
pub mod validate;
