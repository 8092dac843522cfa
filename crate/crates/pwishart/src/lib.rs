//! File formats, experiment runner and command-line front end for
//! projective Wishart distributions, built on `pwishart-core`.

pub mod cli;
pub mod config;
pub mod format;
pub mod io;
pub mod verify;
