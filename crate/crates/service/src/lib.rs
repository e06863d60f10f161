//! HTTP API and command-line front end for dribbleforge.

pub mod api;
pub mod cli;
pub mod jobs;
