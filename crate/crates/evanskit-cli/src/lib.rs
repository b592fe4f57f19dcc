//! Library surface of the `evanskit` command-line frontend: config parsing
//! and scenario execution, exposed so integration tests can drive runs
//! without spawning processes.

pub mod config;
pub mod run;
