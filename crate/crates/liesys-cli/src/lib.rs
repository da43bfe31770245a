//! Library side of the scenario runner: config parsing, trajectory file
//! formats, reports, and task execution. The `liesys` binary is a thin
//! front-end over these.

pub mod config;
pub mod io;
pub mod report;
pub mod runner;
