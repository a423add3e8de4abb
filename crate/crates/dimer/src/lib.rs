//! File formats, parallel drivers and the `dimer` command-line tool on top
//! of `dimer-core`.

pub mod cli;
pub mod io;
pub mod parallel;
