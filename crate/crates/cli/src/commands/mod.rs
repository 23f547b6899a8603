//! The four subcommands. Each takes paths, loads the config, and reports
//! through [`crate::error::CliError`]; all console output formats live here.

mod compare;
mod generate;
mod plotdata;
mod run;

pub use compare::compare;
pub use generate::generate;
pub use plotdata::plotdata;
pub use run::run;
