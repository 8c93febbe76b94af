//! Model formats, the run driver and reports behind the `ltpdr` binary.

pub mod format;
pub mod report;
pub mod run;

pub use format::{parse_kripke, parse_mdp, parse_mrm, serialize_kripke, serialize_mdp, serialize_mrm, FormatError};
pub use report::Report;
pub use run::{run, Engine, Kind, RunError, RunRequest};
