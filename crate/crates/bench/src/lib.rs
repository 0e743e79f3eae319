//! Instance generation, benchmark suites and result reporting.

pub mod error;
pub mod generator;
pub mod records;
pub mod report;
pub mod stats;
pub mod suite;
pub mod versions;

pub use error::{Error, Result};
pub use generator::{generate, GeneratorSpec};
pub use records::{read_records, write_records, RunRecord};
pub use suite::{run_suite, Suite, SuiteConfig};
pub use versions::parse_versions;
