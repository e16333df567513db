//! Helpers shared by the integration test targets.

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

/// Path of a file in the crate's fixtures directory.
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}
