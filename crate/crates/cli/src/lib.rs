//! Orchestration of kinetic runs, ε-sweeps against the fluid limit, and
//! machine-readable output for the `vpblimit` command.

pub mod cli;
pub mod config;
pub mod emit;
pub mod init;
pub mod runs;
pub mod sweep;

pub use vpblimit_core::{Error, Result};

/// 2 for configuration errors, 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Cfl { .. } | Error::Structure(_) | Error::Format { .. } | Error::Io { .. } => 2,
        Error::Numerical(_) | Error::Picard { .. } | Error::Linalg(_) => 3,
    }
}

/// Environment variable overriding the worker-thread count.
pub const WORKERS_ENV: &str = "VPBLIMIT_WORKERS";
