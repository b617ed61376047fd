//! Knowledge-base files, sessions, the `cnldoc` command line and the HTTP
//! service.

pub mod bench;
pub mod cli;
pub mod config;
pub mod kbfile;
pub mod server;
pub mod session;

pub use config::SessionConfig;
pub use session::Session;
