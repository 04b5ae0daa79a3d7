//! Command-line tools and the WebSocket replay server.

pub mod cli;
pub mod protocol;
pub mod replay;
pub mod server;
