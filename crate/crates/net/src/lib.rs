//! HTTP side of the toolkit: a resolver that dereferences symbol URIs and a
//! server that publishes content dictionaries as linked data.

pub mod conneg;
pub mod describe;
pub mod resolver;
pub mod server;
pub mod transport;
