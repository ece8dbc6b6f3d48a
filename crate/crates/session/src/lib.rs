//! Interactive pursuit sessions over WebSocket.
//!
//! A client creates a session against one of the pursuer policies and then
//! steers the evader by sending controls; the server advances the episode on
//! a fixed tick (or on explicit `step` messages for a manual clock) and
//! streams one frame per tick. See [`protocol`] for the message schemas.
//!
//! - [`session`]: a transport-free session wrapping an episode with a
//!   zero-order-held external evader control.
//! - [`manager`]: the session registry, capacity limit and tick tasks.
//! - [`server`]: the axum WebSocket endpoint.

pub mod error;
pub mod manager;
pub mod protocol;
pub mod server;
pub mod session;

pub use error::SessionError;
pub use manager::{ManagerConfig, SessionManager};
pub use server::{serve, DEFAULT_PORT};
