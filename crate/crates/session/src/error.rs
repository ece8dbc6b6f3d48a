use thiserror::Error;

use crate::protocol::{ErrorCode, ServerMessage, SessionId};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session capacity of {0} reached")]
    CapacityExceeded(usize),

    #[error("unknown session {0}")]
    Unknown(SessionId),

    #[error("session {0} has ended")]
    Ended(SessionId),

    #[error("{0}")]
    Invalid(String),
}

impl SessionError {
    pub fn code(&self) -> ErrorCode {
        match self {
            SessionError::CapacityExceeded(_) => ErrorCode::CapacityExceeded,
            SessionError::Unknown(_) => ErrorCode::UnknownSession,
            SessionError::Ended(_) => ErrorCode::SessionEnded,
            SessionError::Invalid(_) => ErrorCode::InvalidRequest,
        }
    }

    pub fn to_message(&self, session: Option<SessionId>) -> ServerMessage {
        ServerMessage::error(self.code(), self.to_string(), session)
    }
}
