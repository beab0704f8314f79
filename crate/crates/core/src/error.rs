use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("corridor infeasible: loiter separation {0} must be positive")]
    InfeasibleSeparation(f64),

    #[error("arc length {s} outside path range [0, {length}]")]
    OutOfRange { s: f64, length: f64 },

    #[error("slot index {index} out of range 1..={n_slots}")]
    SlotIndex { index: usize, n_slots: usize },

    #[error("slot {0} already occupied")]
    SlotOccupied(usize),

    #[error("slot {0} is empty")]
    SlotEmpty(usize),

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("commanded speed {v} outside [{v_min}, {v_max}]")]
    SpeedOutOfRange { v: f64, v_min: f64, v_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
