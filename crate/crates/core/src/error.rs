use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// No reference-line point lies within the projection corridor.
    #[error("point ({x:.3}, {y:.3}) is farther than {corridor} m from the reference line")]
    OutOfCorridor { x: f64, y: f64, corridor: f64 },

    #[error("invalid track: {0}")]
    InvalidTrack(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid scenario at frame {frame}: {reason}")]
    InvalidScenario { frame: usize, reason: String },

    /// The ground-truth envelope only exists for dynamic-collision scenarios.
    #[error("safety envelope not applicable: {0}")]
    NotApplicable(&'static str),
}
