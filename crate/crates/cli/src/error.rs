use std::path::PathBuf;

use thiserror::Error;

use bec_slowlight::Error as ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("physics error: {0}")]
    Physics(ModelError),
    #[error("solver error: {error}\nhint: {hint}")]
    Solver { error: ModelError, hint: &'static str },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Solver { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(error: ModelError) -> Self {
        let hint = match &error {
            ModelError::GridOverflow { .. } => "widen the time window with `propagation.window_margin` or `samples_per_width`",
            ModelError::StepTooCoarse { .. } => {
                "raise `propagation.steps_per_scale` or `min_steps`, or set a smaller `propagation.step`"
            }
            ModelError::RootLoss { .. } | ModelError::NonConvergence { .. } => "raise `modes.shells`",
            ModelError::ModeTrackingLost { .. } => "use a smaller `modes.frequency_step`",
            ModelError::SpecialFunction(_) => "raise `modes.shells` or check the index contrast",
            _ => return CliError::Physics(error),
        };
        CliError::Solver { error, hint }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(ModelError::EmptyDensity).exit_code(), 3);
        assert_eq!(CliError::from(ModelError::GridOverflow { z: 0.0, ratio: 1.0 }).exit_code(), 4);
        assert_eq!(CliError::from(ModelError::StepTooCoarse { dz: 1.0, phase: 1.0 }).exit_code(), 4);
    }
}
