use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: malformed data: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Core(#[from] pbb_core::Error),

    #[error("{failed} of {total} trajectories failed; partial results written")]
    TrajectoriesFailed { failed: usize, total: usize },
}

impl CliError {
    /// 2 for configuration and usage problems, 1 for everything that went
    /// wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Core(_) => "runtime",
            CliError::TrajectoriesFailed { .. } => "trajectories_failed",
        }
    }

    /// One-line JSON report for stderr.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Config { field, .. } = self {
            v["field"] = serde_json::Value::String(field.clone());
        }
        v.to_string()
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub(crate) fn format(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_line_carries_the_field() {
        let e = CliError::Config {
            field: "params.g".into(),
            message: "must be non-negative".into(),
        };
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["field"], "params.g");
        assert_eq!(v["exit_code"], 2);
        assert!(!e.to_json().contains('\n'));
        assert_eq!(
            CliError::Core(pbb_core::Error::MissingSnapshots).exit_code(),
            1
        );
    }
}
