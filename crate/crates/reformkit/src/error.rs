use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] reformkit_core::Error),

    /// Rows rejected while loading; line numbers are 1-based.
    #[error("validation: {path}: {} rejected row(s): {}", .rejected.len(), summarize(.rejected))]
    Rows {
        path: PathBuf,
        rejected: Vec<(usize, String)>,
    },

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("usage: {0}")]
    Usage(String),
}

fn summarize(rows: &[(usize, String)]) -> String {
    let mut parts: Vec<String> = rows
        .iter()
        .take(5)
        .map(|(line, why)| format!("line {line}: {why}"))
        .collect();
    if rows.len() > 5 {
        parts.push(format!("and {} more", rows.len() - 5));
    }
    parts.join("; ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 for usage problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
