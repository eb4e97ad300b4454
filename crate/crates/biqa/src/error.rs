use std::path::PathBuf;

use biqa_core::Error as CoreError;

pub type Result<T, E = BiqaError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum BiqaError {
    #[error("{}: no such file", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: cannot decode image: {reason}", path.display())]
    DecodeFailure { path: PathBuf, reason: String },
    #[error("{}: unsupported sample format {format}; 8-bit RGB or grayscale expected", path.display())]
    UnsupportedBitDepth { path: PathBuf, format: String },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: CoreError,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
}

impl BiqaError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            BiqaError::MissingFile(path)
        } else {
            BiqaError::Io { path, source }
        }
    }

    pub fn in_file(path: impl Into<PathBuf>, source: CoreError) -> Self {
        BiqaError::InFile {
            path: path.into(),
            source,
        }
    }

    pub fn core(&self) -> Option<&CoreError> {
        match self {
            BiqaError::Core(e) | BiqaError::InFile { source: e, .. } => Some(e),
            _ => None,
        }
    }

    /// 1 usage error, 2 data error, 3 internal error.
    pub fn exit_code(&self) -> u8 {
        match self {
            BiqaError::Usage(_) => 1,
            BiqaError::MissingFile(_)
            | BiqaError::Io { .. }
            | BiqaError::DecodeFailure { .. }
            | BiqaError::UnsupportedBitDepth { .. } => 2,
            BiqaError::Core(e) | BiqaError::InFile { source: e, .. } => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidConfig(_) | CoreError::BadFractions => 1,
        CoreError::ShapeMismatch(_) | CoreError::LengthMismatch { .. } | CoreError::ColumnMismatch { .. } => 3,
        _ => 2,
    }
}
