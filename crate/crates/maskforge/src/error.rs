use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: no such file", path.display())]
    NotFound { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed WAV file: {reason}", path.display())]
    MalformedWav { path: PathBuf, reason: String },
    #[error("{}: unsupported WAV encoding: {detail}", path.display())]
    UnsupportedWav { path: PathBuf, detail: String },
    #[error("{}: invalid manifest: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: maskforge_core::Error,
    },
    #[error("song {song}: {source}")]
    Song {
        song: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Core(#[from] maskforge_core::Error),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound { path }
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn in_song(self, song: &str) -> Error {
        Error::Song {
            song: song.to_string(),
            source: Box::new(self),
        }
    }
}
