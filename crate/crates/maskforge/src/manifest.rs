//! Corpus manifests: `{"songs":[{"id":..,"stems":[{"path":..,"label":..}]}]}`.
//!
//! Stem paths are resolved relative to the directory holding the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use maskforge_core::audio::{Stem, StemSet};
use maskforge_core::Source;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wav::read_wav;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Vocal,
    NonVocal,
}

impl From<Label> for Source {
    fn from(label: Label) -> Source {
        match label {
            Label::Vocal => Source::Vocal,
            Label::NonVocal => Source::NonVocal,
        }
    }
}

impl From<Source> for Label {
    fn from(source: Source) -> Label {
        match source {
            Source::Vocal => Label::Vocal,
            Source::NonVocal => Label::NonVocal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StemEntry {
    pub path: PathBuf,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongEntry {
    pub id: String,
    pub stems: Vec<StemEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub songs: Vec<SongEntry>,
    /// Directory stem paths are relative to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// First `n` songs and the rest, in manifest order.
    pub fn split(&self, n: usize) -> (Manifest, Manifest) {
        let n = n.min(self.songs.len());
        let part = |songs: &[SongEntry]| Manifest {
            songs: songs.to_vec(),
            base_dir: self.base_dir.clone(),
        };
        (part(&self.songs[..n]), part(&self.songs[n..]))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn load_song(&self, song: &SongEntry) -> Result<StemSet> {
        let stems = song
            .stems
            .iter()
            .map(|entry| {
                Ok(Stem {
                    audio: read_wav(self.resolve(&entry.path))?,
                    label: entry.label.into(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_song(&song.id))?;
        Ok(StemSet {
            song_id: song.id.clone(),
            stems,
        })
    }

    pub fn load_all(&self) -> Result<Vec<StemSet>> {
        if self.songs.is_empty() {
            return Err(Error::Config("manifest lists no songs".into()));
        }
        self.songs.iter().map(|s| self.load_song(s)).collect()
    }
}
