//! Output plumbing: every command writes either into a directory or, for
//! single-CSV commands, to stdout via `--output -`.

use faultline::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub enum Sink {
    Directory(PathBuf),
    Stdout,
}

impl Sink {
    pub fn parse(raw: &str) -> Sink {
        if raw == "-" {
            Sink::Stdout
        } else {
            Sink::Directory(PathBuf::from(raw))
        }
    }

    /// Write `content` as `name` in the directory, or to stdout.
    pub fn write(&self, name: &str, content: &str) -> Result<()> {
        match self {
            Sink::Stdout => {
                print!("{content}");
                std::io::stdout().flush().map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
            }
            Sink::Directory(dir) => write_file(&dir.join(name), content),
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, content).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
