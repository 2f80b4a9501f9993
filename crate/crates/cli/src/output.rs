//! Files of one run, buffered in memory and written only once the run has
//! succeeded. Each file goes to a temporary sibling and is renamed into
//! place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<PathBuf>, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.into()))?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Buffers whatever `write` produces.
    pub fn add_with<F>(&mut self, name: impl Into<PathBuf>, write: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> oamsim_core::Result<()>,
    {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.add(name, bytes);
        Ok(())
    }

    /// Moves every buffered file under `prefix`.
    pub fn nest(&mut self, prefix: &str, other: OutputSet) {
        for (name, bytes) in other.files {
            self.files.push((Path::new(prefix).join(name), bytes));
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(n, _)| n.as_path())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == Path::new(name)).map(|(_, b)| b.as_slice())
    }

    pub fn commit(self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let target = dir.join(&name);
            let parent = target.parent().unwrap_or(dir);
            std::fs::create_dir_all(parent)?;
            let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
            tmp.write_all(&bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(&target).map_err(|e| CliError::Io(e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_is_written_before_commit() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let mut set = OutputSet::new();
        set.add("a.txt", b"x".to_vec());
        assert!(!out.exists());
        drop(set);
        assert!(!out.exists());
    }

    #[test]
    fn commit_creates_nested_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut inner = OutputSet::new();
        inner.add("b.txt", b"inner".to_vec());
        let mut set = OutputSet::new();
        set.add("a.txt", b"outer".to_vec());
        set.nest("gate", inner);
        let written = set.commit(dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(std::fs::read(dir.path().join("gate/b.txt")).unwrap(), b"inner");
        let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(leftovers.len(), 2, "{leftovers:?}");
    }
}
