//! Staged output directories and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Files are written into a hidden sibling directory that is renamed onto the
/// target when the run ends, so a reader never sees a half-written result.
pub struct OutputDir {
    target: PathBuf,
    staging: PathBuf,
    overwrite: bool,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(target: &Path, overwrite: bool) -> Result<Self, String> {
        if target.exists() && !overwrite {
            return Err(format!("{} already exists; pass --overwrite to replace it", target.display()));
        }
        let name = target.file_name().and_then(|s| s.to_str()).unwrap_or("out");
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| e.to_string())?;
        }
        fs::create_dir(&staging).map_err(|e| format!("cannot create {}: {e}", staging.display()))?;
        Ok(Self { target: target.to_path_buf(), staging, overwrite, files: Vec::new() })
    }

    pub fn file(&mut self, name: &str) -> mist::Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.staging.join(name))?))
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> mist::Result<()> {
        let mut w = self.file(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Move the staged directory onto the target.
    pub fn commit(self) -> Result<PathBuf, String> {
        if self.target.exists() {
            if !self.overwrite {
                return Err(format!("{} appeared during the run; results left in {}", self.target.display(), self.staging.display()));
            }
            let old = self.staging.with_extension("old");
            fs::rename(&self.target, &old).map_err(|e| e.to_string())?;
            fs::rename(&self.staging, &self.target).map_err(|e| e.to_string())?;
            let _ = fs::remove_dir_all(&old);
        } else {
            fs::rename(&self.staging, &self.target).map_err(|e| e.to_string())?;
        }
        Ok(self.target)
    }
}

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: &'static str,
    pub preset: String,
    pub seed: u64,
    pub threads: usize,
    pub params: Option<mist::CircuitParams>,
    pub hilbert: mist::HilbertSpec,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub error: Option<String>,
}
