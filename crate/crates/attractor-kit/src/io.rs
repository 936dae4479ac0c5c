use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::{KitError, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| KitError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|e| KitError::Parse {
        what: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads `path`, or all of `stdin` when no path is given.
pub fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<Vec<u8>> {
    match path {
        Some(p) => read_file(p),
        None => {
            let mut buf = Vec::new();
            stdin.read_to_end(&mut buf).map_err(|source| KitError::Io {
                path: "<stdin>".into(),
                source,
            })?;
            Ok(buf)
        }
    }
}
