//! Crash-safe file replacement: write a sibling temp file, fsync, rename.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Called after the temp file is durable and before the rename. Returning an
/// error aborts the write at that point, leaving the temp file behind exactly
/// as a crash would.
pub type FaultHook = Arc<dyn Fn(&Path, &Path) -> io::Result<()> + Send + Sync>;

pub const TEMP_SUFFIX: &str = ".tmp";

pub fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(TEMP_SUFFIX);
    path.with_file_name(name)
}

pub fn write_atomic(path: &Path, data: &[u8], hook: Option<&FaultHook>) -> io::Result<()> {
    let tmp = temp_path(path);
    {
        let mut file = File::create(&tmp)?;
        file.write_all(data)?;
        file.sync_all()?;
    }
    if let Some(hook) = hook {
        hook(&tmp, path)?;
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        // Persist the rename itself; not supported on every platform.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}
