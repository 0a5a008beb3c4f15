use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Writes every file to a sibling temp path first and renames once all of
/// them are on disk, so a failed run leaves nothing behind.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Numerical(format!("cannot create {}: {e}", dir.display())))?;
    let mut staged = Vec::new();
    for (name, body) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        let res = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(body.as_bytes())?;
            f.sync_all()
        });
        if let Err(e) = res {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(CliError::Numerical(format!("cannot write {}: {e}", tmp.display())));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut done = Vec::new();
    for (tmp, dst) in staged {
        fs::rename(&tmp, &dst).map_err(|e| CliError::Numerical(format!("cannot move into {}: {e}", dst.display())))?;
        done.push(dst);
    }
    Ok(done)
}
