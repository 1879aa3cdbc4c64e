use std::io::Write;
use std::path::Path;

use anyhow::Context;
use drive_irl::Error;
use serde::Serialize;

/// 1 usage/config, 2 data, 3 numeric.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Config(_) | Error::Domain(_) => 1,
                Error::Numeric(_) => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> drive_irl::Result<()>) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).with_context(|| format!("serializing {}", path.display()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::from).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or_default()
    ));
    let mut file = std::fs::File::create(&tmp).map_err(Error::from).with_context(|| format!("writing {}", tmp.display()))?;
    file.write_all(&buf).map_err(Error::from)?;
    drop(file);
    std::fs::rename(&tmp, path).map_err(Error::from).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write_atomic(path, |buf| {
        serde_json::to_writer_pretty(&mut *buf, value)?;
        buf.push(b'\n');
        Ok(())
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let bytes = std::fs::read(path).map_err(Error::from).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(Error::from).with_context(|| format!("parsing {}", path.display()))
}

/// `<path>` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let e = anyhow::Error::from(Error::Numeric("x".into())).context("training");
        assert_eq!(exit_code(&e), 3);
        assert_eq!(exit_code(&anyhow::Error::from(Error::Schema("Lane_ID".into()))), 2);
        assert_eq!(exit_code(&anyhow::Error::from(Error::Config("x".into()))), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), 1);
    }

    #[test]
    fn sibling_appends_to_file_name() {
        assert_eq!(sibling(Path::new("a/b.csv"), ".meta.json"), Path::new("a/b.csv.meta.json"));
    }
}
