//! Locating aligned RGB/NIR pairs on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::error::{Error, Result};

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "tif", "tiff"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ImagePair {
    /// Relative stem without the channel suffix, `/`-separated, e.g. `country/0001`.
    pub id: String,
    pub rgb: PathBuf,
    pub nir: PathBuf,
}

#[derive(Clone, Debug, Default)]
pub struct Discovery {
    /// Sorted by id.
    pub pairs: Vec<ImagePair>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Channel {
    Rgb,
    Nir,
}

fn classify(path: &Path) -> Option<(String, Channel)> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    if !IMAGE_EXTENSIONS.contains(&ext.as_str()) {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    let lower = stem.to_ascii_lowercase();
    let (cut, channel) = if lower.ends_with("_rgb") {
        (stem.len() - 4, Channel::Rgb)
    } else if lower.ends_with("_nir") {
        (stem.len() - 4, Channel::Nir)
    } else {
        return None;
    };
    Some((stem[..cut].to_string(), channel))
}

fn relative_id(root: &Path, dir: &Path, stem: &str) -> String {
    let rel = dir.strip_prefix(root).unwrap_or(dir);
    let mut parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    parts.push(stem.to_string());
    parts.join("/")
}

/// Walks `root` recursively and pairs `<stem>_rgb.<ext>` with `<stem>_nir.<ext>`
/// in the same directory. Unpaired or duplicated files become warnings.
pub fn discover_pairs(root: &Path) -> Result<Discovery> {
    if !root.is_dir() {
        return Err(Error::DatasetLayout(format!(
            "dataset root {} is not a directory",
            root.display()
        )));
    }
    let mut slots: BTreeMap<String, (Option<PathBuf>, Option<PathBuf>)> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut scanned = 0usize;
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        scanned += 1;
        let path = entry.path();
        let Some((stem, channel)) = classify(path) else {
            continue;
        };
        let id = relative_id(root, path.parent().unwrap_or(root), &stem);
        let slot = slots.entry(id.clone()).or_default();
        let target = match channel {
            Channel::Rgb => &mut slot.0,
            Channel::Nir => &mut slot.1,
        };
        match target {
            Some(kept) => warnings.push(format!(
                "{id}: ignoring {} (already have {})",
                path.display(),
                kept.display()
            )),
            None => *target = Some(path.to_path_buf()),
        }
    }
    let mut pairs = Vec::new();
    for (id, slot) in slots {
        match slot {
            (Some(rgb), Some(nir)) => pairs.push(ImagePair { id, rgb, nir }),
            (Some(rgb), None) => warnings.push(format!("{id}: no NIR image for {}", rgb.display())),
            (None, Some(nir)) => warnings.push(format!("{id}: no RGB image for {}", nir.display())),
            (None, None) => {}
        }
    }
    if pairs.is_empty() {
        return Err(Error::DatasetLayout(format!(
            "no *_rgb/*_nir pairs under {} ({scanned} files scanned, extensions {})",
            root.display(),
            IMAGE_EXTENSIONS.join("/")
        )));
    }
    Ok(Discovery { pairs, warnings })
}

/// Parses manifest text: CSV rows `id,rgb,nir`, optional header row with
/// exactly those names, `#` comments. Relative paths are joined to `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ImagePair>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut pairs: Vec<ImagePair> = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::DatasetLayout(format!("manifest: {e}")))?;
        let line = record.position().map_or(n as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::DatasetLayout(format!(
                "manifest line {line}: expected 3 fields (id,rgb,nir), found {}",
                record.len()
            )));
        }
        if pairs.is_empty() && record.iter().eq(["id", "rgb", "nir"]) {
            continue;
        }
        if record.iter().any(str::is_empty) {
            return Err(Error::DatasetLayout(format!("manifest line {line}: empty field")));
        }
        let id = record[0].to_string();
        if pairs.iter().any(|p| p.id == id) {
            return Err(Error::DatasetLayout(format!("manifest line {line}: duplicate id {id:?}")));
        }
        pairs.push(ImagePair {
            id,
            rgb: base.join(&record[1]),
            nir: base.join(&record[2]),
        });
    }
    if pairs.is_empty() {
        return Err(Error::DatasetLayout("manifest lists no pairs".into()));
    }
    pairs.sort();
    Ok(pairs)
}

/// Reads a manifest; relative entries resolve against `root`, or the
/// manifest's own directory when no root is given. Missing files become
/// warnings and their rows are dropped.
pub fn load_manifest(path: &Path, root: Option<&Path>) -> Result<Discovery> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = root
        .map(Path::to_path_buf)
        .or_else(|| path.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let mut warnings = Vec::new();
    let pairs: Vec<ImagePair> = parse_manifest(&text, &base)?
        .into_iter()
        .filter(|p| {
            let missing: Vec<_> = [&p.rgb, &p.nir].into_iter().filter(|f| !f.is_file()).collect();
            for f in &missing {
                warnings.push(format!("{}: missing file {}", p.id, f.display()));
            }
            missing.is_empty()
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::DatasetLayout(format!(
            "manifest {} has no pairs with existing files",
            path.display()
        )));
    }
    Ok(Discovery { pairs, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn touch(root: &Path, rel: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, b"").unwrap();
    }

    #[test]
    fn pairs_by_suffix_across_categories() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(root, "country/0001_rgb.png");
        touch(root, "country/0001_nir.png");
        touch(root, "country/0002_rgb.png");
        touch(root, "water/0001_rgb.tiff");
        touch(root, "water/0001_nir.tiff");
        touch(root, "water/readme.txt");
        let d = discover_pairs(root).unwrap();
        let ids: Vec<_> = d.pairs.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["country/0001", "water/0001"]);
        assert_eq!(d.pairs[0].rgb, root.join("country/0001_rgb.png"));
        assert_eq!(d.pairs[0].nir, root.join("country/0001_nir.png"));
        assert_eq!(d.warnings.len(), 1);
        assert!(d.warnings[0].contains("country/0002"));
    }

    #[test]
    fn empty_dataset_is_layout_error() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "a/b.png");
        let err = discover_pairs(dir.path()).unwrap_err();
        assert!(matches!(err, Error::DatasetLayout(_)));
        assert!(err.to_string().contains("1 files scanned"), "{err}");
        assert!(discover_pairs(&dir.path().join("nope")).is_err());
    }

    #[test]
    fn duplicate_channel_warns() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "x_rgb.png");
        touch(dir.path(), "x_rgb.tif");
        touch(dir.path(), "x_nir.png");
        let d = discover_pairs(dir.path()).unwrap();
        assert_eq!(d.pairs.len(), 1);
        assert_eq!(d.pairs[0].id, "x");
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn manifest_parsing() {
        let base = Path::new("/data");
        let m = parse_manifest("# pairs\nid,rgb,nir\nb, b/v.png, b/n.png\na,/abs/v.png,a/n.png\n\n", base).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].id, "a");
        assert_eq!(m[0].rgb, PathBuf::from("/abs/v.png"));
        assert_eq!(m[1].nir, PathBuf::from("/data/b/n.png"));
        assert!(parse_manifest("a,b\n", base).is_err());
        assert!(parse_manifest("a,b,c\na,d,e\n", base).is_err());
        assert!(parse_manifest("a,,c\n", base).is_err());
        assert!(parse_manifest("# nothing\n", base).is_err());
    }

    #[test]
    fn manifest_drops_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "v.png");
        touch(dir.path(), "n.png");
        let m = dir.path().join("pairs.csv");
        fs::write(&m, "one,v.png,n.png\ntwo,v.png,gone.png\n").unwrap();
        let d = load_manifest(&m, None).unwrap();
        assert_eq!(d.pairs.len(), 1);
        assert_eq!(d.warnings.len(), 1);
        assert!(d.warnings[0].contains("gone.png"));
    }
}
