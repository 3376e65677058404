use std::fs;
use std::path::{Path, PathBuf};

use qdiscrim::{QuantumChannel, WeightedEnsemble};

use crate::error::CliError;

pub const ENSEMBLE_SUFFIX: &str = ".ens.json";

/// One input ensemble and the identifier used in tables.
pub struct Item {
    pub id: String,
    pub path: PathBuf,
}

/// A single file, or every `*.ens.json` in a directory sorted by name.
pub fn collect_inputs(input: &Path) -> Result<(Vec<Item>, bool), CliError> {
    let meta = fs::metadata(input).map_err(|e| CliError::io(input, e))?;
    if !meta.is_dir() {
        return Ok((vec![item(input)], false));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| CliError::io(input, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| CliError::io(input, e)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.is_file() && file_name(p).ends_with(ENSEMBLE_SUFFIX))
        .collect();
    if paths.is_empty() {
        return Err(CliError::Usage(format!(
            "no {ENSEMBLE_SUFFIX} files in {}",
            input.display()
        )));
    }
    paths.sort_by_key(|p| file_name(p));
    Ok((paths.iter().map(|p| item(p)).collect(), true))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// File name without the `.ens.json` (or `.json`) suffix.
pub fn collect_id(path: &Path) -> String {
    let name = file_name(path);
    name.strip_suffix(ENSEMBLE_SUFFIX)
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name)
        .to_string()
}

fn item(path: &Path) -> Item {
    Item {
        id: collect_id(path),
        path: path.to_path_buf(),
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn load_ensemble(
    path: &Path,
    psd_tol: f64,
    project_support: bool,
) -> Result<WeightedEnsemble, CliError> {
    let e = WeightedEnsemble::from_json_with(&read(path)?, psd_tol)
        .map_err(|e| CliError::input(path, e))?;
    if project_support {
        e.project_to_joint_support()
            .map_err(|e| CliError::input(path, e))
    } else {
        Ok(e)
    }
}

pub fn load_channel(path: &Path) -> Result<QuantumChannel, CliError> {
    QuantumChannel::from_json(&read(path)?).map_err(|e| CliError::input(path, e))
}

/// Writes `text` to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, with_newline(text)).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{}", with_newline(text));
            Ok(())
        }
    }
}

fn with_newline(text: &str) -> String {
    if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    }
}

/// Writes a CSV table; `-` means standard output.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let sink: Box<dyn std::io::Write> = if path == Path::new("-") {
        Box::new(std::io::stdout())
    } else {
        Box::new(fs::File::create(path).map_err(|e| CliError::io(path, e))?)
    };
    let mut w = csv::Writer::from_writer(sink);
    let to_err = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(r).map_err(to_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_drop_known_suffixes() {
        assert_eq!(collect_id(Path::new("dir/a.ens.json")), "a");
        assert_eq!(collect_id(Path::new("b.json")), "b");
        assert_eq!(collect_id(Path::new("c.txt")), "c.txt");
    }

    #[test]
    fn directory_listing_is_sorted_and_filtered() {
        let dir = tempfile::TempDir::new().unwrap();
        for name in ["z.ens.json", "a.ens.json", "m.ens.json", "skip.json"] {
            fs::write(dir.path().join(name), "{}").unwrap();
        }
        let (items, is_dir) = collect_inputs(dir.path()).unwrap();
        assert!(is_dir);
        let ids: Vec<&str> = items.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(ids, ["a", "m", "z"]);
    }

    #[test]
    fn empty_directory_is_a_usage_error() {
        let dir = tempfile::TempDir::new().unwrap();
        assert!(matches!(
            collect_inputs(dir.path()),
            Err(CliError::Usage(_))
        ));
    }
}
