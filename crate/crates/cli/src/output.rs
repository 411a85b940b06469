use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::settings::{Format, RunConfig};
use crate::CliError;

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Io(format!("{}: {e}", path.display()))
    })
}

fn cell(s: &str) -> Value {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ if s.is_empty() => Value::Null,
        _ => Value::from(s),
    }
}

/// Rows of a CSV table as JSON objects keyed by the header.
pub fn csv_to_json(csv: &str) -> Value {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rows = lines
        .map(|l| {
            let obj: Map<String, Value> =
                header.iter().zip(l.split(',')).map(|(k, v)| (k.to_string(), cell(v))).collect();
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

pub fn to_json(v: &impl serde::Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Write a table as `<stem>.csv` or `<stem>.json` depending on the format.
pub fn write_table(cfg: &RunConfig, stem: &str, csv: &str) -> Result<PathBuf, CliError> {
    let (path, body) = match cfg.format {
        Format::Csv => (cfg.path(&format!("{stem}.csv")), csv.to_string()),
        Format::Json => (cfg.path(&format!("{stem}.json")), to_json(&csv_to_json(csv))?),
    };
    write_atomic(&path, &body)?;
    Ok(path)
}
