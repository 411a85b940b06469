//! Flat key-value text documents with `[section]` headers.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! free-form line
//! ```
//!
//! Lines without `=` are kept verbatim so that sections can carry tabular data
//! (the `atoms` block of a measure file, for instance).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub name: String,
    /// `(line number, key, value)`
    pub entries: Vec<(usize, String, String)>,
    /// `(line number, text)` for lines without `=`.
    pub lines: Vec<(usize, String)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.iter().rev().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![Section::default()];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("unterminated section header `{line}`"),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Parse { line: line_no, message: "empty section name".into() });
                }
                sections.push(Section { name: name.to_string(), ..Default::default() });
                continue;
            }
            let current = sections.last_mut().unwrap();
            match line.split_once('=') {
                Some((k, v)) => current.entries.push((line_no, k.trim().to_string(), v.trim().to_string())),
                None => current.lines.push((line_no, line.to_string())),
            }
        }
        Ok(Document { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Look up `key` in `section`; the unnamed leading section is `""`.
    pub fn get(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.section(section).and_then(|s| s.get(key))
    }
}

pub(crate) fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse { line, message: format!("expected a number, found `{s}`") })
}
