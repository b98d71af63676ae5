//! Dataset manifests: one clip per line, `path<TAB>label<TAB>class_index<TAB>split`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParameter(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Clip directory relative to the dataset root; doubles as the video id.
    pub path: String,
    pub label: String,
    pub class_index: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
    index: HashMap<String, usize>,
    classes: usize,
}

impl Manifest {
    /// Paths must be unique, class indices dense in `[0, K)`, and each index
    /// tied to a single label.
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut labels: HashMap<usize, &str> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.path.is_empty() || e.path.contains(['\t', '\n']) || e.label.contains(['\t', '\n']) {
                return Err(Error::InvalidParameter(format!("malformed manifest entry {i}")));
            }
            if index.insert(e.path.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate manifest path `{}`", e.path)));
            }
            if let Some(prev) = labels.insert(e.class_index, &e.label) {
                if prev != e.label {
                    return Err(Error::InvalidParameter(format!(
                        "class {} is labelled both `{prev}` and `{}`",
                        e.class_index, e.label
                    )));
                }
            }
        }
        let classes = labels.len();
        let present: HashSet<usize> = labels.keys().copied().collect();
        if (0..classes).any(|k| !present.contains(&k)) {
            return Err(Error::InvalidParameter(
                "class indices must be dense starting at 0".into(),
            ));
        }
        Ok(Self {
            entries,
            index,
            classes,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::InvalidParameter(format!(
                    "manifest line {}: expected 4 tab-separated fields, got {}",
                    n + 1,
                    cols.len()
                )));
            }
            let class_index = cols[2].parse().map_err(|_| {
                Error::InvalidParameter(format!("manifest line {}: bad class index `{}`", n + 1, cols[2]))
            })?;
            entries.push(ManifestEntry {
                path: cols[0].to_string(),
                label: cols[1].to_string(),
                class_index,
                split: cols[3].parse()?,
            });
        }
        Self::new(entries)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\t{}\t{}\n", e.path, e.label, e.class_index, e.split))
            .collect()
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn find(&self, path: &str) -> Option<&ManifestEntry> {
        self.index.get(path).map(|&i| &self.entries[i])
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    /// Labels ordered by class index.
    pub fn labels(&self) -> Vec<String> {
        let mut labels = vec![String::new(); self.classes];
        for e in &self.entries {
            labels[e.class_index] = e.label.clone();
        }
        labels
    }
}
