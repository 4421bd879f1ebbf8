//! On-disk layout: `grammar/*.gfs`, `articles/<name>.json`, `meta.json`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Article, WikiError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Meta {
    pub generation: u64,
    pub next_entry: u64,
}

pub(crate) struct Store {
    root: PathBuf,
}

fn store_err(path: &Path, e: impl std::fmt::Display) -> WikiError {
    WikiError::Store(format!("{}: {e}", path.display()))
}

/// Write-then-rename so readers never see a half-written file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WikiError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    fn grammar_dir(&self) -> PathBuf {
        self.root.join("grammar")
    }

    fn articles_dir(&self) -> PathBuf {
        self.root.join("articles")
    }

    fn meta_path(&self) -> PathBuf {
        self.root.join("meta.json")
    }

    /// True when the directory holds no wiki yet.
    pub fn is_empty(&self) -> bool {
        !self.meta_path().exists() && !self.grammar_dir().exists()
    }

    pub fn init(&self) -> Result<(), WikiError> {
        fs::create_dir_all(self.grammar_dir())?;
        fs::create_dir_all(self.articles_dir())?;
        Ok(())
    }

    pub fn load_modules(&self) -> Result<BTreeMap<String, String>, WikiError> {
        let mut out = BTreeMap::new();
        for e in fs::read_dir(self.grammar_dir())? {
            let path = e?.path();
            if path.extension().is_some_and(|x| x == "gfs") {
                let name = path.file_stem().and_then(|s| s.to_str()).ok_or_else(|| store_err(&path, "bad name"))?;
                out.insert(name.to_string(), fs::read_to_string(&path)?);
            }
        }
        Ok(out)
    }

    pub fn load_articles(&self) -> Result<BTreeMap<String, Article>, WikiError> {
        let mut out = BTreeMap::new();
        for e in fs::read_dir(self.articles_dir())? {
            let path = e?.path();
            if path.extension().is_some_and(|x| x == "json") {
                let a: Article =
                    serde_json::from_slice(&fs::read(&path)?).map_err(|e| store_err(&path, e))?;
                out.insert(a.name.clone(), a);
            }
        }
        Ok(out)
    }

    pub fn load_meta(&self) -> Result<Meta, WikiError> {
        let path = self.meta_path();
        if !path.exists() {
            return Ok(Meta::default());
        }
        serde_json::from_slice(&fs::read(&path)?).map_err(|e| store_err(&path, e))
    }

    pub fn save_module(&self, name: &str, source: &str) -> Result<(), WikiError> {
        write_atomic(&self.grammar_dir().join(format!("{name}.gfs")), source.as_bytes())
    }

    pub fn save_article(&self, a: &Article) -> Result<(), WikiError> {
        let mut bytes = serde_json::to_vec_pretty(a).map_err(|e| WikiError::Store(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&self.articles_dir().join(format!("{}.json", a.name)), &bytes)
    }

    pub fn save_meta(&self, m: &Meta) -> Result<(), WikiError> {
        let mut bytes = serde_json::to_vec_pretty(m).map_err(|e| WikiError::Store(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&self.meta_path(), &bytes)
    }
}
