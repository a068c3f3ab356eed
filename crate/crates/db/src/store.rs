//! Catalog of image records with an inverted name index, and its on-disk
//! form: `catalog.jsonl` plus `thumbnails/<id>.png`.
//!
//! The first line of `catalog.jsonl` is a header
//! `{"version":1,"next_id":N}`; every further line is one record. The file
//! is rewritten in full through a temporary file and a rename.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use pir_core::model::{fold_name, BiList};

use crate::doc::{BiListDoc, RecordDoc};
use crate::error::{DbError, Result};

pub const CATALOG_FILE: &str = "catalog.jsonl";
pub const THUMBNAIL_DIR: &str = "thumbnails";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub id: String,
    pub original_url: String,
    /// Relative to the store directory.
    pub thumbnail: String,
    /// Milliseconds since the Unix epoch.
    pub inserted_at: u64,
    pub bilist: BiList,
}

impl ImageRecord {
    pub fn to_doc(&self) -> RecordDoc {
        RecordDoc {
            id: self.id.clone(),
            original_url: self.original_url.clone(),
            thumbnail: self.thumbnail.clone(),
            inserted_at: self.inserted_at,
            bilist: BiListDoc::from_bilist(&self.bilist),
        }
    }

    pub fn from_doc(doc: &RecordDoc) -> Result<Self> {
        check_id(&doc.id)?;
        Ok(ImageRecord {
            id: doc.id.clone(),
            original_url: doc.original_url.clone(),
            thumbnail: doc.thumbnail.clone(),
            inserted_at: doc.inserted_at,
            bilist: doc.bilist.to_bilist()?,
        })
    }
}

pub fn thumbnail_path(id: &str) -> String {
    format!("{THUMBNAIL_DIR}/{id}.png")
}

/// Ids double as file names: 1 to 64 characters from `[A-Za-z0-9_-]`.
pub fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
    if ok {
        Ok(())
    } else {
        Err(pir_core::Error::Validation(format!("invalid id {id:?}: use 1-64 characters from [A-Za-z0-9_-]")).into())
    }
}

pub type NameIndex = BTreeMap<String, BTreeSet<String>>;

/// Immutable catalog snapshot. Inserting produces a new snapshot and leaves
/// this one untouched.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    records: BTreeMap<String, Arc<ImageRecord>>,
    name_index: NameIndex,
    next_id: u64,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Arc<ImageRecord>> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &Arc<ImageRecord>> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    pub fn name_index(&self) -> &NameIndex {
        &self.name_index
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Next counter-generated id not already taken by a client-chosen one.
    pub fn fresh_id(&self) -> (String, u64) {
        let mut n = self.next_id.max(1);
        loop {
            let id = format!("img{n:06}");
            if !self.records.contains_key(&id) {
                return (id, n + 1);
            }
            n += 1;
        }
    }

    pub fn insert(&self, rec: ImageRecord) -> Result<Catalog> {
        self.insert_with_counter(rec, self.next_id)
    }

    /// Inserts and advances the id counter to at least `next_id`.
    pub fn insert_with_counter(&self, rec: ImageRecord, next_id: u64) -> Result<Catalog> {
        check_id(&rec.id)?;
        if self.records.contains_key(&rec.id) {
            return Err(DbError::Conflict(format!("id {:?} already exists", rec.id)));
        }
        let mut next = self.clone();
        for name in rec.bilist.objects().iter().map(|o| o.folded_name()) {
            next.name_index.entry(name).or_default().insert(rec.id.clone());
        }
        next.records.insert(rec.id.clone(), Arc::new(rec));
        next.next_id = self.next_id.max(next_id);
        Ok(next)
    }

    /// Ids of images containing at least one of `names`, case-insensitively.
    pub fn candidates<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for name in names {
            if let Some(ids) = self.name_index.get(&fold_name(name)) {
                out.extend(ids.iter().cloned());
            }
        }
        out
    }

    /// Index recomputed from the records alone.
    pub fn rebuild_index(&self) -> NameIndex {
        let mut index = NameIndex::new();
        for rec in self.records.values() {
            for o in rec.bilist.objects() {
                index.entry(o.folded_name()).or_default().insert(rec.id.clone());
            }
        }
        index
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header { version: FORMAT_VERSION, next_id: self.next_id };
        let mut out = serde_json::to_string(&header).expect("header serialises");
        out.push('\n');
        for rec in self.records.values() {
            out.push_str(&serde_json::to_string(&rec.to_doc()).expect("record serialises"));
            out.push('\n');
        }
        out
    }

    /// Parses a whole catalog file; any defect rejects the file.
    pub fn from_jsonl(text: &str) -> Result<Catalog> {
        if !text.is_empty() && !text.ends_with('\n') {
            let line = text.lines().count();
            return Err(DbError::Corrupt { line, message: "truncated final line".into() });
        }
        let mut lines = text.lines().enumerate();
        let Some((_, first)) = lines.next() else {
            return Ok(Catalog::new());
        };
        let header: Header =
            serde_json::from_str(first).map_err(|e| DbError::Corrupt { line: 1, message: format!("bad header: {e}") })?;
        if header.version != FORMAT_VERSION {
            return Err(DbError::Corrupt { line: 1, message: format!("unsupported format version {}", header.version) });
        }
        let mut catalog = Catalog { next_id: header.next_id, ..Catalog::new() };
        for (k, line) in lines {
            let corrupt = |message: String| DbError::Corrupt { line: k + 1, message };
            let doc: RecordDoc = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
            let rec = ImageRecord::from_doc(&doc).map_err(|e| corrupt(e.to_string()))?;
            catalog = catalog.insert(rec).map_err(|e| corrupt(e.to_string()))?;
        }
        Ok(catalog)
    }

    pub fn persist(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(CATALOG_FILE), self.to_jsonl().as_bytes())
    }

    /// Loads `dir/catalog.jsonl`; a missing file is an empty catalog.
    pub fn load(dir: &Path) -> Result<Catalog> {
        let path = dir.join(CATALOG_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => Catalog::from_jsonl(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Catalog::new()),
            Err(e) => Err(DbError::io(&path, e)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
    next_id: u64,
}

/// Writes through a sibling temporary file, syncs it, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(DbError::io(path, e));
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Creates the directory layout if needed and checks it is writable.
pub fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join(THUMBNAIL_DIR)).map_err(|e| DbError::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").and_then(|_| fs::remove_file(&probe)).map_err(|e| DbError::io(dir, e))
}
