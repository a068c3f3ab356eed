//! Insertion and search over a catalog, optionally backed by a directory.
//!
//! Readers take an `Arc` snapshot and never block each other; writers are
//! serialised by a mutex and publish a new snapshot only after the record
//! is durable.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pir_core::descriptors::{average_color, texture_descriptor};
use pir_core::model::{BiList, ImageObject, SketchQuery, Threshold};
use pir_core::similarity::{retrieve, MatchParams, ScoredResult};
use pir_core::{Error, Raster};

use crate::doc::{AnnotationDoc, ObjectDoc};
use crate::error::{DbError, Result};
use crate::imaging::{decode_png, encode_png, load_png, make_thumbnail, DEFAULT_THUMBNAIL_SIZE};
use crate::store::{check_id, prepare_dir, thumbnail_path, write_atomic, Catalog, ImageRecord};

/// Insertion input with the raster already decoded.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub id: Option<String>,
    pub original_url: String,
    pub raster: Option<Raster>,
    pub objects: Vec<ObjectDoc>,
}

impl Annotation {
    /// Resolves a document. `raster` may be a `data:image/png;base64,` URL;
    /// file paths are accepted only when `base` is given and relative paths
    /// are taken relative to it.
    pub fn from_doc(doc: &AnnotationDoc, base: Option<&Path>) -> Result<Self> {
        let raster = match &doc.raster {
            Some(src) => Some(resolve_raster(src, base)?),
            None => None,
        };
        Ok(Annotation { id: doc.id.clone(), original_url: doc.original_url.clone(), raster, objects: doc.objects.clone() })
    }

    /// Objects with descriptors: explicit colour and texture win; otherwise
    /// they are measured on the raster when there is one. Regions too small
    /// for a texture estimate simply carry none.
    pub fn to_bilist(&self) -> Result<BiList> {
        let objects = self
            .objects
            .iter()
            .map(|doc| {
                let mut o: ImageObject = doc.to_object()?;
                if let Some(r) = &self.raster {
                    if o.color.is_none() {
                        o.color = Some(average_color(r, &o.boundary).map_err(|e| named(e, &o.name))?);
                    }
                    if o.texture.is_none() {
                        o.texture = match texture_descriptor(r, &o.boundary) {
                            Ok(t) => Some(t),
                            Err(Error::InsufficientData(_)) => None,
                            Err(e) => return Err(named(e, &o.name).into()),
                        };
                    }
                }
                Ok(o)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BiList::build(objects)?)
    }
}

const PNG_DATA_URL: &str = "data:image/png;base64,";

fn resolve_raster(src: &str, base: Option<&Path>) -> Result<Raster> {
    if let Some(encoded) = src.strip_prefix(PNG_DATA_URL) {
        let bytes = BASE64.decode(encoded.trim()).map_err(|e| DbError::Image(format!("raster data URL: {e}")))?;
        return decode_png(&bytes);
    }
    let Some(base) = base else {
        return Err(Error::Validation("raster must be a data:image/png;base64 URL here".into()).into());
    };
    let path = Path::new(src);
    load_png(&if path.is_relative() { base.join(path) } else { path.to_path_buf() })
}

fn named(e: Error, name: &str) -> Error {
    match e {
        Error::DegenerateRegion(m) => Error::DegenerateRegion(format!("object {name:?}: {m}")),
        other => other,
    }
}

/// Builds an annotation directly from objects, e.g. for generated corpora.
pub fn annotation_from_bilist(bilist: &BiList, original_url: impl Into<String>) -> Annotation {
    Annotation {
        id: None,
        original_url: original_url.into(),
        raster: None,
        objects: bilist.objects().iter().map(ObjectDoc::from_object).collect(),
    }
}

pub struct Engine {
    dir: Option<PathBuf>,
    current: RwLock<Arc<Catalog>>,
    writer: Mutex<()>,
    params: MatchParams,
    thumbnail_size: u32,
}

impl Engine {
    /// Opens (creating if needed) a store directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        prepare_dir(&dir)?;
        let catalog = Catalog::load(&dir)?;
        Ok(Self::with_catalog(Some(dir), catalog))
    }

    /// Engine without persistence; thumbnails are rendered on request.
    pub fn in_memory() -> Self {
        Self::with_catalog(None, Catalog::new())
    }

    fn with_catalog(dir: Option<PathBuf>, catalog: Catalog) -> Self {
        Engine {
            dir,
            current: RwLock::new(Arc::new(catalog)),
            writer: Mutex::new(()),
            params: MatchParams::default(),
            thumbnail_size: DEFAULT_THUMBNAIL_SIZE,
        }
    }

    pub fn with_params(mut self, params: MatchParams) -> Result<Self> {
        params.validate()?;
        self.params = params;
        Ok(self)
    }

    pub fn params(&self) -> &MatchParams {
        &self.params
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn snapshot(&self) -> Arc<Catalog> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Stores an annotated image and returns its id. Nothing is stored when
    /// any step fails.
    pub fn insert_image(&self, a: &Annotation) -> Result<String> {
        let bilist = a.to_bilist()?;
        if let Some(id) = &a.id {
            check_id(id)?;
        }
        let thumb = match self.dir {
            Some(_) => Some(encode_png(&make_thumbnail(a.raster.as_ref(), &bilist, self.thumbnail_size))?),
            None => None,
        };

        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let base = self.snapshot();
        let (id, next_id) = match &a.id {
            Some(id) => (id.clone(), base.next_id()),
            None => base.fresh_id(),
        };
        let record = ImageRecord {
            id: id.clone(),
            original_url: a.original_url.clone(),
            thumbnail: thumbnail_path(&id),
            inserted_at: now_millis(),
            bilist,
        };
        let next = base.insert_with_counter(record, next_id)?;
        if let (Some(dir), Some(thumb)) = (&self.dir, &thumb) {
            let thumb_path = dir.join(thumbnail_path(&id));
            write_atomic(&thumb_path, thumb)?;
            if let Err(e) = next.persist(dir) {
                let _ = fs::remove_file(&thumb_path);
                return Err(e);
            }
        }
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(id)
    }

    /// Sketch retrieval over name-index candidates of the current snapshot.
    pub fn query_sketch(&self, q: &SketchQuery) -> Vec<ScoredResult<String>> {
        query_catalog(&self.snapshot(), q, &self.params)
    }

    /// Uses a stored image's bi-list as the query. The image itself always
    /// leads the results, ahead of other images tied with it at 100.
    pub fn query_by_image(
        &self,
        id: &str,
        threshold: Threshold,
        invariant: bool,
        limit: Option<usize>,
    ) -> Result<Vec<ScoredResult<String>>> {
        let snapshot = self.snapshot();
        let rec = snapshot.get(id).ok_or_else(|| DbError::NotFound(format!("no image with id {id:?}")))?;
        let mut q = SketchQuery::new(rec.bilist.clone(), threshold).invariant(invariant);
        if let Some(limit) = limit {
            q = q.limit(limit)?;
        }
        let mut results = query_catalog(&snapshot, &q, &self.params);
        results.retain(|r| r.id != rec.id);
        let own = retrieve(&q, std::iter::once((&rec.id, &rec.bilist)), &self.params);
        results.splice(0..0, own);
        results.truncate(q.limit);
        Ok(results)
    }

    /// `n` distinct records chosen uniformly (all of them, in id order, when
    /// `n` reaches the catalog size).
    pub fn random_sample(&self, n: usize, seed: Option<u64>) -> Vec<Arc<ImageRecord>> {
        let snapshot = self.snapshot();
        let all: Vec<&Arc<ImageRecord>> = snapshot.records().collect();
        if n >= all.len() {
            return all.into_iter().cloned().collect();
        }
        let mut rng = match seed {
            Some(s) => StdRng::seed_from_u64(s),
            None => StdRng::from_entropy(),
        };
        let mut picked = rand::seq::index::sample(&mut rng, all.len(), n).into_vec();
        // Present in random order but deterministically for a seed.
        for i in (1..picked.len()).rev() {
            picked.swap(i, rng.gen_range(0..=i));
        }
        picked.into_iter().map(|i| Arc::clone(all[i])).collect()
    }

    pub fn thumbnail(&self, id: &str) -> Result<Vec<u8>> {
        let snapshot = self.snapshot();
        let rec = snapshot.get(id).ok_or_else(|| DbError::NotFound(format!("no image with id {id:?}")))?;
        match &self.dir {
            Some(dir) => {
                let path = dir.join(&rec.thumbnail);
                fs::read(&path).map_err(|e| DbError::io(&path, e))
            }
            None => encode_png(&make_thumbnail(None, &rec.bilist, self.thumbnail_size)),
        }
    }
}

/// Scores only images sharing a name with the query; images without a
/// shared name score 0 and are never retrieved, so this equals a full scan.
pub fn query_catalog(catalog: &Catalog, q: &SketchQuery, params: &MatchParams) -> Vec<ScoredResult<String>> {
    let ids = catalog.candidates(q.bilist.names());
    let corpus = ids.iter().filter_map(|id| catalog.get(id).map(|r| (&r.id, &r.bilist)));
    retrieve(q, corpus, params)
}

/// Reference implementation scoring every record.
pub fn query_exhaustive(catalog: &Catalog, q: &SketchQuery, params: &MatchParams) -> Vec<ScoredResult<String>> {
    retrieve(q, catalog.records().map(|r| (&r.id, &r.bilist)), params)
}

fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}
