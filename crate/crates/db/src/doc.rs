//! JSON documents exchanged through files and the HTTP API.
//!
//! Coordinates are model units with +y up. Colours and textures are
//! triples in `[0, 1]`; textures are `[coarseness, contrast, directionality]`.
//! Relations use the two-letter topological and one/two-letter interval
//! codes, e.g. `["dt", "di", "di"]`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use pir_core::eval::{CategorySpec, CorpusSpec, PositiveGroup};
use pir_core::model::{BiList, ImageObject, SketchQuery, Threshold};
use pir_core::motion::{ObjectSamples, Scene, TimeInterval, DEFAULT_EPS_MOVE};
use pir_core::relations::{AllenRelation, Pir, TopoRelation};
use pir_core::{Error, Polygon, Rgb, Texture, DEFAULT_EPS};

use crate::error::{DbError, Result};

/// Parses a document, reporting the position of syntax and schema errors.
pub fn parse<T: DeserializeOwned>(what: &'static str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| DbError::parse(what, &e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDoc {
    pub name: String,
    pub polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture: Option<[f64; 3]>,
}

impl ObjectDoc {
    pub fn from_object(o: &ImageObject) -> Self {
        ObjectDoc {
            name: o.name.clone(),
            polygon: o.boundary.vertices().iter().map(|p| [p.x, p.y]).collect(),
            color: o.color.map(|c| c.components()),
            texture: o.texture.map(|t| t.components()),
        }
    }

    fn polygon(&self) -> Result<Polygon> {
        Polygon::from_coords(&self.polygon)
            .map_err(|e| DbError::Core(relabel(e, &format!("object {:?}", self.name))))
    }

    /// Object with its shape descriptor computed from the outline.
    pub fn to_object(&self) -> Result<ImageObject> {
        let mut o = ImageObject::new(self.name.clone(), self.polygon()?)?.with_shape()?;
        if let Some([r, g, b]) = self.color {
            o = o.with_color(Rgb::new(r, g, b)?);
        }
        if let Some([c, ct, d]) = self.texture {
            o = o.with_texture(Texture::new(c, ct, d)?);
        }
        Ok(o)
    }
}

fn relabel(e: Error, context: &str) -> Error {
    match e {
        Error::InvalidPolygon(m) => Error::InvalidPolygon(format!("{context}: {m}")),
        Error::DegenerateGeometry(m) => Error::DegenerateGeometry(format!("{context}: {m}")),
        other => other,
    }
}

pub type RelationDoc = [String; 3];

fn pir_doc(p: &Pir) -> RelationDoc {
    [p.topo.code().to_string(), p.x.code().to_string(), p.y.code().to_string()]
}

fn parse_pir(doc: &RelationDoc, k: usize) -> Result<Pir> {
    let unknown = |code: &str| Error::Validation(format!("relations[{k}]: unknown relation code {code:?}"));
    let topo = TopoRelation::from_code(&doc[0]).ok_or_else(|| unknown(&doc[0]))?;
    let x = AllenRelation::from_code(&doc[1]).ok_or_else(|| unknown(&doc[1]))?;
    let y = AllenRelation::from_code(&doc[2]).ok_or_else(|| unknown(&doc[2]))?;
    Ok(Pir::new(topo, x, y))
}

/// Relations are optional on input and always present on output. Supplied
/// relations must agree with the ones computed from the polygons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiListDoc {
    pub objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<RelationDoc>>,
}

impl BiListDoc {
    pub fn from_bilist(b: &BiList) -> Self {
        BiListDoc {
            objects: b.objects().iter().map(ObjectDoc::from_object).collect(),
            relations: Some(b.relations().iter().map(pir_doc).collect()),
        }
    }

    pub fn to_bilist(&self) -> Result<BiList> {
        let objects = self.objects.iter().map(ObjectDoc::to_object).collect::<Result<Vec<_>>>()?;
        let bilist = BiList::build(objects)?;
        if let Some(given) = &self.relations {
            check_relations(&bilist, given)?;
        }
        Ok(bilist)
    }
}

fn check_relations(bilist: &BiList, given: &[RelationDoc]) -> Result<()> {
    if given.len() != bilist.relations().len() {
        return Err(Error::Validation(format!(
            "{} objects need {} relations, got {}",
            bilist.len(),
            bilist.relations().len(),
            given.len()
        ))
        .into());
    }
    for (k, (doc, computed)) in given.iter().zip(bilist.relations()).enumerate() {
        let p = parse_pir(doc, k)?;
        if p != *computed {
            return Err(Error::Validation(format!("relations[{k}] is {p} but the polygons give {computed}")).into());
        }
    }
    Ok(())
}

/// Insertion request: outlines of named objects plus where the original
/// lives. `raster` names a PNG used for colour and texture extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationDoc {
    #[serde(default)]
    pub original_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raster: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub objects: Vec<ObjectDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchQueryDoc {
    pub objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<RelationDoc>>,
    pub threshold: i64,
    #[serde(default)]
    pub invariant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

impl SketchQueryDoc {
    pub fn to_query(&self) -> Result<SketchQuery> {
        let threshold = Threshold::new(self.threshold)?;
        let bilist = BiListDoc { objects: self.objects.clone(), relations: self.relations.clone() }.to_bilist()?;
        let mut q = SketchQuery::new(bilist, threshold).invariant(self.invariant);
        if let Some(limit) = self.limit {
            q = q.limit(limit)?;
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByImageDoc {
    pub id: String,
    pub threshold: i64,
    #[serde(default)]
    pub invariant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub id: String,
    pub similarity: f64,
    pub matched: Vec<String>,
    pub thumbnail_url: String,
}

/// One line of `catalog.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordDoc {
    pub id: String,
    pub original_url: String,
    pub thumbnail: String,
    pub inserted_at: u64,
    pub bilist: BiListDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub t: f64,
    pub polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObjectDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture: Option<[f64; 3]>,
    pub samples: Vec<SampleDoc>,
}

/// Moving objects: every object is sampled at the same timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<[f64; 2]>,
    pub objects: Vec<SceneObjectDoc>,
}

impl SceneDoc {
    pub fn to_scene(&self) -> Result<Scene> {
        let objects = self
            .objects
            .iter()
            .map(|o| {
                let samples = o
                    .samples
                    .iter()
                    .map(|s| {
                        let polygon = Polygon::from_coords(&s.polygon)
                            .map_err(|e| relabel(e, &format!("object {:?} at t={}", o.name, s.t)))?;
                        Ok((s.t, polygon))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let first = samples.first().ok_or_else(|| Error::InsufficientData(format!("object {:?} has no samples", o.name)))?;
                let doc = ObjectDoc { name: o.name.clone(), polygon: o.samples[0].polygon.clone(), color: o.color, texture: o.texture };
                let mut object = doc.to_object()?;
                object.boundary = first.1.clone();
                Ok(ObjectSamples { object, samples })
            })
            .collect::<Result<Vec<_>>>()?;
        let duration = self.duration.map(|[a, b]| TimeInterval::new(a, b)).transpose()?;
        Ok(Scene::from_samples(objects, duration, DEFAULT_EPS, DEFAULT_EPS_MOVE)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub count: usize,
    #[serde(default)]
    pub jitter: u8,
}

/// Either a count (with the category-level `jitter`) or explicit groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PositivesDoc {
    Count(usize),
    Groups(Vec<GroupDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryDoc {
    pub name: String,
    pub template: BiListDoc,
    pub positives: PositivesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpecDoc {
    #[serde(default)]
    pub seed: u64,
    pub categories: Vec<CategoryDoc>,
    #[serde(default)]
    pub distractors_per_category: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distractor_ceiling: Option<f64>,
    #[serde(default)]
    pub unrelated: usize,
}

impl CorpusSpecDoc {
    pub fn to_spec(&self) -> Result<CorpusSpec> {
        let categories = self
            .categories
            .iter()
            .map(|c| {
                let positives = match (&c.positives, c.jitter) {
                    (PositivesDoc::Count(n), jitter) => vec![PositiveGroup { count: *n, jitter: jitter.unwrap_or(0) }],
                    (PositivesDoc::Groups(_), Some(_)) => {
                        return Err(Error::Config(format!("category {:?}: give jitter per group, not both", c.name)).into())
                    }
                    (PositivesDoc::Groups(g), None) => {
                        g.iter().map(|g| PositiveGroup { count: g.count, jitter: g.jitter }).collect()
                    }
                };
                if positives.iter().any(|g| g.jitter > 8) {
                    return Err(Error::Config(format!("category {:?}: jitter above 8 hops is meaningless", c.name)).into());
                }
                Ok(CategorySpec { name: c.name.clone(), template: c.template.to_bilist()?, positives })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CorpusSpec {
            seed: self.seed,
            categories,
            distractors_per_category: self.distractors_per_category,
            distractor_ceiling: self.distractor_ceiling,
            unrelated: self.unrelated,
        })
    }
}
