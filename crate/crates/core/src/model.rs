//! Object-relationship model: attributed objects plus the pairwise relation
//! list (the bi-list).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::descriptors::{Rgb, ShapeDescriptor, Texture};
use crate::geometry::{Polygon, DEFAULT_EPS};
use crate::relations::{compute_pir, D4Element, Pir};
use crate::{Error, Result};

/// Case-folded form used for every name comparison.
pub fn fold_name(name: &str) -> String {
    name.trim().to_lowercase()
}

/// A named region with optional colour, shape and texture attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageObject {
    pub name: String,
    pub boundary: Polygon,
    pub color: Option<Rgb>,
    pub shape: Option<ShapeDescriptor>,
    pub texture: Option<Texture>,
}

impl ImageObject {
    pub fn new(name: impl Into<String>, boundary: Polygon) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::Validation("object name must not be empty".into()));
        }
        Ok(Self { name, boundary, color: None, shape: None, texture: None })
    }

    pub fn with_color(mut self, color: Rgb) -> Self {
        self.color = Some(color);
        self
    }

    pub fn with_texture(mut self, texture: Texture) -> Self {
        self.texture = Some(texture);
        self
    }

    /// Computes and attaches the turning-function descriptor of the boundary.
    pub fn with_shape(mut self) -> Result<Self> {
        self.shape = Some(ShapeDescriptor::from_polygon(&self.boundary)?);
        Ok(self)
    }

    pub fn folded_name(&self) -> String {
        fold_name(&self.name)
    }

    pub fn transformed(&self, g: D4Element) -> ImageObject {
        let boundary = g.apply_polygon(&self.boundary);
        let shape = match &self.shape {
            Some(_) => ShapeDescriptor::from_polygon(&boundary).ok(),
            None => None,
        };
        ImageObject { name: self.name.clone(), boundary, color: self.color, shape, texture: self.texture }
    }
}

/// Index of pair `(i, j)`, `i < j`, in the canonical enumeration
/// `(0,1), (0,2), …, (1,2), …`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Objects and the relation of every canonical pair `(i, j)`, `i < j`,
/// stored as the triple of `objects[i]` relative to `objects[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiList {
    objects: Vec<ImageObject>,
    relations: Vec<Pir>,
}

impl BiList {
    /// Computes all pair relations with the default tolerance.
    pub fn build(objects: Vec<ImageObject>) -> Result<Self> {
        Self::build_with(objects, DEFAULT_EPS)
    }

    pub fn build_with(objects: Vec<ImageObject>, eps: f64) -> Result<Self> {
        validate_objects(&objects)?;
        let n = objects.len();
        let mut relations = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in (i + 1)..n {
                relations.push(compute_pir(&objects[i].boundary, &objects[j].boundary, eps)?);
            }
        }
        Ok(Self { objects, relations })
    }

    /// Assembles a bi-list from stored relations without recomputing them.
    pub fn from_parts(objects: Vec<ImageObject>, relations: Vec<Pir>) -> Result<Self> {
        validate_objects(&objects)?;
        let expected = pair_count(objects.len());
        if relations.len() != expected {
            return Err(Error::Validation(format!(
                "{} objects need {expected} relations, got {}",
                objects.len(),
                relations.len()
            )));
        }
        Ok(Self { objects, relations })
    }

    pub fn objects(&self) -> &[ImageObject] {
        &self.objects
    }

    pub fn relations(&self) -> &[Pir] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(|o| o.name.as_str())
    }

    /// Case-insensitive lookup.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        let key = fold_name(name);
        self.objects.iter().position(|o| o.folded_name() == key)
    }

    /// Triple of object `i` relative to object `j`.
    pub fn pir_at(&self, i: usize, j: usize) -> Option<Pir> {
        let n = self.objects.len();
        if i >= n || j >= n || i == j {
            return None;
        }
        Some(if i < j {
            self.relations[pair_index(n, i, j)]
        } else {
            self.relations[pair_index(n, j, i)].converse()
        })
    }

    /// Triple of `a` relative to `b`, by name.
    pub fn pir_between(&self, a: &str, b: &str) -> Result<Pir> {
        let i = self.index_of(a).ok_or_else(|| Error::Lookup(format!("no object named {a:?}")))?;
        let j = self.index_of(b).ok_or_else(|| Error::Lookup(format!("no object named {b:?}")))?;
        if i == j {
            return Err(Error::Lookup(format!("{a:?} and {b:?} name the same object")));
        }
        Ok(self.pir_at(i, j).expect("indices checked"))
    }

    /// Applies a symmetry to every relation and boundary.
    pub fn transform(&self, g: D4Element) -> BiList {
        BiList {
            objects: self.objects.iter().map(|o| o.transformed(g)).collect(),
            relations: self.relations.iter().map(|p| p.transform(g)).collect(),
        }
    }
}

fn validate_objects(objects: &[ImageObject]) -> Result<()> {
    if objects.is_empty() {
        return Err(Error::Validation("an image needs at least one object".into()));
    }
    for (i, o) in objects.iter().enumerate() {
        if o.name.trim().is_empty() {
            return Err(Error::Validation(format!("object {i} has an empty name")));
        }
        let key = o.folded_name();
        if objects[..i].iter().any(|p| p.folded_name() == key) {
            return Err(Error::Validation(format!("duplicate object name {:?}", o.name)));
        }
    }
    Ok(())
}

/// Retrieval accuracy threshold in `0..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Threshold(u8);

impl Threshold {
    pub const MIN: Threshold = Threshold(0);
    pub const MAX: Threshold = Threshold(100);

    pub fn new(value: i64) -> Result<Self> {
        if (0..=100).contains(&value) {
            Ok(Self(value as u8))
        } else {
            Err(Error::Validation(format!("threshold must be in 0..=100, got {value}")))
        }
    }

    pub fn value(&self) -> u8 {
        self.0
    }
}

pub const DEFAULT_LIMIT: usize = 50;

/// A query: the sketch as a bi-list plus the retrieval knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchQuery {
    pub bilist: BiList,
    pub threshold: Threshold,
    pub invariant: bool,
    pub limit: usize,
}

impl SketchQuery {
    pub fn new(bilist: BiList, threshold: Threshold) -> Self {
        Self { bilist, threshold, invariant: false, limit: DEFAULT_LIMIT }
    }

    pub fn invariant(mut self, on: bool) -> Self {
        self.invariant = on;
        self
    }

    pub fn limit(mut self, limit: usize) -> Result<Self> {
        if limit == 0 {
            return Err(Error::Validation("limit must be positive".into()));
        }
        self.limit = limit;
        Ok(self)
    }
}
