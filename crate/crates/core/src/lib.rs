//! Symbolic image model built on projection interval relations.
//!
//! An image is a *bi-list*: an ordered list of named objects and, for every
//! unordered pair of objects, a triple combining one topological relation
//! with the Allen relations of the two objects' x- and y-projections.
//! This crate holds everything that is pure computation over that model:
//! planar geometry, the relation algebra, visual descriptors, query scoring,
//! the moving-object extension and the recall/precision harness.
//!
//! The crate is `no_std` and only needs `alloc`. Storage, image decoding,
//! the HTTP service and the command line live in `pir-db`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod descriptors;
pub mod eval;
pub mod geometry;
pub mod model;
pub mod motion;
pub mod relations;
pub mod similarity;

pub use error::{Error, Result};

pub use descriptors::{Raster, Rgb, ShapeDescriptor, Texture};
pub use geometry::{Axis, Interval, Point, Polygon, DEFAULT_EPS};
pub use model::{BiList, ImageObject, SketchQuery, Threshold};
pub use relations::{AllenRelation, D4Element, Pir, PirWeights, TopoRelation};
pub use similarity::{MatchParams, ScoredResult};
