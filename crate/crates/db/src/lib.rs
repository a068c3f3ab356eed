//! Storage, image handling, query engine, HTTP service and command line
//! around [`pir_core`].

pub mod cli;
pub mod doc;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod service;
pub mod store;

pub use engine::{Annotation, Engine};
pub use error::{DbError, Result};
pub use store::{Catalog, ImageRecord};
