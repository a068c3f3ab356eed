#![allow(dead_code)]

use pir_core::model::{BiList, ImageObject};
use pir_core::{Polygon, Rgb};
use pir_db::doc::{AnnotationDoc, ObjectDoc};
use pir_db::engine::annotation_from_bilist;
use pir_db::{Annotation, ImageRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 10] = ["sky", "water", "bridge", "tower", "tree", "hill", "sun", "cloud", "boat", "rock"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 1 to 5 rectangles with distinct names from a small vocabulary.
pub fn random_bilist(rng: &mut ChaCha8Rng) -> BiList {
    let n = rng.gen_range(1..=5);
    let mut names: Vec<&str> = NAMES.to_vec();
    let objects = (0..n)
        .map(|_| {
            let name = names.swap_remove(rng.gen_range(0..names.len()));
            let (x, y) = (rng.gen_range(0..40), rng.gen_range(0..40));
            let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
            let p = Polygon::rect(f64::from(x), f64::from(y), f64::from(x + w), f64::from(y + h)).unwrap();
            let mut o = ImageObject::new(name, p).unwrap().with_shape().unwrap();
            if rng.gen_bool(0.5) {
                o = o.with_color(Rgb::new(rng.gen(), rng.gen(), rng.gen()).unwrap());
            }
            o
        })
        .collect();
    BiList::build(objects).unwrap()
}

pub fn random_annotation(rng: &mut ChaCha8Rng) -> Annotation {
    annotation_from_bilist(&random_bilist(rng), format!("https://example.org/{}.jpg", rng.gen::<u32>()))
}

pub fn random_record(rng: &mut ChaCha8Rng, id: String) -> ImageRecord {
    ImageRecord {
        thumbnail: pir_db::store::thumbnail_path(&id),
        original_url: format!("https://example.org/{id}.jpg"),
        inserted_at: rng.gen_range(0..u64::MAX / 2),
        bilist: random_bilist(rng),
        id,
    }
}

pub fn rect_doc(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> ObjectDoc {
    ObjectDoc { name: name.into(), polygon: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]], color: None, texture: None }
}

pub fn two_box_annotation() -> AnnotationDoc {
    AnnotationDoc {
        original_url: "https://example.org/pair.jpg".into(),
        raster: None,
        id: None,
        objects: vec![rect_doc("sky", 0.0, 5.0, 10.0, 10.0), rect_doc("water", 0.0, 0.0, 10.0, 5.0)],
    }
}
