use pir_core::model::{BiList, ImageObject};
use pir_core::relations::transform_pir;
use pir_core::similarity::{image_similarity, invariant_similarity, MatchParams};
use pir_core::{D4Element, Point, Polygon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scene(rng: &mut ChaCha8Rng) -> BiList {
    let n = rng.gen_range(2..6);
    let objects = (0..n)
        .map(|k| {
            let (x, y) = (rng.gen_range(0..20), rng.gen_range(0..20));
            let (w, h) = (rng.gen_range(1..10), rng.gen_range(1..10));
            let p = Polygon::rect(f64::from(x), f64::from(y), f64::from(x + w), f64::from(y + h)).unwrap();
            ImageObject::new(format!("o{k}"), p).unwrap()
        })
        .collect();
    BiList::build(objects).unwrap()
}

#[test]
fn relation_transform_commutes_with_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd4);
    for _ in 0..1_000 {
        let scene = random_scene(&mut rng);
        for g in D4Element::ALL {
            let moved: Vec<ImageObject> =
                scene.objects().iter().map(|o| ImageObject { boundary: g.apply_polygon(&o.boundary), ..o.clone() }).collect();
            let recomputed = BiList::build(moved).unwrap();
            let transformed: Vec<_> = scene.relations().iter().map(|&p| transform_pir(p, g)).collect();
            assert_eq!(recomputed.relations(), transformed.as_slice(), "g = {g}");
        }
    }
}

#[test]
fn group_law_holds_on_points_and_relations() {
    let p = Point::new(3.0, -2.0);
    for a in D4Element::ALL {
        assert_eq!(a.then(a.inverse()), D4Element::IDENTITY);
        for b in D4Element::ALL {
            assert_eq!(a.then(b).apply(p), b.apply(a.apply(p)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let scene = random_scene(&mut rng);
    for a in D4Element::ALL {
        for b in D4Element::ALL {
            assert_eq!(scene.transform(a).transform(b).relations(), scene.transform(a.then(b)).relations());
        }
    }
}

#[test]
fn invariant_similarity_recovers_every_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x100);
    let params = MatchParams::default();
    for _ in 0..200 {
        let q = random_scene(&mut rng);
        for g in D4Element::ALL {
            let s = invariant_similarity(&q, &q.transform(g), &params);
            assert!((s - 100.0).abs() <= 1e-9, "{g}: {s}");
        }
    }
}

#[test]
fn plain_similarity_is_not_invariant() {
    let a = ImageObject::new("a", Polygon::rect(0.0, 0.0, 2.0, 2.0).unwrap()).unwrap();
    let b = ImageObject::new("b", Polygon::rect(5.0, 0.0, 7.0, 2.0).unwrap()).unwrap();
    let q = BiList::build(vec![a, b]).unwrap();
    let params = MatchParams::default();
    assert!(image_similarity(&q, &q.transform(D4Element::ROT180), &params) < 100.0);
    assert_eq!(invariant_similarity(&q, &q.transform(D4Element::ROT180), &params), 100.0);
}
