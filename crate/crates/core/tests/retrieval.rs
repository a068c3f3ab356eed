use std::collections::BTreeSet;

use pir_core::eval::{generate_corpus, CorpusSpec, ImageKind, DEFAULT_THRESHOLDS};
use pir_core::model::{BiList, ImageObject, SketchQuery, Threshold};
use pir_core::similarity::{image_similarity, retrieve, MatchParams};
use pir_core::Polygon;
use proptest::prelude::*;

fn ids_at(query: &BiList, corpus: &[(usize, BiList)], theta: u8) -> BTreeSet<usize> {
    let q = SketchQuery::new(query.clone(), Threshold::new(i64::from(theta)).unwrap()).limit(usize::MAX).unwrap();
    retrieve(&q, corpus.iter().map(|(i, b)| (i, b)), &MatchParams::default()).into_iter().map(|r| r.id).collect()
}

#[test]
fn threshold_semantics_on_generated_corpus() {
    let generated = generate_corpus(&CorpusSpec::default_corpus(42).unwrap()).unwrap();
    assert_eq!(generated.images.len(), 200);
    let corpus: Vec<(usize, BiList)> = generated.images.iter().map(|im| im.bilist.clone()).enumerate().collect();
    for (category, query) in &generated.queries {
        let names: BTreeSet<String> = query.objects().iter().map(ImageObject::folded_name).collect();
        let keyword: BTreeSet<usize> = corpus
            .iter()
            .filter(|(_, b)| b.objects().iter().any(|o| names.contains(&o.folded_name())))
            .map(|(i, _)| *i)
            .collect();
        assert_eq!(ids_at(query, &corpus, 0), keyword, "{category}");

        let plants: BTreeSet<usize> = generated
            .images
            .iter()
            .enumerate()
            .filter(|(_, im)| {
                im.label.kind == ImageKind::Positive { jitter: 0 } && im.label.category.as_deref() == Some(category.as_str())
            })
            .map(|(i, _)| i)
            .collect();
        assert!(!plants.is_empty());
        assert_eq!(ids_at(query, &corpus, 100), plants, "{category}");

        let sets: Vec<_> = DEFAULT_THRESHOLDS.iter().map(|&t| ids_at(query, &corpus, t)).collect();
        for w in sets.windows(2) {
            assert!(w[1].is_subset(&w[0]), "{category}");
        }
    }
}

#[test]
fn limit_and_ordering() {
    let sq = |x: f64| Polygon::rect(x, 0.0, x + 1.0, 1.0).unwrap();
    let img = |bx: f64| {
        BiList::build(vec![ImageObject::new("a", sq(0.0)).unwrap(), ImageObject::new("b", sq(bx)).unwrap()]).unwrap()
    };
    let corpus = [(3, img(2.0)), (1, img(0.5)), (2, img(2.0)), (4, img(1.0))];
    let q = SketchQuery::new(img(5.0), Threshold::MIN).limit(3).unwrap();
    let got = retrieve(&q, corpus.iter().map(|(i, b)| (i, b)), &MatchParams::default());
    let ids: Vec<i32> = got.iter().map(|r| r.id).collect();
    assert_eq!(ids, [2, 3, 4]);
    assert!(got.windows(2).all(|w| w[0].similarity >= w[1].similarity));
}

fn scene_strategy() -> impl Strategy<Value = BiList> {
    prop::collection::vec((0i32..30, 0i32..30, 1i32..10, 1i32..10), 1..6).prop_map(|rects| {
        let objects = rects
            .iter()
            .enumerate()
            .map(|(k, &(x, y, w, h))| {
                let p = Polygon::rect(f64::from(x), f64::from(y), f64::from(x + w), f64::from(y + h)).unwrap();
                ImageObject::new(format!("obj{k}"), p).unwrap()
            })
            .collect();
        BiList::build(objects).unwrap()
    })
}

proptest! {
    #[test]
    fn self_similarity_is_full(b in scene_strategy()) {
        prop_assert_eq!(image_similarity(&b, &b, &MatchParams::default()), 100.0);
    }

    #[test]
    fn similarity_is_bounded(a in scene_strategy(), b in scene_strategy()) {
        let s = image_similarity(&a, &b, &MatchParams::default());
        prop_assert!((0.0..=100.0).contains(&s));
    }

    #[test]
    fn raising_threshold_never_adds(a in scene_strategy(), b in scene_strategy(), c in scene_strategy(), lo in 0u8..=100, hi in 0u8..=100) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let corpus = vec![(0usize, a.clone()), (1, b), (2, c)];
        prop_assert!(ids_at(&a, &corpus, hi).is_subset(&ids_at(&a, &corpus, lo)));
    }
}
