//! Query-to-image scoring and thresholded retrieval.
//!
//! Similarity is computed over the objects the query and the image have in
//! common (matched by case-folded name):
//!
//! ```text
//! Sim = 100 · F · (λ · S_rel + (1 − λ) · S_vis)
//! ```
//!
//! where `F` is the fraction of query objects found in the image, `S_rel` is
//! one minus the mean relation distance over matched pairs and `S_vis`
//! compares visual attributes of matched objects. With `λ = 1` (the default)
//! only names and spatial arrangement count.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::descriptors::{color_distance, shape_distance, texture_distance};
use crate::model::{BiList, ImageObject, SketchQuery};
use crate::relations::{D4Element, PirWeights};
use crate::{Error, Result};

/// Relative weights of colour, shape and texture in the visual term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisualWeights {
    pub color: f64,
    pub shape: f64,
    pub texture: f64,
}

impl Default for VisualWeights {
    fn default() -> Self {
        Self { color: 1.0, shape: 1.0, texture: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    /// Blend between relation (1.0) and visual (0.0) similarity.
    pub lambda: f64,
    pub pir_weights: PirWeights,
    pub visual_weights: VisualWeights,
    pub invariant: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self { lambda: 1.0, pir_weights: PirWeights::default(), visual_weights: VisualWeights::default(), invariant: false }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must be in [0, 1], got {}", self.lambda)));
        }
        self.pir_weights.validate()?;
        let v = self.visual_weights;
        if [v.color, v.shape, v.texture].iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!("visual weights must be finite and non-negative: {v:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredResult<I> {
    pub id: I,
    /// In `[0, 100]`.
    pub similarity: f64,
    /// Query-side names of the matched objects, in query order.
    pub matched: Vec<String>,
}

/// Pairs `(query index, image index)` of objects with case-insensitively
/// equal names, in query order. Each image object is used at most once.
pub fn match_objects(query: &BiList, image: &BiList) -> Vec<(usize, usize)> {
    let image_keys: Vec<String> = image.objects().iter().map(ImageObject::folded_name).collect();
    let mut used = alloc::vec![false; image_keys.len()];
    let mut out = Vec::new();
    for (qi, q) in query.objects().iter().enumerate() {
        let key = q.folded_name();
        if let Some(vi) = image_keys.iter().enumerate().position(|(k, name)| !used[k] && *name == key) {
            used[vi] = true;
            out.push((qi, vi));
        }
    }
    out
}

/// One minus the mean relation distance over all matched pairs; 1 with
/// fewer than two matches.
pub fn relation_similarity(query: &BiList, image: &BiList, matching: &[(usize, usize)], w: &PirWeights) -> f64 {
    if matching.len() < 2 {
        return 1.0;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for a in 0..matching.len() {
        for b in (a + 1)..matching.len() {
            let (qi, vi) = matching[a];
            let (qj, vj) = matching[b];
            let (Some(qp), Some(vp)) = (query.pir_at(qi, qj), image.pir_at(vi, vj)) else {
                continue;
            };
            total += qp.distance(&vp, w);
            pairs += 1;
        }
    }
    if pairs == 0 {
        return 1.0;
    }
    1.0 - total / pairs as f64
}

fn object_visual_similarity(q: &ImageObject, v: &ImageObject, w: &VisualWeights) -> Option<f64> {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    if let (Some(a), Some(b)) = (&q.color, &v.color) {
        weighted += w.color * (1.0 - color_distance(a, b));
        weight += w.color;
    }
    if let (Some(a), Some(b)) = (&q.shape, &v.shape) {
        if let Ok(d) = shape_distance(a, b) {
            weighted += w.shape * (1.0 - d);
            weight += w.shape;
        }
    }
    if let (Some(a), Some(b)) = (&q.texture, &v.texture) {
        weighted += w.texture * (1.0 - texture_distance(a, b));
        weight += w.texture;
    }
    (weight > 0.0).then(|| weighted / weight)
}

/// Mean per-object attribute similarity over matched objects, with weights
/// renormalised over the attributes both sides carry. Objects with nothing
/// comparable count as 1.
pub fn visual_similarity(query: &BiList, image: &BiList, matching: &[(usize, usize)], params: &MatchParams) -> f64 {
    if matching.is_empty() {
        return 1.0;
    }
    let sum: f64 = matching
        .iter()
        .map(|&(qi, vi)| {
            object_visual_similarity(&query.objects()[qi], &image.objects()[vi], &params.visual_weights).unwrap_or(1.0)
        })
        .sum();
    sum / matching.len() as f64
}

fn score(query: &BiList, image: &BiList, matching: &[(usize, usize)], params: &MatchParams) -> f64 {
    if matching.is_empty() || query.is_empty() {
        return 0.0;
    }
    let coverage = matching.len() as f64 / query.len() as f64;
    let rel = relation_similarity(query, image, matching, &params.pir_weights);
    let blended = if params.lambda >= 1.0 {
        rel
    } else {
        params.lambda * rel + (1.0 - params.lambda) * visual_similarity(query, image, matching, params)
    };
    (100.0 * coverage * blended).clamp(0.0, 100.0)
}

/// Similarity in `[0, 100]`; 0 when no object names match.
pub fn image_similarity(query: &BiList, image: &BiList, params: &MatchParams) -> f64 {
    score(query, image, &match_objects(query, image), params)
}

/// Best similarity over the eight square symmetries applied to the query.
pub fn invariant_similarity(query: &BiList, image: &BiList, params: &MatchParams) -> f64 {
    score_orbit(&orbit(query, true), image, params).map_or(0.0, |(s, _)| s)
}

/// The query under every symmetry when `invariant`, else just the query.
fn orbit(query: &BiList, invariant: bool) -> Vec<BiList> {
    if invariant {
        D4Element::ALL.iter().map(|&g| if g == D4Element::IDENTITY { query.clone() } else { query.transform(g) }).collect()
    } else {
        alloc::vec![query.clone()]
    }
}

/// Names are unchanged by symmetries, so one matching serves the orbit.
fn score_orbit(orbit: &[BiList], image: &BiList, params: &MatchParams) -> Option<(f64, Vec<String>)> {
    let query = &orbit[0];
    let matching = match_objects(query, image);
    if matching.is_empty() {
        return None;
    }
    let sim = orbit.iter().map(|q| score(q, image, &matching, params)).fold(0.0, f64::max);
    let matched = matching.iter().map(|&(qi, _)| query.objects()[qi].name.clone()).collect();
    Some((sim, matched))
}

/// Scores one image under the given invariance mode, returning `None` when
/// no names match.
pub fn score_image(query: &BiList, image: &BiList, invariant: bool, params: &MatchParams) -> Option<(f64, Vec<String>)> {
    score_orbit(&orbit(query, invariant), image, params)
}

/// Images sharing at least one name whose similarity reaches the threshold,
/// best first, ties by ascending id, truncated to `limit`.
pub fn retrieve<'a, I, It>(query: &SketchQuery, corpus: It, params: &MatchParams) -> Vec<ScoredResult<I>>
where
    I: Ord + Clone + 'a,
    It: IntoIterator<Item = (&'a I, &'a BiList)>,
{
    let orbit = orbit(&query.bilist, query.invariant || params.invariant);
    let theta = f64::from(query.threshold.value());
    let mut out: Vec<ScoredResult<I>> = corpus
        .into_iter()
        .filter_map(|(id, image)| {
            let (similarity, matched) = score_orbit(&orbit, image, params)?;
            (similarity >= theta).then(|| ScoredResult { id: id.clone(), similarity, matched })
        })
        .collect();
    rank(&mut out);
    out.truncate(query.limit);
    out
}

/// Descending similarity, then ascending id.
pub fn rank<I: Ord>(results: &mut [ScoredResult<I>]) {
    results.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.id.cmp(&b.id)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::Rgb;
    use crate::model::Threshold;
    use crate::geometry::Polygon;
    use crate::relations::{AllenRelation as A, Pir, TopoRelation as T};
    use alloc::vec;

    fn obj(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> ImageObject {
        ImageObject::new(name, Polygon::rect(x0, y0, x1, y1).unwrap()).unwrap()
    }

    fn bl(objs: Vec<ImageObject>) -> BiList {
        BiList::build(objs).unwrap()
    }

    #[test]
    fn match_examples() {
        let q = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0), obj("B", 2.0, 0.0, 3.0, 1.0)]);
        let v = bl(vec![obj("B", 0.0, 0.0, 1.0, 1.0), obj("C", 2.0, 0.0, 3.0, 1.0)]);
        assert_eq!(match_objects(&q, &v), vec![(1, 0)]);

        let q = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0)]);
        let v = bl(vec![obj("a", 0.0, 0.0, 1.0, 1.0)]);
        assert_eq!(match_objects(&q, &v), vec![(0, 0)]);

        let q = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0), obj("B", 2.0, 0.0, 3.0, 1.0), obj("C", 4.0, 0.0, 5.0, 1.0)]);
        let v = bl(vec![obj("C", 0.0, 0.0, 1.0, 1.0), obj("A", 2.0, 0.0, 3.0, 1.0)]);
        assert_eq!(match_objects(&q, &v), vec![(0, 1), (2, 0)]);
    }

    #[test]
    fn relation_similarity_examples() {
        let w = PirWeights::default();
        let q = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 6.0, 0.0, 10.0, 4.0)]);
        let m = match_objects(&q, &q);
        assert_eq!(relation_similarity(&q, &q, &m, &w), 1.0);

        let single = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0)]);
        assert_eq!(relation_similarity(&single, &q, &match_objects(&single, &q), &w), 1.0);

        // (dt, <, =) against (to, m, =).
        let v = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 4.0, 0.0, 8.0, 4.0)]);
        assert_eq!(v.relations(), &[Pir::new(T::Touch, A::Meets, A::Equal)]);
        let s = relation_similarity(&q, &v, &match_objects(&q, &v), &w);
        assert!((s - 0.875).abs() < 1e-12);
    }

    #[test]
    fn relation_similarity_respects_image_order() {
        // Image lists the objects in the opposite order; converses must be used.
        let w = PirWeights::default();
        let q = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 6.0, 0.0, 10.0, 4.0)]);
        let v = bl(vec![obj("B", 6.0, 0.0, 10.0, 4.0), obj("A", 0.0, 0.0, 4.0, 4.0)]);
        assert_eq!(relation_similarity(&q, &v, &match_objects(&q, &v), &w), 1.0);
    }

    #[test]
    fn visual_similarity_examples() {
        let p = MatchParams::default();
        let black = Rgb::new(0.0, 0.0, 0.0).unwrap();
        let white = Rgb::new(1.0, 1.0, 1.0).unwrap();
        let q = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0).with_color(black).with_shape().unwrap()]);
        assert_eq!(visual_similarity(&q, &q, &match_objects(&q, &q), &p), 1.0);

        let plain = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0)]);
        assert_eq!(visual_similarity(&plain, &plain, &match_objects(&plain, &plain), &p), 1.0);

        let qb = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0).with_color(black)]);
        let vw = bl(vec![obj("A", 0.0, 0.0, 1.0, 1.0).with_color(white)]);
        assert_eq!(visual_similarity(&qb, &vw, &match_objects(&qb, &vw), &p), 0.0);
    }

    #[test]
    fn image_similarity_examples() {
        let p = MatchParams::default();
        let q = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 6.0, 0.0, 10.0, 4.0)]);
        assert_eq!(image_similarity(&q, &q, &p), 100.0);

        let v = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("C", 20.0, 20.0, 30.0, 30.0), obj("B", 6.0, 0.0, 10.0, 4.0)]);
        assert_eq!(image_similarity(&q, &v, &p), 100.0);

        let only_a = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0)]);
        assert_eq!(image_similarity(&q, &only_a, &p), 50.0);

        let none = bl(vec![obj("Z", 0.0, 0.0, 4.0, 4.0)]);
        assert_eq!(image_similarity(&q, &none, &p), 0.0);
    }

    #[test]
    fn blended_similarity_uses_visual_term() {
        let black = Rgb::new(0.0, 0.0, 0.0).unwrap();
        let white = Rgb::new(1.0, 1.0, 1.0).unwrap();
        let q = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0).with_color(black), obj("B", 6.0, 0.0, 10.0, 4.0).with_color(black)]);
        let v = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0).with_color(white), obj("B", 6.0, 0.0, 10.0, 4.0).with_color(black)]);
        let p = MatchParams { lambda: 0.5, ..MatchParams::default() };
        // S_rel = 1, S_vis = (0 + 1) / 2.
        assert!((image_similarity(&q, &v, &p) - 75.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_examples() {
        let p = MatchParams::default();
        let q = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 6.0, 0.0, 10.0, 4.0), obj("C", 1.0, 5.0, 3.0, 9.0)]);
        assert_eq!(invariant_similarity(&q, &q, &p), 100.0);
        let rotated = q.transform(D4Element::ROT90);
        assert!(image_similarity(&q, &rotated, &p) < 100.0);
        assert_eq!(invariant_similarity(&q, &rotated, &p), 100.0);
        assert!(invariant_similarity(&q, &rotated, &p) >= image_similarity(&q, &rotated, &p));
    }

    #[test]
    fn retrieve_orders_and_filters() {
        let p = MatchParams::default();
        let q = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 6.0, 0.0, 10.0, 4.0)]);
        let same = q.clone();
        let touching = bl(vec![obj("A", 0.0, 0.0, 4.0, 4.0), obj("B", 4.0, 0.0, 8.0, 4.0)]);
        let only_b = bl(vec![obj("B", 0.0, 0.0, 1.0, 1.0)]);
        let other = bl(vec![obj("X", 0.0, 0.0, 1.0, 1.0)]);
        let ids = [3u32, 1, 2, 4, 5];
        let corpus = [same.clone(), touching, only_b, other, same];
        let pairs: Vec<(&u32, &BiList)> = ids.iter().zip(corpus.iter()).collect();

        let zero = retrieve(&SketchQuery::new(q.clone(), Threshold::new(0).unwrap()), pairs.clone(), &p);
        let got: Vec<u32> = zero.iter().map(|r| r.id).collect();
        assert_eq!(got, vec![3, 5, 1, 2]);
        assert_eq!(zero[3].similarity, 50.0);
        assert_eq!(zero[3].matched, vec![String::from("B")]);

        let hundred = retrieve(&SketchQuery::new(q.clone(), Threshold::new(100).unwrap()), pairs.clone(), &p);
        assert_eq!(hundred.iter().map(|r| r.id).collect::<Vec<_>>(), vec![3, 5]);

        let limited = retrieve(&SketchQuery::new(q, Threshold::new(0).unwrap()).limit(1).unwrap(), pairs, &p);
        assert_eq!(limited.len(), 1);
    }

    #[test]
    fn params_validation() {
        assert!(MatchParams { lambda: 1.5, ..MatchParams::default() }.validate().is_err());
        assert!(MatchParams::default().validate().is_ok());
    }
}
