//! Recall/precision sweep over a generated, labelled corpus.
//!
//! Each category has a template scene that doubles as its query. The corpus
//! holds, per category, positives derived from the template (exact copies
//! up to uniform scale and translation, or relation-jittered variants),
//! distractors that reuse the template's names in scrambled arrangements,
//! and unrelated images whose names appear in no template.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descriptors::Rgb;
use crate::geometry::Polygon;
use crate::math;
use crate::model::{fold_name, BiList, ImageObject, Threshold};
use crate::relations::{Pir, ALLEN_HOPS, TOPO_HOPS};
use crate::similarity::{image_similarity, rank, score_image, MatchParams};
use crate::{Error, Result};

/// Thresholds of the reference sweep.
pub const DEFAULT_THRESHOLDS: [u8; 6] = [0, 20, 40, 50, 60, 80];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositiveGroup {
    pub count: usize,
    /// Maximum neighbourhood-graph hops any relation component may move.
    pub jitter: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategorySpec {
    pub name: String,
    pub template: BiList,
    pub positives: Vec<PositiveGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub categories: Vec<CategorySpec>,
    pub distractors_per_category: usize,
    /// Distractors are resampled until they score strictly below this
    /// against their category template.
    pub distractor_ceiling: Option<f64>,
    pub unrelated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    Positive { jitter: u8 },
    Distractor,
    Unrelated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageLabel {
    pub category: Option<String>,
    pub kind: ImageKind,
}

impl ImageLabel {
    pub fn is_relevant_to(&self, category: &str) -> bool {
        matches!(self.kind, ImageKind::Positive { .. }) && self.category.as_deref() == Some(category)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub label: ImageLabel,
    pub bilist: BiList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalCorpus {
    pub queries: Vec<(String, BiList)>,
    pub images: Vec<LabeledImage>,
}

const MAX_ATTEMPTS: usize = 20_000;

/// Hop distance per component between two triples.
fn component_hops(a: &Pir, b: &Pir) -> [u8; 3] {
    [
        TOPO_HOPS[a.topo.index()][b.topo.index()],
        ALLEN_HOPS[a.x.index()][b.x.index()],
        ALLEN_HOPS[a.y.index()][b.y.index()],
    ]
}

/// Largest per-component hop distance between two relation lists.
pub fn max_component_hops(a: &BiList, b: &BiList) -> Option<u8> {
    if a.relations().len() != b.relations().len() {
        return None;
    }
    Some(a.relations().iter().zip(b.relations()).flat_map(|(p, q)| component_hops(p, q)).max().unwrap_or(0))
}

fn extent(objects: &[ImageObject]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for o in objects {
        let (lo, hi) = o.boundary.bounds();
        b = (b.0.min(lo.x), b.1.min(lo.y), b.2.max(hi.x), b.3.max(hi.y));
    }
    b
}

/// Per-object axis scaling about the centroid followed by a translation.
fn reshape(o: &ImageObject, sx: f64, sy: f64, dx: f64, dy: f64) -> ImageObject {
    let c = o.boundary.centroid();
    let boundary = o.boundary.map_points(|p| crate::Point::new(c.x + (p.x - c.x) * sx + dx, c.y + (p.y - c.y) * sy + dy));
    ImageObject { boundary, ..o.clone() }
}

fn exact_copy(template: &BiList, rng: &mut ChaCha8Rng) -> Result<BiList> {
    // Power-of-two scales and integer shifts keep coordinates exact.
    let scale = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let (dx, dy) = (f64::from(rng.gen_range(-50i32..=50)), f64::from(rng.gen_range(-50i32..=50)));
    let objects: Vec<ImageObject> = template
        .objects()
        .iter()
        .map(|o| ImageObject {
            boundary: o.boundary.map_points(|p| crate::Point::new(p.x * scale + dx, p.y * scale + dy)),
            ..o.clone()
        })
        .collect();
    let copy = BiList::build(objects)?;
    if copy.relations() == template.relations() {
        Ok(copy)
    } else {
        Ok(BiList::build(template.objects().to_vec())?)
    }
}

fn jittered(template: &BiList, jitter: u8, rng: &mut ChaCha8Rng) -> Result<BiList> {
    let (x0, y0, x1, y1) = extent(template.objects());
    let span = (x1 - x0).max(y1 - y0);
    let accept = |c: &BiList| {
        c.relations() != template.relations() && max_component_hops(template, c).is_some_and(|h| h <= jitter)
    };
    for attempt in 0..MAX_ATTEMPTS {
        let amplitude = span * 0.02 * (1.0 + (attempt / 200) as f64) * f64::from(jitter);
        // Snap to a coarse grid so edge coincidences (meets, starts, …) occur.
        let snap = |v: f64| math::round(v);
        let moves: Vec<Option<[f64; 4]>> = template
            .objects()
            .iter()
            .map(|_| {
                if rng.gen_bool(0.5) {
                    return None;
                }
                let sx = (1.0 + rng.gen_range(-0.3..0.3) * f64::from(jitter)).max(0.2);
                let sy = (1.0 + rng.gen_range(-0.3..0.3) * f64::from(jitter)).max(0.2);
                let dx = snap(rng.gen_range(-amplitude..=amplitude));
                let dy = snap(rng.gen_range(-amplitude..=amplitude));
                Some([sx, sy, dx, dy])
            })
            .collect();
        let Ok(candidate) = partial_move(template, &moves, 1.0) else {
            continue;
        };
        if candidate.relations() == template.relations() {
            continue;
        }
        if accept(&candidate) {
            return Ok(candidate);
        }
        // Too far: walk back along the deformation to just past its first event.
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..48 {
            let mid = 0.5 * (lo + hi);
            match partial_move(template, &moves, mid) {
                Ok(c) if c.relations() == template.relations() => lo = mid,
                _ => hi = mid,
            }
        }
        if let Ok(c) = partial_move(template, &moves, hi) {
            if accept(&c) {
                return Ok(c);
            }
        }
    }
    Err(Error::Config(format!("could not realise jitter {jitter} within {MAX_ATTEMPTS} attempts")))
}

/// Applies each object's scale/translation, interpolated from the identity by `t`.
fn partial_move(template: &BiList, moves: &[Option<[f64; 4]>], t: f64) -> Result<BiList> {
    let objects = template
        .objects()
        .iter()
        .zip(moves)
        .map(|(o, m)| match m {
            None => o.clone(),
            Some([sx, sy, dx, dy]) => reshape(o, 1.0 + (sx - 1.0) * t, 1.0 + (sy - 1.0) * t, dx * t, dy * t),
        })
        .collect();
    BiList::build(objects)
}

fn random_rect(rng: &mut ChaCha8Rng, frame: (f64, f64, f64, f64), w: f64, h: f64) -> Result<Polygon> {
    let x = rng.gen_range(frame.0..=(frame.2 - w).max(frame.0));
    let y = rng.gen_range(frame.1..=(frame.3 - h).max(frame.1));
    let (x, y) = (math::round(x), math::round(y));
    Polygon::rect(x, y, x + w, y + h)
}

fn scrambled(template: &BiList, rng: &mut ChaCha8Rng) -> Result<BiList> {
    let (x0, y0, x1, y1) = extent(template.objects());
    let (mx, my) = ((x1 - x0) * 0.5, (y1 - y0) * 0.5);
    let frame = (x0 - mx, y0 - my, x1 + mx, y1 + my);
    let objects = template
        .objects()
        .iter()
        .map(|o| {
            let (lo, hi) = o.boundary.bounds();
            let (sx, sy) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
            let (w, h) = ((hi.x - lo.x) * sx, (hi.y - lo.y) * sy);
            let c = o.boundary.centroid();
            let target = random_rect(rng, frame, w, h)?;
            let tc = target.centroid();
            Ok(reshape(o, sx, sy, math::round(tc.x - c.x), math::round(tc.y - c.y)))
        })
        .collect::<Result<Vec<_>>>()?;
    BiList::build(objects)
}

fn distractor(template: &BiList, ceiling: Option<f64>, rng: &mut ChaCha8Rng) -> Result<BiList> {
    let params = MatchParams::default();
    for _ in 0..MAX_ATTEMPTS {
        let Ok(candidate) = scrambled(template, rng) else {
            continue;
        };
        if candidate.relations() == template.relations() {
            continue;
        }
        match ceiling {
            Some(c) if image_similarity(template, &candidate, &params) >= c => continue,
            _ => return Ok(candidate),
        }
    }
    Err(Error::Config(format!("no distractor below the similarity ceiling after {MAX_ATTEMPTS} attempts")))
}

fn unrelated_image(index: usize, taken: &BTreeSet<String>, rng: &mut ChaCha8Rng) -> Result<BiList> {
    let count = rng.gen_range(2..=4);
    let mut objects = Vec::with_capacity(count);
    for k in 0..count {
        let name = format!("misc-{}", (index * 7 + k * 3) % 23);
        if taken.contains(&fold_name(&name)) || objects.iter().any(|o: &ImageObject| o.name == name) {
            continue;
        }
        let w = f64::from(rng.gen_range(5i32..=30));
        let h = f64::from(rng.gen_range(5i32..=30));
        objects.push(ImageObject::new(name, random_rect(rng, (0.0, 0.0, 100.0, 100.0), w, h)?)?);
    }
    if objects.is_empty() {
        return Err(Error::Config("unrelated vocabulary collides with category names".into()));
    }
    BiList::build(objects)
}

/// Deterministic corpus for a spec; the same seed yields the same corpus.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<EvalCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut taken = BTreeSet::new();
    for c in &spec.categories {
        if c.positives.iter().map(|g| g.count).sum::<usize>() == 0 {
            return Err(Error::Config(format!("category {:?} has no positives", c.name)));
        }
        taken.extend(c.template.objects().iter().map(ImageObject::folded_name));
    }
    let mut images = Vec::new();
    for c in &spec.categories {
        let label = |kind| ImageLabel { category: Some(c.name.clone()), kind };
        for g in &c.positives {
            for _ in 0..g.count {
                let bilist =
                    if g.jitter == 0 { exact_copy(&c.template, &mut rng)? } else { jittered(&c.template, g.jitter, &mut rng)? };
                images.push(LabeledImage { label: label(ImageKind::Positive { jitter: g.jitter }), bilist });
            }
        }
        for _ in 0..spec.distractors_per_category {
            let bilist = distractor(&c.template, spec.distractor_ceiling, &mut rng)?;
            images.push(LabeledImage { label: label(ImageKind::Distractor), bilist });
        }
    }
    for k in 0..spec.unrelated {
        images.push(LabeledImage {
            label: ImageLabel { category: None, kind: ImageKind::Unrelated },
            bilist: unrelated_image(k, &taken, &mut rng)?,
        });
    }
    let queries = spec.categories.iter().map(|c| (c.name.clone(), c.template.clone())).collect();
    Ok(EvalCorpus { queries, images })
}

const DEFAULT_VOCABULARY: [(&str, [&str; 4]); 8] = [
    ("harbour", ["sky", "water", "bridge", "tower"]),
    ("grazers", ["antelope", "grass", "tree", "hill"]),
    ("falconry", ["falcon", "glove", "handler", "perch"]),
    ("dusk", ["sun", "horizon", "cloud", "sea"]),
    ("primates", ["monkey", "branch", "leaf", "fruit"]),
    ("raptors", ["hawk", "rock", "nest", "prey"]),
    ("night", ["owl", "moon", "trunk", "hollow"]),
    ("alpine", ["peak", "snow", "lake", "forest"]),
];

/// Template scene of four non-degenerate rectangles on a 10-unit grid.
fn grid_template(names: &[&str], rng: &mut ChaCha8Rng) -> Result<BiList> {
    loop {
        let mut objects = Vec::with_capacity(names.len());
        for name in names {
            let w = f64::from(rng.gen_range(1i32..=4)) * 10.0;
            let h = f64::from(rng.gen_range(1i32..=4)) * 10.0;
            let x = f64::from(rng.gen_range(0i32..=6)) * 10.0;
            let y = f64::from(rng.gen_range(0i32..=6)) * 10.0;
            let shade = f64::from(rng.gen_range(0u8..=10)) / 10.0;
            objects.push(
                ImageObject::new(*name, Polygon::rect(x, y, x + w, y + h)?)?.with_color(Rgb::new(shade, 1.0 - shade, 0.5)?),
            );
        }
        let b = BiList::build(objects)?;
        // Fully stacked rectangles make a poor template; insist on variety.
        let distinct: BTreeSet<Pir> = b.relations().iter().copied().collect();
        if distinct.len() >= 4 {
            return Ok(b);
        }
    }
}

impl CorpusSpec {
    /// The engineered reference corpus: 8 categories of 13 positives
    /// (2 exact, then 4/4/3 with jitter 1/2/3), 8 distractors per category
    /// held below similarity 60, and 32 unrelated images. 200 images total.
    pub fn default_corpus(seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7e3a_1a7e);
        let categories = DEFAULT_VOCABULARY
            .iter()
            .map(|(name, names)| {
                Ok(CategorySpec {
                    name: (*name).to_string(),
                    template: grid_template(names, &mut rng)?,
                    positives: alloc::vec![
                        PositiveGroup { count: 2, jitter: 0 },
                        PositiveGroup { count: 4, jitter: 1 },
                        PositiveGroup { count: 4, jitter: 2 },
                        PositiveGroup { count: 3, jitter: 3 },
                    ],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { seed, categories, distractors_per_category: 8, distractor_ceiling: Some(60.0), unrelated: 32 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalCell {
    /// Percent.
    pub recall: f64,
    /// Percent; `None` when nothing was retrieved.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub category: String,
    pub cells: Vec<EvalCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalTable {
    pub thresholds: Vec<Threshold>,
    pub rows: Vec<EvalRow>,
    pub geometric_mean: EvalRow,
}

/// One category query for [`sweep_with`].
pub struct EvalQuery<'a, I> {
    pub category: &'a str,
    pub template: &'a BiList,
    pub relevant: BTreeSet<I>,
}

/// Recall/precision per category and threshold. `retrieve` returns the ids
/// retrieved for a template at a threshold.
pub fn sweep_with<I, F>(queries: &[EvalQuery<'_, I>], thresholds: &[Threshold], mut retrieve: F) -> Result<EvalTable>
where
    I: Ord,
    F: FnMut(&BiList, Threshold) -> Result<Vec<I>>,
{
    if thresholds.is_empty() {
        return Err(Error::Config("at least one threshold is required".into()));
    }
    let mut rows = Vec::with_capacity(queries.len());
    for q in queries {
        if q.relevant.is_empty() {
            return Err(Error::Config(format!("category {:?} has no relevant images", q.category)));
        }
        let mut cells = Vec::with_capacity(thresholds.len());
        for &theta in thresholds {
            let retrieved = retrieve(q.template, theta)?;
            let hits = retrieved.iter().filter(|id| q.relevant.contains(id)).count() as f64;
            let recall = 100.0 * hits / q.relevant.len() as f64;
            let precision = (!retrieved.is_empty()).then(|| 100.0 * hits / retrieved.len() as f64);
            cells.push(EvalCell { recall, precision });
        }
        rows.push(EvalRow { category: q.category.to_string(), cells });
    }
    let geometric_mean = geometric_mean_row(&rows, thresholds.len());
    Ok(EvalTable { thresholds: thresholds.to_vec(), rows, geometric_mean })
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut log_sum = 0.0;
    let mut n = 0usize;
    for v in values {
        if v <= 0.0 {
            return Some(0.0);
        }
        log_sum += math::ln(v);
        n += 1;
    }
    (n > 0).then(|| math::exp(log_sum / n as f64))
}

/// Geometric mean over categories; undefined precisions are skipped.
fn geometric_mean_row(rows: &[EvalRow], columns: usize) -> EvalRow {
    let cells = (0..columns)
        .map(|k| EvalCell {
            recall: geometric_mean(rows.iter().map(|r| r.cells[k].recall)).unwrap_or(0.0),
            precision: geometric_mean(rows.iter().filter_map(|r| r.cells[k].precision)),
        })
        .collect();
    EvalRow { category: "Geometric Mean".to_string(), cells }
}

/// Sweeps an in-memory corpus; image ids are corpus positions.
pub fn sweep(corpus: &EvalCorpus, thresholds: &[Threshold], params: &MatchParams) -> Result<EvalTable> {
    params.validate()?;
    let queries: Vec<EvalQuery<'_, usize>> = corpus
        .queries
        .iter()
        .map(|(name, template)| EvalQuery {
            category: name,
            template,
            relevant: corpus.images.iter().enumerate().filter(|(_, im)| im.label.is_relevant_to(name)).map(|(i, _)| i).collect(),
        })
        .collect();
    // Score each (query, image) pair once; thresholds only filter.
    let mut cache: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
    sweep_with(&queries, thresholds, |template, theta| {
        let qi = queries.iter().position(|q| core::ptr::eq(q.template, template)).unwrap_or(0);
        if !cache.iter().any(|(k, _)| *k == qi) {
            let mut scored: Vec<crate::similarity::ScoredResult<usize>> = corpus
                .images
                .iter()
                .enumerate()
                .filter_map(|(i, im)| {
                    score_image(template, &im.bilist, params.invariant, params)
                        .map(|(similarity, matched)| crate::similarity::ScoredResult { id: i, similarity, matched })
                })
                .collect();
            rank(&mut scored);
            cache.push((qi, scored.into_iter().map(|r| (r.id, r.similarity)).collect()));
        }
        let scored = &cache.iter().find(|(k, _)| *k == qi).expect("cached").1;
        let t = f64::from(theta.value());
        Ok(scored.iter().filter(|(_, s)| *s >= t).map(|(i, _)| *i).collect())
    })
}

fn fmt_pct(v: f64) -> String {
    format!("{}", math::round(v) as i64)
}

impl EvalTable {
    /// Aligned text table; undefined precision prints as an em dash.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.category.len()).chain([self.geometric_mean.category.len(), 10]).max().unwrap_or(10);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "");
        for t in &self.thresholds {
            let _ = write!(out, " | {:^9}", t.value());
        }
        out.push('\n');
        let _ = write!(out, "{:<width$}", "Collection");
        for _ in &self.thresholds {
            let _ = write!(out, " | {:>4}{:>5}", "R", "P");
        }
        out.push('\n');
        for row in self.rows.iter().chain(core::iter::once(&self.geometric_mean)) {
            let _ = write!(out, "{:<width$}", row.category);
            for c in &row.cells {
                let p = c.precision.map(fmt_pct).unwrap_or_else(|| "—".to_string());
                let _ = write!(out, " | {:>4}{:>5}", fmt_pct(c.recall), p);
            }
            out.push('\n');
        }
        out
    }

    /// CSV: `collection`, then `R<t>,P<t>` per threshold. Undefined precision
    /// is an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("collection");
        for t in &self.thresholds {
            let _ = write!(out, ",R{0},P{0}", t.value());
        }
        out.push('\n');
        for row in self.rows.iter().chain(core::iter::once(&self.geometric_mean)) {
            out.push_str(&csv_field(&row.category));
            for c in &row.cells {
                let _ = write!(out, ",{:.2},", c.recall);
                if let Some(p) = c.precision {
                    let _ = write!(out, "{p:.2}");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
