//! Moving objects: tracks of compass-direction steps and time-stamped
//! relation sequences between object pairs.

use core::fmt;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Point, Polygon};
use crate::math;
use crate::model::{fold_name, pair_count, pair_index, BiList, ImageObject};
use crate::relations::{compute_pir, Pir, PirWeights};
use crate::similarity::match_objects;
use crate::{Error, Result};

/// Movement below this length between two samples counts as standing still.
pub const DEFAULT_EPS_MOVE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    start: f64,
    end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start >= end {
            return Err(Error::Validation(format!("time interval [{start}, {end}] must satisfy start < end")));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Eight compass directions, `N` being +y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Direction {
    const COUNTER_CLOCKWISE: [Direction; 8] =
        [Direction::E, Direction::NE, Direction::N, Direction::NW, Direction::W, Direction::SW, Direction::S, Direction::SE];

    /// Nearest 45° sector; a displacement exactly between two sectors goes to
    /// the counter-clockwise one.
    pub fn quantize(dx: f64, dy: f64) -> Direction {
        let degrees = math::atan2(dy, dx).to_degrees();
        let sector = math::floor(degrees / 45.0 + 0.5) as i64;
        Self::COUNTER_CLOCKWISE[sector.rem_euclid(8) as usize]
    }

    pub fn opposite(self) -> Direction {
        let i = Self::COUNTER_CLOCKWISE.iter().position(|&d| d == self).unwrap_or(0);
        Self::COUNTER_CLOCKWISE[(i + 4) % 8]
    }

    pub fn code(self) -> &'static str {
        match self {
            Direction::E => "e",
            Direction::NE => "ne",
            Direction::N => "n",
            Direction::NW => "nw",
            Direction::W => "w",
            Direction::SW => "sw",
            Direction::S => "s",
            Direction::SE => "se",
        }
    }

    pub fn from_code(code: &str) -> Option<Direction> {
        Self::COUNTER_CLOCKWISE.iter().copied().find(|d| d.code() == code)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackStep {
    pub distance: f64,
    pub direction: Direction,
    pub span: TimeInterval,
}

/// Maximal same-direction runs of motion, abutting in time. Empty when the
/// object never moves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Track {
    steps: Vec<TrackStep>,
}

impl Track {
    pub fn steps(&self) -> &[TrackStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.steps.iter().map(|s| s.direction).collect()
    }
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for t in times {
        if !t.is_finite() || t <= prev {
            return Err(Error::Validation(format!("sample times must be finite and strictly increasing (at {t})")));
        }
        prev = t;
    }
    Ok(())
}

/// Builds a track from time-ordered positions.
///
/// Displacements shorter than `eps_move` are stillness. Stillness between
/// two moves is absorbed into the earlier step so consecutive steps abut;
/// leading and trailing stillness is not part of any step.
pub fn derive_track(samples: &[(f64, Point)], eps_move: f64) -> Result<Track> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("a track needs at least 2 samples, got {}", samples.len())));
    }
    check_times(samples.iter().map(|s| s.0))?;
    let mut steps: Vec<TrackStep> = Vec::new();
    for w in samples.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        let (dx, dy) = (p1.x - p0.x, p1.y - p0.y);
        let d = math::hypot(dx, dy);
        if d < eps_move {
            if let Some(last) = steps.last_mut() {
                last.span.end = t1;
            }
            continue;
        }
        let direction = Direction::quantize(dx, dy);
        match steps.last_mut() {
            Some(last) if last.direction == direction => {
                last.distance += d;
                last.span.end = t1;
            }
            _ => steps.push(TrackStep { distance: d, direction, span: TimeInterval { start: t0, end: t1 } }),
        }
    }
    // Trailing stillness was absorbed above; trim it back to the last move.
    if let Some(last_move) = samples.windows(2).rposition(|w| w[0].1.distance(&w[1].1) >= eps_move) {
        if let Some(last) = steps.last_mut() {
            last.span.end = samples[last_move + 1].0;
        }
    }
    Ok(Track { steps })
}

/// A triple holding throughout `span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPir {
    pub pir: Pir,
    pub span: TimeInterval,
}

/// Relation timeline of `a` relative to `b`. Both sample streams must share
/// timestamps in `[duration.start, duration.end)`; the timeline partitions
/// `duration` into maximal constant-relation runs.
pub fn derive_timeline(
    a: &[(f64, Polygon)],
    b: &[(f64, Polygon)],
    duration: TimeInterval,
    eps: f64,
) -> Result<Vec<TimedPir>> {
    if a.is_empty() {
        return Err(Error::InsufficientData("timeline needs at least one sample".into()));
    }
    if a.len() != b.len() || a.iter().zip(b.iter()).any(|(x, y)| x.0 != y.0) {
        return Err(Error::Alignment("both objects must be sampled at the same times".into()));
    }
    check_times(a.iter().map(|s| s.0))?;
    if a[0].0 < duration.start || a[a.len() - 1].0 >= duration.end {
        return Err(Error::Alignment(format!(
            "samples [{}, {}] fall outside the scene [{}, {}]",
            a[0].0,
            a[a.len() - 1].0,
            duration.start,
            duration.end
        )));
    }
    let mut runs: Vec<(Pir, f64)> = Vec::new();
    for ((t, pa), (_, pb)) in a.iter().zip(b.iter()) {
        let pir = compute_pir(pa, pb, eps)?;
        if runs.last().map(|r| r.0) != Some(pir) {
            runs.push((pir, *t));
        }
    }
    let mut out = Vec::with_capacity(runs.len());
    for (k, &(pir, _)) in runs.iter().enumerate() {
        let start = if k == 0 { duration.start } else { runs[k].1 };
        let end = if k + 1 < runs.len() { runs[k + 1].1 } else { duration.end };
        out.push(TimedPir { pir, span: TimeInterval { start, end } });
    }
    Ok(out)
}

/// Object in a scene with its track.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingObject {
    /// Attributes and the boundary at the first sample.
    pub object: ImageObject,
    pub track: Track,
}

/// Per-object sampled boundaries, the input to [`Scene::from_samples`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSamples {
    pub object: ImageObject,
    pub samples: Vec<(f64, Polygon)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    objects: Vec<MovingObject>,
    /// One timeline per canonical pair, as in [`BiList`].
    timelines: Vec<Vec<TimedPir>>,
    duration: TimeInterval,
}

impl Scene {
    /// Derives tracks (from boundary centroids) and pair timelines. When
    /// `duration` is `None` the last sample is held for one more sampling
    /// period (one time unit for a single sample).
    pub fn from_samples(objects: Vec<ObjectSamples>, duration: Option<TimeInterval>, eps: f64, eps_move: f64) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::Validation("a scene needs at least one object".into()));
        }
        for (i, o) in objects.iter().enumerate() {
            if o.samples.is_empty() {
                return Err(Error::InsufficientData(format!("object {:?} has no samples", o.object.name)));
            }
            let key = fold_name(&o.object.name);
            if objects[..i].iter().any(|p| fold_name(&p.object.name) == key) {
                return Err(Error::Validation(format!("duplicate object name {:?}", o.object.name)));
            }
        }
        let first = &objects[0].samples;
        let duration = match duration {
            Some(d) => d,
            None => {
                let last = first[first.len() - 1].0;
                let hold = if first.len() >= 2 { last - first[first.len() - 2].0 } else { 1.0 };
                TimeInterval::new(first[0].0, last + hold)?
            }
        };
        let n = objects.len();
        let mut timelines = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in (i + 1)..n {
                timelines.push(derive_timeline(&objects[i].samples, &objects[j].samples, duration, eps)?);
            }
        }
        let mut moving = Vec::with_capacity(n);
        for o in objects {
            let track = if o.samples.len() < 2 {
                Track::default()
            } else {
                let centres: Vec<(f64, Point)> = o.samples.iter().map(|(t, p)| (*t, p.centroid())).collect();
                derive_track(&centres, eps_move)?
            };
            let mut object = o.object;
            object.boundary = o.samples[0].1.clone();
            moving.push(MovingObject { object, track });
        }
        Ok(Self { objects: moving, timelines, duration })
    }

    /// A scene with no motion: empty tracks and single-entry timelines.
    pub fn from_still(image: &BiList, duration: TimeInterval) -> Self {
        Self {
            objects: image.objects().iter().map(|o| MovingObject { object: o.clone(), track: Track::default() }).collect(),
            timelines: image.relations().iter().map(|&pir| vec![TimedPir { pir, span: duration }]).collect(),
            duration,
        }
    }

    /// Assembles a scene from already-derived parts.
    pub fn from_parts(objects: Vec<MovingObject>, timelines: Vec<Vec<TimedPir>>, duration: TimeInterval) -> Result<Self> {
        if timelines.len() != pair_count(objects.len()) {
            return Err(Error::Validation(format!(
                "{} objects need {} timelines, got {}",
                objects.len(),
                pair_count(objects.len()),
                timelines.len()
            )));
        }
        for tl in &timelines {
            check_partition(tl, duration)?;
        }
        Ok(Self { objects, timelines, duration })
    }

    pub fn objects(&self) -> &[MovingObject] {
        &self.objects
    }

    pub fn timelines(&self) -> &[Vec<TimedPir>] {
        &self.timelines
    }

    pub fn duration(&self) -> TimeInterval {
        self.duration
    }

    /// Timeline of object `i` relative to object `j` (converted when `i > j`).
    pub fn timeline_at(&self, i: usize, j: usize) -> Option<Vec<TimedPir>> {
        let n = self.objects.len();
        if i >= n || j >= n || i == j {
            return None;
        }
        Some(if i < j {
            self.timelines[pair_index(n, i, j)].clone()
        } else {
            self.timelines[pair_index(n, j, i)].iter().map(|t| TimedPir { pir: t.pir.converse(), span: t.span }).collect()
        })
    }

    /// Object list with first-sample boundaries and the relations holding at
    /// the scene start.
    pub fn first_frame(&self) -> Result<BiList> {
        BiList::from_parts(
            self.objects.iter().map(|o| o.object.clone()).collect(),
            self.timelines.iter().map(|tl| tl[0].pir).collect(),
        )
    }
}

fn check_partition(tl: &[TimedPir], duration: TimeInterval) -> Result<()> {
    let ok = !tl.is_empty()
        && tl[0].span.start == duration.start
        && tl[tl.len() - 1].span.end == duration.end
        && tl.windows(2).all(|w| w[0].span.end == w[1].span.start && w[0].pir != w[1].pir);
    if ok {
        Ok(())
    } else {
        Err(Error::Validation("timeline must partition the scene duration into maximal runs".into()))
    }
}

/// Unit-cost edit distance between direction sequences over the longer
/// length; 0 for two empty tracks.
pub fn track_distance(a: &Track, b: &Track) -> f64 {
    let (x, y) = (a.directions(), b.directions());
    let longest = x.len().max(y.len());
    if longest == 0 {
        return 0.0;
    }
    edit_distance(&x, &y) as f64 / longest as f64
}

fn edit_distance<T: PartialEq>(x: &[T], y: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=y.len()).collect();
    let mut cur = vec![0; y.len() + 1];
    for i in 1..=x.len() {
        cur[0] = i;
        for j in 1..=y.len() {
            let sub = prev[j - 1] + usize::from(x[i - 1] != y[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

/// Integral over `[0, 1]` of the relation distance between two timelines,
/// each rescaled to its own scene duration.
pub fn timeline_distance(a: &[TimedPir], da: TimeInterval, b: &[TimedPir], db: TimeInterval, w: &PirWeights) -> f64 {
    let norm = |t: f64, d: TimeInterval| ((t - d.start) / d.duration()).clamp(0.0, 1.0);
    let (mut i, mut j) = (0, 0);
    let mut pos = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let end_a = if i + 1 == a.len() { 1.0 } else { norm(a[i].span.end, da) };
        let end_b = if j + 1 == b.len() { 1.0 } else { norm(b[j].span.end, db) };
        let end = end_a.min(end_b);
        if end > pos {
            total += (end - pos) * a[i].pir.distance(&b[j].pir, w);
            pos = end;
        }
        if end_a <= end {
            i += 1;
        }
        if end_b <= end {
            j += 1;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    /// Blend between relation timelines (1.0) and tracks (0.0).
    pub lambda: f64,
    pub pir_weights: PirWeights,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self { lambda: 0.5, pir_weights: PirWeights::default() }
    }
}

/// Scene similarity in `[0, 100]`, matching objects by name as for images.
pub fn scene_similarity(q: &Scene, v: &Scene, params: &SceneParams) -> f64 {
    let (Ok(qf), Ok(vf)) = (q.first_frame(), v.first_frame()) else {
        return 0.0;
    };
    let matching = match_objects(&qf, &vf);
    if matching.is_empty() {
        return 0.0;
    }
    let coverage = matching.len() as f64 / q.objects.len() as f64;

    let mut rel_total = 0.0;
    let mut pairs = 0usize;
    for a in 0..matching.len() {
        for b in (a + 1)..matching.len() {
            let (qi, vi) = matching[a];
            let (qj, vj) = matching[b];
            if let (Some(tq), Some(tv)) = (q.timeline_at(qi, qj), v.timeline_at(vi, vj)) {
                rel_total += timeline_distance(&tq, q.duration, &tv, v.duration, &params.pir_weights);
                pairs += 1;
            }
        }
    }
    let relation_term = if pairs == 0 { 1.0 } else { 1.0 - rel_total / pairs as f64 };

    let motion_total: f64 =
        matching.iter().map(|&(qi, vi)| track_distance(&q.objects[qi].track, &v.objects[vi].track)).sum();
    let motion_term = 1.0 - motion_total / matching.len() as f64;

    let blended = if params.lambda >= 1.0 {
        relation_term
    } else {
        params.lambda * relation_term + (1.0 - params.lambda) * motion_term
    };
    (100.0 * coverage * blended).clamp(0.0, 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_EPS;
    use crate::relations::{AllenRelation as A, TopoRelation as T};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn sq(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::rect(x0, y0, x1, y1).unwrap()
    }

    fn steps(dirs: &[Direction]) -> Track {
        let mut t = 0.0;
        Track {
            steps: dirs
                .iter()
                .map(|&d| {
                    t += 1.0;
                    TrackStep { distance: 1.0, direction: d, span: TimeInterval::new(t - 1.0, t).unwrap() }
                })
                .collect(),
        }
    }

    #[test]
    fn quantize_sectors() {
        assert_eq!(Direction::quantize(0.0, 1.0), Direction::N);
        assert_eq!(Direction::quantize(1.0, 0.0), Direction::E);
        assert_eq!(Direction::quantize(-1.0, -1.0), Direction::SW);
        assert_eq!(Direction::quantize(1.0, -0.1), Direction::E);
        // 22.5° exactly goes counter-clockwise.
        let t = 22.5f64.to_radians();
        assert_eq!(Direction::quantize(libm::cos(t), libm::sin(t)), Direction::NE);
    }

    #[test]
    fn track_examples() {
        let still = [(0.0, p(1.0, 1.0)), (1.0, p(1.0, 1.0)), (2.0, p(1.0, 1.0))];
        assert!(derive_track(&still, DEFAULT_EPS_MOVE).unwrap().is_empty());

        let north = [(0.0, p(0.0, 0.0)), (1.0, p(0.0, 1.0)), (2.0, p(0.0, 2.0))];
        let t = derive_track(&north, DEFAULT_EPS_MOVE).unwrap();
        assert_eq!(t.steps(), &[TrackStep { distance: 2.0, direction: Direction::N, span: TimeInterval::new(0.0, 2.0).unwrap() }]);

        let turn = [(0.0, p(0.0, 0.0)), (1.0, p(1.0, 0.0)), (2.0, p(2.0, 0.0)), (3.0, p(2.0, 1.0))];
        let t = derive_track(&turn, DEFAULT_EPS_MOVE).unwrap();
        assert_eq!(t.directions(), vec![Direction::E, Direction::N]);
        assert_eq!(t.steps()[0].span.end(), t.steps()[1].span.start());

        assert!(matches!(derive_track(&north[..1], DEFAULT_EPS_MOVE), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn pauses_keep_steps_abutting() {
        let s = [(0.0, p(0.0, 0.0)), (1.0, p(1.0, 0.0)), (2.0, p(1.0, 0.0)), (3.0, p(1.0, 1.0)), (4.0, p(1.0, 1.0))];
        let t = derive_track(&s, DEFAULT_EPS_MOVE).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.steps()[0].span, TimeInterval::new(0.0, 2.0).unwrap());
        assert_eq!(t.steps()[1].span, TimeInterval::new(2.0, 3.0).unwrap());
    }

    #[test]
    fn timeline_examples() {
        let dur = TimeInterval::new(0.0, 3.0).unwrap();
        let a = [(0.0, sq(0.0, 0.0, 4.0, 4.0)), (1.0, sq(0.0, 0.0, 4.0, 4.0)), (2.0, sq(0.0, 0.0, 4.0, 4.0))];
        let b = [(0.0, sq(6.0, 0.0, 8.0, 4.0)), (1.0, sq(6.0, 0.0, 8.0, 4.0)), (2.0, sq(6.0, 0.0, 8.0, 4.0))];
        let tl = derive_timeline(&a, &b, dur, DEFAULT_EPS).unwrap();
        assert_eq!(tl.len(), 1);
        assert_eq!(tl[0].span, dur);

        // B slides in from the right: disjoint, touching, overlapping.
        let a = [(0.0, sq(0.0, 0.0, 4.0, 4.0)), (1.0, sq(0.0, 0.0, 4.0, 4.0)), (2.0, sq(0.0, 0.0, 4.0, 4.0))];
        let b = [(0.0, sq(6.0, 1.0, 8.0, 3.0)), (1.0, sq(4.0, 1.0, 6.0, 3.0)), (2.0, sq(3.0, 1.0, 5.0, 3.0))];
        let tl = derive_timeline(&a, &b, dur, DEFAULT_EPS).unwrap();
        let pirs: Vec<Pir> = tl.iter().map(|t| t.pir).collect();
        assert_eq!(
            pirs,
            vec![
                Pir::new(T::Disjoint, A::Before, A::Contains),
                Pir::new(T::Touch, A::Meets, A::Contains),
                Pir::new(T::Overlap, A::Overlaps, A::Contains),
            ]
        );
        assert_eq!(tl[1].span, TimeInterval::new(1.0, 2.0).unwrap());
        assert_eq!(tl[2].span, TimeInterval::new(2.0, 3.0).unwrap());

        let single = derive_timeline(&a[..1], &b[..1], dur, DEFAULT_EPS).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].span, dur);

        let shifted = [(0.5, sq(6.0, 1.0, 8.0, 3.0))];
        assert!(matches!(derive_timeline(&a[..1], &shifted, dur, DEFAULT_EPS), Err(Error::Alignment(_))));
    }

    #[test]
    fn track_distance_examples() {
        use Direction::*;
        assert_eq!(track_distance(&steps(&[N, E]), &steps(&[N, E])), 0.0);
        assert_eq!(track_distance(&steps(&[N]), &steps(&[S])), 1.0);
        assert_eq!(track_distance(&steps(&[N, E]), &steps(&[N])), 0.5);
        assert_eq!(track_distance(&Track::default(), &Track::default()), 0.0);
    }

    fn moving_pair(reverse: bool) -> Scene {
        let (ax, bx) = if reverse { (-1.0, -1.0) } else { (1.0, 1.0) };
        let mk = |name: &str, x0: f64, dx: f64| {
            let samples: Vec<(f64, Polygon)> =
                (0..4).map(|k| (k as f64, sq(x0 + dx * k as f64, 0.0, x0 + 2.0 + dx * k as f64, 2.0))).collect();
            ObjectSamples { object: ImageObject::new(name, samples[0].1.clone()).unwrap(), samples }
        };
        Scene::from_samples(vec![mk("A", 0.0, ax), mk("B", 10.0, bx)], None, DEFAULT_EPS, DEFAULT_EPS_MOVE).unwrap()
    }

    #[test]
    fn scene_similarity_examples() {
        let params = SceneParams::default();
        let fwd = moving_pair(false);
        assert_eq!(scene_similarity(&fwd, &fwd, &params), 100.0);

        let back = moving_pair(true);
        assert_eq!(fwd.objects()[0].track.directions(), vec![Direction::E]);
        assert_eq!(back.objects()[0].track.directions(), vec![Direction::W]);
        assert!((scene_similarity(&fwd, &back, &params) - 50.0).abs() < 1e-12);

        let other = Scene::from_still(
            &BiList::build(vec![ImageObject::new("Z", sq(0.0, 0.0, 1.0, 1.0)).unwrap()]).unwrap(),
            TimeInterval::new(0.0, 1.0).unwrap(),
        );
        assert_eq!(scene_similarity(&fwd, &other, &params), 0.0);
    }

    #[test]
    fn scene_from_parts_checks_partition() {
        let dur = TimeInterval::new(0.0, 1.0).unwrap();
        let o = |n: &str| MovingObject { object: ImageObject::new(n, sq(0.0, 0.0, 1.0, 1.0)).unwrap(), track: Track::default() };
        let pir = Pir::new(T::Disjoint, A::Before, A::Equal);
        let gap = vec![vec![TimedPir { pir, span: TimeInterval::new(0.0, 0.5).unwrap() }]];
        assert!(Scene::from_parts(vec![o("A"), o("B")], gap, dur).is_err());
        let whole = vec![vec![TimedPir { pir, span: dur }]];
        assert!(Scene::from_parts(vec![o("A"), o("B")], whole, dur).is_ok());
    }
}
