//! Qualitative relation algebra.
//!
//! A [`Pir`] pairs one topological relation between two regions with the
//! Allen relations of their x- and y-projections. Distances between
//! relations are shortest-path lengths in fixed conceptual-neighbourhood
//! graphs, normalised by the graph diameter. [`D4Element`] is the symmetry
//! group of the square; it acts on relation triples without touching
//! geometry, which is what makes rotation/reflection-invariant matching
//! possible on stored symbols alone.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use alloc::format;

use crate::geometry::{boundaries_touch, intersection_area, Axis, Interval, Point, Polygon};
use crate::{Error, Result};

/// One of the 13 Allen interval relations, read as "a REL b".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AllenRelation {
    /// `<`
    Before,
    /// `m`
    Meets,
    /// `o`
    Overlaps,
    /// `s`
    Starts,
    /// `d`
    During,
    /// `f`
    Finishes,
    /// `=`
    Equal,
    /// `>`
    After,
    /// `mi`
    MetBy,
    /// `oi`
    OverlappedBy,
    /// `di`
    Contains,
    /// `si`
    StartedBy,
    /// `fi`
    FinishedBy,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        AllenRelation::Before,
        AllenRelation::Meets,
        AllenRelation::Overlaps,
        AllenRelation::Starts,
        AllenRelation::During,
        AllenRelation::Finishes,
        AllenRelation::Equal,
        AllenRelation::After,
        AllenRelation::MetBy,
        AllenRelation::OverlappedBy,
        AllenRelation::Contains,
        AllenRelation::StartedBy,
        AllenRelation::FinishedBy,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn code(self) -> &'static str {
        use AllenRelation::*;
        match self {
            Before => "<",
            Meets => "m",
            Overlaps => "o",
            Starts => "s",
            During => "d",
            Finishes => "f",
            Equal => "=",
            After => ">",
            MetBy => "mi",
            OverlappedBy => "oi",
            Contains => "di",
            StartedBy => "si",
            FinishedBy => "fi",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.code() == code)
    }

    /// Relation of `b` to `a` given the relation of `a` to `b`.
    pub const fn converse(self) -> Self {
        use AllenRelation::*;
        match self {
            Before => After,
            After => Before,
            Meets => MetBy,
            MetBy => Meets,
            Overlaps => OverlappedBy,
            OverlappedBy => Overlaps,
            Starts => StartedBy,
            StartedBy => Starts,
            During => Contains,
            Contains => During,
            Finishes => FinishedBy,
            FinishedBy => Finishes,
            Equal => Equal,
        }
    }

    /// Relation between `-a` and `-b` given the relation between `a` and `b`.
    pub const fn mirror(self) -> Self {
        use AllenRelation::*;
        match self {
            Before => After,
            After => Before,
            Meets => MetBy,
            MetBy => Meets,
            Overlaps => OverlappedBy,
            OverlappedBy => Overlaps,
            Starts => Finishes,
            Finishes => Starts,
            StartedBy => FinishedBy,
            FinishedBy => StartedBy,
            During => During,
            Contains => Contains,
            Equal => Equal,
        }
    }
}

impl fmt::Display for AllenRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AllenRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_code(s).ok_or_else(|| Error::Validation(format!("unknown interval relation code {s:?}")))
    }
}

/// Region-region topological relation, read as "a REL b".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopoRelation {
    /// `dt`
    Disjoint,
    /// `to`: boundaries meet, interiors do not.
    Touch,
    /// `ct`: b lies in a's interior.
    Contains,
    /// `in`: a lies in b's interior.
    Inside,
    /// `ov`
    Overlap,
    /// `co`: a contains b and the boundaries touch.
    Covers,
    /// `eq`
    Equal,
    /// `cb`: a inside b and the boundaries touch.
    CoveredBy,
}

impl TopoRelation {
    pub const ALL: [TopoRelation; 8] = [
        TopoRelation::Disjoint,
        TopoRelation::Touch,
        TopoRelation::Contains,
        TopoRelation::Inside,
        TopoRelation::Overlap,
        TopoRelation::Covers,
        TopoRelation::Equal,
        TopoRelation::CoveredBy,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn code(self) -> &'static str {
        use TopoRelation::*;
        match self {
            Disjoint => "dt",
            Touch => "to",
            Contains => "ct",
            Inside => "in",
            Overlap => "ov",
            Covers => "co",
            Equal => "eq",
            CoveredBy => "cb",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.code() == code)
    }

    pub const fn converse(self) -> Self {
        use TopoRelation::*;
        match self {
            Contains => Inside,
            Inside => Contains,
            Covers => CoveredBy,
            CoveredBy => Covers,
            other => other,
        }
    }
}

impl fmt::Display for TopoRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for TopoRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_code(s).ok_or_else(|| Error::Validation(format!("unknown topological relation code {s:?}")))
    }
}

/// Projection interval relation of an ordered object pair `(a, b)`:
/// topology of a relative to b, then Allen relations on x and y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pir {
    pub topo: TopoRelation,
    pub x: AllenRelation,
    pub y: AllenRelation,
}

impl Pir {
    pub const fn new(topo: TopoRelation, x: AllenRelation, y: AllenRelation) -> Self {
        Self { topo, x, y }
    }

    /// Triple describing `b` relative to `a`.
    pub const fn converse(self) -> Self {
        Self { topo: self.topo.converse(), x: self.x.converse(), y: self.y.converse() }
    }

    pub fn transform(self, g: D4Element) -> Self {
        transform_pir(self, g)
    }

    pub fn distance(&self, other: &Pir, w: &PirWeights) -> f64 {
        pir_distance(self, other, w)
    }
}

impl fmt::Display for Pir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.topo, self.x, self.y)
    }
}

fn cmp_eps(u: f64, v: f64, eps: f64) -> Ordering {
    if (u - v).abs() <= eps {
        Ordering::Equal
    } else if u < v {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Classifies `a` against `b`. Endpoints within `eps` compare equal, and
/// touching endpoints are checked before strict ordering so `m`/`mi` are
/// reachable from measured data.
pub fn allen_relation(a: &Interval, b: &Interval, eps: f64) -> AllenRelation {
    use AllenRelation::*;
    match cmp_eps(a.hi(), b.lo(), eps) {
        Ordering::Equal => return Meets,
        Ordering::Less => return Before,
        Ordering::Greater => {}
    }
    match cmp_eps(a.lo(), b.hi(), eps) {
        Ordering::Equal => return MetBy,
        Ordering::Greater => return After,
        Ordering::Less => {}
    }
    match (cmp_eps(a.lo(), b.lo(), eps), cmp_eps(a.hi(), b.hi(), eps)) {
        (Ordering::Equal, Ordering::Equal) => Equal,
        (Ordering::Equal, Ordering::Less) => Starts,
        (Ordering::Equal, Ordering::Greater) => StartedBy,
        (Ordering::Greater, Ordering::Less) => During,
        (Ordering::Greater, Ordering::Equal) => Finishes,
        (Ordering::Less, Ordering::Equal) => FinishedBy,
        (Ordering::Less, Ordering::Greater) => Contains,
        (Ordering::Less, Ordering::Less) => Overlaps,
        (Ordering::Greater, Ordering::Greater) => OverlappedBy,
    }
}

/// Relative tolerance used when comparing areas.
pub const DEFAULT_AREA_EPS: f64 = 1e-6;

/// Topological classification from overlap area and boundary contact.
pub fn topo_relation(a: &Polygon, b: &Polygon, eps: f64) -> Result<TopoRelation> {
    topo_relation_with(a, b, eps, DEFAULT_AREA_EPS)
}

pub fn topo_relation_with(a: &Polygon, b: &Polygon, eps: f64, eps_area: f64) -> Result<TopoRelation> {
    use TopoRelation::*;
    let area_a = a.area();
    let area_b = b.area();
    if !(area_a > 0.0 && area_b > 0.0) {
        return Err(Error::DegenerateGeometry("polygon without area".into()));
    }
    let scale = area_a.max(area_b);
    let approx = |u: f64, v: f64| (u - v).abs() <= eps_area * scale;

    let overlap = intersection_area(a, b);
    let touch = boundaries_touch(a, b, eps);
    if overlap <= eps_area * area_a.min(area_b) {
        return Ok(if touch { Touch } else { Disjoint });
    }
    let covers_a = approx(overlap, area_a);
    let covers_b = approx(overlap, area_b);
    Ok(match (covers_a, covers_b) {
        (true, true) => Equal,
        (false, true) => {
            if touch {
                Covers
            } else {
                Contains
            }
        }
        (true, false) => {
            if touch {
                CoveredBy
            } else {
                Inside
            }
        }
        (false, false) => Overlap,
    })
}

/// The triple describing `a` relative to `b`.
pub fn compute_pir(a: &Polygon, b: &Polygon, eps: f64) -> Result<Pir> {
    let topo = topo_relation(a, b, eps)?;
    let x = allen_relation(&a.project(Axis::X, eps)?, &b.project(Axis::X, eps)?, eps);
    let y = allen_relation(&a.project(Axis::Y, eps)?, &b.project(Axis::Y, eps)?, eps);
    Ok(Pir { topo, x, y })
}

const ALLEN_EDGES: [(AllenRelation, AllenRelation); 16] = {
    use AllenRelation::*;
    [
        (Before, Meets),
        (Meets, Overlaps),
        (Overlaps, Starts),
        (Overlaps, FinishedBy),
        (Starts, During),
        (Starts, Equal),
        (FinishedBy, Equal),
        (FinishedBy, Contains),
        (During, Finishes),
        (Equal, Finishes),
        (Equal, StartedBy),
        (Contains, StartedBy),
        (Finishes, OverlappedBy),
        (StartedBy, OverlappedBy),
        (OverlappedBy, MetBy),
        (MetBy, After),
    ]
};

const TOPO_EDGES: [(TopoRelation, TopoRelation); 8] = {
    use TopoRelation::*;
    [
        (Disjoint, Touch),
        (Touch, Overlap),
        (Overlap, Covers),
        (Overlap, CoveredBy),
        (Covers, Contains),
        (CoveredBy, Inside),
        (Covers, Equal),
        (CoveredBy, Equal),
    ]
};

/// All-pairs BFS over an undirected graph given as index pairs.
const fn bfs_table<const N: usize>(edges: &[(usize, usize)]) -> [[u8; N]; N] {
    let mut table = [[u8::MAX; N]; N];
    let mut src = 0;
    while src < N {
        let mut queue = [0usize; N];
        let (mut head, mut tail) = (0, 1);
        queue[0] = src;
        table[src][src] = 0;
        while head < tail {
            let u = queue[head];
            head += 1;
            let mut e = 0;
            while e < edges.len() {
                let (p, q) = edges[e];
                let v = if p == u {
                    q
                } else if q == u {
                    p
                } else {
                    usize::MAX
                };
                if v != usize::MAX && table[src][v] == u8::MAX {
                    table[src][v] = table[src][u] + 1;
                    queue[tail] = v;
                    tail += 1;
                }
                e += 1;
            }
        }
        src += 1;
    }
    table
}

const fn allen_edge_indices() -> [(usize, usize); 16] {
    let mut out = [(0, 0); 16];
    let mut i = 0;
    while i < 16 {
        out[i] = (ALLEN_EDGES[i].0.index(), ALLEN_EDGES[i].1.index());
        i += 1;
    }
    out
}

const fn topo_edge_indices() -> [(usize, usize); 8] {
    let mut out = [(0, 0); 8];
    let mut i = 0;
    while i < 8 {
        out[i] = (TOPO_EDGES[i].0.index(), TOPO_EDGES[i].1.index());
        i += 1;
    }
    out
}

/// Hop counts in the interval neighbourhood graph.
pub const ALLEN_HOPS: [[u8; 13]; 13] = bfs_table::<13>(&allen_edge_indices());
/// Hop counts in the topological neighbourhood graph.
pub const TOPO_HOPS: [[u8; 8]; 8] = bfs_table::<8>(&topo_edge_indices());

pub const ALLEN_DIAMETER: u8 = 8;
pub const TOPO_DIAMETER: u8 = 4;

pub fn allen_edges() -> &'static [(AllenRelation, AllenRelation)] {
    &ALLEN_EDGES
}

pub fn topo_edges() -> &'static [(TopoRelation, TopoRelation)] {
    &TOPO_EDGES
}

pub fn allen_distance(r1: AllenRelation, r2: AllenRelation) -> f64 {
    f64::from(ALLEN_HOPS[r1.index()][r2.index()]) / f64::from(ALLEN_DIAMETER)
}

pub fn topo_distance(t1: TopoRelation, t2: TopoRelation) -> f64 {
    f64::from(TOPO_HOPS[t1.index()][t2.index()]) / f64::from(TOPO_DIAMETER)
}

/// Component weights for [`pir_distance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PirWeights {
    pub topo: f64,
    pub x: f64,
    pub y: f64,
}

impl Default for PirWeights {
    fn default() -> Self {
        Self { topo: 1.0 / 3.0, x: 1.0 / 3.0, y: 1.0 / 3.0 }
    }
}

impl PirWeights {
    pub fn new(topo: f64, x: f64, y: f64) -> Result<Self> {
        let w = Self { topo, x, y };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.topo, self.x, self.y];
        if parts.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!("relation weights must be finite and non-negative: {self:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("relation weights must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

pub fn pir_distance(p1: &Pir, p2: &Pir, w: &PirWeights) -> f64 {
    w.topo * topo_distance(p1.topo, p2.topo) + w.x * allen_distance(p1.x, p2.x) + w.y * allen_distance(p1.y, p2.y)
}

/// Symmetry of the square: `mirrored ∘ rot90^quarter_turns`, i.e. rotate
/// counter-clockwise first, then negate x if `mirrored`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct D4Element {
    quarter_turns: u8,
    mirrored: bool,
}

impl D4Element {
    pub const IDENTITY: D4Element = D4Element { quarter_turns: 0, mirrored: false };
    pub const ROT90: D4Element = D4Element { quarter_turns: 1, mirrored: false };
    pub const ROT180: D4Element = D4Element { quarter_turns: 2, mirrored: false };
    pub const ROT270: D4Element = D4Element { quarter_turns: 3, mirrored: false };
    pub const MIRROR_X: D4Element = D4Element { quarter_turns: 0, mirrored: true };

    pub const ALL: [D4Element; 8] = [
        D4Element { quarter_turns: 0, mirrored: false },
        D4Element { quarter_turns: 1, mirrored: false },
        D4Element { quarter_turns: 2, mirrored: false },
        D4Element { quarter_turns: 3, mirrored: false },
        D4Element { quarter_turns: 0, mirrored: true },
        D4Element { quarter_turns: 1, mirrored: true },
        D4Element { quarter_turns: 2, mirrored: true },
        D4Element { quarter_turns: 3, mirrored: true },
    ];

    pub const fn new(quarter_turns: u8, mirrored: bool) -> Self {
        Self { quarter_turns: quarter_turns % 4, mirrored }
    }

    pub const fn quarter_turns(&self) -> u8 {
        self.quarter_turns
    }

    pub const fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    /// The element equal to applying `self` first and `next` second.
    pub const fn then(self, next: D4Element) -> D4Element {
        // R^k M = M R^-k, so moving next's rotation past our mirror flips it.
        let k2 = if self.mirrored { (4 - next.quarter_turns) % 4 } else { next.quarter_turns };
        D4Element { quarter_turns: (self.quarter_turns + k2) % 4, mirrored: self.mirrored ^ next.mirrored }
    }

    pub const fn inverse(self) -> D4Element {
        if self.mirrored {
            self
        } else {
            D4Element { quarter_turns: (4 - self.quarter_turns) % 4, mirrored: false }
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (mut x, mut y) = (p.x, p.y);
        for _ in 0..self.quarter_turns {
            (x, y) = (-y, x);
        }
        if self.mirrored {
            x = -x;
        }
        Point::new(x, y)
    }

    pub fn apply_polygon(&self, p: &Polygon) -> Polygon {
        p.map_points(|v| self.apply(v))
    }
}

impl fmt::Display for D4Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.mirrored, self.quarter_turns) {
            (false, 0) => f.write_str("identity"),
            (false, k) => write!(f, "rot{}", 90 * u32::from(k)),
            (true, 0) => f.write_str("mirrorX"),
            (true, k) => write!(f, "mirrorX∘rot{}", 90 * u32::from(k)),
        }
    }
}

/// Rewrites a triple for a symmetry applied to both objects. Topology is
/// preserved by isometries; only the projection relations move.
pub fn transform_pir(p: Pir, g: D4Element) -> Pir {
    let (mut x, mut y) = (p.x, p.y);
    for _ in 0..g.quarter_turns {
        // (x, y) -> (-y, x): new x-extent is the negated old y-extent.
        (x, y) = (y.mirror(), x);
    }
    if g.mirrored {
        x = x.mirror();
    }
    Pir { topo: p.topo, x, y }
}
