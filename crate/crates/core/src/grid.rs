//! Finite point sets on the integer grid and exact-length run counting.
//!
//! A *pattern of length k* is a maximal run of exactly `k` occupied cells in
//! one of four directions. Every cell outside a [`PointSet`] is empty, so a
//! lone point is four runs of length one (one per direction).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GridError {
    #[error("line {line}: expected two integers \"x y\", got {content:?}")]
    Malformed { line: usize, content: String },

    #[error("line {line}: duplicate point ({x}, {y})")]
    Duplicate { line: usize, x: i64, y: i64 },

    #[error("operation requires a nonempty point set")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn step(self, d: Direction, times: i64) -> Point {
        let (dx, dy) = d.step();
        Point::new(self.x + dx * times, self.y + dy * times)
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The four line directions of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "H")]
    Horizontal,
    #[serde(rename = "V")]
    Vertical,
    /// Step (1, 1).
    #[serde(rename = "D+")]
    DiagonalUp,
    /// Step (1, -1).
    #[serde(rename = "D-")]
    DiagonalDown,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::DiagonalUp,
        Direction::DiagonalDown,
    ];

    pub const fn step(self) -> (i64, i64) {
        match self {
            Direction::Horizontal => (1, 0),
            Direction::Vertical => (0, 1),
            Direction::DiagonalUp => (1, 1),
            Direction::DiagonalDown => (1, -1),
        }
    }

    /// (line key, position along the line). Cells on one line share the key and
    /// consecutive cells differ by one in position.
    fn key_pos(self, p: Point) -> (i64, i64) {
        match self {
            Direction::Horizontal => (p.y, p.x),
            Direction::Vertical => (p.x, p.y),
            Direction::DiagonalUp => (p.x - p.y, p.x),
            Direction::DiagonalDown => (p.x + p.y, p.x),
        }
    }

    fn from_key_pos(self, key: i64, pos: i64) -> Point {
        match self {
            Direction::Horizontal => Point::new(pos, key),
            Direction::Vertical => Point::new(key, pos),
            Direction::DiagonalUp => Point::new(pos, pos - key),
            Direction::DiagonalDown => Point::new(pos, key - pos),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Horizontal => "H",
            Direction::Vertical => "V",
            Direction::DiagonalUp => "D+",
            Direction::DiagonalDown => "D-",
        })
    }
}

/// A maximal run of occupied cells. `start` is the end with the smallest x
/// (smallest y for vertical runs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub direction: Direction,
    pub start: Point,
    pub length: usize,
}

impl Run {
    pub fn cells(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.length as i64).map(move |t| self.start.step(self.direction, t))
    }
}

/// A finite constellation of grid points; iteration is in (x, y) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointSet {
    points: BTreeSet<Point>,
}

impl PointSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Returns false if the point was already present.
    pub fn insert(&mut self, p: Point) -> bool {
        self.points.insert(p)
    }

    pub fn remove(&mut self, p: Point) -> bool {
        self.points.remove(&p)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.contains(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<Point> {
        self.iter().collect()
    }

    /// Inclusive `(min, max)` corners, or `None` for the empty set.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let mut it = self.iter();
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        Some((lo, hi))
    }

    pub fn translate(&self, dx: i64, dy: i64) -> PointSet {
        self.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect()
    }

    /// Union with `other` placed to the right of `self` with `gap` empty columns
    /// in between. Neither set's runs can touch the other's when `gap >= 1`.
    pub fn disjoint_union(&self, other: &PointSet, gap: i64) -> PointSet {
        let (Some((_, hi)), Some((lo, _))) = (self.bounding_box(), other.bounding_box()) else {
            return self.iter().chain(other.iter()).collect();
        };
        let shifted = other.translate(hi.x + 1 + gap - lo.x, 0);
        self.iter().chain(shifted.iter()).collect()
    }
}

impl FromIterator<Point> for PointSet {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        PointSet {
            points: iter.into_iter().collect(),
        }
    }
}

impl FromIterator<(i64, i64)> for PointSet {
    fn from_iter<I: IntoIterator<Item = (i64, i64)>>(iter: I) -> Self {
        iter.into_iter().map(Point::from).collect()
    }
}

/// Every maximal run of `ps`, ordered by direction and then by start point.
pub fn maximal_runs(ps: &PointSet) -> Vec<Run> {
    let mut runs = Vec::with_capacity(4 * ps.len());
    let mut keyed: Vec<(i64, i64)> = Vec::with_capacity(ps.len());
    for d in Direction::ALL {
        keyed.clear();
        keyed.extend(ps.iter().map(|p| d.key_pos(p)));
        keyed.sort_unstable();
        let mut i = 0;
        while i < keyed.len() {
            let (key, first) = keyed[i];
            let mut j = i + 1;
            while j < keyed.len() && keyed[j] == (key, first + (j - i) as i64) {
                j += 1;
            }
            runs.push(Run {
                direction: d,
                start: d.from_key_pos(key, first),
                length: j - i,
            });
            i = j;
        }
    }
    runs.sort_unstable();
    runs
}

/// The maximal runs of length exactly `k`.
pub fn pattern_runs(ps: &PointSet, k: usize) -> Vec<Run> {
    maximal_runs(ps)
        .into_iter()
        .filter(|r| r.length == k)
        .collect()
}

/// Number of patterns of length exactly `k`. Longer runs do not count.
pub fn patterns_of_length(ps: &PointSet, k: usize) -> usize {
    maximal_runs(ps).iter().filter(|r| r.length == k).count()
}

/// Maximal-run counts by exact length, summed over the four directions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternHistogram {
    pub counts: BTreeMap<usize, usize>,
}

impl PatternHistogram {
    pub fn get(&self, length: usize) -> usize {
        self.counts.get(&length).copied().unwrap_or(0)
    }

    /// Sum of length times count; always four times the number of points.
    pub fn mass(&self) -> usize {
        self.counts.iter().map(|(l, c)| l * c).sum()
    }
}

impl fmt::Display for PatternHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, c) in &self.counts {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{l}:{c}")?;
            first = false;
        }
        Ok(())
    }
}

pub fn pattern_histogram(ps: &PointSet) -> PatternHistogram {
    let mut counts = BTreeMap::new();
    for r in maximal_runs(ps) {
        *counts.entry(r.length).or_insert(0) += 1;
    }
    PatternHistogram { counts }
}

const DIHEDRAL: [fn(Point) -> Point; 8] = [
    |p| Point::new(p.x, p.y),
    |p| Point::new(-p.x, p.y),
    |p| Point::new(p.x, -p.y),
    |p| Point::new(-p.x, -p.y),
    |p| Point::new(p.y, p.x),
    |p| Point::new(-p.y, p.x),
    |p| Point::new(p.y, -p.x),
    |p| Point::new(-p.y, -p.x),
];

fn to_origin(mut pts: Vec<Point>) -> Vec<Point> {
    let min_x = pts.iter().map(|p| p.x).min().unwrap_or(0);
    let min_y = pts.iter().map(|p| p.y).min().unwrap_or(0);
    for p in &mut pts {
        p.x -= min_x;
        p.y -= min_y;
    }
    pts.sort_unstable();
    pts
}

/// Canonical representative under translation and the 8 symmetries of the
/// square: the lexicographically smallest sorted point list with min x = min y = 0.
pub fn normalize(ps: &PointSet) -> Result<PointSet, GridError> {
    if ps.is_empty() {
        return Err(GridError::EmptySet);
    }
    let best = DIHEDRAL
        .iter()
        .map(|g| to_origin(ps.iter().map(g).collect()))
        .min()
        .expect("eight images");
    Ok(best.into_iter().collect())
}

/// Parses the "x y" per line text format. `#` starts a comment.
pub fn parse_points(text: &str) -> Result<PointSet, GridError> {
    let mut ps = PointSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let malformed = || GridError::Malformed {
            line,
            content: raw.to_string(),
        };
        let mut fields = body.split_whitespace();
        let (Some(xs), Some(ys), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed());
        };
        let x = i64::from_str(xs).map_err(|_| malformed())?;
        let y = i64::from_str(ys).map_err(|_| malformed())?;
        if !ps.insert(Point::new(x, y)) {
            return Err(GridError::Duplicate { line, x, y });
        }
    }
    Ok(ps)
}

pub fn serialize_points(ps: &PointSet) -> String {
    let mut out = String::with_capacity(ps.len() * 8);
    for p in ps.iter() {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct PointsJson {
    points: Vec<[i64; 2]>,
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PointsJson {
            points: self.iter().map(|p| [p.x, p.y]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PointsJson::deserialize(d)?;
        let mut ps = PointSet::new();
        for [x, y] in raw.points {
            if !ps.insert(Point::new(x, y)) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate point ({x}, {y})"
                )));
            }
        }
        Ok(ps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pts: &[(i64, i64)]) -> PointSet {
        pts.iter().copied().collect()
    }

    fn rect(w: i64, h: i64) -> PointSet {
        (0..w).flat_map(|x| (0..h).map(move |y| (x, y))).collect()
    }

    /// Cell-by-cell walk: a run starts wherever the previous cell is empty.
    fn runs_by_walking(ps: &PointSet) -> Vec<Run> {
        let mut out = Vec::new();
        for d in Direction::ALL {
            for p in ps.iter() {
                if ps.contains(p.step(d, -1)) {
                    continue;
                }
                let mut len = 1;
                while ps.contains(p.step(d, len as i64)) {
                    len += 1;
                }
                out.push(Run {
                    direction: d,
                    start: p,
                    length: len,
                });
            }
        }
        out.sort();
        out
    }

    #[test]
    fn isolated_point_is_four_unit_patterns() {
        let ps = set(&[(0, 0)]);
        let runs = maximal_runs(&ps);
        assert_eq!(runs.len(), 4);
        assert!(runs.iter().all(|r| r.length == 1));
        assert_eq!(patterns_of_length(&ps, 1), 4);
    }

    #[test]
    fn empty_set_has_no_runs() {
        let ps = PointSet::new();
        assert!(maximal_runs(&ps).is_empty());
        assert_eq!(pattern_histogram(&ps), PatternHistogram::default());
    }

    #[test]
    fn horizontal_segment() {
        let ps = set(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]);
        let runs = maximal_runs(&ps);
        assert_eq!(runs.len(), 16);
        assert_eq!(
            runs[0],
            Run {
                direction: Direction::Horizontal,
                start: Point::new(0, 0),
                length: 5
            }
        );
        for d in [Direction::Vertical, Direction::DiagonalUp, Direction::DiagonalDown] {
            let of_d: Vec<_> = runs.iter().filter(|r| r.direction == d).collect();
            assert_eq!(of_d.len(), 5);
            assert!(of_d.iter().all(|r| r.length == 1));
        }
        let h = pattern_histogram(&ps);
        assert_eq!(h.counts, BTreeMap::from([(1, 15), (5, 1)]));
    }

    #[test]
    fn rectangle_five_by_seven() {
        let ps = rect(7, 5);
        assert_eq!(patterns_of_length(&ps, 5), 13);
        // only the four corner diagonals have length exactly 4
        assert_eq!(patterns_of_length(&ps, 4), 4);
        assert_eq!(pattern_runs(&ps, 4), {
            let mut v = runs_by_walking(&ps);
            v.retain(|r| r.length == 4);
            v
        });
    }

    #[test]
    fn longer_run_is_not_a_pattern() {
        let ps = rect(6, 1);
        assert_eq!(patterns_of_length(&ps, 5), 0);
        assert_eq!(patterns_of_length(&ps, 6), 1);
    }

    #[test]
    fn diagonal_run_starts_at_smallest_x() {
        let ps = set(&[(0, 2), (1, 1), (2, 0)]);
        let r = pattern_runs(&ps, 3);
        assert_eq!(
            r,
            vec![Run {
                direction: Direction::DiagonalDown,
                start: Point::new(0, 2),
                length: 3
            }]
        );
        assert_eq!(r[0].cells().collect::<Vec<_>>().len(), 3);
    }

    #[test]
    fn tile_without_wrap_histogram() {
        // 5x5 grid with holes (i, sigma(i)) for sigma = (0,2,4,1,3), no wrap
        let sigma = [0, 2, 4, 1, 3];
        let ps: PointSet = (0..5)
            .flat_map(|x| (0..5).map(move |y| (x, y)))
            .filter(|&(x, y)| sigma[x as usize] != y)
            .collect();
        assert_eq!(ps.len(), 20);
        let h = pattern_histogram(&ps);
        let mut oracle = BTreeMap::new();
        for r in runs_by_walking(&ps) {
            *oracle.entry(r.length).or_insert(0) += 1;
        }
        assert_eq!(h.counts, oracle);
        assert_eq!(h.counts, BTreeMap::from([(1, 13), (2, 11), (3, 7), (4, 6)]));
        assert_eq!(h.mass(), 80);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&set(&[(5, 5)])).unwrap(), set(&[(0, 0)]));
        let pair = set(&[(0, 0), (0, 1)]);
        assert_eq!(normalize(&pair).unwrap(), pair);
        assert_eq!(normalize(&set(&[(3, 7), (4, 7)])).unwrap(), pair);
        assert_eq!(normalize(&PointSet::new()), Err(GridError::EmptySet));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_points("0 0\n1 0\n").unwrap(), set(&[(0, 0), (1, 0)]));
        assert_eq!(
            parse_points("0 0\n0 0\n"),
            Err(GridError::Duplicate { line: 2, x: 0, y: 0 })
        );
        assert_eq!(
            parse_points("# header\n\n -3 4 # trailing\n").unwrap(),
            set(&[(-3, 4)])
        );
        assert!(matches!(
            parse_points("0 0\n1\n"),
            Err(GridError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_points("0 0 0\n"),
            Err(GridError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_points("a b\n"),
            Err(GridError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn json_form_is_sorted_pairs() {
        let ps = set(&[(1, 0), (0, 0), (0, -2)]);
        let js = serde_json::to_string(&ps).unwrap();
        assert_eq!(js, r#"{"points":[[0,-2],[0,0],[1,0]]}"#);
        let back: PointSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, ps);
        assert!(serde_json::from_str::<PointSet>(r#"{"points":[[0,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn separated_union_adds_histograms() {
        let a = rect(3, 2);
        let b = set(&[(0, 0), (1, 1), (2, 2), (2, 0)]);
        let u = a.disjoint_union(&b, 2);
        let (ha, hb, hu) = (pattern_histogram(&a), pattern_histogram(&b), pattern_histogram(&u));
        for l in 1..=4 {
            assert_eq!(hu.get(l), ha.get(l) + hb.get(l));
        }
    }

    fn arb_set(max_coord: i64, max_len: usize) -> impl Strategy<Value = PointSet> {
        prop::collection::vec((-max_coord..=max_coord, -max_coord..=max_coord), 0..max_len)
            .prop_map(|v| v.into_iter().collect::<PointSet>())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn runs_match_walking_oracle(ps in arb_set(5, 40)) {
            prop_assert_eq!(maximal_runs(&ps), runs_by_walking(&ps));
            prop_assert_eq!(pattern_histogram(&ps).mass(), 4 * ps.len());
        }

        #[test]
        fn normalize_idempotent_and_invariant(ps in arb_set(6, 25)) {
            prop_assume!(!ps.is_empty());
            let n1 = normalize(&ps).unwrap();
            prop_assert_eq!(normalize(&n1).unwrap(), n1.clone());
            prop_assert_eq!(pattern_histogram(&n1), pattern_histogram(&ps));
            let (lo, _) = n1.bounding_box().unwrap();
            prop_assert_eq!((lo.x, lo.y), (0, 0));
            for g in DIHEDRAL {
                let img: PointSet = ps.iter().map(g).collect();
                prop_assert_eq!(normalize(&img.translate(3, -7)).unwrap(), n1.clone());
            }
        }

        #[test]
        fn text_round_trip(ps in arb_set(1000, 30)) {
            prop_assert_eq!(parse_points(&serialize_points(&ps)).unwrap(), ps);
        }

        #[test]
        fn separated_union_is_additive(a in arb_set(4, 20), b in arb_set(4, 20), gap in 1i64..4) {
            let u = a.disjoint_union(&b, gap);
            let (ha, hb, hu) = (pattern_histogram(&a), pattern_histogram(&b), pattern_histogram(&u));
            for l in 1..=12 {
                prop_assert_eq!(hu.get(l), ha.get(l) + hb.get(l));
            }
        }
    }
}
