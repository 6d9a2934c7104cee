//! Explicit constellations and exact bounds on the limiting points-per-pattern
//! ratio f(k).

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Signed;
use serde::{Serialize, Serializer};

use crate::grid::{patterns_of_length, Point, PointSet};
use crate::queens::{in_t, PartialPlacement, QueensPermutation};

pub type Rational = Ratio<i64>;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("rectangle needs 1 <= k <= m, got k={k}, m={m}")]
    BadRectangle { k: usize, m: usize },

    #[error("permutation {0} is not a modular queens solution")]
    NotInT(QueensPermutation),

    #[error("window {window} is smaller than the tile size {n}")]
    WindowTooSmall { window: usize, n: usize },

    #[error("lattice vectors ({}, {}) and ({}, {}) are linearly dependent", .v1.0, .v1.1, .v2.0, .v2.1)]
    DependentVectors { v1: (i64, i64), v2: (i64, i64) },

    #[error("constellation has no patterns of length {k}")]
    NoPatterns { k: usize },

    #[error("windows must be positive and strictly increasing: {0:?}")]
    BadWindows(Vec<usize>),
}

/// Rationals go to JSON as `{"num": .., "den": ..}` in lowest terms.
pub mod rational_json {
    use super::*;

    #[derive(Serialize)]
    struct Parts {
        num: i64,
        den: i64,
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Parts {
            num: *r.numer(),
            den: *r.denom(),
        }
        .serialize(s)
    }
}

/// `k` rows of `m` points: `{(x, y): 0 <= x < m, 0 <= y < k}`.
pub fn full_rectangle(k: usize, m: usize) -> Result<PointSet, ConstructionError> {
    if k == 0 || k > m {
        return Err(ConstructionError::BadRectangle { k, m });
    }
    Ok((0..m as i64)
        .flat_map(|x| (0..k as i64).map(move |y| Point::new(x, y)))
        .collect())
}

/// The periodic tiling with holes at `(x mod n, y mod n) = (i, sigma(i))`,
/// cut to the window `[0, N)^2`.
pub fn tile_window(p: &QueensPermutation, window: usize) -> Result<PointSet, ConstructionError> {
    if !in_t(p) {
        return Err(ConstructionError::NotInT(p.clone()));
    }
    let n = p.n();
    if window < n {
        return Err(ConstructionError::WindowTooSmall { window, n });
    }
    Ok(periodic_complement(n, window, |i, j| p.get(i) == j))
}

/// Same tiling with the holes at the queens of a partial placement.
pub fn monsky_tile_window(pl: &PartialPlacement, window: usize) -> Result<PointSet, ConstructionError> {
    let n = pl.n;
    if window < n {
        return Err(ConstructionError::WindowTooSmall { window, n });
    }
    let mut hole = vec![false; n * n];
    for &(i, j) in &pl.queens {
        hole[i * n + j] = true;
    }
    Ok(periodic_complement(n, window, |i, j| hole[i * n + j]))
}

fn periodic_complement(n: usize, window: usize, is_hole: impl Fn(usize, usize) -> bool) -> PointSet {
    (0..window)
        .flat_map(|x| (0..window).map(move |y| (x, y)))
        .filter(|&(x, y)| !is_hole(x % n, y % n))
        .map(|(x, y)| Point::new(x as i64, y as i64))
        .collect()
}

/// Membership in the integer lattice spanned by two independent vectors,
/// decided exactly by Cramer's rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    v1: (i64, i64),
    v2: (i64, i64),
    det: i64,
}

impl Lattice {
    pub fn new(v1: (i64, i64), v2: (i64, i64)) -> Result<Self, ConstructionError> {
        let det = v1.0 * v2.1 - v1.1 * v2.0;
        if det == 0 {
            return Err(ConstructionError::DependentVectors { v1, v2 });
        }
        Ok(Lattice { v1, v2, det })
    }

    /// Index of the lattice in Z^2.
    pub fn covolume(&self) -> i64 {
        self.det.abs()
    }

    pub fn contains(&self, p: Point) -> bool {
        // a*v1 + b*v2 = p  =>  a = det(p, v2)/det, b = det(v1, p)/det
        let a_num = p.x * self.v2.1 - p.y * self.v2.0;
        let b_num = self.v1.0 * p.y - self.v1.1 * p.x;
        a_num % self.det == 0 && b_num % self.det == 0
    }
}

/// Every cell of `[0, N)^2` that is not a lattice point.
pub fn lattice_constellation(
    v1: (i64, i64),
    v2: (i64, i64),
    window: usize,
) -> Result<PointSet, ConstructionError> {
    let lattice = Lattice::new(v1, v2)?;
    let w = window as i64;
    Ok((0..w)
        .flat_map(|x| (0..w).map(move |y| Point::new(x, y)))
        .filter(|&p| !lattice.contains(p))
        .collect())
}

/// Points per length-k pattern of a finite constellation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub k: usize,
    pub points: usize,
    pub patterns: usize,
    #[serde(with = "rational_json")]
    pub ratio: Rational,
    /// Side of the window the constellation was cut from, if any.
    pub window: Option<usize>,
}

impl fmt::Display for RatioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} points={} patterns={} ratio={}",
            self.k, self.points, self.patterns, self.ratio
        )?;
        if let Some(w) = self.window {
            write!(f, " window={w}")?;
        }
        Ok(())
    }
}

pub fn ratio(ps: &PointSet, k: usize) -> Result<RatioReport, ConstructionError> {
    let patterns = patterns_of_length(ps, k);
    if patterns == 0 {
        return Err(ConstructionError::NoPatterns { k });
    }
    Ok(RatioReport {
        k,
        points: ps.len(),
        patterns,
        ratio: Rational::new(ps.len() as i64, patterns as i64),
        window: None,
    })
}

/// Ratios of `tile_window(p, N)` for each window.
pub fn convergence_series(
    p: &QueensPermutation,
    k: usize,
    windows: &[usize],
) -> Result<Vec<RatioReport>, ConstructionError> {
    if windows.is_empty() || windows[0] == 0 || windows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConstructionError::BadWindows(windows.to_vec()));
    }
    windows
        .iter()
        .map(|&w| {
            let ps = tile_window(p, w)?;
            let mut r = ratio(&ps, k)?;
            r.window = Some(w);
            Ok(r)
        })
        .collect()
}

/// Edge-effect fit for a convergence series: `C = N0 * |r(N0) - target|` from
/// the smallest window, and whether every later window obeys
/// `|r(N) - target| <= C / N`. Floating point only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceFit {
    pub constant: f64,
    pub deviations: Vec<f64>,
    pub within_bound: bool,
}

pub fn fit_inverse_window(series: &[RatioReport], target: Rational) -> Option<ConvergenceFit> {
    let first = series.first()?;
    let dev = |r: &RatioReport| {
        let d = (r.ratio - target).abs();
        *d.numer() as f64 / *d.denom() as f64
    };
    let constant = first.window? as f64 * dev(first);
    let deviations: Vec<f64> = series.iter().map(dev).collect();
    let within_bound = series
        .iter()
        .zip(&deviations)
        .all(|(r, &d)| r.window.is_some_and(|w| d <= constant / w as f64 + 1e-12));
    Some(ConvergenceFit {
        constant,
        deviations,
        within_bound,
    })
}

/// Which argument produced an upper bound on f(k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundRule {
    /// Isolated points: each is four patterns of length one.
    IsolatedPoints,
    /// A full modular queens solution exists (k+1 coprime to 6).
    FullQueensTiling,
    /// Full k x m rectangles.
    Rectangle,
    /// Tiling with k-1 nonattacking toroidal queens.
    QueensMissingTwo,
    /// Tiling with k nonattacking toroidal queens (k+1 not divisible by 3 or 4).
    QueensMissingOne,
}

impl fmt::Display for BoundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundRule::IsolatedPoints => "isolated-points",
            BoundRule::FullQueensTiling => "full-queens-tiling",
            BoundRule::Rectangle => "rectangle",
            BoundRule::QueensMissingTwo => "queens-missing-two",
            BoundRule::QueensMissingOne => "queens-missing-one",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    #[serde(with = "rational_json")]
    pub lower: Rational,
    #[serde(with = "rational_json")]
    pub upper: Rational,
    pub rule: BoundRule,
}

/// Interior ratio of a queens tiling of period `k+1` missing `r` queens:
/// `(k(k+1) + r) / (4(k+1-r))`.
pub fn missing_queens_ratio(k: usize, r: usize) -> Rational {
    let (k, r) = (k as i64, r as i64);
    Rational::new(k * (k + 1) + r, 4 * (k + 1 - r))
}

/// Best available bounds `k/4 <= f(k) <= upper`.
pub fn f_bounds(k: usize) -> BoundReport {
    assert!(k >= 1, "k must be positive");
    let lower = Rational::new(k as i64, 4);
    let period = k + 1;
    if k == 1 {
        return BoundReport { k, lower, upper: lower, rule: BoundRule::IsolatedPoints };
    }
    if period.gcd(&6) == 1 {
        return BoundReport { k, lower, upper: lower, rule: BoundRule::FullQueensTiling };
    }
    let mut best = (Rational::new(k as i64, 3), BoundRule::Rectangle);
    let mut consider = |value: Rational, rule| {
        if value < best.0 {
            best = (value, rule);
        }
    };
    consider(missing_queens_ratio(k, 2), BoundRule::QueensMissingTwo);
    if period % 3 != 0 && period % 4 != 0 {
        consider(missing_queens_ratio(k, 1), BoundRule::QueensMissingOne);
    }
    BoundReport { k, lower, upper: best.0, rule: best.1 }
}
