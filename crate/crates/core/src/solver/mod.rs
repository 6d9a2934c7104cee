//! Exact values of a_k(n), the fewest points forming exactly n patterns of
//! length k.
//!
//! The search deepens on the point count p from the counting bound
//! `ceil(k*n/4)`. At each level it first tries separated unions of two
//! smaller optimal constellations, then every connected constellation of p
//! points (see [`search`]). A value is stamped [`Status::Proven`] only when
//! every smaller level was ruled out completely: the connected search ran to
//! the end with a window at least p wide, and no pair of certified lower
//! bounds for the parts fits under p.

pub mod search;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{normalize, patterns_of_length, Point, PointSet};
use search::{search_connected, LevelQuery};

pub const DEFAULT_BUDGET: u64 = 4_000_000_000;
pub const DEFAULT_MAX_POINTS: usize = 40;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("closed form a_{k}({n}) is not available (needs k >= 2 and 1 <= n <= 3)")]
    ClosedFormRange { k: usize, n: usize },

    #[error("no constellation found for a_{k}({n}) within budget; lower bound {lower_bound}")]
    NoResult { k: usize, n: usize, lower_bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Proven,
    BestKnownInWindow,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proven => "Proven",
            Status::BestKnownInWindow => "BestKnownInWindow",
        })
    }
}

/// Where the witness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Connected,
    Split { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub k: usize,
    pub n: usize,
    pub value: usize,
    pub status: Status,
    pub lower_bound: usize,
    /// Every point count below this was ruled out.
    pub certified_lower: usize,
    pub window: usize,
    pub nodes: u64,
    pub source: Source,
    pub witness: PointSet,
}

pub fn lower_bound(k: usize, n: usize) -> usize {
    (k * n).div_ceil(4)
}

/// True iff `ps` has exactly `n` patterns of length `k`.
pub fn verify(ps: &PointSet, k: usize, n: usize) -> bool {
    patterns_of_length(ps, k) == n
}

/// `a_k(1) = k`, `a_k(2) = 2k - 1`, `a_k(3) = 3(k - 1)` with a witness each.
///
/// Only for k >= 2: with k = 1 a lone point already carries four patterns.
pub fn closed_form_small(k: usize, n: usize) -> Result<(usize, PointSet), SolveError> {
    if k < 2 || !(1..=3).contains(&n) {
        return Err(SolveError::ClosedFormRange { k, n });
    }
    let k = k as i64;
    let row = (0..k).map(|x| Point::new(x, 0));
    let ps: PointSet = match n {
        1 => row.collect(),
        // a row and a (1,1) diagonal meeting at 135 degrees
        2 => row.chain((0..k).map(|t| Point::new(k - 1 + t, t))).collect(),
        // right triangle: row, column and the (1,-1) hypotenuse
        _ => row
            .chain((0..k).map(|y| Point::new(0, y)))
            .chain((0..k).map(|t| Point::new(k - 1 - t, t)))
            .collect(),
    };
    let value = [k, 2 * k - 1, 3 * (k - 1)][n - 1] as usize;
    debug_assert_eq!(ps.len(), value);
    Ok((value, ps))
}

/// Default search window: `3k` for n <= 3, otherwise `k * ceil(n/2)`, and
/// never below `k + 2`.
pub fn default_window(k: usize, n: usize) -> usize {
    let w = if n <= 3 { 3 * k } else { k * n.div_ceil(2) };
    w.max(k + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Bounding-box side for connected components.
    pub window: usize,
    /// Search nodes allowed per table entry.
    pub budget: u64,
    /// Give up above this many points.
    pub max_points: usize,
}

/// Memoizing solver for one pattern length. Entries for smaller n are reused
/// by the split step and by [`Solver::table`].
pub struct Solver {
    k: usize,
    config: SolverConfig,
    memo: BTreeMap<usize, Result<SolveResult, SolveError>>,
}

impl Solver {
    pub fn new(k: usize, config: SolverConfig) -> Result<Self, SolveError> {
        if k == 0 {
            return Err(SolveError::InvalidInput("k must be at least 1".into()));
        }
        if config.window < k + 2 {
            return Err(SolveError::InvalidInput(format!(
                "window {} is smaller than k + 2 = {}",
                config.window,
                k + 2
            )));
        }
        Ok(Solver {
            k,
            config,
            memo: BTreeMap::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Seeds the memo, e.g. from a cache. The entry must verify.
    pub fn insert_known(&mut self, r: SolveResult) -> bool {
        let ok = r.k == self.k
            && r.witness.len() == r.value
            && verify(&r.witness, r.k, r.n)
            && r.window == self.config.window;
        if ok {
            self.memo.insert(r.n, Ok(r));
        }
        ok
    }

    /// Successful entries computed or seeded so far, by n.
    pub fn known(&self) -> impl Iterator<Item = &SolveResult> + '_ {
        self.memo.values().filter_map(|r| r.as_ref().ok())
    }

    fn certified(&self, n: usize) -> usize {
        match self.memo.get(&n) {
            Some(Ok(r)) => r.certified_lower,
            _ => lower_bound(self.k, n),
        }
    }

    pub fn solve(&mut self, n: usize) -> Result<SolveResult, SolveError> {
        if n == 0 {
            return Err(SolveError::InvalidInput("n must be at least 1".into()));
        }
        if let Some(r) = self.memo.get(&n) {
            return r.clone();
        }
        let r = self.solve_uncached(n);
        self.memo.insert(n, r.clone());
        r
    }

    fn solve_uncached(&mut self, n: usize) -> Result<SolveResult, SolveError> {
        let k = self.k;
        let lb = lower_bound(k, n);
        let window = self.config.window;
        let mut certified = lb;
        let mut budget_left = self.config.budget;
        let mut nodes = 0u64;
        let mut connected_open = true;

        for p in lb.max(1)..=self.config.max_points {
            let mut split_excluded = true;
            let mut split_hit = None;
            for left in 1..=n / 2 {
                let right = n - left;
                if self.certified(left) + self.certified(right) > p {
                    continue;
                }
                let (Ok(a), Ok(b)) = (self.solve(left), self.solve(right)) else {
                    split_excluded = false;
                    continue;
                };
                if a.certified_lower + b.certified_lower <= p {
                    split_excluded = false;
                }
                if split_hit.is_none() && a.value + b.value <= p {
                    split_hit = Some((left, right, a, b));
                }
            }
            if let Some((left, right, a, b)) = split_hit {
                let witness = normalize(&a.witness.disjoint_union(&b.witness, 2))
                    .expect("nonempty union");
                return Ok(self.finish(n, p, certified, nodes, Source::Split { left, right }, witness));
            }

            let mut level_excluded = false;
            if connected_open {
                let q = LevelQuery {
                    k,
                    target: n,
                    size: p,
                    window,
                };
                let out = search_connected(&q, budget_left);
                nodes += out.nodes;
                budget_left = budget_left.saturating_sub(out.nodes);
                if let Some(cells) = out.witness {
                    let ps: PointSet = cells.into_iter().collect();
                    let witness = normalize(&ps).expect("nonempty witness");
                    return Ok(self.finish(n, p, certified, nodes, Source::Connected, witness));
                }
                connected_open = out.complete;
                level_excluded = out.complete && window >= p && split_excluded;
            }
            if level_excluded && certified == p {
                certified = p + 1;
            }
        }
        Err(SolveError::NoResult {
            k,
            n,
            lower_bound: lb,
        })
    }

    fn finish(
        &self,
        n: usize,
        value: usize,
        certified: usize,
        nodes: u64,
        source: Source,
        witness: PointSet,
    ) -> SolveResult {
        debug_assert!(verify(&witness, self.k, n));
        debug_assert_eq!(witness.len(), value);
        let status = if certified >= value {
            Status::Proven
        } else {
            Status::BestKnownInWindow
        };
        SolveResult {
            k: self.k,
            n,
            value,
            status,
            lower_bound: lower_bound(self.k, n),
            certified_lower: certified.min(value),
            window: self.config.window,
            nodes,
            source,
            witness,
        }
    }

    /// `a_k(1..=n_max)`. Subadditive by construction.
    pub fn table(&mut self, n_max: usize) -> Result<Vec<SolveResult>, SolveError> {
        (1..=n_max).map(|n| self.solve(n)).collect()
    }
}

pub fn solve_exact(k: usize, n: usize, window: usize, budget: u64) -> Result<SolveResult, SolveError> {
    let config = SolverConfig {
        window,
        budget,
        max_points: DEFAULT_MAX_POINTS,
    };
    Solver::new(k, config)?.solve(n)
}

pub fn subadditive_table(
    k: usize,
    n_max: usize,
    window: usize,
    budget: u64,
) -> Result<Vec<SolveResult>, SolveError> {
    let config = SolverConfig {
        window,
        budget,
        max_points: DEFAULT_MAX_POINTS,
    };
    Solver::new(k, config)?.table(n_max)
}

/// OEIS b-file lines `n a(n)`.
pub fn b_file(table: &[SolveResult]) -> String {
    table.iter().map(|r| format!("{} {}\n", r.n, r.value)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound(4, 4), 4);
        assert_eq!(lower_bound(5, 3), 4);
        assert_eq!(lower_bound(1, 4), 1);
        assert_eq!(lower_bound(3, 1), 1);
    }

    #[test]
    fn verify_examples() {
        let seg: PointSet = (0..2).map(|x| (x, 0)).collect();
        assert!(verify(&seg, 2, 1));
        let one: PointSet = [(0, 0)].into_iter().collect();
        assert!(!verify(&one, 2, 1));
        assert!(verify(&one, 1, 4));
    }

    #[test]
    fn closed_form_witnesses_verify() {
        assert_eq!(closed_form_small(5, 3).unwrap().0, 12);
        assert_eq!(closed_form_small(4, 1).unwrap().0, 4);
        assert_eq!(closed_form_small(3, 2).unwrap().0, 5);
        for k in 2..=15 {
            for n in 1..=3 {
                let (v, ps) = closed_form_small(k, n).unwrap();
                assert_eq!(ps.len(), v, "k={k} n={n}");
                assert!(verify(&ps, k, n), "k={k} n={n}");
            }
        }
        assert!(closed_form_small(1, 1).is_err());
        assert!(closed_form_small(4, 4).is_err());
        assert!(closed_form_small(4, 0).is_err());
    }

    #[test]
    fn small_solves() {
        let r = solve_exact(2, 2, 6, u64::MAX).unwrap();
        assert_eq!((r.value, r.status), (3, Status::Proven));
        assert!(verify(&r.witness, 2, 2));
        let r = solve_exact(4, 1, 12, u64::MAX).unwrap();
        assert_eq!((r.value, r.status), (4, Status::Proven));
    }

    #[test]
    fn isolated_points_for_length_one() {
        for n in 1..=4 {
            let r = solve_exact(1, 4 * n, 3, u64::MAX).unwrap();
            assert_eq!(r.value, n);
            assert_eq!(r.status, Status::Proven);
            assert!(verify(&r.witness, 1, 4 * n));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(solve_exact(3, 1, 4, 10), Err(SolveError::InvalidInput(_))));
        assert!(matches!(solve_exact(0, 1, 4, 10), Err(SolveError::InvalidInput(_))));
        assert!(matches!(solve_exact(3, 0, 6, 10), Err(SolveError::InvalidInput(_))));
    }

    #[test]
    fn tiny_budget_reports_no_result() {
        assert_eq!(
            solve_exact(5, 1, 15, 3),
            Err(SolveError::NoResult { k: 5, n: 1, lower_bound: 2 })
        );
        // each entry has its own budget, so the split route still answers
        let r = solve_exact(5, 3, 15, 50).unwrap();
        assert_eq!(r.source, Source::Split { left: 1, right: 2 });
        assert_eq!(r.status, Status::BestKnownInWindow);
        assert!(verify(&r.witness, 5, 3));
    }

    #[test]
    fn narrow_window_is_not_proven() {
        // a_4(3) = 9, but a 6-wide window cannot rule out connected sets of 7 or 8
        let r = solve_exact(4, 3, 6, u64::MAX).unwrap();
        assert_eq!(r.value, 9);
        assert_eq!(r.status, Status::BestKnownInWindow);
        assert_eq!(r.certified_lower, 7);
    }

    #[test]
    fn b_file_format() {
        let t = subadditive_table(2, 3, 6, u64::MAX).unwrap();
        assert_eq!(b_file(&t), "1 2\n2 3\n3 3\n");
    }

    #[test]
    fn memo_seed_must_verify() {
        let config = SolverConfig { window: 6, budget: u64::MAX, max_points: 10 };
        let mut s = Solver::new(2, config).unwrap();
        let mut r = s.solve(2).unwrap();
        let mut fresh = Solver::new(2, config).unwrap();
        assert!(fresh.insert_known(r.clone()));
        r.n = 3;
        assert!(!fresh.insert_known(r));
    }
}
