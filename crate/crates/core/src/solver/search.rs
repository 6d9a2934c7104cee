//! Exhaustive search over king-connected point sets of a fixed size.
//!
//! Pattern counts are additive over the 8-connected components of a
//! constellation, since every maximal run and both of its flank cells stay
//! inside one component. A minimal constellation is therefore either
//! connected or a separated union of smaller optimal ones, and a connected
//! set of `p` points fits in a `p x p` box.
//!
//! Sets are generated with Redelmeier's method: the anchor is the lowest
//! cell in (y, x) order, cells are added from an untried frontier, and a
//! frontier cell that was passed over is never added again in that
//! subtree. Each translation class is produced exactly once.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

/// Subtree roots are taken at this set size when the target is larger.
const SPLIT_DEPTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelQuery {
    /// Pattern length.
    pub k: usize,
    /// Required number of length-k patterns.
    pub target: usize,
    /// Number of points.
    pub size: usize,
    /// Side limit on the bounding box of the set.
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelOutcome {
    /// First hit in generation order, as (x, y) cells.
    pub witness: Option<Vec<(i64, i64)>>,
    pub nodes: u64,
    /// Complete sets of the requested size that were evaluated.
    pub leaves: u64,
    /// False when some subtree was cut off by the node budget.
    pub complete: bool,
}

#[derive(Clone)]
struct Board {
    k: usize,
    target: usize,
    size: usize,
    window: i64,
    cols: i64,
    occupied: Vec<bool>,
    reached: Vec<bool>,
    untried: Vec<u32>,
    chosen: Vec<u32>,
    patterns: usize,
    min_x: i64,
    max_x: i64,
    max_y: i64,
    nodes: u64,
    leaves: u64,
    budget: u64,
    truncated: bool,
    hit: Option<Vec<u32>>,
}

enum Flow {
    Continue,
    Stop,
}

impl Board {
    fn new(q: &LevelQuery, budget: u64) -> Board {
        let s = q.size as i64;
        let cols = 2 * s + 1;
        let rows = s + 2;
        let cells = (cols * rows) as usize;
        let mut b = Board {
            k: q.k,
            target: q.target,
            size: q.size,
            window: q.window as i64,
            cols,
            occupied: vec![false; cells],
            reached: vec![false; cells],
            untried: Vec::with_capacity(8 * q.size),
            chosen: Vec::with_capacity(q.size),
            patterns: 0,
            min_x: 0,
            max_x: 0,
            max_y: 0,
            nodes: 0,
            leaves: 0,
            budget,
            truncated: false,
            hit: None,
        };
        for y in -1..=s {
            for x in -s..=s {
                let blocked = y < 0 || (y == 0 && x < 0) || y == s || x.abs() == s;
                if blocked {
                    let i = b.index(x, y);
                    b.reached[i] = true;
                }
            }
        }
        let origin = b.index(0, 0) as u32;
        b.reached[origin as usize] = true;
        b.patterns = b.delta(origin as usize) as usize;
        b.occupied[origin as usize] = true;
        b.chosen.push(origin);
        b.push_neighbours(origin as usize);
        b
    }

    #[inline]
    fn index(&self, x: i64, y: i64) -> usize {
        ((y + 1) * self.cols + (x + self.size as i64)) as usize
    }

    #[inline]
    fn coords(&self, i: usize) -> (i64, i64) {
        let i = i as i64;
        (i % self.cols - self.size as i64, i / self.cols - 1)
    }

    /// Change in the number of length-k runs if cell `c` were filled.
    #[inline]
    fn delta(&self, c: usize) -> isize {
        let k = self.k;
        let offsets = [1, self.cols, self.cols + 1, 1 - self.cols];
        let mut d = 0isize;
        for off in offsets {
            let back = self.walk(c, -off);
            let fwd = self.walk(c, off);
            d += (back + fwd + 1 == k) as isize;
            d -= (back == k) as isize + (fwd == k) as isize;
        }
        d
    }

    /// Occupied cells from `c` (exclusive) stepping by `off`, capped at k + 1.
    #[inline]
    fn walk(&self, c: usize, off: i64) -> usize {
        let mut n = 0;
        let mut i = c as i64 + off;
        while n <= self.k && self.occupied[i as usize] {
            n += 1;
            i += off;
        }
        n
    }

    fn push_neighbours(&mut self, c: usize) -> usize {
        let cols = self.cols;
        let mut pushed = 0;
        for off in [1, -1, cols, -cols, cols + 1, cols - 1, -cols + 1, -cols - 1] {
            let j = (c as i64 + off) as usize;
            if !self.reached[j] {
                self.reached[j] = true;
                self.untried.push(j as u32);
                pushed += 1;
            }
        }
        pushed
    }

    #[inline]
    fn fits(&self, x: i64, y: i64) -> bool {
        self.max_x.max(x) - self.min_x.min(x) < self.window && self.max_y.max(y) < self.window
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.truncated = true;
            false
        } else {
            true
        }
    }

    /// Visits every extension of the current set. With `frontier` given,
    /// stops descending at `split` points and records the subtree roots.
    fn extend(&mut self, mut frontier: Option<(&mut Vec<Board>, usize)>) -> Flow {
        if !self.tick() {
            return Flow::Stop;
        }
        let depth = self.chosen.len();
        let last = depth + 1 == self.size;
        let mut popped: Vec<u32> = Vec::with_capacity(self.untried.len());
        let mut flow = Flow::Continue;
        while let Some(c) = self.untried.pop() {
            popped.push(c);
            let (x, y) = self.coords(c as usize);
            if !self.fits(x, y) {
                continue;
            }
            let after = self.patterns as isize + self.delta(c as usize);
            if last {
                self.leaves += 1;
                if after == self.target as isize {
                    let mut cells = self.chosen.clone();
                    cells.push(c);
                    self.hit = Some(cells);
                    flow = Flow::Stop;
                    break;
                }
                continue;
            }
            let remaining = (self.size - depth - 1) as isize;
            if after + 4 * remaining < self.target as isize {
                continue;
            }
            let saved = (self.patterns, self.min_x, self.max_x, self.max_y);
            self.patterns = after as usize;
            self.min_x = self.min_x.min(x);
            self.max_x = self.max_x.max(x);
            self.max_y = self.max_y.max(y);
            self.occupied[c as usize] = true;
            self.chosen.push(c);
            let pushed = self.push_neighbours(c as usize);

            let child = match frontier.as_mut() {
                Some((roots, split)) if depth + 1 == *split => {
                    roots.push(self.clone());
                    Flow::Continue
                }
                Some((roots, split)) => self.extend(Some((&mut **roots, *split))),
                None => self.extend(None),
            };
            if let Flow::Stop = child {
                flow = Flow::Stop;
                break;
            }

            for _ in 0..pushed {
                let j = self.untried.pop().expect("pushed neighbour") as usize;
                self.reached[j] = false;
            }
            self.chosen.pop();
            self.occupied[c as usize] = false;
            (self.patterns, self.min_x, self.max_x, self.max_y) = saved;
        }
        if let Flow::Continue = flow {
            while let Some(c) = popped.pop() {
                self.untried.push(c);
            }
        }
        flow
    }

    fn witness(&self, cells: &[u32]) -> Vec<(i64, i64)> {
        cells.iter().map(|&c| self.coords(c as usize)).collect()
    }
}

/// Searches every connected set of `q.size` points whose bounding box fits in
/// `q.window` for one with exactly `q.target` patterns of length `q.k`.
///
/// The result does not depend on the rayon pool size: subtrees are ordered,
/// the reported witness comes from the first subtree with a hit, and every
/// subtree gets the same node allowance.
pub fn search_connected(q: &LevelQuery, budget: u64) -> LevelOutcome {
    assert!(q.size >= 1 && q.k >= 1);
    let mut root = Board::new(q, budget);
    if q.size == 1 {
        let witness = (root.patterns == q.target).then(|| vec![(0, 0)]);
        return LevelOutcome {
            witness,
            nodes: 1,
            leaves: 1,
            complete: true,
        };
    }
    if q.size <= SPLIT_DEPTH + 2 {
        root.extend(None);
        return LevelOutcome {
            witness: root.hit.as_ref().map(|h| root.witness(h)),
            nodes: root.nodes,
            leaves: root.leaves,
            complete: !root.truncated,
        };
    }

    let mut roots = Vec::new();
    root.extend(Some((&mut roots, SPLIT_DEPTH)));
    if root.truncated {
        return LevelOutcome {
            witness: None,
            nodes: root.nodes,
            leaves: 0,
            complete: false,
        };
    }
    let allowance = budget.saturating_sub(root.nodes);
    let first_hit = AtomicUsize::new(usize::MAX);
    let results: Vec<Option<Board>> = roots
        .into_par_iter()
        .enumerate()
        .map(|(i, mut b)| {
            if i > first_hit.load(Ordering::Relaxed) {
                return None;
            }
            b.nodes = 0;
            b.leaves = 0;
            b.budget = allowance;
            b.extend(None);
            if b.hit.is_some() {
                first_hit.fetch_min(i, Ordering::Relaxed);
            }
            Some(b)
        })
        .collect();

    let stop = first_hit.load(Ordering::Relaxed);
    let mut nodes = root.nodes;
    let mut leaves = 0;
    let mut truncated = false;
    let mut witness = None;
    for b in results.iter().take(stop.saturating_add(1)).flatten() {
        nodes += b.nodes;
        leaves += b.leaves;
        truncated |= b.truncated;
        if let Some(h) = &b.hit {
            witness = Some(b.witness(h));
        }
    }
    LevelOutcome {
        witness,
        nodes,
        leaves,
        complete: !truncated && nodes <= budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{normalize, patterns_of_length, PointSet};
    use std::collections::BTreeSet;

    /// Fixed (translation classes of) king-connected sets, by brute growth.
    fn fixed_polyplets(size: usize) -> BTreeSet<Vec<(i64, i64)>> {
        let mut level: BTreeSet<Vec<(i64, i64)>> = BTreeSet::from([vec![(0, 0)]]);
        for _ in 1..size {
            let mut next = BTreeSet::new();
            for cells in &level {
                for &(x, y) in cells {
                    for dx in -1..=1 {
                        for dy in -1..=1 {
                            let c = (x + dx, y + dy);
                            if cells.contains(&c) {
                                continue;
                            }
                            let mut grown = cells.clone();
                            grown.push(c);
                            let (mx, my) = (
                                grown.iter().map(|p| p.0).min().unwrap(),
                                grown.iter().map(|p| p.1).min().unwrap(),
                            );
                            let mut g: Vec<_> = grown.iter().map(|&(a, b)| (a - mx, b - my)).collect();
                            g.sort();
                            next.insert(g);
                        }
                    }
                }
            }
            level = next;
        }
        level
    }

    #[test]
    fn polyplet_counts_match_known_sequence() {
        // fixed polyplets: 1, 4, 20, 110, 638, 3832
        let expected = [1usize, 4, 20, 110, 638, 3832];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(fixed_polyplets(i + 1).len(), e);
        }
    }

    #[test]
    fn enumerates_each_fixed_set_once() {
        // no run can reach length size + 1, so every set is a miss
        for (size, expected) in [(2, 4), (3, 20), (6, 3832), (7, 23592), (8, 147941)] {
            let q = LevelQuery { k: size + 1, target: 1, size, window: size };
            let out = search_connected(&q, u64::MAX);
            assert!(out.complete);
            assert_eq!(out.leaves, expected, "size={size}");
        }
    }

    #[test]
    fn search_agrees_with_brute_growth() {
        for size in 1..=6 {
            let all = fixed_polyplets(size);
            for k in 1..=3 {
                for target in 0..=6 {
                    let brute = all.iter().find(|cells| {
                        let ps: PointSet = cells.iter().copied().collect();
                        patterns_of_length(&ps, k) == target
                    });
                    let q = LevelQuery { k, target, size, window: size };
                    let out = search_connected(&q, u64::MAX);
                    assert!(out.complete);
                    assert_eq!(out.witness.is_some(), brute.is_some(), "size={size} k={k} target={target}");
                    if let Some(w) = out.witness {
                        let ps: PointSet = w.into_iter().collect();
                        assert_eq!(ps.len(), size);
                        assert_eq!(patterns_of_length(&ps, k), target);
                    }
                }
            }
        }
    }

    #[test]
    fn window_limits_bounding_box() {
        // a straight 4-run needs width 4
        let q = LevelQuery { k: 4, target: 1, size: 4, window: 3 };
        assert!(search_connected(&q, u64::MAX).witness.is_none());
        let q = LevelQuery { window: 4, ..q };
        let w = search_connected(&q, u64::MAX).witness.unwrap();
        let ps: PointSet = w.into_iter().collect();
        assert_eq!(patterns_of_length(&ps, 4), 1);
    }

    #[test]
    fn split_search_is_pool_independent() {
        let q = LevelQuery { k: 3, target: 5, size: 8, window: 8 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| search_connected(&q, u64::MAX))
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let ps: PointSet = a.witness.unwrap().into_iter().collect();
        assert_eq!(patterns_of_length(&ps, 3), 5);
        assert!(normalize(&ps).is_ok());
    }

    #[test]
    fn budget_truncation_is_reported() {
        let q = LevelQuery { k: 5, target: 3, size: 9, window: 9 };
        let out = search_connected(&q, 1000);
        assert!(!out.complete);
        assert!(out.witness.is_none());
    }
}
