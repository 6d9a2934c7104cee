//! Modular (toroidal) n-queens: permutations whose sums and differences with
//! the row index are also permutations mod n.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest board accepted by default for full enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 13;

/// Bitmask enumeration supports boards up to this size.
pub const MAX_BOARD: usize = 63;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QueensError {
    #[error("not a permutation of 0..{n}: {detail}")]
    NotAPermutation { n: usize, detail: String },

    #[error("board size {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("lattice hypothesis violated for m={m}, n={n}: {reason}")]
    Hypothesis { m: i64, n: i64, reason: String },

    #[error("permutation {0} is not a modular queens solution")]
    NotInT(QueensPermutation),

    #[error("cannot parse permutation {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// A permutation of `{0..n-1}` read as queen columns by row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct QueensPermutation {
    sigma: Vec<usize>,
}

impl QueensPermutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self, QueensError> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for (i, &v) in sigma.iter().enumerate() {
            if v >= n {
                return Err(QueensError::NotAPermutation {
                    n,
                    detail: format!("sigma({i}) = {v} is out of range"),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(QueensError::NotAPermutation {
                    n,
                    detail: format!("value {v} repeats"),
                });
            }
        }
        Ok(QueensPermutation { sigma })
    }

    pub fn identity(n: usize) -> Self {
        QueensPermutation {
            sigma: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn get(&self, i: usize) -> usize {
        self.sigma[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.sigma.iter().enumerate() {
            inv[v] = i;
        }
        QueensPermutation { sigma: inv }
    }

    /// `i -> sigma(i) + m mod n`.
    pub fn shift(&self, m: usize) -> Self {
        let n = self.n();
        QueensPermutation {
            sigma: self.sigma.iter().map(|&v| (v + m) % n).collect(),
        }
    }

    /// `i -> i + sigma(i) mod n`.
    pub fn sums(&self) -> Vec<usize> {
        let n = self.n();
        self.sigma.iter().enumerate().map(|(i, &v)| (i + v) % n).collect()
    }

    /// `i -> i - sigma(i) mod n`.
    pub fn differences(&self) -> Vec<usize> {
        let n = self.n();
        self.sigma
            .iter()
            .enumerate()
            .map(|(i, &v)| (i + n - v) % n)
            .collect()
    }
}

impl fmt::Display for QueensPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.sigma.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for QueensPermutation {
    type Err = QueensError;

    /// Comma separated images, e.g. `0,2,4,1,3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = |reason: String| QueensError::Parse {
            text: s.to_string(),
            reason,
        };
        let sigma = s
            .trim()
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| parse_err(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        QueensPermutation::new(sigma)
    }
}

impl<'de> Deserialize<'de> for QueensPermutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let sigma = Vec::<usize>::deserialize(d)?;
        QueensPermutation::new(sigma).map_err(serde::de::Error::custom)
    }
}

fn is_permutation(values: &[usize]) -> bool {
    let mut seen = vec![false; values.len()];
    values
        .iter()
        .all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
}

/// Membership in T_n: the sums and the differences are both permutations.
pub fn in_t(p: &QueensPermutation) -> bool {
    is_permutation(&p.sums()) && is_permutation(&p.differences())
}

/// Like [`in_t`] for a raw image vector, validating it first.
pub fn in_t_checked(sigma: &[usize]) -> Result<bool, QueensError> {
    QueensPermutation::new(sigma.to_vec()).map(|p| in_t(&p))
}

#[derive(Clone, Copy)]
struct Occupancy {
    cols: u64,
    sums: u64,
    diffs: u64,
}

impl Occupancy {
    const EMPTY: Occupancy = Occupancy {
        cols: 0,
        sums: 0,
        diffs: 0,
    };

    #[inline]
    fn masks(n: usize, i: usize, j: usize) -> (u64, u64, u64) {
        (1 << j, 1 << ((i + j) % n), 1 << ((i + n - j) % n))
    }

    #[inline]
    fn free(&self, n: usize, i: usize, j: usize) -> bool {
        let (c, s, d) = Self::masks(n, i, j);
        self.cols & c == 0 && self.sums & s == 0 && self.diffs & d == 0
    }

    #[inline]
    fn with(&self, n: usize, i: usize, j: usize) -> Occupancy {
        let (c, s, d) = Self::masks(n, i, j);
        Occupancy {
            cols: self.cols | c,
            sums: self.sums | s,
            diffs: self.diffs | d,
        }
    }
}

fn extend_full(n: usize, row: usize, occ: Occupancy, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if row == n {
        out.push(prefix.clone());
        return;
    }
    for j in 0..n {
        if occ.free(n, row, j) {
            prefix.push(j);
            extend_full(n, row + 1, occ.with(n, row, j), prefix, out);
            prefix.pop();
        }
    }
}

/// All of T_n in lexicographic order, with the default cap.
pub fn enumerate_t(n: usize) -> Result<Vec<QueensPermutation>, QueensError> {
    enumerate_t_capped(n, DEFAULT_ENUMERATION_CAP)
}

/// Backtracking over rows with column, sum and difference occupancy masks.
/// The first row's choices are explored in parallel and concatenated in order.
pub fn enumerate_t_capped(n: usize, cap: usize) -> Result<Vec<QueensPermutation>, QueensError> {
    let cap = cap.min(MAX_BOARD);
    if n > cap {
        return Err(QueensError::CapExceeded { n, cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let per_first: Vec<Vec<Vec<usize>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::new();
            let mut prefix = vec![j];
            extend_full(n, 1, Occupancy::EMPTY.with(n, 0, j), &mut prefix, &mut out);
            out
        })
        .collect();
    Ok(per_first
        .into_iter()
        .flatten()
        .map(|sigma| QueensPermutation { sigma })
        .collect())
}

/// One class of T_n under the equivalence generated by inversion and output shifts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceClass {
    pub representative: QueensPermutation,
    pub members: Vec<QueensPermutation>,
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceClassReport {
    pub n: usize,
    pub classes: Vec<EquivalenceClass>,
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so roots are lexicographic minima
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Partitions T_n. Classes are ordered by representative (the smallest member).
pub fn equivalence_classes(n: usize) -> Result<EquivalenceClassReport, QueensError> {
    let all = enumerate_t(n)?;
    Ok(classes_of(n, all))
}

pub fn classes_of(n: usize, all: Vec<QueensPermutation>) -> EquivalenceClassReport {
    let index: HashMap<&QueensPermutation, usize> =
        all.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut sets = DisjointSets::new(all.len());
    for (i, p) in all.iter().enumerate() {
        for q in [p.inverse(), p.shift(1)] {
            let j = *index
                .get(&q)
                .expect("T_n is closed under inversion and output shift");
            sets.union(i, j);
        }
    }
    let mut grouped: Vec<Vec<QueensPermutation>> = vec![Vec::new(); all.len()];
    for i in 0..all.len() {
        let r = sets.find(i);
        grouped[r].push(all[i].clone());
    }
    // `all` is sorted, so each group is sorted and its root is its minimum
    let classes = grouped
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|members| EquivalenceClass {
            representative: members[0].clone(),
            linear: is_linear(&members[0]).is_some(),
            members,
        })
        .collect();
    EquivalenceClassReport { n, classes }
}

/// `sigma(i) = m*i mod n`, valid when m-1, m and m+1 are all coprime to n.
pub fn lattice_permutation(m: i64, n: i64) -> Result<QueensPermutation, QueensError> {
    let violated = |reason: String| QueensError::Hypothesis { m, n, reason };
    if !(1 < m && m < n - 1) {
        return Err(violated(format!("need 1 < m < n-1 = {}", n - 1)));
    }
    let failing: Vec<String> = [("m-1", m - 1), ("m", m), ("m+1", m + 1)]
        .into_iter()
        .filter_map(|(label, v)| {
            let g = v.gcd(&n);
            (g != 1).then(|| format!("gcd({label}={v}, {n}) = {g}"))
        })
        .collect();
    if !failing.is_empty() {
        return Err(violated(failing.join(", ")));
    }
    let sigma = (0..n).map(|i| ((m * i) % n) as usize).collect();
    Ok(QueensPermutation { sigma })
}

/// `Some((m, c))` when `sigma(i) = m*i + c mod n` for every i.
pub fn is_linear(p: &QueensPermutation) -> Option<(usize, usize)> {
    let n = p.n();
    if n <= 1 {
        return Some((0, 0));
    }
    let c = p.get(0);
    let m = (p.get(1) + n - c) % n;
    (0..n)
        .all(|i| (m * i + c) % n == p.get(i))
        .then_some((m, c))
}

/// The inverse followed by all n output shifts (shift 0 first).
pub fn closure_witness(p: &QueensPermutation) -> Result<Vec<QueensPermutation>, QueensError> {
    if !in_t(p) {
        return Err(QueensError::NotInT(p.clone()));
    }
    let mut out = Vec::with_capacity(p.n() + 1);
    out.push(p.inverse());
    out.extend((0..p.n()).map(|m| p.shift(m)));
    Ok(out)
}

/// Nonattacking queens on an n x n torus; rows and columns distinct, and
/// distinct `i+j` and `i-j` mod n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialPlacement {
    pub n: usize,
    /// Sorted by row.
    pub queens: Vec<(usize, usize)>,
}

impl PartialPlacement {
    pub fn len(&self) -> usize {
        self.queens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queens.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        let n = self.n;
        let distinct = |f: &dyn Fn(&(usize, usize)) -> usize| {
            let mut seen = vec![false; n];
            self.queens
                .iter()
                .all(|q| !std::mem::replace(&mut seen[f(q)], true))
        };
        self.queens.len() <= n
            && self.queens.iter().all(|&(i, j)| i < n && j < n)
            && distinct(&|&(i, _)| i)
            && distinct(&|&(_, j)| j)
            && distinct(&|&(i, j)| (i + j) % n)
            && distinct(&|&(i, j)| (i + n - j) % n)
    }

    pub fn from_permutation(p: &QueensPermutation) -> Self {
        PartialPlacement {
            n: p.n(),
            queens: p.sigma().iter().copied().enumerate().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialSearch {
    pub placement: PartialPlacement,
    /// True when the search finished, so `placement` is a maximum.
    pub proven_maximum: bool,
    pub nodes: u64,
}

struct PartialSearcher {
    n: usize,
    budget: u64,
    nodes: u64,
    best: Vec<(usize, usize)>,
    current: Vec<(usize, usize)>,
    exhausted: bool,
}

impl PartialSearcher {
    fn descend(&mut self, row: usize, occ: Occupancy) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if row == self.n || self.current.len() + (self.n - row) <= self.best.len() {
            return;
        }
        let n = self.n;
        for j in 0..n {
            if occ.free(n, row, j) {
                self.current.push((row, j));
                self.descend(row + 1, occ.with(n, row, j));
                self.current.pop();
                if self.exhausted || self.best.len() == n {
                    return;
                }
            }
        }
        self.descend(row + 1, occ);
    }
}

/// Maximum nonattacking toroidal placement by branch and bound over rows.
///
/// Rows are tried place-before-skip with columns ascending, which is
/// lexicographic order on the queen list, and only strict improvements replace
/// the incumbent; the result is the lexicographically smallest maximum.
/// Running out of `node_budget` keeps the best placement found and clears
/// `proven_maximum`.
pub fn max_partial_toroidal(n: usize, node_budget: u64) -> PartialSearch {
    assert!(n <= MAX_BOARD, "board size {n} exceeds {MAX_BOARD}");
    let mut s = PartialSearcher {
        n,
        budget: node_budget,
        nodes: 0,
        best: Vec::new(),
        current: Vec::new(),
        exhausted: false,
    };
    s.descend(0, Occupancy::EMPTY);
    PartialSearch {
        placement: PartialPlacement { n, queens: s.best },
        proven_maximum: !s.exhausted,
        nodes: s.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> QueensPermutation {
        QueensPermutation::new(v.to_vec()).unwrap()
    }

    fn heap_permutations(n: usize) -> Vec<Vec<usize>> {
        fn go(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k <= 1 {
                out.push(a.clone());
                return;
            }
            for i in 0..k {
                go(k - 1, a, out);
                let j = if k % 2 == 0 { i } else { 0 };
                a.swap(j, k - 1);
            }
        }
        let mut out = Vec::new();
        go(n, &mut (0..n).collect(), &mut out);
        out
    }

    fn brute_force_t(n: usize) -> Vec<QueensPermutation> {
        let mut v: Vec<_> = heap_permutations(n)
            .into_iter()
            .map(|s| perm(&s))
            .filter(in_t)
            .collect();
        v.sort();
        v
    }

    /// Every subset of board cells, largest nonattacking size.
    fn brute_force_partial(n: usize) -> usize {
        let cells = n * n;
        let mut best = 0;
        for mask in 0u64..(1u64 << cells) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let queens: Vec<_> = (0..cells)
                .filter(|c| mask >> c & 1 == 1)
                .map(|c| (c / n, c % n))
                .collect();
            if (PartialPlacement { n, queens }).is_valid() {
                best = size;
            }
        }
        best
    }

    #[test]
    fn membership_examples() {
        assert!(in_t(&perm(&[0, 2, 4, 1, 3])));
        assert!(!in_t(&QueensPermutation::identity(5)));
        assert!(in_t(&perm(&[0, 3, 6, 2, 5, 1, 4])));
        assert!(in_t(&perm(&[0, 2, 4, 6, 1, 3, 5])));
        assert!(matches!(
            in_t_checked(&[0, 0, 1]),
            Err(QueensError::NotAPermutation { .. })
        ));
        assert!(matches!(
            in_t_checked(&[0, 5]),
            Err(QueensError::NotAPermutation { .. })
        ));
    }

    #[test]
    fn brute_force_counts() {
        assert_eq!(brute_force_t(5).len(), 10);
        assert_eq!(brute_force_t(7).len(), 28);
    }

    #[test]
    fn enumeration_matches_brute_force_up_to_eight() {
        for n in 1..=8 {
            assert_eq!(enumerate_t(n).unwrap(), brute_force_t(n), "n={n}");
        }
    }

    #[test]
    fn enumeration_sizes_and_order() {
        assert!(enumerate_t(4).unwrap().is_empty());
        assert_eq!(enumerate_t(5).unwrap().len(), 10);
        assert_eq!(enumerate_t(7).unwrap().len(), 28);
        let t13 = enumerate_t(13).unwrap();
        assert!(t13.windows(2).all(|w| w[0] < w[1]));
        assert!(t13.iter().all(in_t));
        assert_eq!(
            enumerate_t(14),
            Err(QueensError::CapExceeded { n: 14, cap: 13 })
        );
        assert_eq!(enumerate_t_capped(14, 20).unwrap().len(), 0);
    }

    #[test]
    fn nonempty_iff_coprime_with_six() {
        for n in 1..=13 {
            let empty = enumerate_t(n).unwrap().is_empty();
            assert_eq!(empty, n.gcd(&6) > 1, "n={n}");
        }
    }

    #[test]
    fn class_examples() {
        let r5 = equivalence_classes(5).unwrap();
        assert_eq!(r5.classes.len(), 1);
        assert_eq!(r5.classes[0].representative, perm(&[0, 2, 4, 1, 3]));
        let r7 = equivalence_classes(7).unwrap();
        let reps: Vec<_> = r7.classes.iter().map(|c| c.representative.clone()).collect();
        assert_eq!(
            reps,
            vec![perm(&[0, 2, 4, 6, 1, 3, 5]), perm(&[0, 3, 6, 2, 5, 1, 4])]
        );
        assert_eq!(equivalence_classes(11).unwrap().classes.len(), 4);
        assert!(equivalence_classes(6).unwrap().classes.is_empty());
    }

    #[test]
    fn classes_partition_and_are_closed() {
        for n in [5, 7, 11, 13] {
            let all = enumerate_t(n).unwrap();
            let report = equivalence_classes(n).unwrap();
            let mut members: Vec<_> = report.classes.iter().flat_map(|c| c.members.clone()).collect();
            members.sort();
            assert_eq!(members, all);
            for c in &report.classes {
                for p in &c.members {
                    assert!(c.members.contains(&p.inverse()));
                    assert!(c.members.contains(&p.shift(1)));
                    assert_eq!(is_linear(p).is_some(), c.linear);
                }
                assert_eq!(c.representative, *c.members.iter().min().unwrap());
            }
            if n > 5 {
                assert!(report.classes.len() >= (n - 3) / 2);
            }
        }
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(lattice_permutation(2, 5).unwrap(), perm(&[0, 2, 4, 1, 3]));
        let p13 = lattice_permutation(2, 13).unwrap();
        assert_eq!(p13, perm(&[0, 2, 4, 6, 8, 10, 12, 1, 3, 5, 7, 9, 11]));
        assert!(in_t(&p13));
        let err = lattice_permutation(2, 6).unwrap_err();
        assert!(err.to_string().contains("m+1=3"), "{err}");
        assert!(lattice_permutation(1, 7).is_err());
        assert!(lattice_permutation(6, 7).is_err());
        for n in 2..40i64 {
            for m in 2..n - 1 {
                if let Ok(p) = lattice_permutation(m, n) {
                    assert!(in_t(&p), "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn linearity_examples() {
        assert_eq!(is_linear(&perm(&[0, 2, 4, 1, 3])), Some((2, 0)));
        assert_eq!(
            is_linear(&perm(&[0, 2, 4, 6, 11, 9, 12, 5, 3, 1, 7, 10, 8])),
            None
        );
        let shifted = perm(&[3, 4, 5, 6, 0, 1, 2]);
        assert_eq!(is_linear(&shifted), Some((1, 3)));
        assert!(!in_t(&shifted));
    }

    #[test]
    fn small_tables_linear_and_thirteen_not() {
        for n in [5, 7, 11] {
            assert!(enumerate_t(n).unwrap().iter().all(|p| is_linear(p).is_some()));
        }
        assert!(enumerate_t(13).unwrap().iter().any(|p| is_linear(p).is_none()));
    }

    #[test]
    fn closure_examples() {
        let p = perm(&[0, 2, 4, 1, 3]);
        let w = closure_witness(&p).unwrap();
        assert_eq!(w[0], perm(&[0, 3, 1, 4, 2]));
        assert_eq!(w[1], p);
        assert_eq!(w.len(), 6);
        assert!(w.iter().all(in_t));
        assert!(closure_witness(&QueensPermutation::identity(5)).is_err());
        for n in [5, 7, 11] {
            let all = enumerate_t(n).unwrap();
            for p in &all {
                for q in closure_witness(p).unwrap() {
                    assert!(all.binary_search(&q).is_ok());
                }
            }
        }
    }

    #[test]
    fn partial_brute_force_small_boards() {
        assert_eq!(brute_force_partial(4), 2);
        for n in 1..=4 {
            let r = max_partial_toroidal(n, u64::MAX);
            assert!(r.proven_maximum);
            assert!(r.placement.is_valid());
            assert_eq!(r.placement.len(), brute_force_partial(n), "n={n}");
        }
    }

    #[test]
    fn partial_examples() {
        assert_eq!(max_partial_toroidal(5, u64::MAX).placement.len(), 5);
        let four = max_partial_toroidal(4, u64::MAX);
        assert_eq!(four.placement.queens, vec![(0, 0), (1, 2)]);
        assert_eq!(max_partial_toroidal(6, u64::MAX).placement.len(), 4);
    }

    #[test]
    fn partial_sizes_up_to_ten() {
        for n in 1..=10 {
            let r = max_partial_toroidal(n, u64::MAX);
            assert!(r.proven_maximum && r.placement.is_valid());
            let size = r.placement.len();
            assert!(size + 2 >= n, "n={n}");
            if n % 3 != 0 && n % 4 != 0 {
                assert!(size + 1 >= n, "n={n}");
            }
            assert_eq!(size == n, n.gcd(&6) == 1, "n={n}");
        }
    }

    #[test]
    fn budget_exhaustion_clears_flag() {
        let r = max_partial_toroidal(9, 5);
        assert!(!r.proven_maximum);
        assert!(r.placement.is_valid());
    }

    #[test]
    fn parse_and_display() {
        let p: QueensPermutation = "0,2,4,1,3".parse().unwrap();
        assert_eq!(p.to_string(), "0,2,4,1,3");
        assert!("0,2,x".parse::<QueensPermutation>().is_err());
        assert!("0,0".parse::<QueensPermutation>().is_err());
    }
}
