//! Minimal-length cycle over the circular-arc graph formed by maximal
//! primitive spans on the constraint cycle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::glp::MaximalPrimitive;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MindssError {
    #[error("invalid arc graph: {0}")]
    InvalidGraph(String),
    #[error("no valid cycle exists")]
    NoValidCycle,
    #[error("brute force supports at most {max} arcs, got {got}")]
    TooManyArcs { max: usize, got: usize },
}

/// Cyclic index interval `[start; start + len - 1]` over `n` constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    /// Interval `[i; j]`; `j == i - 1` (cyclically) is read as a full cover.
    pub fn from_ij(i: usize, j: usize, n: usize) -> Self {
        let len = (j + n - i) % n + 1;
        Self { start: i, len }
    }

    pub fn end(&self, n: usize) -> usize {
        (self.start + self.len - 1) % n
    }

    pub fn contains(&self, idx: usize, n: usize) -> bool {
        (idx + n - self.start) % n < self.len
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcGraph {
    pub n: usize,
    pub arcs: Vec<Span>,
}

impl ArcGraph {
    /// Validates ordering, coverage and the absence of nested arcs.
    pub fn new(n: usize, arcs: Vec<Span>) -> Result<Self, MindssError> {
        let bad = |m: &str| Err(MindssError::InvalidGraph(m.to_string()));
        if n == 0 || arcs.is_empty() {
            return bad("empty graph");
        }
        for a in &arcs {
            if a.start >= n || a.len == 0 || a.len > n {
                return bad("arc out of range");
            }
        }
        if arcs.windows(2).any(|w| w[0].start >= w[1].start) {
            return bad("arcs not strictly ordered by start");
        }
        let g = Self { n, arcs };
        let m = g.arcs.len();
        if m > 1 {
            for k in 0..m {
                // unwrapped ends must strictly increase around the circle
                let e0 = g.arcs[k].start + g.arcs[k].len;
                let (s1, l1) = (g.arcs[(k + 1) % m].start, g.arcs[(k + 1) % m].len);
                let e1 = if k + 1 < m { s1 + l1 } else { s1 + l1 + n };
                if e1 <= e0 || g.arcs[k].len == n {
                    return bad("nested arcs");
                }
            }
        }
        let mut covered = vec![false; n];
        for a in &g.arcs {
            for t in 0..a.len {
                covered[(a.start + t) % n] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return bad("constraints left uncovered");
        }
        Ok(g)
    }

    pub fn from_primitives(prims: &[MaximalPrimitive], n: usize) -> Result<Self, MindssError> {
        Self::new(
            n,
            prims
                .iter()
                .map(|p| Span {
                    start: p.start,
                    len: p.len,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Start of arc `k + j` unwrapped past the start of arc `k`.
    fn start_after(&self, k: usize, j: usize) -> usize {
        let m = self.arcs.len();
        let base = self.arcs[k].start;
        let s = self.arcs[(k + j) % m].start;
        if s >= base {
            s
        } else {
            s + self.n
        }
    }

    /// End of arc `k - j` (inclusive, unwrapped before arc `k`), as a signed
    /// offset to allow wrapping below zero.
    fn end_before(&self, k: usize, j: usize) -> i64 {
        let m = self.arcs.len();
        let i = (k + m - j) % m;
        let a = self.arcs[i];
        let e = (a.start + a.len - 1) as i64;
        if a.start <= self.arcs[k].start {
            e
        } else {
            e - self.n as i64
        }
    }
}

/// How consecutive chosen arcs must meet.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    /// Share at least one constraint.
    #[default]
    Overlap,
    /// Overlap or be index-adjacent (the union has no gap).
    Touch,
}

impl Link {
    fn slack(self) -> usize {
        match self {
            Link::Overlap => 0,
            Link::Touch => 1,
        }
    }
}

/// Farthest successor of arc `k` that still overlaps it.
pub fn forward(g: &ArcGraph, k: usize) -> usize {
    forward_with(g, k, Link::Overlap)
}

pub fn forward_with(g: &ArcGraph, k: usize, link: Link) -> usize {
    let m = g.arcs.len();
    let end = g.arcs[k].start + g.arcs[k].len - 1 + link.slack();
    let mut best = 0;
    for j in 1..m {
        if g.start_after(k, j) <= end {
            best = j;
        } else {
            break;
        }
    }
    (k + best) % m
}

/// Farthest predecessor of arc `k` that still overlaps it.
pub fn backward(g: &ArcGraph, k: usize) -> usize {
    backward_with(g, k, Link::Overlap)
}

pub fn backward_with(g: &ArcGraph, k: usize, link: Link) -> usize {
    let m = g.arcs.len();
    let start = g.arcs[k].start as i64;
    let mut best = 0;
    for j in 1..m {
        if g.end_before(k, j) + link.slack() as i64 >= start {
            best = j;
        } else {
            break;
        }
    }
    (k + m - best) % m
}

/// Smallest interval `[backward(forward(k)); forward(k)]` of arc indices.
pub fn smallest_separator(g: &ArcGraph) -> Vec<usize> {
    smallest_separator_with(g, Link::Overlap)
}

pub fn smallest_separator_with(g: &ArcGraph, link: Link) -> Vec<usize> {
    let m = g.arcs.len();
    let mut best: Option<(usize, usize, usize)> = None;
    for k in 0..m {
        let f = forward_with(g, k, link);
        let b = backward_with(g, f, link);
        let size = (f + m - b) % m + 1;
        if best.is_none_or(|(s, start, _)| size < s || (size == s && b < start)) {
            best = Some((size, b, f));
        }
    }
    let (size, b, _) = best.unwrap();
    (0..size).map(|t| (b + t) % m).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveCycle {
    pub length: usize,
    #[serde(default)]
    pub link: Link,
    pub chosen: Vec<usize>,
    /// `breakpoints[p]` is the first constraint of the arc after `chosen[p]`;
    /// with overlapping links it also lies in `chosen[p]`.
    pub breakpoints: Vec<usize>,
}

impl PrimitiveCycle {
    fn from_chosen(g: &ArcGraph, chosen: Vec<usize>, link: Link) -> Self {
        let l = chosen.len();
        let breakpoints = (0..l).map(|p| g.arcs[chosen[(p + 1) % l]].start).collect();
        Self {
            length: l,
            link,
            chosen,
            breakpoints,
        }
    }

    /// Checks the link rule, coverage and breakpoint membership.
    pub fn is_valid_for(&self, g: &ArcGraph) -> bool {
        let l = self.chosen.len();
        if l == 0 || self.length != l || self.breakpoints.len() != l {
            return false;
        }
        if l == 1 {
            return g.arcs[self.chosen[0]].len == g.n;
        }
        let mut covered = vec![false; g.n];
        for p in 0..l {
            let a = g.arcs[self.chosen[p]];
            let b = g.arcs[self.chosen[(p + 1) % l]];
            let bp = self.breakpoints[p];
            let meets = a.contains(bp, g.n) || (self.link == Link::Touch && a.contains((bp + g.n - 1) % g.n, g.n));
            if !meets || !b.contains(bp, g.n) {
                return false;
            }
            for t in 0..a.len {
                covered[(a.start + t) % g.n] = true;
            }
        }
        covered.iter().all(|&c| c)
    }
}

/// Greedy forward chain from arc `s`; `None` when it gets stuck.
fn chain_from(g: &ArcGraph, s: usize, link: Link) -> Option<Vec<usize>> {
    let m = g.arcs.len();
    let n = g.n;
    let target = g.arcs[s].start + n;
    let mut chosen = vec![s];
    let mut cur = s;
    let mut cur_start = g.arcs[s].start;
    loop {
        let a = g.arcs[cur];
        if a.len == n {
            return (chosen.len() == 1).then_some(chosen);
        }
        if cur_start + a.len + link.slack() > target {
            return Some(chosen);
        }
        let next = forward_with(g, cur, link);
        if next == cur || chosen.len() > m {
            return None;
        }
        cur_start += (g.arcs[next].start + n - a.start) % n;
        cur = next;
        chosen.push(cur);
    }
}

fn min_cycle_with(g: &ArcGraph, link: Link) -> Option<PrimitiveCycle> {
    if let Some(k) = g.arcs.iter().position(|a| a.len == g.n) {
        return Some(PrimitiveCycle::from_chosen(g, vec![k], link));
    }
    smallest_separator_with(g, link)
        .into_iter()
        .filter_map(|s| chain_from(g, s, link))
        .min_by_key(|c| c.len())
        .map(|c| PrimitiveCycle::from_chosen(g, c, link))
}

/// Minimal cycle: greedy chains from every arc of the smallest separator,
/// shortest kept (first one on ties). Arcs that only touch are linked when
/// no cycle of overlapping arcs exists.
pub fn min_cycle(g: &ArcGraph) -> Result<PrimitiveCycle, MindssError> {
    min_cycle_with(g, Link::Overlap)
        .or_else(|| {
            log::debug!("no overlapping cycle, linking touching arcs");
            min_cycle_with(g, Link::Touch)
        })
        .ok_or(MindssError::NoValidCycle)
}

pub const BRUTE_FORCE_MAX_ARCS: usize = 14;

/// Exhaustive search over arc subsets, in cyclic start order.
pub fn brute_force_min_cycle(g: &ArcGraph) -> Result<PrimitiveCycle, MindssError> {
    let m = g.arcs.len();
    if m > BRUTE_FORCE_MAX_ARCS {
        return Err(MindssError::TooManyArcs {
            max: BRUTE_FORCE_MAX_ARCS,
            got: m,
        });
    }
    for link in [Link::Overlap, Link::Touch] {
        let mut best: Option<PrimitiveCycle> = None;
        for mask in 1u32..(1 << m) {
            let chosen: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
            if best.as_ref().is_some_and(|b| b.length <= chosen.len()) {
                continue;
            }
            let cand = PrimitiveCycle::from_chosen(g, chosen, link);
            if cand.is_valid_for(g) {
                best = Some(cand);
            }
        }
        if best.is_some() {
            return best.ok_or(MindssError::NoValidCycle);
        }
    }
    Err(MindssError::NoValidCycle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, ij: &[(usize, usize)]) -> ArcGraph {
        ArcGraph::new(n, ij.iter().map(|&(i, j)| Span::from_ij(i, j, n)).collect()).unwrap()
    }

    fn reversed(g: &ArcGraph) -> ArcGraph {
        let n = g.n;
        let mut arcs: Vec<Span> = g
            .arcs
            .iter()
            .map(|a| Span {
                start: (2 * n - 1 - (a.start + a.len - 1)) % n,
                len: a.len,
            })
            .collect();
        arcs.sort_by_key(|a| a.start);
        ArcGraph::new(n, arcs).unwrap()
    }

    #[test]
    fn forward_examples() {
        let g = graph(8, &[(0, 3), (2, 5), (4, 7), (6, 1)]);
        assert_eq!(forward(&g, 0), 1);
        let full = graph(8, &[(0, 7)]);
        assert_eq!(forward(&full, 0), 0);
        let chain = graph(6, &[(0, 2), (1, 3), (2, 4), (3, 5)]);
        assert_eq!(forward(&chain, 0), 2);
    }

    #[test]
    fn backward_mirrors_forward() {
        let g = graph(8, &[(0, 3), (2, 5), (4, 7), (6, 1)]);
        assert_eq!(backward(&g, 1), 0);
        assert_eq!(backward(&graph(8, &[(0, 7)]), 0), 0);
        let chain = graph(6, &[(0, 2), (1, 3), (2, 4), (3, 5)]);
        assert_eq!(backward(&chain, 2), 0);
        // reversing indices swaps the roles of forward and backward
        for g in [g, chain] {
            let r = reversed(&g);
            let m = g.len();
            let map = |k: usize| {
                let a = g.arcs[k];
                let s = (2 * g.n - 1 - (a.start + a.len - 1)) % g.n;
                r.arcs.iter().position(|b| b.start == s).unwrap()
            };
            for k in 0..m {
                assert_eq!(map(forward(&g, k)), backward(&r, map(k)));
            }
        }
    }

    #[test]
    fn separator_examples() {
        let g = graph(8, &[(0, 3), (2, 5), (4, 7), (6, 1)]);
        assert_eq!(smallest_separator(&g), vec![0, 1]);
        assert_eq!(smallest_separator(&graph(5, &[(0, 4)])), vec![0]);
    }

    #[test]
    fn min_cycle_examples() {
        let g = graph(8, &[(0, 3), (2, 5), (4, 7), (6, 1)]);
        let c = min_cycle(&g).unwrap();
        assert_eq!(c.length, 4);
        assert!(c.is_valid_for(&g));
        assert_eq!(brute_force_min_cycle(&g).unwrap().length, 4);

        let full = graph(8, &[(0, 7)]);
        let c = min_cycle(&full).unwrap();
        assert_eq!((c.length, c.chosen.clone()), (1, vec![0]));
        assert_eq!(brute_force_min_cycle(&full).unwrap(), c);

        let g = graph(10, &[(0, 4), (3, 8), (7, 1)]);
        let c = min_cycle(&g).unwrap();
        assert_eq!(c.length, 3);
        assert_eq!(c.chosen.iter().copied().collect::<std::collections::BTreeSet<_>>().len(), 3);
        assert_eq!(brute_force_min_cycle(&g).unwrap().length, 3);
    }

    #[test]
    fn invalid_graphs() {
        let n = 8;
        let nested = vec![Span::from_ij(0, 5, n), Span::from_ij(1, 3, n), Span::from_ij(6, 0, n)];
        assert!(ArcGraph::new(n, nested).is_err());
        let gap = vec![Span::from_ij(0, 2, n), Span::from_ij(4, 7, n)];
        assert!(ArcGraph::new(n, gap).is_err());
        let many = ArcGraph::new(20, (0..15).map(|s| Span { start: s, len: 6 }).collect()).unwrap();
        assert!(matches!(brute_force_min_cycle(&many), Err(MindssError::TooManyArcs { .. })));
    }

    #[test]
    fn touching_arcs_fall_back() {
        // spans meet without sharing a constraint
        let g = graph(8, &[(0, 3), (4, 7)]);
        assert_eq!(forward(&g, 0), 0);
        assert_eq!(forward_with(&g, 0, Link::Touch), 1);
        let c = min_cycle(&g).unwrap();
        assert_eq!((c.length, c.link), (2, Link::Touch));
        assert!(c.is_valid_for(&g));
        assert_eq!(brute_force_min_cycle(&g).unwrap(), c);
    }
}
