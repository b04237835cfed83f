//! Walking the would-be DFS tree `T` through the oracle.
//!
//! `T` has an edge from `p(v)` to `v` for every vertex with `p(v) != 0`;
//! children are ordered by label. On a valid numbering the pre-order of `T`
//! is exactly the label order, so tree successors are dfs successors.

use crate::graph::{Label, VertexId};
use crate::oracle::{Oracle, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavResult {
    Next(VertexId),
    EndOfComponent,
    Inconsistent(&'static str),
}

/// [`NavResult`] with the label of the returned vertex, which the walk
/// already paid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Next(VertexId, Label),
    EndOfComponent,
    Inconsistent(&'static str),
}

impl From<Step> for NavResult {
    fn from(s: Step) -> Self {
        match s {
            Step::Next(v, _) => NavResult::Next(v),
            Step::EndOfComponent => NavResult::EndOfComponent,
            Step::Inconsistent(r) => NavResult::Inconsistent(r),
        }
    }
}

/// `⌈n^{1/3}⌉`, the default locality.
pub fn default_ell(n: u32) -> u32 {
    let mut l = (n as f64).cbrt().round() as u64;
    while l * l * l < n as u64 {
        l += 1;
    }
    while l > 1 && (l - 1).pow(3) >= n as u64 {
        l -= 1;
    }
    l.max(1) as u32
}

/// Per-call query cap `4·d²·ℓ`.
pub fn call_cap(d: usize, ell: u32) -> u64 {
    4 * (d as u64).pow(2) * ell.max(1) as u64
}

struct Meter {
    start: u64,
    cap: u64,
}

impl Meter {
    fn new<O: Oracle>(o: &O, cap: u64) -> Self {
        Self { start: o.query_count().total(), cap }
    }

    fn over<O: Oracle>(&self, o: &O) -> bool {
        o.query_count().total() - self.start > self.cap
    }
}

const CAP: &str = "per-call query cap exceeded";

/// Neighbors of `v` in one direction, querying slots until the first gap.
pub fn neighbors<O: Oracle>(
    o: &mut O,
    v: VertexId,
    dir: crate::oracle::Direction,
) -> Result<Vec<VertexId>, OracleError> {
    let mut out = Vec::with_capacity(o.d());
    for i in 1..=o.d() {
        match o.neighbor_query(v, i, dir)? {
            Some(w) => out.push(w),
            None => break,
        }
    }
    Ok(out)
}

/// The vertex realizing `p(v)` with its label, or `None` for an orphan.
pub fn parent<O: Oracle>(
    o: &mut O,
    v: VertexId,
    lv: Label,
) -> Result<Option<(VertexId, Label)>, OracleError> {
    let dir = o.backward();
    let mut best: Option<(VertexId, Label)> = None;
    for x in neighbors(o, v, dir)? {
        let lx = o.label_query(x)?;
        if lx < lv && best.is_none_or(|(_, b)| lx > b) {
            best = Some((x, lx));
        }
    }
    Ok(best)
}

/// Children of `u` in `T` with their labels, ascending.
pub fn children_labeled<O: Oracle>(
    o: &mut O,
    u: VertexId,
    lu: Label,
) -> Result<Vec<(Label, VertexId)>, OracleError> {
    let (fwd, bwd) = (o.forward(), o.backward());
    let mut out = Vec::new();
    for w in neighbors(o, u, fwd)? {
        let lw = o.label_query(w)?;
        if lw <= lu {
            continue;
        }
        let mut child = true;
        for x in neighbors(o, w, bwd)? {
            if x == u {
                continue;
            }
            let lx = o.label_query(x)?;
            if lu < lx && lx < lw {
                child = false;
                break;
            }
        }
        if child {
            out.push((lw, w));
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn tree_children<O: Oracle>(o: &mut O, u: VertexId) -> Result<Vec<VertexId>, OracleError> {
    let lu = o.label_query(u)?;
    Ok(children_labeled(o, u, lu)?.into_iter().map(|(_, w)| w).collect())
}

/// Pre-order successor of `v` (label `lv`) in `T`, within `cap` queries.
pub fn next_step<O: Oracle>(
    o: &mut O,
    v: VertexId,
    lv: Label,
    cap: u64,
) -> Result<Step, OracleError> {
    let m = Meter::new(o, cap);
    if let Some(&(l, w)) = children_labeled(o, v, lv)?.first() {
        return Ok(Step::Next(w, l));
    }
    let (mut cur, mut lcur) = (v, lv);
    loop {
        if m.over(o) {
            return Ok(Step::Inconsistent(CAP));
        }
        let Some((par, lpar)) = parent(o, cur, lcur)? else {
            return Ok(Step::EndOfComponent);
        };
        let sib = children_labeled(o, par, lpar)?;
        let Some(pos) = sib.iter().position(|&(_, x)| x == cur) else {
            return Ok(Step::Inconsistent("vertex missing from its parent's children"));
        };
        if let Some(&(l, w)) = sib.get(pos + 1) {
            return Ok(Step::Next(w, l));
        }
        cur = par;
        lcur = lpar;
    }
}

/// Pre-order predecessor of `v` (label `lv`) in `T`, within `cap` queries.
pub fn prev_step<O: Oracle>(
    o: &mut O,
    v: VertexId,
    lv: Label,
    cap: u64,
) -> Result<Step, OracleError> {
    let m = Meter::new(o, cap);
    let Some((par, lpar)) = parent(o, v, lv)? else {
        return Ok(Step::EndOfComponent);
    };
    let sib = children_labeled(o, par, lpar)?;
    let Some(pos) = sib.iter().position(|&(_, x)| x == v) else {
        return Ok(Step::Inconsistent("vertex missing from its parent's children"));
    };
    if pos == 0 {
        return Ok(Step::Next(par, lpar));
    }
    let (mut lw, mut w) = sib[pos - 1];
    loop {
        if m.over(o) {
            return Ok(Step::Inconsistent(CAP));
        }
        match children_labeled(o, w, lw)?.last() {
            None => return Ok(Step::Next(w, lw)),
            Some(&(l, x)) => {
                lw = l;
                w = x;
            }
        }
    }
}

// The public calls are exact on valid numberings, so they run uncapped;
// testers pass `call_cap` to the step functions instead.
const UNCAPPED: u64 = u64::MAX;

pub fn tree_next<O: Oracle>(o: &mut O, v: VertexId) -> Result<NavResult, OracleError> {
    let lv = o.label_query(v)?;
    Ok(next_step(o, v, lv, UNCAPPED)?.into())
}

pub fn tree_prev<O: Oracle>(o: &mut O, v: VertexId) -> Result<NavResult, OracleError> {
    let lv = o.label_query(v)?;
    Ok(prev_step(o, v, lv, UNCAPPED)?.into())
}

/// On a valid numbering, the vertex labeled `label(v) + 1` or the end of
/// `v`'s component.
pub fn dfs_next<O: Oracle>(o: &mut O, v: VertexId) -> Result<NavResult, OracleError> {
    tree_next(o, v)
}

/// On a valid numbering, the vertex labeled `label(v) - 1` or the end of
/// `v`'s component.
pub fn dfs_prev<O: Oracle>(o: &mut O, v: VertexId) -> Result<NavResult, OracleError> {
    tree_prev(o, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::oracle::GraphOracle;

    fn id(x: u32) -> VertexId {
        VertexId(x)
    }

    #[test]
    fn children_examples() {
        let g = star5();
        let mut o = GraphOracle::new(&g, 0);
        assert_eq!(tree_children(&mut o, id(1)).unwrap(), vec![id(2), id(3), id(4), id(5)]);
        let g = p3();
        let mut o = GraphOracle::new(&g, 0);
        assert!(tree_children(&mut o, id(3)).unwrap().is_empty());
        let g = ga();
        let mut o = GraphOracle::new(&g, 0);
        assert_eq!(tree_children(&mut o, id(1)).unwrap(), vec![id(2), id(3)]);
    }

    #[test]
    fn next_and_prev_examples() {
        let g = p3();
        let mut o = GraphOracle::new(&g, 0);
        assert_eq!(tree_next(&mut o, id(1)).unwrap(), NavResult::Next(id(2)));
        assert_eq!(tree_next(&mut o, id(3)).unwrap(), NavResult::EndOfComponent);
        assert_eq!(dfs_next(&mut o, id(2)).unwrap(), NavResult::Next(id(3)));
        assert_eq!(tree_prev(&mut o, id(2)).unwrap(), NavResult::Next(id(1)));
        assert_eq!(tree_prev(&mut o, id(1)).unwrap(), NavResult::EndOfComponent);

        let g = star5();
        let mut o = GraphOracle::new(&g, 0);
        assert_eq!(tree_next(&mut o, id(3)).unwrap(), NavResult::Next(id(4)));
        assert_eq!(tree_prev(&mut o, id(4)).unwrap(), NavResult::Next(id(3)));
        assert_eq!(dfs_next(&mut o, id(5)).unwrap(), NavResult::EndOfComponent);
    }

    #[test]
    fn relabeled_chain() {
        // R3 is P3 walked from the other end.
        let g = r3();
        let mut o = GraphOracle::new(&g, 0);
        assert_eq!(dfs_next(&mut o, id(3)).unwrap(), NavResult::Next(id(2)));
        assert_eq!(dfs_prev(&mut o, id(3)).unwrap(), NavResult::EndOfComponent);
    }

    #[test]
    fn ell_defaults() {
        assert_eq!(default_ell(1), 1);
        assert_eq!(default_ell(8), 2);
        assert_eq!(default_ell(9), 3);
        assert_eq!(default_ell(1000), 10);
        assert_eq!(default_ell(1001), 11);
        assert_eq!(default_ell(1 << 15), 32);
        assert_eq!(default_ell(1 << 18), 64);
        assert_eq!(default_ell(1 << 21), 128);
    }

    #[test]
    fn query_count_is_sum_of_internal_queries() {
        let g = p3();
        let mut o = GraphOracle::new(&g, 0);
        dfs_next(&mut o, id(1)).unwrap();
        // label(v1), two slots of v1, label(v2), two slots of v2, label(v3).
        let c = o.query_count();
        assert_eq!((c.neighbor_queries, c.label_queries), (4, 3));
        let mut replay = GraphOracle::new(&g, 0);
        dfs_next(&mut replay, id(1)).unwrap();
        assert_eq!(replay.query_count(), c);
    }
}
