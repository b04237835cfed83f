//! Query-counted access to a labeled graph.
//!
//! Testers see a graph only through [`Oracle`]: neighbor queries, label
//! queries, free uniform vertex sampling and rejection-sampled edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Label, LabeledGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("direction not supported by this graph")]
    DirectionUnsupported,
    #[error("graph has no edges")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Undirected,
    Out,
    In,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryCounter {
    pub neighbor_queries: u64,
    pub label_queries: u64,
}

impl QueryCounter {
    pub fn total(&self) -> u64 {
        self.neighbor_queries + self.label_queries
    }
}

/// An edge drawn by [`Oracle::sample_edge`], endpoints ordered by label
/// (`u -> w` for directed graphs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledEdge {
    pub u: VertexId,
    pub w: VertexId,
    pub lu: Label,
    pub lw: Label,
}

/// The testing model's access interface.
pub trait Oracle {
    fn n(&self) -> u32;
    fn d(&self) -> usize;
    fn is_directed(&self) -> bool;
    fn neighbor_query(
        &mut self,
        v: VertexId,
        i: usize,
        dir: Direction,
    ) -> Result<Option<VertexId>, OracleError>;
    fn label_query(&mut self, v: VertexId) -> Result<Label, OracleError>;
    /// Uniform vertex id; free, ids are public.
    fn sample_vertex(&mut self) -> VertexId;
    /// Uniform slot in `1..=d`; free.
    fn sample_slot(&mut self) -> usize;
    fn is_edgeless(&self) -> bool;
    fn query_count(&self) -> QueryCounter;

    /// Uniform edge by rejection over `(vertex, slot)` pairs. Each attempt
    /// costs one neighbor query; a hit adds two label queries.
    fn sample_edge(&mut self) -> Result<SampledEdge, OracleError> {
        if self.is_edgeless() {
            return Err(OracleError::EmptyGraph);
        }
        let dir = self.forward();
        loop {
            let v = self.sample_vertex();
            let i = self.sample_slot();
            if let Some(w) = self.neighbor_query(v, i, dir)? {
                let lv = self.label_query(v)?;
                let lw = self.label_query(w)?;
                return Ok(if self.is_directed() || lv < lw {
                    SampledEdge { u: v, w, lu: lv, lw }
                } else {
                    SampledEdge { u: w, w: v, lu: lw, lw: lv }
                });
            }
        }
    }

    /// Direction used to scan forward edges (out-neighbors).
    fn forward(&self) -> Direction {
        if self.is_directed() {
            Direction::Out
        } else {
            Direction::Undirected
        }
    }

    /// Direction used to scan backward edges (in-neighbors).
    fn backward(&self) -> Direction {
        if self.is_directed() {
            Direction::In
        } else {
            Direction::Undirected
        }
    }
}

/// Oracle over an in-memory graph with a seeded ChaCha stream.
///
/// An optional id permutation hides the generator's id assignment: public
/// id `x` is graph vertex `perm[x]`, and neighbor slots are ordered by
/// public id.
pub struct GraphOracle<'g> {
    graph: &'g LabeledGraph,
    counter: QueryCounter,
    budget: Option<u64>,
    rng: ChaCha8Rng,
    attempts: u64,
    perm: Option<(Vec<u32>, Vec<u32>)>,
}

impl<'g> GraphOracle<'g> {
    pub fn new(graph: &'g LabeledGraph, seed: u64) -> Self {
        Self {
            graph,
            counter: QueryCounter::default(),
            budget: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            attempts: 0,
            perm: None,
        }
    }

    /// Presents vertex `perm[x - 1]` under public id `x`.
    pub fn with_id_permutation(mut self, perm: Vec<u32>) -> Self {
        assert_eq!(perm.len(), self.graph.n() as usize, "permutation length");
        let mut inv = vec![0u32; perm.len() + 1];
        for (i, &x) in perm.iter().enumerate() {
            inv[x as usize] = i as u32 + 1;
        }
        let mut fwd = Vec::with_capacity(perm.len() + 1);
        fwd.push(0);
        fwd.extend(perm);
        self.perm = Some((fwd, inv));
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn set_budget(&mut self, budget: Option<u64>) {
        self.budget = budget;
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Slots drawn so far, i.e. edge-sampling attempts.
    pub fn edge_attempts(&self) -> u64 {
        self.attempts
    }

    fn charge(&mut self, neighbor: bool) -> Result<(), OracleError> {
        if let Some(b) = self.budget {
            if self.counter.total() >= b {
                return Err(OracleError::BudgetExhausted);
            }
        }
        if neighbor {
            self.counter.neighbor_queries += 1;
        } else {
            self.counter.label_queries += 1;
        }
        Ok(())
    }
}

impl Oracle for GraphOracle<'_> {
    fn n(&self) -> u32 {
        self.graph.n()
    }

    fn d(&self) -> usize {
        self.graph.d()
    }

    fn is_directed(&self) -> bool {
        self.graph.is_directed()
    }

    fn neighbor_query(
        &mut self,
        v: VertexId,
        i: usize,
        dir: Direction,
    ) -> Result<Option<VertexId>, OracleError> {
        let inner = match &self.perm {
            Some((fwd, _)) => VertexId(fwd[v.0 as usize]),
            None => v,
        };
        let row = match (self.graph.is_directed(), dir) {
            (false, Direction::Undirected) | (true, Direction::Out) => self.graph.neighbors(inner),
            (true, Direction::In) => self.graph.in_neighbors(inner),
            _ => return Err(OracleError::DirectionUnsupported),
        };
        let ans = if i == 0 || i > row.len() {
            None
        } else if let Some((_, inv)) = &self.perm {
            let mut ids: Vec<u32> = row.iter().map(|w| inv[w.0 as usize]).collect();
            ids.sort_unstable();
            Some(VertexId(ids[i - 1]))
        } else {
            Some(row[i - 1])
        };
        self.charge(true)?;
        Ok(ans)
    }

    fn label_query(&mut self, v: VertexId) -> Result<Label, OracleError> {
        self.charge(false)?;
        let inner = match &self.perm {
            Some((fwd, _)) => VertexId(fwd[v.0 as usize]),
            None => v,
        };
        Ok(self.graph.label(inner))
    }

    fn sample_vertex(&mut self) -> VertexId {
        VertexId(self.rng.gen_range(1..=self.graph.n()))
    }

    fn sample_slot(&mut self) -> usize {
        self.attempts += 1;
        self.rng.gen_range(1..=self.graph.d().max(1))
    }

    fn is_edgeless(&self) -> bool {
        self.graph.edge_count() == 0
    }

    fn query_count(&self) -> QueryCounter {
        self.counter
    }
}

/// Presents the reverse numbering `n + 1 - label` of the wrapped oracle.
pub struct ReversedOracle<O> {
    inner: O,
}

impl<O: Oracle> ReversedOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    fn flip(&self, l: Label) -> Label {
        Label(self.inner.n() + 1 - l.0)
    }
}

impl<O: Oracle> Oracle for ReversedOracle<O> {
    fn n(&self) -> u32 {
        self.inner.n()
    }

    fn d(&self) -> usize {
        self.inner.d()
    }

    fn is_directed(&self) -> bool {
        self.inner.is_directed()
    }

    fn neighbor_query(
        &mut self,
        v: VertexId,
        i: usize,
        dir: Direction,
    ) -> Result<Option<VertexId>, OracleError> {
        self.inner.neighbor_query(v, i, dir)
    }

    fn label_query(&mut self, v: VertexId) -> Result<Label, OracleError> {
        let l = self.inner.label_query(v)?;
        Ok(self.flip(l))
    }

    fn sample_vertex(&mut self) -> VertexId {
        self.inner.sample_vertex()
    }

    fn sample_slot(&mut self) -> usize {
        self.inner.sample_slot()
    }

    fn is_edgeless(&self) -> bool {
        self.inner.is_edgeless()
    }

    fn query_count(&self) -> QueryCounter {
        self.inner.query_count()
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn n(&self) -> u32 {
        (**self).n()
    }
    fn d(&self) -> usize {
        (**self).d()
    }
    fn is_directed(&self) -> bool {
        (**self).is_directed()
    }
    fn neighbor_query(
        &mut self,
        v: VertexId,
        i: usize,
        dir: Direction,
    ) -> Result<Option<VertexId>, OracleError> {
        (**self).neighbor_query(v, i, dir)
    }
    fn label_query(&mut self, v: VertexId) -> Result<Label, OracleError> {
        (**self).label_query(v)
    }
    fn sample_vertex(&mut self) -> VertexId {
        (**self).sample_vertex()
    }
    fn sample_slot(&mut self) -> usize {
        (**self).sample_slot()
    }
    fn is_edgeless(&self) -> bool {
        (**self).is_edgeless()
    }
    fn sample_edge(&mut self) -> Result<SampledEdge, OracleError> {
        (**self).sample_edge()
    }
    fn query_count(&self) -> QueryCounter {
        (**self).query_count()
    }
}

/// Limits the queries made through it to `limit`, on top of any budget of
/// the wrapped oracle.
pub struct Capped<O> {
    inner: O,
    start: u64,
    limit: u64,
}

impl<O: Oracle> Capped<O> {
    pub fn new(inner: O, limit: u64) -> Self {
        let start = inner.query_count().total();
        Self { inner, start, limit }
    }

    pub fn used(&self) -> u64 {
        self.inner.query_count().total() - self.start
    }

    fn check(&self) -> Result<(), OracleError> {
        if self.used() >= self.limit {
            Err(OracleError::BudgetExhausted)
        } else {
            Ok(())
        }
    }
}

impl<O: Oracle> Oracle for Capped<O> {
    fn n(&self) -> u32 {
        self.inner.n()
    }
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn is_directed(&self) -> bool {
        self.inner.is_directed()
    }
    fn neighbor_query(
        &mut self,
        v: VertexId,
        i: usize,
        dir: Direction,
    ) -> Result<Option<VertexId>, OracleError> {
        self.check()?;
        self.inner.neighbor_query(v, i, dir)
    }
    fn label_query(&mut self, v: VertexId) -> Result<Label, OracleError> {
        self.check()?;
        self.inner.label_query(v)
    }
    fn sample_vertex(&mut self) -> VertexId {
        self.inner.sample_vertex()
    }
    fn sample_slot(&mut self) -> usize {
        self.inner.sample_slot()
    }
    fn is_edgeless(&self) -> bool {
        self.inner.is_edgeless()
    }
    fn query_count(&self) -> QueryCounter {
        self.inner.query_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn neighbor_and_label_queries() {
        let g = p3();
        let mut o = GraphOracle::new(&g, 1);
        assert_eq!(o.query_count(), QueryCounter::default());
        assert_eq!(o.neighbor_query(VertexId(2), 1, Direction::Undirected), Ok(Some(VertexId(1))));
        assert_eq!(o.query_count(), QueryCounter { neighbor_queries: 1, label_queries: 0 });
        assert_eq!(o.neighbor_query(VertexId(1), 2, Direction::Undirected), Ok(None));
        assert_eq!(o.query_count().neighbor_queries, 2);
        assert_eq!(o.label_query(VertexId(2)), Ok(Label(2)));
        assert_eq!(
            o.neighbor_query(VertexId(1), 1, Direction::In),
            Err(OracleError::DirectionUnsupported)
        );

        let r = r3();
        let mut o = GraphOracle::new(&r, 1);
        assert_eq!(o.label_query(VertexId(1)), Ok(Label(3)));
        let ga = ga();
        let mut o = GraphOracle::new(&ga, 1);
        assert_eq!(o.label_query(VertexId(4)), Ok(Label(4)));
    }

    #[test]
    fn directed_in_query() {
        let g = LabeledGraph::build(3, 1, &[(1, 2), (2, 3)], &[1, 2, 3], true).unwrap();
        let mut o = GraphOracle::new(&g, 0);
        assert_eq!(o.neighbor_query(VertexId(3), 1, Direction::In), Ok(Some(VertexId(2))));
        assert_eq!(o.neighbor_query(VertexId(3), 1, Direction::Out), Ok(None));
    }

    #[test]
    fn budget_is_never_exceeded() {
        let g = p3();
        let mut o = GraphOracle::new(&g, 1).with_budget(2);
        assert!(o.label_query(VertexId(1)).is_ok());
        assert!(o.label_query(VertexId(2)).is_ok());
        assert_eq!(o.label_query(VertexId(3)), Err(OracleError::BudgetExhausted));
        assert_eq!(
            o.neighbor_query(VertexId(3), 1, Direction::Undirected),
            Err(OracleError::BudgetExhausted)
        );
        assert_eq!(o.query_count().total(), 2);
    }

    #[test]
    fn vertex_sampling_is_free_and_replayable() {
        let g = ga();
        let mut a = GraphOracle::new(&g, 7);
        let mut b = GraphOracle::new(&g, 7);
        let xs: Vec<_> = (0..50).map(|_| a.sample_vertex()).collect();
        let ys: Vec<_> = (0..50).map(|_| b.sample_vertex()).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.query_count().total(), 0);
        let one = LabeledGraph::identity(1, 1, &[]).unwrap();
        assert_eq!(GraphOracle::new(&one, 3).sample_vertex(), VertexId(1));
    }

    #[test]
    fn single_edge_and_empty_graph() {
        let g = LabeledGraph::identity(2, 1, &[(1, 2)]).unwrap();
        let mut o = GraphOracle::new(&g, 5);
        let e = o.sample_edge().unwrap();
        assert_eq!((e.lu, e.lw), (Label(1), Label(2)));
        let g = LabeledGraph::identity(2, 1, &[]).unwrap();
        assert_eq!(GraphOracle::new(&g, 5).sample_edge(), Err(OracleError::EmptyGraph));
    }

    #[test]
    fn reversed_labels() {
        let g = r3();
        let mut o = ReversedOracle::new(GraphOracle::new(&g, 0));
        assert_eq!(o.label_query(VertexId(1)), Ok(Label(1)));
        assert_eq!(o.label_query(VertexId(3)), Ok(Label(3)));
        let e = o.sample_edge().unwrap();
        assert!(e.lu < e.lw);
    }

    #[test]
    fn capped_and_permuted() {
        let g = ga();
        let mut o = GraphOracle::new(&g, 0);
        let mut c = Capped::new(&mut o, 1);
        assert!(c.label_query(VertexId(1)).is_ok());
        assert_eq!(c.label_query(VertexId(1)), Err(OracleError::BudgetExhausted));
        assert_eq!(o.query_count().total(), 1);

        // Public id 1 is vertex 4, whose only neighbor is vertex 2 (public 3).
        let mut o = GraphOracle::new(&g, 0).with_id_permutation(vec![4, 1, 2, 3]);
        assert_eq!(o.label_query(VertexId(1)), Ok(Label(4)));
        assert_eq!(o.neighbor_query(VertexId(1), 1, Direction::Undirected), Ok(Some(VertexId(3))));
        // Vertex 1 has neighbors 2, 3: public ids 3, 4.
        assert_eq!(o.neighbor_query(VertexId(2), 2, Direction::Undirected), Ok(Some(VertexId(4))));
    }
}
