//! Sublinear one-sided testers.
//!
//! Every rejection carries a witness built from oracle answers, so a valid
//! numbering is accepted with probability one. Walks that run out of budget
//! or hit the per-call navigation cap simply stop.

use thiserror::Error;

use crate::exact::{check_by_conflicts, sweepline_conflicts, OrderViolation, Verdict, WalkDirection, Witness};
use crate::graph::{ConflictingPair, Label, LabeledGraph, VertexId};
use crate::navigator::{call_cap, default_ell, neighbors, next_step, parent, prev_step, Step};
use crate::oracle::{Capped, Oracle, OracleError, ReversedOracle};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TesterError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("tester constants must be at least 1")]
    InvalidConstant,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("FIN testing is defined for undirected graphs only")]
    DirectedUnsupported,
}

/// All tunables of the testers.
#[derive(Debug, Clone, PartialEq)]
pub struct TesterParams {
    pub epsilon: f64,
    /// Locality; `None` means `⌈n^{1/3}⌉`.
    pub ell: Option<u32>,
    pub c_local: f64,
    /// Global sample constant; `None` means `⌈10·√(200·d)⌉`.
    pub c_global: Option<f64>,
    pub c_simple: f64,
    pub budget_factor: u64,
    pub seed: u64,
}

impl TesterParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            ell: None,
            c_local: 60.0,
            c_global: None,
            c_simple: 6.0,
            budget_factor: 10,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ell(mut self, ell: u32) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn validate(&self) -> Result<(), TesterError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(TesterError::InvalidEpsilon(self.epsilon));
        }
        let consts = [self.c_local, self.c_simple, self.c_global.unwrap_or(1.0)];
        if consts.iter().any(|&c| c.is_nan() || c < 1.0) || self.budget_factor == 0 || self.ell == Some(0) {
            return Err(TesterError::InvalidConstant);
        }
        Ok(())
    }

    pub fn ell_for(&self, n: u32) -> u32 {
        self.ell.unwrap_or_else(|| default_ell(n))
    }

    pub fn c_global_for(&self, d: usize) -> f64 {
        self.c_global.unwrap_or_else(|| (10.0 * (200.0 * d as f64).sqrt()).ceil())
    }

    /// Vertices sampled by each of the L1 and L2 walks.
    pub fn local_samples(&self) -> u64 {
        ceil(self.c_local / self.epsilon)
    }

    /// Edges sampled by the L3 walk.
    pub fn edge_samples(&self, d: usize) -> u64 {
        ceil(self.c_local * d as f64 / self.epsilon)
    }

    pub fn global_samples(&self, n: u32, d: usize) -> (u64, SampleBranch) {
        let ell = self.ell_for(n) as f64;
        let formula = ceil(self.c_global_for(d) * (n as f64 / ell).sqrt() / self.epsilon);
        let cube = ceil((d as f64 / self.epsilon).powi(3));
        if cube > formula {
            (cube, SampleBranch::Cube)
        } else {
            (formula, SampleBranch::Formula)
        }
    }

    pub fn simple_samples(&self, n: u32) -> u64 {
        ceil(self.c_simple * (n as f64 / self.epsilon).sqrt())
    }

    /// Sum of the per-subtest caps of the combined tester.
    pub fn combined_budget(&self, n: u32, d: usize) -> u64 {
        let call = call_cap(d, self.ell_for(n));
        let local = (2 * self.local_samples() + self.edge_samples(d)).saturating_mul(call);
        let global = 2 * self.global_samples(n, d).0 * (d as u64 + 1);
        self.budget_factor.saturating_mul(local.saturating_add(global))
    }

    /// The combined tester reads the whole graph when its local probes
    /// alone would touch `d·n` slots.
    pub fn uses_fallback(&self, n: u32, d: usize) -> bool {
        2 * self.local_samples() + self.edge_samples(d) >= d as u64 * n as u64
    }
}

/// Which term set the global sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleBranch {
    Formula,
    Cube,
}

impl SampleBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleBranch::Formula => "formula",
            SampleBranch::Cube => "cube",
        }
    }
}

fn ceil(x: f64) -> u64 {
    // Absorb rounding noise such as 60 / (1/33) = 1980.0000000000002.
    (x - 1e-9).ceil().max(1.0) as u64
}

/// Short-circuits a walk on budget exhaustion.
enum Halt {
    Reject(Witness),
    Stop,
}

impl From<OracleError> for Halt {
    fn from(_: OracleError) -> Self {
        Halt::Stop
    }
}

type Walk = Result<(), Halt>;

fn conflict(v: Label, u: Label, w: Label) -> Halt {
    Halt::Reject(Witness::Conflict(ConflictingPair { v, u, w }))
}

fn order(at: Label, found: Option<Label>, direction: WalkDirection) -> Halt {
    Halt::Reject(Witness::Order(OrderViolation { at, found, direction }))
}

/// Largest forward-neighbor label of `x`, if any exceeds `bound`.
fn neighbor_above<O: Oracle>(o: &mut O, x: VertexId, bound: Label) -> Result<Option<Label>, OracleError> {
    let dir = o.forward();
    let mut best = None;
    for y in neighbors(o, x, dir)? {
        let ly = o.label_query(y)?;
        if ly > bound && best.is_none_or(|b| ly > b) {
            best = Some(ly);
        }
    }
    Ok(best)
}

struct Ctx {
    ell: u32,
    cap: u64,
}

impl Ctx {
    fn new<O: Oracle>(o: &O, p: &TesterParams) -> Self {
        let ell = p.ell_for(o.n());
        Self { ell, cap: call_cap(o.d(), ell) }
    }
}

/// Forward from `p(v)` toward `v`, looking for a `u` with a neighbor past `v`.
fn walk_l1<O: Oracle>(o: &mut O, c: &Ctx, v: VertexId) -> Walk {
    let lv = o.label_query(v)?;
    let Some((x, lx)) = parent(o, v, lv)? else {
        return Ok(());
    };
    let steps = c.ell.min(lv.0 - lx.0);
    let (mut cur, mut lcur) = (x, lx);
    for _ in 0..steps {
        match next_step(o, cur, lcur, c.cap)? {
            Step::Next(y, ly) => {
                if ly.0 != lcur.0 + 1 {
                    return Err(order(lcur, Some(ly), WalkDirection::Forward));
                }
                if ly >= lv {
                    break;
                }
                if let Some(w) = neighbor_above(o, y, lv)? {
                    return Err(conflict(lv, ly, w));
                }
                cur = y;
                lcur = ly;
            }
            // `cur` and `v` share a component and `v` is larger.
            Step::EndOfComponent => return Err(order(lcur, None, WalkDirection::Forward)),
            Step::Inconsistent(_) => break,
        }
    }
    Ok(())
}

/// Backward from `v` while labels stay above `p(v)`.
fn walk_l2<O: Oracle>(o: &mut O, c: &Ctx, v: VertexId) -> Walk {
    let lv = o.label_query(v)?;
    let lp = parent(o, v, lv)?.map_or(Label::VIRTUAL, |(_, l)| l);
    let (mut cur, mut lcur) = (v, lv);
    for _ in 0..c.ell {
        match prev_step(o, cur, lcur, c.cap)? {
            Step::Next(y, ly) => {
                if ly.0 + 1 != lcur.0 {
                    return Err(order(lcur, Some(ly), WalkDirection::Backward));
                }
                if ly <= lp {
                    break;
                }
                if let Some(w) = neighbor_above(o, y, lv)? {
                    return Err(conflict(lv, ly, w));
                }
                cur = y;
                lcur = ly;
            }
            Step::EndOfComponent | Step::Inconsistent(_) => break,
        }
    }
    Ok(())
}

/// Backward from `w` over candidates `v` in `(u, w)` with `p(v) < u`.
fn walk_l3<O: Oracle>(o: &mut O, c: &Ctx, w: VertexId, lu: Label, lw: Label) -> Walk {
    let (mut cur, mut lcur) = (w, lw);
    for _ in 0..c.ell {
        match prev_step(o, cur, lcur, c.cap)? {
            Step::Next(y, ly) => {
                if ly.0 + 1 != lcur.0 {
                    return Err(order(lcur, Some(ly), WalkDirection::Backward));
                }
                if ly <= lu {
                    break;
                }
                let py = parent(o, y, ly)?.map_or(Label::VIRTUAL, |(_, l)| l);
                if py < lu {
                    return Err(conflict(ly, lu, lw));
                }
                cur = y;
                lcur = ly;
            }
            Step::EndOfComponent | Step::Inconsistent(_) => break,
        }
    }
    Ok(())
}

fn finish(r: Walk) -> Option<Verdict> {
    match r {
        Err(Halt::Reject(w)) => Some(Verdict::Reject(w)),
        _ => None,
    }
}

fn local_cap<O: Oracle>(o: &O, p: &TesterParams, samples: u64) -> u64 {
    let c = Ctx::new(o, p);
    p.budget_factor.saturating_mul(samples).saturating_mul(c.cap)
}

pub fn test_l1<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    p.validate()?;
    let samples = p.local_samples();
    let c = Ctx::new(o, p);
    let cap = local_cap(o, p, samples);
    let mut o = Capped::new(o, cap);
    for _ in 0..samples {
        let v = o.sample_vertex();
        match walk_l1(&mut o, &c, v) {
            Err(Halt::Stop) => break,
            r => {
                if let Some(v) = finish(r) {
                    return Ok(v);
                }
            }
        }
    }
    Ok(Verdict::Accept)
}

pub fn test_l2<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    p.validate()?;
    let samples = p.local_samples();
    let c = Ctx::new(o, p);
    let cap = local_cap(o, p, samples);
    let mut o = Capped::new(o, cap);
    for _ in 0..samples {
        let v = o.sample_vertex();
        match walk_l2(&mut o, &c, v) {
            Err(Halt::Stop) => break,
            r => {
                if let Some(v) = finish(r) {
                    return Ok(v);
                }
            }
        }
    }
    Ok(Verdict::Accept)
}

pub fn test_l3<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    p.validate()?;
    if o.is_edgeless() {
        return Err(TesterError::EmptyGraph);
    }
    let samples = p.edge_samples(o.d());
    let c = Ctx::new(o, p);
    let cap = local_cap(o, p, samples);
    let mut o = Capped::new(o, cap);
    for _ in 0..samples {
        let e = match o.sample_edge() {
            Ok(e) => e,
            Err(_) => break,
        };
        if e.lu >= e.lw {
            continue;
        }
        match walk_l3(&mut o, &c, e.w, e.lu, e.lw) {
            Err(Halt::Stop) => break,
            r => {
                if let Some(v) = finish(r) {
                    return Ok(v);
                }
            }
        }
    }
    Ok(Verdict::Accept)
}

/// Samples `s` vertex intervals and `s` edge intervals, then sweeps.
fn sample_and_sweep<O: Oracle>(o: &mut O, s: u64, cap: u64) -> Verdict {
    let mut o = Capped::new(o, cap);
    let mut verts = Vec::with_capacity(s as usize);
    let mut edges = Vec::with_capacity(s as usize);
    'collect: {
        for _ in 0..s {
            let v = o.sample_vertex();
            let Ok(lv) = o.label_query(v) else { break 'collect };
            let Ok(par) = parent(&mut o, v, lv) else { break 'collect };
            verts.push((par.map_or(Label::VIRTUAL, |(_, l)| l), lv));
        }
        if o.is_edgeless() {
            break 'collect;
        }
        for _ in 0..s {
            let Ok(e) = o.sample_edge() else { break 'collect };
            if e.lu < e.lw {
                edges.push((e.lu, e.lw));
            }
        }
    }
    match sweepline_conflicts(&verts, &edges) {
        Some(c) => Verdict::Reject(Witness::Conflict(c)),
        None => Verdict::Accept,
    }
}

pub fn test_global<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    p.validate()?;
    let (s, _) = p.global_samples(o.n(), o.d());
    let cap = p.budget_factor.saturating_mul(2 * s * (o.d() as u64 + 1));
    Ok(sample_and_sweep(o, s, cap))
}

pub fn test_simple<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    p.validate()?;
    let s = p.simple_samples(o.n());
    let cap = p.budget_factor.saturating_mul(2 * s * (o.d() as u64 + 1));
    Ok(sample_and_sweep(o, s, cap))
}

/// Reads every vertex through the oracle and decides exactly.
pub fn read_whole_graph<O: Oracle>(o: &mut O) -> Result<LabeledGraph, OracleError> {
    let n = o.n();
    let dir = o.forward();
    let mut labels = Vec::with_capacity(n as usize);
    let mut edges = Vec::new();
    for x in 1..=n {
        let x = VertexId(x);
        labels.push(o.label_query(x)?.0);
        for y in neighbors(o, x, dir)? {
            if o.is_directed() || x < y {
                edges.push((x.0, y.0));
            }
        }
    }
    Ok(LabeledGraph::build(n, o.d(), &edges, &labels, o.is_directed())
        .expect("oracle answers describe a valid graph"))
}

/// L1, L2, L3 and the global sampler in turn; the first rejection wins.
pub fn test_combined<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    p.validate()?;
    if p.uses_fallback(o.n(), o.d()) {
        return Ok(match read_whole_graph(o) {
            Ok(g) => check_by_conflicts(&g),
            Err(_) => Verdict::Accept,
        });
    }
    for v in [test_l1(o, p)?, test_l2(o, p)?] {
        if !v.is_accept() {
            return Ok(v);
        }
    }
    match test_l3(o, p) {
        Ok(Verdict::Accept) | Err(TesterError::EmptyGraph) => {}
        other => return other,
    }
    test_global(o, p)
}

/// Combined tester over the reverse numbering. Witness labels refer to the
/// reversed numbering.
pub fn test_fin<O: Oracle>(o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
    if o.is_directed() {
        return Err(TesterError::DirectedUnsupported);
    }
    test_combined(&mut ReversedOracle::new(o), p)
}

/// The testers by name, for harnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TesterKind {
    Combined,
    Simple,
    L1,
    L2,
    L3,
    Global,
}

impl TesterKind {
    pub const ALL: [TesterKind; 6] = [
        TesterKind::Combined,
        TesterKind::Simple,
        TesterKind::L1,
        TesterKind::L2,
        TesterKind::L3,
        TesterKind::Global,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TesterKind::Combined => "combined",
            TesterKind::Simple => "simple",
            TesterKind::L1 => "l1",
            TesterKind::L2 => "l2",
            TesterKind::L3 => "l3",
            TesterKind::Global => "global",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn run<O: Oracle>(self, o: &mut O, p: &TesterParams) -> Result<Verdict, TesterError> {
        match self {
            TesterKind::Combined => test_combined(o, p),
            TesterKind::Simple => test_simple(o, p),
            TesterKind::L1 => test_l1(o, p),
            TesterKind::L2 => test_l2(o, p),
            TesterKind::L3 => test_l3(o, p),
            TesterKind::Global => test_global(o, p),
        }
    }
}
