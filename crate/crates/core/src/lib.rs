pub mod exact;
pub mod gadgets;
pub mod graph;
pub mod navigator;
pub mod oracle;
pub mod tester;
pub mod transforms;

pub use exact::{
    check_by_conflicts, check_by_simulation, fix_edge, fix_vertex, repair, sweepline_conflicts,
    FixError, OrderViolation, Verdict, WalkDirection, Witness,
};
pub use graph::{
    conflict_matching, first_conflict, fixtures, ConflictType, ConflictingPair, Edit, EditList,
    GraphError, Label, LabeledGraph, VertexId,
};
pub use navigator::{default_ell, dfs_next, dfs_prev, tree_next, tree_prev, NavResult};
pub use oracle::{Direction, GraphOracle, Oracle, OracleError, QueryCounter, ReversedOracle};
pub use tester::{
    test_combined, test_fin, test_global, test_l1, test_l2, test_l3, test_simple, TesterError,
    TesterKind, TesterParams,
};
pub use transforms::{
    check_fin, degree_reduce, degree_reduce_to, fin_parent, reverse_numbering, FinParent,
    TransformError,
};
pub use gadgets::{
    distinguisher_game, farness_certificate, gen_bad, gen_good, gen_path, gen_random_valid,
    gen_random_valid_directed, gen_with_arms, perturb, wilson_interval, ArmType, Family, GadgetError,
    GameReport, Instance,
};
