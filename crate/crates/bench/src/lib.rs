//! Fixed inputs for the benchmarks.

use dfs_certify::{gen_random_valid, LabeledGraph};

/// Sizes the scaling benches run over.
pub const SIZES: [u32; 3] = [1 << 12, 1 << 14, 1 << 16];

/// Valid random instance, degree bound 4.
pub fn valid_instance(n: u32, seed: u64) -> LabeledGraph {
    gen_random_valid(n, 4, seed).expect("n >= 1").graph
}
