//! Fixtures shared by the benchmarks in `benches/`.

use gcf_core::corpus::corpus_entry;
use gcf_core::{build_grid, ConvexBody, Resolution};

/// Corpus entry 1 on the standard grid of dimension `dim`.
pub fn fixture(dim: usize) -> ConvexBody {
    let grid = build_grid(dim, Resolution::standard(dim).expect("dim is 1 or 2")).expect("standard grid");
    corpus_entry(grid, 1).expect("corpus entries are valid").body
}
