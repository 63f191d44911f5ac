//! Criterion benchmarks for rcx-core live under benches/.
