//! Criterion benchmarks for the oracle, the closed-form comparison and the
//! geodesic integrator. Run with `cargo bench -p seqwarp-bench`.
