//! Criterion benchmarks for the symbolic kernel and the curvature pipeline.
//! See the `benches/` directory; this library is intentionally empty.
