// Bench-only crate; see benches/solvers.rs.
