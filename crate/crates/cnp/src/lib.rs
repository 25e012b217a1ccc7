//! Runtime for control-network programs: a backtracking interpreter with
//! dynamic control options, a strategy-parameterized generic search algorithm,
//! and bundled example problems (road map, 8-puzzle, annealing TSP).

pub mod dsl;
pub mod engine;
pub mod net;
pub mod problems;
pub mod search;
