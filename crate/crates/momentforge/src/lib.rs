pub mod arrangement;
pub mod cli_io;
pub mod constructions;
pub mod exact_arith;
pub mod fixtures;
pub mod graph_ops;
pub mod moment_map;
pub mod numeric_verify;
pub mod polynomials;
pub mod reeb_sweep;
