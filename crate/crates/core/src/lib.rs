//! Maximum capacitated allocations on graphs: exact oracles, multivariate
//! belief propagation, large-graph limits and their applications to
//! hypergraph orientability and CDN load balancing.

pub mod distkit;
pub mod graph;
pub mod bp;
pub mod limits;
pub mod gen;
pub mod apps;
pub mod io;
