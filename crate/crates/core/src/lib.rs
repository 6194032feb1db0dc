//! Scattering quantum walks on graphs and their use for locating structural
//! anomalies: a loop or dummy loop on a star, a clique hanging off a star,
//! the vertex shared by two stars and an extra edge in a complete bipartite
//! graph.
//!
//! The crate builds the walk on the full directed-edge space, reduces it onto
//! small invariant subspaces, checks the closed-form reduced matrices and
//! their perturbative spectra, and runs the search procedures against a
//! classical adjacency-list baseline.

pub mod adjacency;
pub mod builders;
pub mod error;
pub mod graph;
pub mod scenario;
pub mod search;
mod serde_util;
pub mod spectral;
pub mod subspace;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, VertexBehavior, VertexId};
pub use scenario::{Scenario, ScenarioParams};
