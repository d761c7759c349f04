//! Directed and undirected graphs, topology generators, attack simulation,
//! and the controllability and connectivity robustness oracles.

pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod spectral;

pub use error::{GenError, GraphError, OracleError, ParseError, SpectralError};
pub use generators::{generate, GenSpec, Topology};
pub use graph::{DegreeVector, Graph};
pub use oracle::{
    AttackKind, AttackStrategy, AttackTrace, ControllabilityMode, CurveKind, DatasetRecord,
    RobustnessCurve,
};
pub use spectral::{spectral_measures, SpectralMeasures};
