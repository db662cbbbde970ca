//! Finite combinatorics of the `n`-ary ab initio construction with the clique
//! predimension: structures, strong substructures, amalgams, associated
//! geometries, the `geo` and hat operators, finite approximations of generic
//! structures, and exhaustive verification of their properties.

pub mod amalgam;
pub mod canon;
pub mod chain;
pub mod classes;
pub mod document;
pub mod enumerate;
pub mod error;
pub mod geometry;
pub mod random;
pub mod structure;
pub mod verify;
pub mod vset;

pub use amalgam::{geometric_amalgam, mixed_extension_search, standard_amalgam, surgery, AmalgamKind, AmalgamProblem};
pub use canon::{canonical_form, relative_canonical_form};
pub use chain::{build_generic, hat, ChainApproximation, ChainConfig};
pub use classes::{ClassCheck, ClassId};
pub use document::{parse_structure, serialize_structure, to_dot, StructureDocument};
pub use error::{Error, Result};
pub use geometry::{geometries_equal, geometry_of, FlatFamily, FlatnessReport, Geometry, GeometryKind};
pub use structure::{card_star, SStructure, MAX_VERTICES};
pub use verify::{verify_suite, PropertyId, VerificationReport, VerifyConfig};
pub use vset::{VSet, Vertex};
