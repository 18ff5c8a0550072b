//! Khovanov homology of periodic links in the solid torus: cube complexes,
//! the cyclic group action, and the surrounding combinatorics.

pub mod diagram;
pub mod equivariant;
pub mod error;
pub mod field;
pub mod homology;
pub mod linalg;
pub mod moduli;
pub mod periodicity;
pub mod permutohedra;
pub mod resolution;

pub use diagram::{
    is_isomorphic, lift_diagram, parse_diagram, quotient_diagram, validate_symmetry, AnnularDiagram,
    Crossing, FreeLoop, OrbitMaps, PeriodicSymmetry, Slot,
};
pub use equivariant::{
    borel_ekh, chain_action, correction_cochain, eigen_decompose, equivariant_complex, verify_fixed_generators,
    verify_smith, BorelTable, ChainAction, CorrectionCochain, EigenDecomposition, FixedGeneratorReport, SmithReport,
};
pub use error::{Error, Result};
pub use field::Field;
pub use homology::{
    akh, annular_complex, homology, kh, khovanov_complex, standard_sign_assignment, Block, BlockKey,
    GradedComplex, Grading, PoincarePolynomial, SignAssignment,
};
pub use resolution::{
    generators, resolve, surgery_surface, Circle, Cube, LabeledGenerator, ResolutionConfig, Sign,
    SurgeryArc, SurgerySurface, Vertex,
};
