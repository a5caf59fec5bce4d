//! Core engine for finite presentations of extriangulated length categories:
//! loading and validating a presentation, filtration and closure calculus,
//! the torsion-class lattice with its brick labels, and the support tilting
//! correspondences. The `checks` module bundles every structural
//! verification into one battery.

pub mod checks;
pub mod filt;
pub mod lattice;
pub mod model;
pub mod report;
pub mod tautilt;
pub mod torsion;

pub use checks::{run_all_checks, CheckOptions, CheckRun};
pub use filt::Subcat;
pub use model::{CategoryPresentation, LoadError, ObjClass, Violation};
pub use report::Report;
