//! A bivariant theory on the site of finite sets: the universal span theory,
//! a multiplicity-function target theory and the transformation between them,
//! with property checks for the axioms.

mod checks;
mod cycle;
mod ideal;
mod site;

pub use checks::{
    intersection_product, reproduce, run_check, strong_orientation_inverse, Budget, Check, CheckReport,
    Chooser, Counterexample, Diagram, Limits, Origin,
};
pub use cycle::{canonical_span, to_target, Bivariant, CycleJson, CycleTermJson, MultFn, SkippedPullback, SpanCycle, Universal};
pub use ideal::{closure_check, ideal_span, ClosureFailure, ClosureReport, IdealElement, IdealOperation, IdealWitness, SpanBudget};
pub use site::{all_maps, FibreProduct, FinMap};
