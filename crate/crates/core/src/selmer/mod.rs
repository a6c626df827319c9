//! Selmer structures over `Z/p^m` on synthetic global-duality models:
//! modification, dualization, Selmer modules with their `±` invariants,
//! global duality, lozenge diagrams and the core-vertex computations.

mod checks;
mod lab;
mod linalg;
mod model;

pub use checks::{
    check_global_duality, core_vertex_sign, core_vertex_step, lozenge, replay_core_vertex_invariants, CoreStepReport,
    DualityPart, DualityRecord, LozengePart, LozengeReport, ReplayReport,
};
pub use lab::{
    all_lagrangians_rank4, exhaustive_pm3, exhaustive_subgroups_pm3, replay_trials, run_lab, CoreStepTally, LabLedger,
    Tally,
};
pub use linalg::{brute_invariants, enumerate_span, left_kernel, snf, InvariantSeq, Snf, Submodule, Zpm};
pub use model::{
    dual_structure, modify_structure, precedes, random_lagrangian, selmer_module, symplectic_form, Frame,
    LocalCondition, ModelSummary, SelmerModule, SelmerStructureSpec, Sign, SyntheticDualityModel,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelmerError {
    #[error("Z/{p}^{m} is not supported: p must be an odd prime, m >= 1, p^m < 2^31")]
    BadRing { p: u64, m: u32 },
    #[error("frame at place {0} is not a basis")]
    DegenerateFrame(usize),
    #[error("global image on the {0:?} part is not Lagrangian")]
    NotLagrangian(Sign),
    #[error("structure has {got} places, model has {expected}")]
    PlaceCount { expected: usize, got: usize },
    #[error("place {0} is out of range")]
    PlaceOutOfRange(usize),
    #[error("place {0} appears in more than one modification set")]
    Overlap(usize),
    #[error("structures are not nested place by place")]
    NotNested,
    #[error("cokernel of arrow {arrow} on the {sign:?} part is not cyclic")]
    NonCyclicCokernel { arrow: &'static str, sign: Sign },
    #[error("precondition failed: {0}")]
    Precondition(String),
}
