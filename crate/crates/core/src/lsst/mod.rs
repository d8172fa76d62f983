mod eval;
mod simulate;
mod subst;
mod syntax;
mod translate;
mod types;
mod typing;

pub use eval::{lsst_step, LBlocked, LConfig, LGlobals, LLoadError, LOutcome, LStepResult, LThread};
pub use simulate::{simulate_check, simulate_with_bound, Divergence, SimulationError, SimulationReport, StepMatch, DEFAULT_RESYNC_BOUND};
pub use subst::subst_lexpr;
pub use syntax::{LExpr, LType, LsstDef, LsstProgram};
pub use translate::{translate, translate_expr, translate_type, translate_value, TranslateError};
pub use types::{lsst_dual, lsst_sub, NotAnLsstSession};
pub use typing::{lsst_synth, lsst_type_check, LEnv, TypedLsstProgram};
