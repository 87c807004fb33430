//! Exact arithmetic toolkit for polynomial systems over finite fields whose
//! variables pass through univariate substitutions: value sets and power-sum
//! invariants, solution counting, divisibility guarantees and their
//! verification, and a truncated p-adic model.

pub mod counting;
pub mod error;
pub mod extended;
pub mod gf;
pub mod instance;
pub mod multipoly;
pub mod padic;
pub mod random;
pub mod repro;
pub mod theorems;
pub mod unipoly;
pub mod weights;

pub use counting::{CountMethod, CountResult, MethodChoice, SystemInstance};
pub use error::{Error, Result};
pub use extended::NatOrInf;
pub use gf::{FieldCtx, FieldSpec, FqElem};
pub use multipoly::{IDegree, IndexSet, MultiPoly, Term};
pub use unipoly::{Classification, FAnalysis, UniPoly};
pub use instance::{parse_instance, InstanceFile};
pub use theorems::{Guarantee, TheoremId, VerificationReport};
