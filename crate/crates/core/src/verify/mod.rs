//! Randomized verification of the bounds against extremal witnesses.
//!
//! An [`InstanceSpec`] names a theorem, two scales, coefficient function
//! families and a seed. [`run_verification`] samples `count` instances,
//! builds a witness for each by forward recursion, re-checks the witness
//! against its hypothesis by brute-force summation, evaluates the bound
//! and aggregates everything into a [`VerifySummary`].

mod recheck;
mod rng;
mod run;
mod spec;
mod witness;

pub use recheck::{
    check_comparison, check_corollary, check_integrodynamic, check_kernel, check_system, WitnessCheck,
    WITNESS_TOLERANCE,
};
pub use rng::InstanceRng;
pub use run::{
    run_verification, InstanceDigest, PointRow, SlackStats, VariantStatus, VariantSummary, Verification,
    VerifySummary,
};
pub use spec::{
    FunctionSpec, InstanceSpec, KernelSpec, ScaleSpec, Theorem, VariantSelection, WitnessMode, MAX_DEGREE,
    SAMPLED_MAX,
};
pub use witness::{
    witness_comparison, witness_corollary, witness_integrodynamic, witness_kernel, witness_system,
};
