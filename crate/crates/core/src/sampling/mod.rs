//! Audit samples drawn from a trained model, classical statistical baselines
//! and the three point estimators for a population's audited total.

mod audit;
mod baseline;
mod estimate;

pub use audit::{extract_audit_sample, select_representatives, AuditRecord, AuditSample, Representative};
pub use baseline::{
    mus_sample, mus_sample_with_start, proportional_allocation, random_sample, stratified_sample,
    systematic_sample, systematic_sample_with_start, BaselineMethod, BaselineParams, BaselineSample, MusPlan,
};
pub use estimate::{difference_estimate, mpu_estimate, ratio_estimate, AmountPair, EstimateMethod, EstimateReport};
