//! Disentanglement of the encoder's latents with respect to chosen
//! attributes: the β-VAE, FactorVAE, MIG and DCI scores, plus the small
//! classifiers and estimators they are built from.

mod classifier;
mod factors;
mod metrics;
mod mi;
mod tree;

pub use classifier::{LinearClassifier, MajorityVote};
pub use factors::{fixed_factor_batches, Factor, FactorSpec, FixedFactorBatch, LatentTable, OTHER_BUCKET};
pub use metrics::{
    beta_vae_score, dci_from_importance, dci_score, factor_vae_score, mig_score, run_all_metrics,
    run_all_metrics_on_tables, score_table, DisentanglementReport, MetricFailure, MetricScore, ProtocolParams,
    SeedScores,
};
pub use mi::{discretize_equal_width, entropy, mutual_information};
pub use tree::DecisionTree;
