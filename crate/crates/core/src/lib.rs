//! Summarizing large multi-way contingency tables by sequential paired
//! category collapsing, and fitting hierarchical log-linear (partition) models
//! to the collapsed and original tables.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix it to `f64`, which is what the command-line tool uses.
//!
//! ```
//! use catcollapse::{run_pcc, Table, Treatment, TreatmentConfig};
//!
//! let table = Table::from_dense(vec![2, 3], &[10.0, 20.0, 30.0, 30.0, 20.0, 10.0]).unwrap();
//! let trace = run_pcc(&table, &TreatmentConfig::uniform(Treatment::Nominal, 2)).unwrap();
//! assert_eq!(trace.steps[0].dfmod, 5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hllm;
pub mod infoloss;
pub mod pcc;
pub mod scalar;
pub mod table;

pub use error::{Error, Result};
pub use hllm::{
    backward_select, fit_hllpm, independence_model, ipf_fit, model_df, pearson_ratios, BackwardRow,
    BackwardTrace, FitResult, IpfOptions, ModelSpec, Term,
};
pub use infoloss::{
    g2_independence, guarded_plogp, loss_matrix, pair_loss, LossMatrix, PairLoss, PairMode,
};
pub use pcc::{
    adjusted_rsq, exhaustive_partition_search, info_concentration, penalized_scores, run_pcc,
    run_pcc_with, select_merge, PccOptions, PccStep, PccTrace, TreatmentConfig,
};
pub use scalar::Scalar;
pub use table::{
    build_table, expand_model, CategoryScheme, DenseTable, ExpandedModel, Partition, SparseTable,
    Treatment, VariableDef,
};

pub type Table = SparseTable<f64>;
pub type Table32 = SparseTable<f32>;
pub type Trace = PccTrace<f64>;
pub type Step = PccStep<f64>;
pub type Fit = FitResult<f64>;
pub type Backward = BackwardTrace<f64>;
pub type Losses = LossMatrix<f64>;
