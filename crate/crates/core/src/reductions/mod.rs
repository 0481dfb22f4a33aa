//! Gap Hamming-style Sum-Equal and the reduction from augmented indexing.

mod augindex;
mod ghse;

pub use augindex::{
    augindex_to_ghse, bias_report, default_family, disagreement_bias, disagreement_bias_closed_form, padding,
    split_copy, BiasReport, GhseReduction, HashGrid,
};
pub use ghse::{
    copy_amplify, ghse_decide, hse_evaluate, hse_value, GhseDecision, GhseInstance, GhseLabel, HseEvaluation,
};
