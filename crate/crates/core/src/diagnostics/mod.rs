//! Measurement engine: deviation from isometry, norms, distribution
//! constants and mixing correlations.

pub mod deviation;
pub mod distribution;
pub mod mixing;
pub mod norms;

pub use deviation::{deviation, deviation_exact, deviation_in_box, deviation_of_matrix, pullback_metric, DeviationReport};
pub use distribution::{distribution_constants, perturbed_constants, shift_law_check, DistributionInput, DistributionReport, ShiftLawReport};
pub use mixing::{mixing_correlation, stage_mixing, MixingReport, PtmSet};
pub use norms::{composition_ratio, norm_estimate, shear_distribution_check, shear_paper_bound, NormReport, ShearLemmaReport};
