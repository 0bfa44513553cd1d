//! One-dimensional Gaussian mixtures over distance features: EM fitting,
//! posteriors, Bayes decision boundaries and fit diagnostics.

mod boundaries;
mod em;
mod gof;
mod model;

pub use boundaries::{bayes_boundaries, BayesBoundaries};
pub use em::{fit_gmm, select_modes, EmConfig, EmRun, GmmFit, ModeCandidate, ModeSelection, SD_FLOOR_FRACTION};
pub use gof::{chi_square_gof, qq_data, GofResult, QqData};
pub use model::{normal_cdf, normal_pdf, GmmModel, GmmParams, WEIGHT_SUM_TOLERANCE};
