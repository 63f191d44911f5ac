//! Polymer models and the cluster expansion.
//!
//! Abstract models (weights plus a symmetric interaction) come with exact
//! partition functions, Ursell functions and tabulated cluster expansions.
//! On top of those sit the convergence criterion and the estimation of the
//! random-cluster polymer weights from coupling samples.

mod kp;
mod model;
mod pressure;
mod series;
mod ursell;
mod weights;

pub use kp::{
    certified_radius, default_g_scales, kp_check, kp_check_scaled, size_proportional_g, KpReport,
};
pub use model::{PolymerModel, EXACT_PARTITION_CAP};
pub use pressure::{
    correlation_function, exact_correlation, exact_pressure, pressure_perturbation,
    CorrelationEstimate, PolymerSystem, PressureEstimate, DEFAULT_BATCHES,
};
pub use series::{cluster_expansion, ClusterTable, ClusterTerm, Series, DEFAULT_CLUSTER_CAP};
pub use ursell::{connected_graph_sum, ursell, ursell_bruteforce, MAX_URSELL_ORDER};
pub use weights::{
    block_function, draw_samples, weight_envelope, weight_samples, Coupling, CouplingSample,
    DynamicsCoupling, EstimatorVariant, PlantedCoupling, SiteActivity, WeightEstimate,
    WeightOptions, WeightSamples, MAX_WEIGHT_POLYMER,
};
