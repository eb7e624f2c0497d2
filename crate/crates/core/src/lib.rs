//! First- and second-order rate regions for discrete memoryless
//! multiple-access channels with degraded message sets.
//!
//! The crate is organized around the pipeline a rate-region experiment runs:
//!
//! 1. [`channel`] — validated channels, input distributions, n-types;
//! 2. [`infogeom`] — information density, mutual-information vector,
//!    conditional dispersion matrix, rank classification;
//! 3. [`mvnorm`] — Gaussian CDF machinery and the inverse quantile region;
//! 4. [`capacity`] — capacity region boundary, achieving distributions,
//!    tangent vectors, feasible directions;
//! 5. [`secondorder`] — the second-order (dispersion) region assembled from
//!    per-distribution pieces;
//! 6. [`fbl_sim`] — finite-blocklength validation: constant-composition
//!    superposition codes, a threshold decoder, and the sampled
//!    information-spectrum converse bound.

pub mod capacity;
pub mod channel;
pub mod fbl_sim;
pub mod infogeom;
pub mod mvnorm;
pub mod secondorder;

pub use capacity::{
    boundary, feasible_directions, pi_set, tangents, CapacityError, FeasibleDirections, PiSet,
    RatePoint, RegionBoundary, TangentPair,
};
pub use channel::{joint_type_project, load_channel, Channel, ChannelError, JointInput, RateVec};
pub use fbl_sim::{
    build_codebook, gaussian_approx_rates, message_counts, simulate_error, verdu_han_bound,
    Codebook, CodebookSpec, ConverseBound, DecoderMode, GaussianApproxRates, SimError, SimOptions,
    SimulationReport,
};
pub use infogeom::{
    dispersion_matrix, info_density, mean_vector, rank_profile, DispersionMatrix, InfoGeomError,
    InfoVector, RankProfile,
};
pub use mvnorm::{
    phi, phi_inv, psi, psi_inverse, region_continuity_gap, symmetric_boundary_point, MvnError,
    QuantileRegion, RegionShape,
};
pub use secondorder::{
    classify, l0_region, single_user_rate, theorem1_region, CaseKind, CaseTag, SecondOrderError,
    SecondOrderRegion, Theorem1Config, Theorem1Region,
};
