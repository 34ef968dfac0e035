//! Carleman inequality benches, the annulus lower-bound scan and Hardy-threshold scans.

mod annulus;
mod convexity;
mod hardy;
mod l110;

pub use annulus::{annulus_lower_bound_scan, annulus_masses, AnnulusFit, CENTRAL_MASS_FLOOR, DELTA_FLOOR};
pub use convexity::{
    convexity_carleman, prefactor_identity, test_library, CarlemanCase, CarlemanReport, PrefactorIdentity, Profile,
    TestFunction, CARLEMAN_SLACK,
};
pub use hardy::{
    cutoff_theta, hardy_cutoff_pipeline, hardy_threshold_exponent, sup_threshold_exponent, term_ii_growth,
    threshold_scan, PipelineParams, PipelineReport, ThresholdRow, ThresholdScan, DEFAULT_DELTA_CONSTANT, EPS_MAX,
};
pub use l110::{
    l110_stability, packet_library, schrodinger_carleman_l110, L110Case, L110Report, L110Stability, WavePacket,
    L110_STABILITY_BAND,
};
