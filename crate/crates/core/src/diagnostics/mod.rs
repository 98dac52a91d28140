//! Landscape probes: path-angle and path-norm along a segment, Jacobian and
//! player Hessian spectra, and stationary-point classification.

mod path;
mod stationary;

pub use path::{
    aggregate_endpoints, path_angle, path_norm, percentile, select_endpoints, AngleSign, EndpointProfile,
    EndpointSelection, PathAngleProfile, PathGrid, Quartiles, ZERO_FIELD_NORM,
};
pub use stationary::{
    classify, game_jacobian_spectrum, game_jacobian_spectrum_with, player_hessian_spectrum,
    player_hessian_spectrum_with, ClassifyOptions, SpectrumOptions, StationaryPointReport, Verdict,
    HESSIAN_IMAG_TOL,
};
