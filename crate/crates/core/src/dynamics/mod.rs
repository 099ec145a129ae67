//! Classical rate equations for the radiative cascade and the photon
//! correlations they imply.

mod correlation;
mod evolve;
mod montecarlo;
mod network;
mod steady;

pub use correlation::{convolve_response, fwhm_to_sigma, g2, g2_with, CorrelationTrace, TauGrid};
pub use evolve::{evolve, Propagator, CONSERVATION_TOL};
pub use montecarlo::{mc_oracle, mc_populations, McCorrelation, WORKERS};
pub use network::{
    build_rate_network, CascadeState, ChannelRates, Detection, Line, LineMap, NetworkParams, Polarization,
    RateNetwork, Transition, TransitionKind,
};
pub use steady::{calibrate_generation, steady_state, Calibration, CALIBRATION_BRACKET, CALIBRATION_TOL};

/// Biexciton and exciton lines used for generation calibration.
pub fn calibration_detections() -> (Detection, Detection) {
    (Detection::any(Line::Xx0), Detection::any(Line::X0))
}

/// Calibrates the cascade network so that XX⁰ and X⁰ are equally bright.
pub fn calibrate_cascade(k: &ChannelRates, p: &NetworkParams) -> crate::Result<Calibration> {
    let (xx, x) = calibration_detections();
    calibrate_generation(|g| build_rate_network(k, p, g), &xx, &x, CALIBRATION_BRACKET)
}
