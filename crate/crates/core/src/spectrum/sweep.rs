use rayon::prelude::*;

use super::{eigendecompose, label_by_continuation, label_states, parent_vectors, LabeledSpectrum};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, EnergyParams, ExchangeParams};

#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// meV
    pub detuning: f64,
    pub spectrum: LabeledSpectrum,
    /// Some eigenstate overlaps its named parent by less than one half.
    pub strong_mixing: bool,
}

/// Diagonalizes at `n` evenly spaced detunings in `[d_min, d_max]`.
///
/// The first point is labeled against the zero-coupling parents; every later
/// point inherits labels from its predecessor by eigenvector overlap.
pub fn detuning_sweep(
    e: &EnergyParams,
    x: &ExchangeParams,
    d_min: f64,
    d_max: f64,
    n: usize,
    tol: f64,
) -> Result<Vec<SweepPoint>> {
    if !(d_min < d_max) {
        return Err(Error::param("sweep", format!("d_min {d_min} must be below d_max {d_max}")));
    }
    if n < 2 {
        return Err(Error::param("sweep", "needs at least two points"));
    }
    let step = (d_max - d_min) / (n - 1) as f64;
    let detunings: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { d_max } else { d_min + step * i as f64 })
        .collect();

    let spectra = detunings
        .par_iter()
        .map(|&d| build_hamiltonian(e, x, d).and_then(|h| eigendecompose(&h, tol)))
        .collect::<Result<Vec<_>>>()?;

    let mut points: Vec<SweepPoint> = Vec::with_capacity(n);
    for (d, s) in detunings.into_iter().zip(spectra) {
        let spectrum = match points.last() {
            None => label_states(s, &parent_vectors()),
            Some(prev) => label_by_continuation(s, &prev.spectrum),
        };
        let strong_mixing = spectrum.strongly_mixed();
        if strong_mixing {
            log::debug!("strong mixing at detuning {d:.4} meV (min overlap {:.3})", spectrum.min_overlap());
        }
        points.push(SweepPoint {
            detuning: d,
            spectrum,
            strong_mixing,
        });
    }
    Ok(points)
}
