use nalgebra::DVector;

use super::evolve::Propagator;
use super::network::{Detection, RateNetwork};
use super::steady::steady_state;
use crate::error::{Error, Result};

/// Symmetric uniform delay grid `τ_k = k·step`, `k = −half..=half`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    /// ps
    pub step: f64,
    pub half: usize,
}

impl TauGrid {
    pub fn new(step: f64, half: usize) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::Grid(format!("step {step} ps must be positive")));
        }
        if half == 0 {
            return Err(Error::Grid("grid needs at least one point on each side".into()));
        }
        Ok(Self { step, half })
    }

    /// Grid reaching at least `span` ps on each side.
    pub fn with_span(step: f64, span: f64) -> Result<Self> {
        if !span.is_finite() || span <= 0.0 {
            return Err(Error::Grid(format!("span {span} ps must be positive")));
        }
        Self::new(step, (span / step).ceil().max(1.0) as usize)
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        self.half as f64 * self.step
    }

    pub fn tau(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64) * self.step
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.tau(i)).collect()
    }

    pub fn zero_index(&self) -> usize {
        self.half
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub first: Detection,
    pub second: Detection,
    pub grid: TauGrid,
    pub values: Vec<f64>,
    pub convolved: bool,
    /// Detector response FWHM (ps) when `convolved`.
    pub fwhm: Option<f64>,
}

impl CorrelationTrace {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn at_zero(&self) -> f64 {
        self.values[self.grid.zero_index()]
    }

    /// `∫ (g2 − 1) dτ` by the trapezoid rule.
    pub fn excess_area(&self) -> f64 {
        let v = &self.values;
        let inner: f64 = v.iter().map(|x| x - 1.0).sum();
        (inner - 0.5 * (v[0] - 1.0) - 0.5 * (v[v.len() - 1] - 1.0)) * self.grid.step
    }
}

/// Two-sided `g²(τ)` between detections `a` (start) and `b` (stop).
///
/// For τ ≥ 0 the network starts from the state left behind by an `a` photon and
/// the `b` intensity is recorded; τ < 0 swaps the two roles.
pub fn g2(net: &RateNetwork, a: &Detection, b: &Detection, grid: &TauGrid) -> Result<CorrelationTrace> {
    let ss = steady_state(net)?;
    let prop = Propagator::new(net, grid.step)?;
    g2_with(net, &ss, &prop, a, b, grid)
}

/// As [`g2`] with a precomputed steady state and propagator.
pub fn g2_with(
    net: &RateNetwork,
    ss: &DVector<f64>,
    prop: &Propagator,
    a: &Detection,
    b: &Detection,
    grid: &TauGrid,
) -> Result<CorrelationTrace> {
    if prop.step != grid.step {
        return Err(Error::Grid("propagator step differs from grid step".into()));
    }
    for d in [a, b] {
        if !net.has_line(d.line) {
            return Err(Error::UndefinedCorrelation(format!("{} (line not in network)", d.line)));
        }
    }
    let ia = net.intensity(ss, a);
    let ib = net.intensity(ss, b);
    for (d, i) in [(a, ia), (b, ib)] {
        if !(i > 0.0) {
            return Err(Error::UndefinedCorrelation(d.to_string()));
        }
    }

    let branch = |start: &Detection, stop: &Detection, i_stop: f64| -> Result<Vec<f64>> {
        let feed = net.detected_feed(ss, start);
        let n0 = &feed / feed.sum();
        let traj = prop.evolve(&n0, grid.half)?;
        Ok(traj.iter().map(|n| net.intensity(n, stop) / i_stop).collect())
    };
    let pos = branch(a, b, ib)?;
    let neg = branch(b, a, ia)?;

    let mut values = Vec::with_capacity(grid.len());
    values.extend(neg[1..].iter().rev());
    values.extend(pos.iter());
    Ok(CorrelationTrace {
        first: *a,
        second: *b,
        grid: *grid,
        values,
        convolved: false,
        fwhm: None,
    })
}

/// Gaussian FWHM → standard deviation.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Convolves with a normalized Gaussian detector response of width `fwhm` (ps).
///
/// Values beyond the grid are taken equal to the nearest end point.
pub fn convolve_response(trace: &CorrelationTrace, fwhm: f64) -> Result<CorrelationTrace> {
    if !fwhm.is_finite() || fwhm <= 0.0 {
        return Err(Error::Grid(format!("detector FWHM {fwhm} ps must be positive")));
    }
    let step = trace.grid.step;
    if step > fwhm / 4.0 {
        return Err(Error::Grid(format!(
            "step {step} ps undersamples a {fwhm} ps response (max {})",
            fwhm / 4.0
        )));
    }
    let sigma = fwhm_to_sigma(fwhm);
    let reach = (5.0 * sigma / step).ceil() as isize;
    let mut kernel: Vec<f64> = (-reach..=reach)
        .map(|j| {
            let x = j as f64 * step / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= norm);

    let v = &trace.values;
    let n = v.len() as isize;
    let at = |i: isize| v[i.clamp(0, n - 1) as usize];
    let values = (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(j, w)| w * at(i + j as isize - reach))
                .sum()
        })
        .collect();
    Ok(CorrelationTrace {
        values,
        convolved: true,
        fwhm: Some(fwhm),
        ..trace.clone()
    })
}
