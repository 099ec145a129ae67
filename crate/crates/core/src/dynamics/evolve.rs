use nalgebra::{DMatrix, DVector};

use super::network::RateNetwork;
use crate::error::{Error, Result};

pub const CONSERVATION_TOL: f64 = 1e-9;

/// One-step propagator `exp(R·dt)` for a uniform time grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub step: f64,
    pub matrix: DMatrix<f64>,
}

impl Propagator {
    pub fn new(net: &RateNetwork, step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::Grid(format!("time step {step} ps must be positive")));
        }
        let matrix = (&net.r * step).exp();
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix exponential"));
        }
        Ok(Self { step, matrix })
    }

    /// Populations at `0, dt, …, steps·dt` starting from `n0`.
    pub fn evolve(&self, n0: &DVector<f64>, steps: usize) -> Result<Vec<DVector<f64>>> {
        check_total(n0.sum(), 0)?;
        let mut out = Vec::with_capacity(steps + 1);
        let mut n = n0.clone();
        out.push(n.clone());
        for k in 1..=steps {
            n = &self.matrix * n;
            if n.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("population evolution"));
            }
            for x in n.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            check_total(n.sum(), k)?;
            out.push(n.clone());
        }
        Ok(out)
    }
}

fn check_total(total: f64, step: usize) -> Result<()> {
    if (total - 1.0).abs() > CONSERVATION_TOL {
        return Err(Error::Conservation { total, step });
    }
    Ok(())
}

/// `n(k·dt) = exp(R·dt)^k n0` for `k = 0..=steps`.
pub fn evolve(net: &RateNetwork, n0: &DVector<f64>, step: f64, steps: usize) -> Result<Vec<DVector<f64>>> {
    Propagator::new(net, step)?.evolve(n0, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::network::{Polarization, Transition, TransitionKind};

    fn decay(k: f64) -> RateNetwork {
        RateNetwork::new(
            vec!["A".into(), "B".into()],
            vec![Transition {
                from: 0,
                to: 1,
                rate: k,
                kind: TransitionKind::Nonradiative,
                line: None,
                polarization: Polarization::Unpolarized,
            }],
        )
        .unwrap()
    }

    #[test]
    fn zero_generator_is_identity() {
        let net = RateNetwork::new(vec!["A".into(), "B".into()], vec![]).unwrap();
        let n0 = DVector::from_vec(vec![0.25, 0.75]);
        for n in evolve(&net, &n0, 10.0, 20).unwrap() {
            assert_eq!(n, n0);
        }
    }

    #[test]
    fn single_exponential_decay() {
        let k = 1.0 / 137.0;
        let n0 = DVector::from_vec(vec![1.0, 0.0]);
        let traj = evolve(&decay(k), &n0, 5.0, 400).unwrap();
        for (i, n) in traj.iter().enumerate() {
            let t = 5.0 * i as f64;
            assert!((n[0] - (-k * t).exp()).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn rejects_unnormalized_start() {
        let n0 = DVector::from_vec(vec![0.5, 0.4]);
        assert!(matches!(evolve(&decay(0.1), &n0, 1.0, 3), Err(Error::Conservation { .. })));
    }

    #[test]
    fn rejects_bad_step() {
        assert!(Propagator::new(&decay(0.1), 0.0).is_err());
    }
}
