use nalgebra::{DMatrix, DVector};

use super::network::{Detection, RateNetwork};
use crate::error::{Error, Result};

/// Stationary distribution from the bordered system `[[R, 1], [1ᵀ, 0]] [n; λ] = [0; 1]`.
pub fn steady_state(net: &RateNetwork) -> Result<DVector<f64>> {
    let n = net.len();
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&net.r);
    for i in 0..n {
        a[(i, n)] = 1.0;
        a[(n, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n + 1);
    rhs[n] = 1.0;

    let scale = net.r.amax().max(1.0);
    let lu = a.lu();
    // A pivot this small relative to the largest rate means a second null vector.
    let u = lu.u();
    let min_pivot = (0..=n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-14 * scale {
        return Err(Error::SingularNetwork(format!(
            "bordered generator has pivot {min_pivot:e}; the network is not irreducible"
        )));
    }
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SingularNetwork("bordered generator is singular".into()))?;
    let mut p = sol.rows(0, n).into_owned();
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("steady-state solve"));
    }
    for x in p.iter_mut() {
        if *x < 0.0 {
            if *x < -1e-9 {
                return Err(Error::SingularNetwork(format!("negative steady-state population {x:e}")));
            }
            *x = 0.0;
        }
    }
    Ok(p)
}

/// Generation rate at which two lines are equally bright.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// 1/ps
    pub generation: f64,
    pub intensity_a: f64,
    pub intensity_b: f64,
    pub iterations: usize,
}

impl Calibration {
    pub fn relative_mismatch(&self) -> f64 {
        (self.intensity_a - self.intensity_b).abs() / self.intensity_b
    }
}

pub const CALIBRATION_BRACKET: (f64, f64) = (1e-6, 1.0);
pub const CALIBRATION_TOL: f64 = 1e-9;

/// Bisection in `ln g` on `I_a(g) − I_b(g)` over `bracket`.
///
/// `build` maps a generation rate to a network; `a` is the line that must rise
/// faster with pumping (the biexciton line against the exciton line).
pub fn calibrate_generation<F>(build: F, a: &Detection, b: &Detection, bracket: (f64, f64)) -> Result<Calibration>
where
    F: Fn(f64) -> Result<RateNetwork>,
{
    let (lo0, hi0) = bracket;
    if !(lo0 > 0.0 && hi0 > lo0) {
        return Err(Error::param("bracket", "needs 0 < lo < hi"));
    }
    let eval = |g: f64| -> Result<(f64, f64)> {
        let net = build(g)?;
        let n = steady_state(&net)?;
        Ok((net.intensity(&n, a), net.intensity(&n, b)))
    };
    let ratio = |(ia, ib): (f64, f64)| ia / ib;

    let at_lo = eval(lo0)?;
    let at_hi = eval(hi0)?;
    let (r_lo, r_hi) = (ratio(at_lo), ratio(at_hi));
    if !(r_lo < 1.0 && r_hi > 1.0) {
        return Err(Error::CalibrationBracket {
            lo: lo0,
            hi: hi0,
            ratio_lo: r_lo,
            ratio_hi: r_hi,
        });
    }

    let (mut lo, mut hi) = (lo0.ln(), hi0.ln());
    let mut best = (hi0, at_hi);
    let mut iterations = 0;
    while iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let g = mid.exp();
        let v = eval(g)?;
        if (v.0 - v.1).abs() < (best.1 .0 - best.1 .1).abs() {
            best = (g, v);
        }
        if (v.0 - v.1).abs() <= 0.1 * CALIBRATION_TOL * v.1 {
            break;
        }
        if ratio(v) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let (generation, (ia, ib)) = best;
    Ok(Calibration {
        generation,
        intensity_a: ia,
        intensity_b: ib,
        iterations,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::dynamics::network::build_rate_network;
    use crate::dynamics::strategies::cascade;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn steady_state_is_a_normalized_null_vector((k, p, g) in cascade()) {
            let net = build_rate_network(&k, &p, g).unwrap();
            let n = steady_state(&net).unwrap();
            prop_assert!((n.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(n.iter().all(|&x| x >= 0.0));
            prop_assert!((&net.r * &n).amax() <= 1e-12 * net.r.amax());
        }
    }
}
