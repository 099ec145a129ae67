//! Continuous-time Markov-chain trajectories as an independent check of the
//! rate-equation solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::correlation::{CorrelationTrace, TauGrid};
use super::network::{Detection, RateNetwork};
use crate::error::{Error, Result};

/// Fixed number of independent trajectories; results do not depend on the thread count.
pub const WORKERS: usize = 8;

fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64 + 1);
    rng
}

/// Outgoing transitions per state as `(transition index, rate)` with total exit rate.
struct Jumps {
    out: Vec<Vec<(usize, f64)>>,
    total: Vec<f64>,
}

impl Jumps {
    fn new(net: &RateNetwork) -> Self {
        let mut out = vec![Vec::new(); net.len()];
        for (i, t) in net.transitions.iter().enumerate() {
            if t.rate > 0.0 && t.from != t.to {
                out[t.from].push((i, t.rate));
            }
        }
        let total = out.iter().map(|v| v.iter().map(|(_, r)| r).sum()).collect();
        Self { out, total }
    }

    /// Waiting time and chosen transition, or `None` in an absorbing state.
    fn sample(&self, state: usize, rng: &mut ChaCha8Rng) -> Option<(f64, usize)> {
        let q = self.total[state];
        if q <= 0.0 {
            return None;
        }
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / q;
        let mut x = rng.random::<f64>() * q;
        let list = &self.out[state];
        for &(i, r) in list {
            if x < r {
                return Some((dt, i));
            }
            x -= r;
        }
        Some((dt, list[list.len() - 1].0))
    }
}

#[derive(Debug, Clone)]
struct Photon {
    t: f64,
    wa: f64,
    wb: f64,
}

struct WorkerHistogram {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    duration: f64,
    weight_a: f64,
    weight_b: f64,
    photons: usize,
}

fn run_worker(
    net: &RateNetwork,
    jumps: &Jumps,
    a: &Detection,
    b: &Detection,
    grid: &TauGrid,
    events: usize,
    mut rng: ChaCha8Rng,
) -> WorkerHistogram {
    let mut state = 0usize;
    let mut t = 0.0;
    let mut photons = Vec::new();
    for _ in 0..events {
        let Some((dt, i)) = jumps.sample(state, &mut rng) else {
            break;
        };
        t += dt;
        let tr = &net.transitions[i];
        let (wa, wb) = (a.weight(tr), b.weight(tr));
        if wa > 0.0 || wb > 0.0 {
            photons.push(Photon { t, wa, wb });
        }
        state = tr.to;
    }

    let nbins = grid.len();
    let mut sum = vec![0.0; nbins];
    let mut sum_sq = vec![0.0; nbins];
    // Bin k collects delays in [τ_k − step/2, τ_k + step/2).
    let reach = grid.span() + 0.5 * grid.step;
    let mut lo = 0;
    for (i, p) in photons.iter().enumerate() {
        if p.wa == 0.0 {
            continue;
        }
        while photons[lo].t < p.t - reach {
            lo += 1;
        }
        for (j, q) in photons.iter().enumerate().skip(lo) {
            let d = q.t - p.t;
            if d >= reach {
                break;
            }
            if j == i || q.wb == 0.0 {
                continue;
            }
            let k = ((d + reach) / grid.step).floor() as usize;
            if k < nbins {
                let w = p.wa * q.wb;
                sum[k] += w;
                sum_sq[k] += w * w;
            }
        }
    }
    WorkerHistogram {
        sum,
        sum_sq,
        duration: t,
        weight_a: photons.iter().map(|p| p.wa).sum(),
        weight_b: photons.iter().map(|p| p.wb).sum(),
        photons: photons.len(),
    }
}

/// Monte-Carlo pair-delay estimate of `g²(τ)` with per-bin standard errors.
#[derive(Debug, Clone)]
pub struct McCorrelation {
    pub trace: CorrelationTrace,
    /// One standard error of each `g²` bin.
    pub sigma: Vec<f64>,
    /// Weighted pair counts per bin.
    pub counts: Vec<f64>,
    pub expected: Vec<f64>,
    pub events: usize,
    pub duration: f64,
    pub photons: usize,
}

impl McCorrelation {
    /// Fraction of bins where `|g2_ode − g2_mc| ≤ k σ`.
    pub fn agreement(&self, reference: &[f64], k: f64) -> f64 {
        let n = self.sigma.len();
        let ok = (0..n)
            .filter(|&i| (reference[i] - self.trace.values[i]).abs() <= k * self.sigma[i])
            .count();
        ok as f64 / n as f64
    }
}

/// Simulates `n_events` jumps split over [`WORKERS`] trajectories started in state 0.
pub fn mc_oracle(
    net: &RateNetwork,
    a: &Detection,
    b: &Detection,
    grid: &TauGrid,
    n_events: usize,
    seed: u64,
) -> Result<McCorrelation> {
    let jumps = Jumps::new(net);
    let per = n_events / WORKERS;
    let parts: Vec<WorkerHistogram> = (0..WORKERS)
        .into_par_iter()
        .map(|w| {
            let n = per + usize::from(w < n_events % WORKERS);
            run_worker(net, &jumps, a, b, grid, n, worker_rng(seed, w))
        })
        .collect();

    let nbins = grid.len();
    let mut sum = vec![0.0; nbins];
    let mut sum_sq = vec![0.0; nbins];
    let (mut duration, mut wa, mut wb, mut photons) = (0.0, 0.0, 0.0, 0);
    for p in &parts {
        for k in 0..nbins {
            sum[k] += p.sum[k];
            sum_sq[k] += p.sum_sq[k];
        }
        duration += p.duration;
        wa += p.weight_a;
        wb += p.weight_b;
        photons += p.photons;
    }

    let usable = duration - WORKERS as f64 * grid.span();
    if wa == 0.0 || wb == 0.0 || usable <= 0.0 {
        return Err(Error::InsufficientEvents(format!(
            "{n_events} events gave {wa} start and {wb} stop photons over {duration:.3e} ps"
        )));
    }
    let total_pairs: f64 = sum.iter().sum();
    if total_pairs < nbins as f64 {
        return Err(Error::InsufficientEvents(format!(
            "{total_pairs:.0} weighted pairs for {nbins} bins ({photons} photons)"
        )));
    }

    let (ra, rb) = (wa / duration, wb / duration);
    let mut values = Vec::with_capacity(nbins);
    let mut sigma = Vec::with_capacity(nbins);
    let mut expected = Vec::with_capacity(nbins);
    for k in 0..nbins {
        let window: f64 = parts.iter().map(|p| (p.duration - grid.tau(k).abs()).max(0.0)).sum();
        let e = ra * rb * window * grid.step;
        values.push(sum[k] / e);
        // Empty bins get the error of a single count.
        sigma.push(sum_sq[k].max(1.0).sqrt() / e);
        expected.push(e);
    }
    Ok(McCorrelation {
        trace: CorrelationTrace {
            first: *a,
            second: *b,
            grid: *grid,
            values,
            convolved: false,
            fwhm: None,
        },
        sigma,
        counts: sum,
        expected,
        events: n_events,
        duration,
        photons,
    })
}

/// State occupation at `k·step`, `k = 0..=steps`, averaged over `n_traj` trajectories
/// started in `start`.
pub fn mc_populations(
    net: &RateNetwork,
    start: usize,
    step: f64,
    steps: usize,
    n_traj: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if start >= net.len() {
        return Err(Error::param("start", "state index out of range"));
    }
    let jumps = Jumps::new(net);
    let per = n_traj / WORKERS;
    let parts: Vec<Vec<Vec<f64>>> = (0..WORKERS)
        .into_par_iter()
        .map(|w| {
            let mut rng = worker_rng(seed, w);
            let mut occ = vec![vec![0.0; net.len()]; steps + 1];
            let n = per + usize::from(w < n_traj % WORKERS);
            for _ in 0..n {
                let mut state = start;
                let mut t = 0.0;
                let mut next = jumps.sample(state, &mut rng);
                for (k, row) in occ.iter_mut().enumerate() {
                    let at = k as f64 * step;
                    while let Some((dt, i)) = next {
                        if t + dt > at {
                            break;
                        }
                        t += dt;
                        state = net.transitions[i].to;
                        next = jumps.sample(state, &mut rng);
                    }
                    row[state] += 1.0;
                }
            }
            occ
        })
        .collect();

    let mut total = vec![vec![0.0; net.len()]; steps + 1];
    for p in parts {
        for (row, prow) in total.iter_mut().zip(p) {
            for (x, y) in row.iter_mut().zip(prow) {
                *x += y;
            }
        }
    }
    let inv = 1.0 / n_traj.max(1) as f64;
    for row in total.iter_mut() {
        row.iter_mut().for_each(|x| *x *= inv);
    }
    Ok(total)
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::dynamics::{evolve, g2};
    use nalgebra::DVector;
    use crate::dynamics::network::{Line, Polarization, Transition, TransitionKind};
    use proptest::prelude::*;

    /// A ring `0 → 1 → … → n−1 → 0` with random rates plus random chords.
    /// Line A is emitted on `0 → 1`, line B on `m → m+1`.
    fn small_network() -> impl Strategy<Value = RateNetwork> {
        (3usize..=6)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec(0.005f64..0.05, n),
                    prop::collection::vec((0..n, 0..n, 0.0f64..0.03), 0..4),
                    1..n,
                )
            })
            .prop_map(|(n, ring, chords, m)| {
                let mut t: Vec<Transition> = (0..n)
                    .map(|i| {
                        let line = match i {
                            0 => Some(Line::XxxI),
                            _ if i == m => Some(Line::Xx0),
                            _ => None,
                        };
                        Transition {
                            from: i,
                            to: (i + 1) % n,
                            rate: ring[i],
                            kind: if line.is_some() { TransitionKind::Radiative } else { TransitionKind::Nonradiative },
                            line,
                            polarization: Polarization::Unpolarized,
                        }
                    })
                    .collect();
                for (from, to, rate) in chords {
                    if from != to {
                        t.push(Transition {
                            from,
                            to,
                            rate,
                            kind: TransitionKind::Nonradiative,
                            line: None,
                            polarization: Polarization::Unpolarized,
                        });
                    }
                }
                RateNetwork::new((0..n).map(|i| format!("s{i}")).collect(), t).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn mc_matches_ode_on_small_networks(net in small_network(), seed in any::<u64>()) {
            let (a, b) = (Detection::any(Line::XxxI), Detection::any(Line::Xx0));
            let grid = TauGrid::new(10.0, 60).unwrap();
            let ode = g2(&net, &a, &b, &grid).unwrap();
            let mc = mc_oracle(&net, &a, &b, &grid, 2_000_000, seed).unwrap();
            prop_assert!(mc.agreement(&ode.values, 3.0) >= 0.95);
        }

        #[test]
        fn mc_populations_match_evolution(net in small_network(), seed in any::<u64>()) {
            let n_traj = 40_000;
            let mc = mc_populations(&net, 0, 20.0, 30, n_traj, seed).unwrap();
            let mut n0 = DVector::zeros(net.len());
            n0[0] = 1.0;
            let ode = evolve(&net, &n0, 20.0, 30).unwrap();
            let total = (n_traj / WORKERS * WORKERS) as f64;
            let mut within = 0;
            let mut bins = 0;
            for (m, o) in mc.iter().zip(&ode) {
                for s in 0..net.len() {
                    let sd = (o[s] * (1.0 - o[s]) / total).sqrt().max(1.0 / total);
                    bins += 1;
                    if (m[s] - o[s]).abs() <= 3.0 * sd {
                        within += 1;
                    }
                }
            }
            prop_assert!(within as f64 >= 0.95 * bins as f64, "{}/{}", within, bins);
        }
    }

    /// Without generation and starting in |0⟩, the 0SS population rises as the TT
    /// state relaxes and falls again as the biexciton emits.
    #[test]
    fn zero_ss_rises_then_falls_from_zero_tt() {
        use crate::dynamics::{build_rate_network, CascadeState as S, ChannelRates, NetworkParams};
        use crate::spectrum::{RateTable, TabulatedLifetimes};

        let k = ChannelRates::from_table(&RateTable::from_lifetimes(&TabulatedLifetimes::default()).unwrap()).unwrap();
        let net = build_rate_network(&k, &NetworkParams::default(), 0.0).unwrap();
        let (step, steps, n_traj) = (100.0, 80, 80_000);
        let mut n0 = DVector::zeros(net.len());
        n0[S::Zero.index()] = 1.0;
        let ode: Vec<f64> = evolve(&net, &n0, step, steps).unwrap().iter().map(|n| n[S::ZeroSs.index()]).collect();
        let mc = mc_populations(&net, S::Zero.index(), step, steps, n_traj, 3).unwrap();

        let peak = ode.iter().copied().enumerate().fold((0, 0.0), |a, (i, x)| if x > a.1 { (i, x) } else { a });
        assert_eq!(ode[0], 0.0);
        assert!(peak.0 > 0 && peak.0 < steps);
        // Peak of a two-step decay sits at ln(k1/k2)/(k1 − k2) ≈ 659 ps.
        let t_peak = (1200.0f64 / 400.0).ln() / (1.0 / 400.0 - 1.0 / 1200.0);
        assert!((peak.0 as f64 * step - t_peak).abs() <= step);
        assert!(ode[steps] < 0.01 * peak.1);

        let total = (n_traj / WORKERS * WORKERS) as f64;
        for (i, o) in ode.iter().enumerate() {
            let sd = (o * (1.0 - o) / total).sqrt().max(1.0 / total);
            assert!((mc[i][S::ZeroSs.index()] - o).abs() <= 4.0 * sd, "step {i}");
        }
    }
}
