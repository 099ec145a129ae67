//! Eigenstates of the spin–phonon Hamiltonian, their labels, phonon content and
//! the phonon-assisted relaxation rates derived from it.

mod jacobi;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SVector};

pub use jacobi::{jacobi_eigen, SymmetricEigen, DEFAULT_MAX_SWEEPS, DEFAULT_TOL};
pub use sweep::{detuning_sweep, SweepPoint};

use crate::error::{Error, Result};
use crate::hamiltonian::{BasisState, HamiltonianMatrix, Matrix15, DIM};

/// Rates below this value (1/ps) are reported as exactly zero.
pub const RATE_FLOOR: f64 = 1e-9;

/// Leading-overlap probability below which a state counts as strongly mixed.
pub const STRONG_MIXING: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending eigenvalues (meV).
    pub eigenvalues: SVector<f64, DIM>,
    /// Orthonormal eigenvectors, one per column, in eigenvalue order.
    pub eigenvectors: Matrix15,
    /// `max_k ‖H v_k − λ_k v_k‖ / ‖H‖_F`
    pub residual_norm: f64,
}

impl Spectrum {
    pub fn vector(&self, k: usize) -> SVector<f64, DIM> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `max_{j,k} |⟨v_j, v_k⟩ − δ_jk|`
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.transpose() * self.eigenvectors;
        (g - Matrix15::identity()).amax()
    }

    /// Largest deviation of `Σ_k v_k[m]²` from 1 over basis indices `m`.
    pub fn completeness_error(&self) -> f64 {
        (0..DIM)
            .map(|m| {
                let s: f64 = (0..DIM).map(|k| self.eigenvectors[(m, k)].powi(2)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Diagonalizes a 15×15 symmetric matrix with the cyclic Jacobi solver.
pub fn eigendecompose_matrix(h: &Matrix15, tol: f64) -> Result<Spectrum> {
    let dense = DMatrix::from_column_slice(DIM, DIM, h.as_slice());
    let eig = jacobi_eigen(&dense, tol, DEFAULT_MAX_SWEEPS)?;
    let eigenvalues = SVector::<f64, DIM>::from_iterator(eig.eigenvalues.iter().copied());
    let eigenvectors = Matrix15::from_column_slice(eig.eigenvectors.as_slice());
    let scale = h.norm();
    let mut residual: f64 = 0.0;
    for k in 0..DIM {
        let v = eigenvectors.column(k);
        let r = (h * v - v * eigenvalues[k]).norm();
        residual = residual.max(r);
    }
    let residual_norm = if scale > 0.0 { residual / scale } else { residual };
    if !residual_norm.is_finite() {
        return Err(Error::NonFinite("eigendecomposition"));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residual_norm,
    })
}

pub fn eigendecompose(h: &HamiltonianMatrix, tol: f64) -> Result<Spectrum> {
    eigendecompose_matrix(&h.entries, tol)
}

/// Physical names of eigenstates, by their zero-coupling parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    TwoPlus,
    TwoMinus,
    HPlus,
    HMinus,
    ZeroTt,
    VPlus,
    VMinus,
    Plus3StarSt,
    ZeroStarSt,
    Minus3StarSt,
    ZeroStarSs,
    Plus3StLo,
    ZeroStLo,
    Minus3StLo,
    ZeroSsLo,
}

impl StateLabel {
    pub const ALL: [StateLabel; DIM] = [
        StateLabel::TwoPlus,
        StateLabel::TwoMinus,
        StateLabel::HPlus,
        StateLabel::HMinus,
        StateLabel::ZeroTt,
        StateLabel::VPlus,
        StateLabel::VMinus,
        StateLabel::Plus3StarSt,
        StateLabel::ZeroStarSt,
        StateLabel::Minus3StarSt,
        StateLabel::ZeroStarSs,
        StateLabel::Plus3StLo,
        StateLabel::ZeroStLo,
        StateLabel::Minus3StLo,
        StateLabel::ZeroSsLo,
    ];

    /// The seven optically active TT eigenstates.
    pub const TT: [StateLabel; 7] = [
        StateLabel::TwoPlus,
        StateLabel::TwoMinus,
        StateLabel::HPlus,
        StateLabel::HMinus,
        StateLabel::ZeroTt,
        StateLabel::VPlus,
        StateLabel::VMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_tt(self) -> bool {
        self.index() < 7
    }

    pub fn has_phonon(self) -> bool {
        self.index() >= 11
    }

    pub fn tag(self) -> &'static str {
        match self {
            StateLabel::TwoPlus => "2+",
            StateLabel::TwoMinus => "2-",
            StateLabel::HPlus => "H+",
            StateLabel::HMinus => "H-",
            StateLabel::ZeroTt => "0TT",
            StateLabel::VPlus => "V+",
            StateLabel::VMinus => "V-",
            StateLabel::Plus3StarSt => "+3*ST",
            StateLabel::ZeroStarSt => "0*ST",
            StateLabel::Minus3StarSt => "-3*ST",
            StateLabel::ZeroStarSs => "0*SS",
            StateLabel::Plus3StLo => "+3ST_1LO",
            StateLabel::ZeroStLo => "0ST_1LO",
            StateLabel::Minus3StLo => "-3ST_1LO",
            StateLabel::ZeroSsLo => "0SS_1LO",
        }
    }

    /// Zero-coupling parent state in the matrix basis.
    pub fn parent(self) -> SVector<f64, DIM> {
        use BasisState as B;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = SVector::<f64, DIM>::zeros();
        let mut set = |b: B, c: f64| v[b.index()] = c;
        match self {
            StateLabel::TwoPlus => {
                set(B::Plus2, s);
                set(B::Minus2, s);
            }
            StateLabel::TwoMinus => {
                set(B::Plus2, s);
                set(B::Minus2, -s);
            }
            StateLabel::HPlus | StateLabel::HMinus | StateLabel::VPlus | StateLabel::VMinus => {
                let pm = if matches!(self, StateLabel::HPlus | StateLabel::VPlus) { 1.0 } else { -1.0 };
                let hv = if matches!(self, StateLabel::HPlus | StateLabel::HMinus) { 1.0 } else { -1.0 };
                set(B::Plus1, 0.5);
                set(B::Minus1, 0.5 * pm);
                set(B::Plus3, 0.5 * hv);
                set(B::Minus3, 0.5 * hv * pm);
            }
            StateLabel::ZeroTt => set(B::Zero, 1.0),
            other => set(BasisState::ALL[other.index()], 1.0),
        }
        v
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Parent vectors as columns, in `StateLabel::ALL` order.
pub fn parent_vectors() -> Matrix15 {
    let mut p = Matrix15::zeros();
    for l in StateLabel::ALL {
        p.set_column(l.index(), &l.parent());
    }
    p
}

#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub spectrum: Spectrum,
    /// Label of eigenvector `k`.
    pub labels: [StateLabel; DIM],
    /// Squared overlap of eigenvector `k` with the parent of its label.
    pub overlaps: [f64; DIM],
}

impl LabeledSpectrum {
    pub fn index_of(&self, label: StateLabel) -> usize {
        self.labels
            .iter()
            .position(|&l| l == label)
            .expect("labels form a bijection")
    }

    pub fn energy(&self, label: StateLabel) -> f64 {
        self.spectrum.eigenvalues[self.index_of(label)]
    }

    pub fn vector(&self, label: StateLabel) -> SVector<f64, DIM> {
        self.spectrum.vector(self.index_of(label))
    }

    pub fn overlap(&self, label: StateLabel) -> f64 {
        self.overlaps[self.index_of(label)]
    }

    pub fn min_overlap(&self) -> f64 {
        self.overlaps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn strongly_mixed(&self) -> bool {
        self.min_overlap() < STRONG_MIXING
    }
}

/// Greedy bijection on `w[(reference, eigen)]`: highest weight first, ties resolved
/// towards lower eigenvalue index and then lower reference index.
fn greedy_assign(w: &Matrix15) -> [usize; DIM] {
    let mut pairs: Vec<(usize, usize)> = (0..DIM).flat_map(|r| (0..DIM).map(move |k| (r, k))).collect();
    pairs.sort_by(|a, b| {
        w[*b]
            .total_cmp(&w[*a])
            .then(a.1.cmp(&b.1))
            .then(a.0.cmp(&b.0))
    });
    let mut ref_of_eigen = [usize::MAX; DIM];
    let mut used_ref = [false; DIM];
    let mut assigned = 0;
    for (r, k) in pairs {
        if used_ref[r] || ref_of_eigen[k] != usize::MAX {
            continue;
        }
        used_ref[r] = true;
        ref_of_eigen[k] = r;
        assigned += 1;
        if assigned == DIM {
            break;
        }
    }
    ref_of_eigen
}

fn parent_overlaps(s: &Spectrum, labels: &[StateLabel; DIM]) -> [f64; DIM] {
    let mut out = [0.0; DIM];
    for k in 0..DIM {
        out[k] = labels[k].parent().dot(&s.eigenvectors.column(k)).powi(2);
    }
    out
}

/// Names each eigenvector after the parent it overlaps most, as a bijection.
///
/// `parents` holds one column per label in `StateLabel::ALL` order.
pub fn label_states(s: Spectrum, parents: &Matrix15) -> LabeledSpectrum {
    let w = (parents.transpose() * s.eigenvectors).map(|x| x * x);
    let assign = greedy_assign(&w);
    let labels = assign.map(|r| StateLabel::ALL[r]);
    let mut overlaps = [0.0; DIM];
    for k in 0..DIM {
        overlaps[k] = w[(assign[k], k)];
    }
    for k in 0..DIM {
        if overlaps[k] < STRONG_MIXING {
            log::warn!(
                "strong mixing: eigenstate {k} ({:.4} meV) labeled {} with overlap {:.3}",
                s.eigenvalues[k],
                labels[k],
                overlaps[k]
            );
        }
    }
    LabeledSpectrum {
        spectrum: s,
        labels,
        overlaps,
    }
}

/// Labels `s` by maximal overlap with the already labeled eigenvectors of `prev`.
pub fn label_by_continuation(s: Spectrum, prev: &LabeledSpectrum) -> LabeledSpectrum {
    let w = (prev.spectrum.eigenvectors.transpose() * s.eigenvectors).map(|x| x * x);
    let assign = greedy_assign(&w);
    let labels = assign.map(|r| prev.labels[r]);
    let overlaps = parent_overlaps(&s, &labels);
    LabeledSpectrum {
        spectrum: s,
        labels,
        overlaps,
    }
}

/// The four ground-biexciton states reached by emitting an LO phonon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundBiexciton {
    Plus3St,
    ZeroSt,
    Minus3St,
    ZeroSs,
}

impl GroundBiexciton {
    pub const ALL: [GroundBiexciton; 4] = [
        GroundBiexciton::Plus3St,
        GroundBiexciton::ZeroSt,
        GroundBiexciton::Minus3St,
        GroundBiexciton::ZeroSs,
    ];

    /// Matrix index of the matching one-phonon basis state.
    pub fn phonon_index(self) -> usize {
        match self {
            GroundBiexciton::Plus3St => BasisState::Plus3StLo.index(),
            GroundBiexciton::ZeroSt => BasisState::ZeroStLo.index(),
            GroundBiexciton::Minus3St => BasisState::Minus3StLo.index(),
            GroundBiexciton::ZeroSs => BasisState::ZeroSsLo.index(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            GroundBiexciton::Plus3St => "+3ST",
            GroundBiexciton::ZeroSt => "0ST",
            GroundBiexciton::Minus3St => "-3ST",
            GroundBiexciton::ZeroSs => "0SS",
        }
    }
}

/// Per-final-state phonon probabilities `v_k[m]²` of one zero-phonon eigenstate,
/// in `GroundBiexciton::ALL` order.
pub type PhononContent = [f64; 4];

pub fn phonon_projection(ls: &LabeledSpectrum) -> BTreeMap<StateLabel, PhononContent> {
    let mut out = BTreeMap::new();
    for (k, &label) in ls.labels.iter().enumerate() {
        if label.has_phonon() {
            continue;
        }
        let v = ls.spectrum.eigenvectors.column(k);
        out.insert(label, GroundBiexciton::ALL.map(|g| v[g.phonon_index()].powi(2)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEntry {
    /// Phonon probability the rate was derived from; `None` for tabulated rates.
    pub probability: Option<f64>,
    /// 1/ps
    pub rate: f64,
}

impl RateEntry {
    /// ps; infinite for a zero rate.
    pub fn lifetime(&self) -> f64 {
        1.0 / self.rate
    }
}

/// Degenerate (or nearly so) pairs of TT eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TtPair {
    Two,
    H,
    V,
    ZeroTt,
}

impl TtPair {
    pub const ALL: [TtPair; 4] = [TtPair::Two, TtPair::H, TtPair::V, TtPair::ZeroTt];

    pub fn members(self) -> &'static [StateLabel] {
        match self {
            TtPair::Two => &[StateLabel::TwoPlus, StateLabel::TwoMinus],
            TtPair::H => &[StateLabel::HPlus, StateLabel::HMinus],
            TtPair::V => &[StateLabel::VPlus, StateLabel::VMinus],
            TtPair::ZeroTt => &[StateLabel::ZeroTt],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            TtPair::Two => "2",
            TtPair::H => "H",
            TtPair::V => "V",
            TtPair::ZeroTt => "0TT",
        }
    }
}

/// Tabulated channel lifetimes (ps), used in table mode. Each lifetime is that of
/// the pair-averaged channel; `h_3st` and `v_3st` cover both ±3_ST final states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabulatedLifetimes {
    pub h_3st: f64,
    pub v_3st: f64,
    pub two_ss: f64,
    pub two_st: f64,
    pub zero_ss: f64,
    pub hv_ss: f64,
}

impl Default for TabulatedLifetimes {
    fn default() -> Self {
        Self {
            h_3st: 50.0,
            v_3st: 3000.0,
            two_ss: 400.0,
            two_st: 1000.0,
            zero_ss: 1200.0,
            hv_ss: 5000.0,
        }
    }
}

impl TabulatedLifetimes {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("h_3st", self.h_3st),
            ("v_3st", self.v_3st),
            ("two_ss", self.two_ss),
            ("two_st", self.two_st),
            ("zero_ss", self.zero_ss),
            ("hv_ss", self.hv_ss),
        ];
        for (name, v) in all {
            // Infinite lifetime switches a channel off.
            if v.is_nan() || v <= 0.0 {
                return Err(Error::RateTable(format!("lifetime {name} = {v} ps must be positive")));
            }
        }
        Ok(())
    }
}

/// Relaxation rates from zero-phonon eigenstates into ground biexcitons.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable {
    pub entries: BTreeMap<(StateLabel, GroundBiexciton), RateEntry>,
}

impl RateTable {
    /// 1/ps; zero for channels not in the table.
    pub fn rate(&self, from: StateLabel, to: GroundBiexciton) -> f64 {
        self.entries.get(&(from, to)).map_or(0.0, |e| e.rate)
    }

    /// Rate into any of `to`, averaged over the members of `pair`.
    pub fn pair_rate(&self, pair: TtPair, to: &[GroundBiexciton]) -> f64 {
        let m = pair.members();
        let total: f64 = m
            .iter()
            .flat_map(|&l| to.iter().map(move |&g| (l, g)))
            .map(|(l, g)| self.rate(l, g))
            .sum();
        total / m.len() as f64
    }

    pub fn pair_lifetime(&self, pair: TtPair, to: &[GroundBiexciton]) -> f64 {
        1.0 / self.pair_rate(pair, to)
    }

    pub fn validate(&self) -> Result<()> {
        for ((from, to), e) in &self.entries {
            if !e.rate.is_finite() || e.rate < 0.0 {
                return Err(Error::RateTable(format!(
                    "rate {from} -> {} is {} /ps",
                    to.tag(),
                    e.rate
                )));
            }
            if from.has_phonon() {
                return Err(Error::RateTable(format!("{from} is not a zero-phonon state")));
            }
        }
        Ok(())
    }

    /// Rates from tabulated pair lifetimes. Each pair member carries the pair rate;
    /// a rate into both ±3_ST states is split equally between them.
    pub fn from_lifetimes(t: &TabulatedLifetimes) -> Result<Self> {
        use GroundBiexciton as G;
        use StateLabel as L;
        t.validate()?;
        let mut entries = BTreeMap::new();
        let mut put = |l: L, g: G, rate: f64| {
            entries.insert((l, g), RateEntry { probability: None, rate });
        };
        for l in [L::HPlus, L::HMinus] {
            put(l, G::Plus3St, 0.5 / t.h_3st);
            put(l, G::Minus3St, 0.5 / t.h_3st);
            put(l, G::ZeroSs, 1.0 / t.hv_ss);
        }
        for l in [L::VPlus, L::VMinus] {
            put(l, G::Plus3St, 0.5 / t.v_3st);
            put(l, G::Minus3St, 0.5 / t.v_3st);
            put(l, G::ZeroSs, 1.0 / t.hv_ss);
        }
        for l in [L::TwoPlus, L::TwoMinus] {
            put(l, G::ZeroSs, 1.0 / t.two_ss);
            put(l, G::ZeroSt, 1.0 / t.two_st);
        }
        put(L::ZeroTt, G::ZeroSs, 1.0 / t.zero_ss);
        Ok(Self { entries })
    }
}

/// `rate = P / tau_lo` for every zero-phonon state and final ground biexciton.
pub fn relaxation_rates(proj: &BTreeMap<StateLabel, PhononContent>, tau_lo: f64) -> RateTable {
    let mut entries = BTreeMap::new();
    for (&label, content) in proj {
        for (g, &p) in GroundBiexciton::ALL.iter().zip(content) {
            let raw = p / tau_lo;
            let rate = if raw < RATE_FLOOR { 0.0 } else { raw };
            entries.insert(
                (label, *g),
                RateEntry {
                    probability: Some(p),
                    rate,
                },
            );
        }
    }
    RateTable { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, EnergyParams, ExchangeParams};

    fn labeled_at(detuning: f64) -> LabeledSpectrum {
        let h = build_hamiltonian(&EnergyParams::default(), &ExchangeParams::default(), detuning).unwrap();
        label_states(eigendecompose(&h, DEFAULT_TOL).unwrap(), &parent_vectors())
    }

    #[test]
    fn parents_are_orthonormal() {
        let p = parent_vectors();
        let g = p.transpose() * p;
        assert!((g - Matrix15::identity()).amax() < 1e-15);
    }

    #[test]
    fn table_matrix_numerics() {
        let h = build_hamiltonian(&EnergyParams::default(), &ExchangeParams::default(), -3.5).unwrap();
        let s = eigendecompose(&h, DEFAULT_TOL).unwrap();
        // Residual recomputed independently of the stored value.
        for k in 0..DIM {
            let v = s.vector(k);
            let r = (h.entries * v - v * s.eigenvalues[k]).norm();
            assert!(r <= 1e-10 * h.frobenius_norm());
        }
        assert!(s.residual_norm <= 1e-10);
        assert!(s.orthonormality_error() <= 1e-10);
        assert!(s.completeness_error() <= 1e-10);
        let tr: f64 = s.eigenvalues.sum();
        assert!((tr - h.trace()).abs() <= 1e-9 * h.trace().abs());
        for k in 1..DIM {
            assert!(s.eigenvalues[k] >= s.eigenvalues[k - 1]);
        }
    }

    #[test]
    fn exact_parentage_gives_unit_overlap() {
        // H = Σ ε_l p_l p_lᵀ with distinct ε has the parents as exact eigenvectors.
        let p = parent_vectors();
        let eps = Matrix15::from_diagonal(&SVector::<f64, DIM>::from_fn(|i, _| 0.37 * i as f64 - 1.0));
        let h = p * eps * p.transpose();
        let ls = label_states(eigendecompose_matrix(&h, DEFAULT_TOL).unwrap(), &p);
        for l in StateLabel::ALL {
            assert!((ls.overlap(l) - 1.0).abs() < 1e-12, "{l}: {}", ls.overlap(l));
            let k = ls.index_of(l);
            assert!((ls.spectrum.eigenvalues[k] - (0.37 * l.index() as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_are_bijection_even_when_degenerate() {
        let s = eigendecompose_matrix(&Matrix15::identity(), DEFAULT_TOL).unwrap();
        let ls = label_states(s, &parent_vectors());
        let mut seen = ls.labels.to_vec();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), DIM);
    }

    #[test]
    fn far_negative_detuning_is_weakly_mixed() {
        let ls = labeled_at(-10.0);
        // TT states stay inside the TT manifold away from resonance.
        for l in StateLabel::TT {
            let v = ls.vector(l);
            let leak: f64 = (7..DIM).map(|m| v[m] * v[m]).sum();
            assert!(leak < 0.01, "{l}: {leak}");
        }
        // States not mixed by the intra-TT anisotropic exchange keep their parents.
        for l in [StateLabel::TwoMinus, StateLabel::HMinus, StateLabel::VPlus, StateLabel::VMinus] {
            assert!(ls.overlap(l) >= 0.9, "{l}: {}", ls.overlap(l));
        }
        // 2+, H+ and 0TT share the |+2>,|0>,|-2> and ±1/±3 couplings and mix at any detuning.
        for l in [StateLabel::TwoPlus, StateLabel::HPlus, StateLabel::ZeroTt] {
            assert!(ls.overlap(l) > STRONG_MIXING, "{l}: {}", ls.overlap(l));
        }
    }

    #[test]
    fn no_coupling_no_phonon_content() {
        let e = EnergyParams {
            c_f: 0.0,
            ..EnergyParams::default()
        };
        let h = build_hamiltonian(&e, &ExchangeParams::default().scaled(0.0), 0.0).unwrap();
        let ls = label_states(eigendecompose(&h, DEFAULT_TOL).unwrap(), &parent_vectors());
        for (_, p) in phonon_projection(&ls) {
            assert_eq!(p.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn projection_completeness_over_all_eigenstates() {
        let ls = labeled_at(0.6);
        for g in GroundBiexciton::ALL {
            let m = g.phonon_index();
            let s: f64 = (0..DIM).map(|k| ls.spectrum.eigenvectors[(m, k)].powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_is_probability_over_lifetime() {
        let mut proj = BTreeMap::new();
        proj.insert(StateLabel::TwoPlus, [0.0, 0.0, 0.0, 0.0175]);
        let t = relaxation_rates(&proj, 7.0);
        let e = t.entries[&(StateLabel::TwoPlus, GroundBiexciton::ZeroSs)];
        assert!((e.rate - 0.0025).abs() < 1e-15);
        assert!((e.lifetime() - 400.0).abs() < 1e-9);
        assert_eq!(t.rate(StateLabel::TwoPlus, GroundBiexciton::ZeroSt), 0.0);
    }

    #[test]
    fn rates_below_floor_clamped() {
        let mut proj = BTreeMap::new();
        proj.insert(StateLabel::HPlus, [1e-12, 0.0, 7e-9, 0.0]);
        let t = relaxation_rates(&proj, 7.0);
        assert_eq!(t.rate(StateLabel::HPlus, GroundBiexciton::Plus3St), 0.0);
        assert_eq!(t.rate(StateLabel::HPlus, GroundBiexciton::Minus3St), 1e-9);
    }

    #[test]
    fn tabulated_pair_lifetimes() {
        use GroundBiexciton as G;
        let t = RateTable::from_lifetimes(&TabulatedLifetimes::default()).unwrap();
        let pm = [G::Plus3St, G::Minus3St];
        assert!((t.pair_lifetime(TtPair::H, &pm) - 50.0).abs() < 1e-9);
        assert!((t.pair_lifetime(TtPair::V, &pm) - 3000.0).abs() < 1e-9);
        assert!((t.pair_lifetime(TtPair::Two, &[G::ZeroSs]) - 400.0).abs() < 1e-9);
        assert!((t.pair_lifetime(TtPair::Two, &[G::ZeroSt]) - 1000.0).abs() < 1e-9);
        assert!((t.pair_lifetime(TtPair::ZeroTt, &[G::ZeroSs]) - 1200.0).abs() < 1e-9);
        assert!((t.pair_lifetime(TtPair::H, &[G::ZeroSs]) - 5000.0).abs() < 1e-9);
        assert!((t.pair_lifetime(TtPair::V, &[G::ZeroSs]) - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn tabulated_rejects_negative() {
        let bad = TabulatedLifetimes {
            v_3st: -1.0,
            ..TabulatedLifetimes::default()
        };
        assert!(RateTable::from_lifetimes(&bad).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, EnergyParams, ExchangeParams};
    use proptest::prelude::*;

    fn perturbed() -> impl Strategy<Value = Matrix15> {
        (-10.0f64..10.0, prop::collection::vec(-0.5f64..0.5, DIM * (DIM + 1) / 2)).prop_map(|(d, noise)| {
            let mut h = build_hamiltonian(&EnergyParams::default(), &ExchangeParams::default(), d)
                .unwrap()
                .entries;
            let mut it = noise.into_iter();
            for r in 0..DIM {
                for c in r..DIM {
                    let v = it.next().unwrap();
                    h[(r, c)] += v;
                    if r != c {
                        h[(c, r)] += v;
                    }
                }
            }
            h
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigendecomposition_invariants(h in perturbed()) {
            let s = eigendecompose_matrix(&h, DEFAULT_TOL).unwrap();
            prop_assert!(s.residual_norm <= 1e-10);
            prop_assert!(s.orthonormality_error() <= 1e-10);
            prop_assert!(s.completeness_error() <= 1e-10);
            prop_assert!((s.eigenvalues.sum() - h.trace()).abs() <= 1e-9 * h.trace().abs());
            for k in 1..DIM {
                prop_assert!(s.eigenvalues[k - 1] <= s.eigenvalues[k]);
            }
            let recon = s.eigenvectors * Matrix15::from_diagonal(&s.eigenvalues) * s.eigenvectors.transpose();
            prop_assert!((recon - h).amax() <= 1e-9 * h.amax());
        }

        #[test]
        fn spectrum_is_permutation_invariant(h in perturbed(), perm in Just((0..DIM).collect::<Vec<_>>()).prop_shuffle()) {
            let p = Matrix15::from_fn(|r, c| if perm[r] == c { 1.0 } else { 0.0 });
            let a = eigendecompose_matrix(&h, DEFAULT_TOL).unwrap();
            let b = eigendecompose_matrix(&(p * h * p.transpose()), DEFAULT_TOL).unwrap();
            prop_assert!((a.eigenvalues - b.eigenvalues).amax() <= 1e-9 * h.amax());
        }

        #[test]
        fn labels_form_a_bijection(h in perturbed()) {
            let ls = label_states(eigendecompose_matrix(&h, DEFAULT_TOL).unwrap(), &parent_vectors());
            let mut seen = ls.labels.to_vec();
            seen.sort();
            prop_assert_eq!(seen, StateLabel::ALL.to_vec());
            for &o in &ls.overlaps {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&o));
            }
            let proj = phonon_projection(&ls);
            prop_assert_eq!(proj.len(), 11);
            for c in proj.values() {
                prop_assert!(c.iter().all(|&p| p >= 0.0) && c.iter().sum::<f64>() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn rates_are_floored_and_scale_with_lifetime(d in -10.0f64..10.0, tau in 0.5f64..50.0) {
            let h = build_hamiltonian(&EnergyParams::default(), &ExchangeParams::default(), d).unwrap();
            let ls = label_states(eigendecompose(&h, DEFAULT_TOL).unwrap(), &parent_vectors());
            let proj = phonon_projection(&ls);
            let t = relaxation_rates(&proj, tau);
            prop_assert!(t.validate().is_ok());
            for (&(label, g), e) in &t.entries {
                let p = proj[&label][GroundBiexciton::ALL.iter().position(|x| *x == g).unwrap()];
                if p / tau < RATE_FLOOR {
                    prop_assert_eq!(e.rate, 0.0);
                } else {
                    prop_assert!((e.rate * tau - p).abs() <= 1e-15);
                }
            }
        }
    }
}
