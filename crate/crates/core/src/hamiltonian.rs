//! Coupled spin–phonon Hamiltonian of the excited biexciton.
//!
//! The model space holds the seven optically active electron-triplet/hole-triplet
//! (TT) configurations, the four excited electron-singlet configurations with no
//! phonon, and the four ground biexciton configurations dressed with one LO
//! phonon. The diagonal (`h0_diagonal`) carries single-carrier, direct Coulomb and
//! carrier-carrier exchange energies; the off-diagonal coupling carries e-h
//! exchange (isotropic, anisotropic and dark–bright mixing) and the Fröhlich
//! electron–LO-phonon term.
//!
//! All energies are in meV.

use std::fmt;

use nalgebra::SMatrix;

use crate::error::{Error, Result};

/// Dimension of the model space.
pub const DIM: usize = 15;

pub type Matrix15 = SMatrix<f64, DIM, DIM>;

/// Which part of the model space a basis state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    /// Electron triplet, hole triplet, no phonon.
    TripletTriplet,
    /// Excited electron singlet `(1e¹2e¹)_S`, no phonon.
    ExcitedSinglet,
    /// Ground electron singlet `1e²` with one LO phonon.
    GroundPlusPhonon,
}

/// Basis states in matrix order. The discriminant is the row/column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisState {
    Plus2 = 0,
    Minus1 = 1,
    Plus3 = 2,
    Zero = 3,
    Minus3 = 4,
    Plus1 = 5,
    Minus2 = 6,
    Plus3StarSt = 7,
    ZeroStarSt = 8,
    Minus3StarSt = 9,
    ZeroStarSs = 10,
    Plus3StLo = 11,
    ZeroStLo = 12,
    Minus3StLo = 13,
    ZeroSsLo = 14,
}

impl BasisState {
    pub const ALL: [BasisState; DIM] = [
        BasisState::Plus2,
        BasisState::Minus1,
        BasisState::Plus3,
        BasisState::Zero,
        BasisState::Minus3,
        BasisState::Plus1,
        BasisState::Minus2,
        BasisState::Plus3StarSt,
        BasisState::ZeroStarSt,
        BasisState::Minus3StarSt,
        BasisState::ZeroStarSs,
        BasisState::Plus3StLo,
        BasisState::ZeroStLo,
        BasisState::Minus3StLo,
        BasisState::ZeroSsLo,
    ];

    /// The four one-phonon states, in index order.
    pub const PHONON: [BasisState; 4] = [
        BasisState::Plus3StLo,
        BasisState::ZeroStLo,
        BasisState::Minus3StLo,
        BasisState::ZeroSsLo,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn phonon_count(self) -> u8 {
        if self.index() >= 11 {
            1
        } else {
            0
        }
    }

    pub fn manifold(self) -> Manifold {
        match self.index() {
            0..=6 => Manifold::TripletTriplet,
            7..=10 => Manifold::ExcitedSinglet,
            _ => Manifold::GroundPlusPhonon,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BasisState::Plus2 => "|+2>",
            BasisState::Minus1 => "|-1>",
            BasisState::Plus3 => "|+3>",
            BasisState::Zero => "|0>",
            BasisState::Minus3 => "|-3>",
            BasisState::Plus1 => "|+1>",
            BasisState::Minus2 => "|-2>",
            BasisState::Plus3StarSt => "|+3*_ST>",
            BasisState::ZeroStarSt => "|0*_ST>",
            BasisState::Minus3StarSt => "|-3*_ST>",
            BasisState::ZeroStarSs => "|0*_SS>",
            BasisState::Plus3StLo => "|+3_ST,1LO>",
            BasisState::ZeroStLo => "|0_ST,1LO>",
            BasisState::Minus3StLo => "|-3_ST,1LO>",
            BasisState::ZeroSsLo => "|0_SS,1LO>",
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One exchange term resolved over electron level (1e, 2e) and hole level (1h, 2h).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelPairs {
    pub e1_h1: f64,
    pub e1_h2: f64,
    pub e2_h1: f64,
    pub e2_h2: f64,
}

impl LevelPairs {
    pub const fn new(e1_h1: f64, e1_h2: f64, e2_h1: f64, e2_h2: f64) -> Self {
        Self {
            e1_h1,
            e1_h2,
            e2_h1,
            e2_h2,
        }
    }

    pub const fn uniform(v: f64) -> Self {
        Self::new(v, v, v, v)
    }

    pub fn values(&self) -> [f64; 4] {
        [self.e1_h1, self.e1_h2, self.e2_h1, self.e2_h2]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.e1_h1 * s, self.e1_h2 * s, self.e2_h1 * s, self.e2_h2 * s)
    }

    /// `(a + b ± c ± d) / div`, the "plus"/"minus" combinations.
    fn symmetric(&self, sign: f64, div: f64) -> f64 {
        (self.e1_h1 + self.e1_h2 + sign * self.e2_h1 + sign * self.e2_h2) / div
    }

    /// `(a − b − c + d) / div`, the singlet combination.
    fn singlet(&self, div: f64) -> f64 {
        (self.e1_h1 - self.e1_h2 - self.e2_h1 + self.e2_h2) / div
    }
}

/// Electron–hole exchange constants (meV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeParams {
    /// Isotropic exchange.
    pub delta0: LevelPairs,
    /// Anisotropic exchange between bright states.
    pub delta1: LevelPairs,
    /// Exchange between dark states.
    pub delta2: LevelPairs,
    /// Dark–bright mixing through an electron spin flip.
    pub delta_e: LevelPairs,
    /// Dark–bright mixing through a hole spin flip.
    pub delta_h: LevelPairs,
}

impl Default for ExchangeParams {
    fn default() -> Self {
        Self {
            delta0: LevelPairs::new(0.271, 0.200, 0.200, 0.271),
            // Assigned by level pair as described in the parameter table
            // ("1e and 2h" = 0.324, "2e and 1h" = 0.06).
            delta1: LevelPairs::new(-0.033, 0.324, 0.06, 0.06),
            delta2: LevelPairs::uniform(-0.0015),
            delta_e: LevelPairs::uniform(0.003),
            delta_h: LevelPairs::uniform(0.003),
        }
    }
}

impl ExchangeParams {
    /// Upper bound on any exchange magnitude accepted as physical input.
    pub const MAX_MAGNITUDE: f64 = 10.0;

    pub fn validate(&self) -> Result<()> {
        let groups = [
            ("delta0", &self.delta0),
            ("delta1", &self.delta1),
            ("delta2", &self.delta2),
            ("delta_e", &self.delta_e),
            ("delta_h", &self.delta_h),
        ];
        for (name, g) in groups {
            for v in g.values() {
                if !v.is_finite() {
                    return Err(Error::param(name, "must be finite"));
                }
                if v.abs() >= Self::MAX_MAGNITUDE {
                    return Err(Error::param(
                        name,
                        format!("|{v}| meV exceeds the {} meV sanity bound", Self::MAX_MAGNITUDE),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Same parameters with the dark–bright mixing terms removed.
    pub fn without_dark_bright_mixing(&self) -> Self {
        Self {
            delta_e: LevelPairs::default(),
            delta_h: LevelPairs::default(),
            ..*self
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            delta0: self.delta0.scaled(s),
            delta1: self.delta1.scaled(s),
            delta2: self.delta2.scaled(s),
            delta_e: self.delta_e.scaled(s),
            delta_h: self.delta_h.scaled(s),
        }
    }
}

/// Level-averaged exchange combinations entering the coupling matrix (meV).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TildeDeltaSet {
    pub d0_plus: f64,
    pub d0_minus: f64,
    pub d1_plus: f64,
    pub d1_minus: f64,
    pub d2_plus: f64,
    pub d2_minus: f64,
    pub d0_ss: f64,
    pub d1_ss: f64,
    pub de: f64,
    pub dh: f64,
}

pub fn compute_tilde_deltas(x: &ExchangeParams) -> TildeDeltaSet {
    TildeDeltaSet {
        d0_plus: x.delta0.symmetric(1.0, 4.0),
        d0_minus: x.delta0.symmetric(-1.0, 4.0),
        d1_plus: x.delta1.symmetric(1.0, 8.0),
        d1_minus: x.delta1.symmetric(-1.0, 8.0),
        d2_plus: x.delta2.symmetric(1.0, 8.0),
        d2_minus: x.delta2.symmetric(-1.0, 8.0),
        d0_ss: x.delta0.singlet(4.0),
        d1_ss: x.delta1.singlet(8.0),
        de: x.delta_e.symmetric(1.0, 4.0),
        dh: x.delta_h.symmetric(1.0, 4.0),
    }
}

/// Single-carrier, Coulomb, exchange and phonon parameters (meV; `tau_lo` in ps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub e_1h: f64,
    pub e_2h: f64,
    pub e_1e: f64,
    pub e_2e: f64,
    pub e_gap: f64,
    /// E^Coul_{1e1e1e1e}
    pub coul_1e1e: f64,
    /// E^Coul_{2e1e1e2e}
    pub coul_2e1e: f64,
    /// E^Coul_{1h1h1h1h}
    pub coul_1h1h: f64,
    /// E^Coul_{1h2h2h1h}, the single hole–hole cross term.
    pub coul_1h2h: f64,
    /// E^Coul_{1e1h1h1e}
    pub coul_1e1h: f64,
    /// E^Coul_{2e1h1h2e}
    pub coul_2e1h: f64,
    /// E^Coul_{1e2h2h1e}
    pub coul_1e2h: f64,
    /// E^Coul_{2e2h2h2e}
    pub coul_2e2h: f64,
    /// E^exch_{1e2e1e2e}
    pub exch_ee: f64,
    /// E^exch_{1h2h1h2h}
    pub exch_hh: f64,
    pub e_lo: f64,
    /// Fröhlich coupling constant.
    pub c_f: f64,
    /// LO phonon lifetime (ps).
    pub tau_lo: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            e_1h: -5.0,
            e_2h: -15.0,
            e_1e: 14.0,
            e_2e: 42.0,
            e_gap: 1297.0,
            coul_1e1e: 22.7,
            coul_2e1e: 17.0,
            coul_1h1h: 26.3,
            coul_1h2h: 19.7,
            coul_1e1h: 24.3,
            coul_2e1h: 17.3,
            coul_1e2h: 19.1,
            coul_2e2h: 18.8,
            exch_ee: 3.7,
            exch_hh: 6.6,
            e_lo: 32.0,
            c_f: 6.4,
            tau_lo: 7.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("e_1h", self.e_1h),
            ("e_2h", self.e_2h),
            ("e_1e", self.e_1e),
            ("e_2e", self.e_2e),
            ("e_gap", self.e_gap),
            ("coul_1e1e", self.coul_1e1e),
            ("coul_2e1e", self.coul_2e1e),
            ("coul_1h1h", self.coul_1h1h),
            ("coul_1h2h", self.coul_1h2h),
            ("coul_1e1h", self.coul_1e1h),
            ("coul_2e1h", self.coul_2e1h),
            ("coul_1e2h", self.coul_1e2h),
            ("coul_2e2h", self.coul_2e2h),
            ("exch_ee", self.exch_ee),
            ("exch_hh", self.exch_hh),
            ("e_lo", self.e_lo),
            ("c_f", self.c_f),
            ("tau_lo", self.tau_lo),
        ];
        if let Some((name, _)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(name, "must be finite"));
        }
        if self.e_2e <= self.e_1e {
            return Err(Error::param("e_2e", "must exceed e_1e"));
        }
        if self.e_1h <= self.e_2h {
            return Err(Error::param("e_1h", "must exceed e_2h"));
        }
        if self.e_lo <= 0.0 {
            return Err(Error::param("e_lo", "must be positive"));
        }
        if self.c_f < 0.0 {
            return Err(Error::param("c_f", "must be non-negative"));
        }
        if self.tau_lo <= 0.0 {
            return Err(Error::param("tau_lo", "must be positive"));
        }
        Ok(())
    }

    /// Moves the 2e level so that `e_2e - e_1e - e_lo == detuning`.
    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self {
            e_2e: self.e_1e + self.e_lo + detuning,
            ..*self
        }
    }

    /// `e_2e - e_1e - e_lo`
    pub fn detuning(&self) -> f64 {
        self.e_2e - self.e_1e - self.e_lo
    }

    /// Carrier energy of the excited e-triplet configurations (`E*_carr`).
    pub fn e_star_carr(&self) -> f64 {
        self.e_2h + self.e_2e + self.e_gap + self.coul_2e1e + self.coul_1h2h
            - self.coul_1e1h
            - self.coul_2e1h
            - self.coul_1e2h
            - self.coul_2e2h
    }

    /// Carrier energy of the excited singlet-singlet configuration (`E*S_carr`).
    pub fn e_star_singlet_carr(&self) -> f64 {
        self.e_1h + self.e_2e + self.e_gap + self.coul_2e1e + self.coul_1h1h
            - 2.0 * self.coul_1e1h
            - 2.0 * self.coul_2e1h
    }

    /// Carrier energy of the ground-electron hole-triplet configurations (`E_carr`).
    pub fn e_carr(&self) -> f64 {
        self.e_2h + self.e_1e + self.e_gap + self.coul_1e1e + self.coul_1h2h
            - 2.0 * self.coul_1e1h
            - 2.0 * self.coul_1e2h
    }

    /// Carrier energy of the ground biexciton (`E^S_carr`).
    pub fn e_singlet_carr(&self) -> f64 {
        self.e_1h + self.e_1e + self.e_gap + self.coul_1e1e + self.coul_1h1h
            - 4.0 * self.coul_1e1h
    }
}

/// Diagonal of H₀ in basis order.
pub fn h0_diagonal(e: &EnergyParams) -> [f64; DIM] {
    let tt = e.e_star_carr() - e.exch_ee - e.exch_hh;
    let star_st = e.e_star_carr() + e.exch_ee - e.exch_hh;
    let star_ss = e.e_star_singlet_carr() + e.exch_ee;
    let st_lo = e.e_carr() - e.exch_hh + e.e_lo;
    let ss_lo = e.e_singlet_carr() + e.e_lo;
    let mut d = [0.0; DIM];
    for b in BasisState::ALL {
        d[b.index()] = match b {
            BasisState::Plus3StarSt | BasisState::ZeroStarSt | BasisState::Minus3StarSt => star_st,
            BasisState::ZeroStarSs => star_ss,
            BasisState::Plus3StLo | BasisState::ZeroStLo | BasisState::Minus3StLo => st_lo,
            BasisState::ZeroSsLo => ss_lo,
            _ => tt,
        };
    }
    d
}

/// Symbol multiplying a coupling-matrix entry.
#[derive(Debug, Clone, Copy)]
enum Term {
    D0Plus,
    D0Minus,
    D1Plus,
    D1Minus,
    D2Plus,
    D2Minus,
    D0Ss,
    D1Ss,
    De,
    Dh,
    Frohlich,
}

impl Term {
    fn value(self, t: &TildeDeltaSet, c_f: f64) -> f64 {
        match self {
            Term::D0Plus => t.d0_plus,
            Term::D0Minus => t.d0_minus,
            Term::D1Plus => t.d1_plus,
            Term::D1Minus => t.d1_minus,
            Term::D2Plus => t.d2_plus,
            Term::D2Minus => t.d2_minus,
            Term::D0Ss => t.d0_ss,
            Term::D1Ss => t.d1_ss,
            Term::De => t.de,
            Term::Dh => t.dh,
            Term::Frohlich => c_f,
        }
    }
}

/// Upper triangle (row ≤ col) of the coupling matrix before the global factor ½:
/// `(row, col, coefficient, symbol)`.
#[rustfmt::skip]
const COUPLING_UPPER: &[(usize, usize, f64, Term)] = &[
    (0, 0, 1.0, Term::D0Plus),
    (0, 1, 4.0, Term::Dh),
    (0, 2, 4.0, Term::De),
    (0, 3, 1.0, Term::D1Plus),
    (0, 8, -1.0, Term::D1Minus),
    (0, 10, 1.0, Term::D1Ss),
    (0, 11, -2.0, Term::De),
    (1, 2, 1.0, Term::D2Plus),
    (1, 3, 8.0, Term::De),
    (1, 4, 1.0, Term::D1Plus),
    (1, 7, 1.0, Term::D2Minus),
    (1, 9, -1.0, Term::D1Minus),
    (1, 12, -4.0, Term::De),
    (2, 3, 8.0, Term::Dh),
    (2, 5, 1.0, Term::D1Plus),
    (2, 7, -1.0, Term::D0Minus),
    (3, 4, 8.0, Term::Dh),
    (3, 5, 8.0, Term::De),
    (3, 6, 1.0, Term::D1Plus),
    (3, 10, 1.0, Term::D0Ss),
    (4, 5, 1.0, Term::D2Plus),
    (4, 6, 4.0, Term::De),
    (4, 9, 1.0, Term::D0Minus),
    (5, 6, 4.0, Term::Dh),
    (5, 7, 1.0, Term::D1Minus),
    (5, 9, -1.0, Term::D2Minus),
    (5, 12, 4.0, Term::De),
    (6, 6, 1.0, Term::D0Plus),
    (6, 8, 1.0, Term::D1Minus),
    (6, 10, 1.0, Term::D1Ss),
    (6, 13, 2.0, Term::De),
    (7, 8, 8.0, Term::Dh),
    (7, 10, -4.0, Term::Dh),
    (7, 11, 1.0, Term::Frohlich),
    (7, 12, -4.0, Term::Dh),
    (7, 14, 2.0, Term::Dh),
    (8, 9, 8.0, Term::Dh),
    (8, 11, -4.0, Term::Dh),
    (8, 12, 1.0, Term::Frohlich),
    (8, 13, -4.0, Term::Dh),
    (9, 10, 4.0, Term::Dh),
    (9, 12, -4.0, Term::Dh),
    (9, 13, 1.0, Term::Frohlich),
    (9, 14, -2.0, Term::Dh),
    (10, 11, 2.0, Term::Dh),
    (10, 13, -2.0, Term::Dh),
    (10, 14, 1.0, Term::Frohlich),
    (11, 12, 4.0, Term::Dh),
    (11, 14, -2.0, Term::Dh),
    (12, 13, 4.0, Term::Dh),
    (13, 14, 2.0, Term::Dh),
];

/// The exchange + Fröhlich + dark–bright coupling matrix, including the global ½.
pub fn coupling_matrix(t: &TildeDeltaSet, c_f: f64) -> Matrix15 {
    let mut m = Matrix15::zeros();
    for &(r, c, coeff, term) in COUPLING_UPPER {
        let v = 0.5 * coeff * term.value(t, c_f);
        m[(r, c)] = v;
        m[(c, r)] = v;
    }
    m
}

/// Full Hamiltonian at a given detuning `ΔE_1e2e − E_LO` (meV).
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: Matrix15,
    pub detuning: f64,
}

impl HamiltonianMatrix {
    pub fn get(&self, a: BasisState, b: BasisState) -> f64 {
        self.entries[(a.index(), b.index())]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

/// Builds `diag(H₀) + H_coupling` with the 2e level placed at `e_1e + e_lo + detuning`.
pub fn build_hamiltonian(
    e: &EnergyParams,
    x: &ExchangeParams,
    detuning: f64,
) -> Result<HamiltonianMatrix> {
    if !detuning.is_finite() {
        return Err(Error::param("detuning", "must be finite"));
    }
    e.validate()?;
    x.validate()?;
    let shifted = e.with_detuning(detuning);
    shifted.validate()?;

    let mut entries = coupling_matrix(&compute_tilde_deltas(x), shifted.c_f);
    for (i, d) in h0_diagonal(&shifted).iter().enumerate() {
        entries[(i, i)] += d;
    }
    Ok(HamiltonianMatrix { entries, detuning })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn pairs(v: &[f64]) -> LevelPairs {
        LevelPairs::new(v[0], v[1], v[2], v[3])
    }

    fn exchange(v: &[f64]) -> ExchangeParams {
        ExchangeParams {
            delta0: pairs(&v[0..4]),
            delta1: pairs(&v[4..8]),
            delta2: pairs(&v[8..12]),
            delta_e: pairs(&v[12..16]),
            delta_h: pairs(&v[16..20]),
        }
    }

    fn flat(x: &ExchangeParams) -> Vec<f64> {
        [x.delta0, x.delta1, x.delta2, x.delta_e, x.delta_h].iter().flat_map(|p| p.values()).collect()
    }

    fn exchange_strategy() -> impl Strategy<Value = ExchangeParams> {
        prop::collection::vec(-1.0f64..1.0, 20).prop_map(|v| exchange(&v))
    }

    fn coupling(x: &ExchangeParams, c_f: f64) -> Matrix15 {
        coupling_matrix(&compute_tilde_deltas(x), c_f)
    }

    const PHONON: std::ops::Range<usize> = 11..15;

    proptest! {
        #[test]
        fn hamiltonian_is_symmetric(x in exchange_strategy(), d in -10.0f64..10.0) {
            let h = build_hamiltonian(&EnergyParams::default(), &x, d).unwrap();
            prop_assert_eq!(&h.entries, &h.entries.transpose());
        }

        #[test]
        fn coupling_is_linear(a in exchange_strategy(), b in exchange_strategy(),
                              ca in -10.0f64..10.0, cb in -10.0f64..10.0, s in -3.0f64..3.0) {
            let sum: Vec<f64> = flat(&a.scaled(s)).iter().zip(flat(&b)).map(|(p, q)| p + q).collect();
            let sum = exchange(&sum);
            let lhs = coupling(&sum, s * ca + cb);
            let rhs = coupling(&a, ca) * s + coupling(&b, cb);
            prop_assert!((lhs - rhs).amax() < 1e-12);
        }

        #[test]
        fn detuning_only_moves_the_diagonal(x in exchange_strategy(), d1 in -10.0f64..10.0, d2 in -10.0f64..10.0) {
            let e = EnergyParams::default();
            let diff = build_hamiltonian(&e, &x, d1).unwrap().entries - build_hamiltonian(&e, &x, d2).unwrap().entries;
            for r in 0..DIM {
                for c in 0..DIM {
                    if r != c {
                        prop_assert_eq!(diff[(r, c)], 0.0);
                    }
                }
            }
        }

        #[test]
        fn phonon_block_decouples_without_frohlich_and_dark_bright(x in exchange_strategy()) {
            let m = coupling(&x.without_dark_bright_mixing(), 0.0);
            for r in PHONON {
                for c in 0..DIM {
                    if r != c {
                        prop_assert_eq!(m[(r, c)], 0.0);
                        prop_assert_eq!(m[(c, r)], 0.0);
                    }
                }
            }
        }

        #[test]
        fn triplet_to_phonon_entries_need_electron_flip(x in exchange_strategy(), c_f in -10.0f64..10.0) {
            let no_e = ExchangeParams { delta_e: LevelPairs::default(), ..x };
            let m = coupling(&no_e, c_f);
            for r in 0..7 {
                for c in PHONON {
                    prop_assert_eq!(m[(r, c)], 0.0);
                }
            }
        }

        #[test]
        fn frohlich_enters_only_four_entries(x in exchange_strategy(), c_f in -10.0f64..10.0) {
            let diff = coupling(&x, c_f) - coupling(&x, 0.0);
            for r in 0..DIM {
                for c in 0..DIM {
                    let expected = if (r + 4 == c || c + 4 == r) && r.min(c) >= 7 { 0.5 * c_f } else { 0.0 };
                    prop_assert!((diff[(r, c)] - expected).abs() < 1e-12);
                }
            }
        }
    }

}
