//! Rate-equation network of the triexciton → biexciton → exciton → empty cascade.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectrum::{GroundBiexciton as G, RateTable, StateLabel, TtPair};

/// Cascade states. TT doublets H and V are tracked per circular branch: the
/// `(+1,−3)` branch is the one reached by a σ+ triexciton photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CascadeState {
    Empty,
    ExcitonH,
    ExcitonV,
    ZeroSs,
    ZeroSt,
    Plus3St,
    Minus3St,
    HPlusBranch,
    HMinusBranch,
    VPlusBranch,
    VMinusBranch,
    Plus2,
    Minus2,
    Zero,
    BrightPlus,
    BrightMinus,
    DarkH,
    DarkV,
}

impl CascadeState {
    pub const COUNT: usize = 18;

    pub const ALL: [CascadeState; Self::COUNT] = [
        CascadeState::Empty,
        CascadeState::ExcitonH,
        CascadeState::ExcitonV,
        CascadeState::ZeroSs,
        CascadeState::ZeroSt,
        CascadeState::Plus3St,
        CascadeState::Minus3St,
        CascadeState::HPlusBranch,
        CascadeState::HMinusBranch,
        CascadeState::VPlusBranch,
        CascadeState::VMinusBranch,
        CascadeState::Plus2,
        CascadeState::Minus2,
        CascadeState::Zero,
        CascadeState::BrightPlus,
        CascadeState::BrightMinus,
        CascadeState::DarkH,
        CascadeState::DarkV,
    ];

    pub const TT: [CascadeState; 7] = [
        CascadeState::HPlusBranch,
        CascadeState::HMinusBranch,
        CascadeState::VPlusBranch,
        CascadeState::VMinusBranch,
        CascadeState::Plus2,
        CascadeState::Minus2,
        CascadeState::Zero,
    ];

    pub const XXX: [CascadeState; 4] = [
        CascadeState::BrightPlus,
        CascadeState::BrightMinus,
        CascadeState::DarkH,
        CascadeState::DarkV,
    ];

    pub const GROUND_BIEXCITONS: [CascadeState; 4] = [
        CascadeState::ZeroSs,
        CascadeState::ZeroSt,
        CascadeState::Plus3St,
        CascadeState::Minus3St,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> &'static str {
        match self {
            CascadeState::Empty => "G",
            CascadeState::ExcitonH => "X_H",
            CascadeState::ExcitonV => "X_V",
            CascadeState::ZeroSs => "0SS",
            CascadeState::ZeroSt => "0ST",
            CascadeState::Plus3St => "+3ST",
            CascadeState::Minus3St => "-3ST",
            CascadeState::HPlusBranch => "H(+1,-3)",
            CascadeState::HMinusBranch => "H(-1,+3)",
            CascadeState::VPlusBranch => "V(+1,-3)",
            CascadeState::VMinusBranch => "V(-1,+3)",
            CascadeState::Plus2 => "+2",
            CascadeState::Minus2 => "-2",
            CascadeState::Zero => "0",
            CascadeState::BrightPlus => "XXX_B+",
            CascadeState::BrightMinus => "XXX_B-",
            CascadeState::DarkH => "XXX_DH",
            CascadeState::DarkV => "XXX_DV",
        }
    }
}

/// Spectral lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Line {
    XxxI,
    XxxII,
    XxxIII,
    XxxIV,
    Xx0,
    Xx0T0,
    Xx0T3,
    X0,
    /// Direct TT → exciton emission, present only with a finite TT lifetime.
    Tt,
}

impl Line {
    pub const ALL: [Line; 9] = [
        Line::XxxI,
        Line::XxxII,
        Line::XxxIII,
        Line::XxxIV,
        Line::Xx0,
        Line::Xx0T0,
        Line::Xx0T3,
        Line::X0,
        Line::Tt,
    ];

    pub const XXX: [Line; 4] = [Line::XxxI, Line::XxxII, Line::XxxIII, Line::XxxIV];

    /// Biexciton lines in correlation-grid order.
    pub const BIEXCITON: [Line; 4] = [Line::Xx0, Line::Xx0T0, Line::Xx0T3, Line::X0];

    pub fn tag(self) -> &'static str {
        match self {
            Line::XxxI => "XXX_i",
            Line::XxxII => "XXX_ii",
            Line::XxxIII => "XXX_iii",
            Line::XxxIV => "XXX_iv",
            Line::Xx0 => "XX0",
            Line::Xx0T0 => "XX0_T0",
            Line::Xx0T3 => "XX0_T3",
            Line::X0 => "X0",
            Line::Tt => "TT",
        }
    }

    fn valid_tags() -> String {
        Line::ALL.iter().map(|l| l.tag()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Line {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Line::ALL
            .iter()
            .copied()
            .find(|l| l.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownLine {
                given: s.to_string(),
                valid: Line::valid_tags(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
    SigmaPlus,
    SigmaMinus,
    Unpolarized,
}

impl Polarization {
    pub fn tag(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::SigmaPlus => "s+",
            Polarization::SigmaMinus => "s-",
            Polarization::Unpolarized => "u",
        }
    }

    fn is_linear(self) -> bool {
        matches!(self, Polarization::H | Polarization::V)
    }

    fn is_circular(self) -> bool {
        matches!(self, Polarization::SigmaPlus | Polarization::SigmaMinus)
    }

    /// Probability that a photon emitted with polarization `self` passes `filter`.
    pub fn transmission(self, filter: Option<Polarization>) -> f64 {
        let Some(f) = filter else { return 1.0 };
        if f == Polarization::Unpolarized {
            return 1.0;
        }
        if self == f {
            1.0
        } else if (self.is_linear() && f.is_linear()) || (self.is_circular() && f.is_circular()) {
            0.0
        } else {
            0.5
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            "s+" | "sigma+" | "S+" => Ok(Polarization::SigmaPlus),
            "s-" | "sigma-" | "S-" => Ok(Polarization::SigmaMinus),
            "u" | "U" | "any" | "none" => Ok(Polarization::Unpolarized),
            other => Err(Error::param("polarization", format!("`{other}` is not one of H, V, s+, s-, u"))),
        }
    }
}

/// A detector channel: spectral line plus optional polarization filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Detection {
    pub line: Line,
    pub filter: Option<Polarization>,
}

impl Detection {
    pub fn new(line: Line, filter: Option<Polarization>) -> Self {
        let filter = filter.filter(|p| *p != Polarization::Unpolarized);
        Self { line, filter }
    }

    pub fn any(line: Line) -> Self {
        Self { line, filter: None }
    }

    pub fn pol_tag(&self) -> &'static str {
        self.filter.map_or("u", Polarization::tag)
    }

    /// Detection weight of a transition.
    pub fn weight(&self, t: &Transition) -> f64 {
        match t.line {
            Some(l) if l == self.line => t.polarization.transmission(self.filter),
            _ => 0.0,
        }
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.pol_tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    Radiative,
    Nonradiative,
    Generation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    /// 1/ps
    pub rate: f64,
    pub kind: TransitionKind,
    pub line: Option<Line>,
    pub polarization: Polarization,
}

/// States, transitions and the generator `R` with `dn/dt = R n`.
#[derive(Debug, Clone)]
pub struct RateNetwork {
    pub labels: Vec<String>,
    pub transitions: Vec<Transition>,
    pub r: DMatrix<f64>,
}

impl RateNetwork {
    pub fn new(labels: Vec<String>, transitions: Vec<Transition>) -> Result<Self> {
        let n = labels.len();
        let mut r = DMatrix::<f64>::zeros(n, n);
        for t in &transitions {
            if t.from >= n || t.to >= n {
                return Err(Error::param("transition", format!("state index out of range ({} -> {})", t.from, t.to)));
            }
            if !t.rate.is_finite() || t.rate < 0.0 {
                return Err(Error::param(
                    "transition",
                    format!("rate {} -> {} is {} /ps", labels[t.from], labels[t.to], t.rate),
                ));
            }
            if t.kind == TransitionKind::Radiative && t.line.is_none() {
                return Err(Error::param("transition", "radiative transition without a line tag"));
            }
            if t.from == t.to {
                continue;
            }
            r[(t.to, t.from)] += t.rate;
            r[(t.from, t.from)] -= t.rate;
        }
        Ok(Self {
            labels,
            transitions,
            r,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `⟨I⟩ = Σ rate · n_from · weight` over transitions seen by `d`.
    pub fn intensity(&self, n: &DVector<f64>, d: &Detection) -> f64 {
        self.transitions
            .iter()
            .map(|t| t.rate * n[t.from] * d.weight(t))
            .sum()
    }

    /// Post-detection state distribution, unnormalized.
    pub fn detected_feed(&self, n: &DVector<f64>, d: &Detection) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        for t in &self.transitions {
            out[t.to] += t.rate * n[t.from] * d.weight(t);
        }
        out
    }

    pub fn has_line(&self, line: Line) -> bool {
        self.transitions.iter().any(|t| t.line == Some(line))
    }

    /// Largest `|Σ_i R[i][j]|`.
    pub fn column_sum_error(&self) -> f64 {
        (0..self.len())
            .map(|j| self.r.column(j).sum().abs())
            .fold(0.0, f64::max)
    }

    pub fn rate_between(&self, from: usize, to: usize) -> f64 {
        self.transitions
            .iter()
            .filter(|t| t.from == from && t.to == to)
            .map(|t| t.rate)
            .sum()
    }

    /// Slowest nonzero exit rate of any state (1/ps).
    pub fn slowest_exit_rate(&self) -> f64 {
        (0..self.len())
            .map(|j| -self.r[(j, j)])
            .filter(|&q| q > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Which TT doublet each triexciton line feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineMap {
    pub i: TtPair,
    pub ii: TtPair,
    pub iii: TtPair,
    pub iv: TtPair,
}

impl Default for LineMap {
    fn default() -> Self {
        Self {
            i: TtPair::Two,
            ii: TtPair::H,
            iii: TtPair::V,
            iv: TtPair::ZeroTt,
        }
    }
}

impl LineMap {
    pub fn line_of(&self, pair: TtPair) -> Result<Line> {
        let entries = [
            (self.i, Line::XxxI),
            (self.ii, Line::XxxII),
            (self.iii, Line::XxxIII),
            (self.iv, Line::XxxIV),
        ];
        let hits: Vec<Line> = entries.iter().filter(|(p, _)| *p == pair).map(|(_, l)| *l).collect();
        match hits.as_slice() {
            [l] => Ok(*l),
            _ => Err(Error::param(
                "line_map",
                format!("doublet {} must be assigned to exactly one triexciton line", pair.tag()),
            )),
        }
    }
}

/// Pair-averaged TT → ground-biexciton rates (1/ps).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelRates {
    pub h_3st: f64,
    pub v_3st: f64,
    pub h_ss: f64,
    pub v_ss: f64,
    pub h_st: f64,
    pub v_st: f64,
    pub two_ss: f64,
    pub two_st: f64,
    pub two_3st: f64,
    pub zero_ss: f64,
    pub zero_st: f64,
    pub zero_3st: f64,
}

impl ChannelRates {
    pub fn from_table(t: &RateTable) -> Result<Self> {
        t.validate()?;
        for l in StateLabel::TT {
            if !t.entries.keys().any(|(from, _)| *from == l) {
                return Err(Error::RateTable(format!("no channel from TT state {l}")));
            }
        }
        let pm = [G::Plus3St, G::Minus3St];
        Ok(Self {
            h_3st: t.pair_rate(TtPair::H, &pm),
            v_3st: t.pair_rate(TtPair::V, &pm),
            h_ss: t.pair_rate(TtPair::H, &[G::ZeroSs]),
            v_ss: t.pair_rate(TtPair::V, &[G::ZeroSs]),
            h_st: t.pair_rate(TtPair::H, &[G::ZeroSt]),
            v_st: t.pair_rate(TtPair::V, &[G::ZeroSt]),
            two_ss: t.pair_rate(TtPair::Two, &[G::ZeroSs]),
            two_st: t.pair_rate(TtPair::Two, &[G::ZeroSt]),
            two_3st: t.pair_rate(TtPair::Two, &pm),
            zero_ss: t.pair_rate(TtPair::ZeroTt, &[G::ZeroSs]),
            zero_st: t.pair_rate(TtPair::ZeroTt, &[G::ZeroSt]),
            zero_3st: t.pair_rate(TtPair::ZeroTt, &pm),
        })
    }

    /// All TT → ground channels off.
    pub fn none() -> Self {
        Self::default()
    }
}

/// Radiative lifetimes (ps) and generation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    pub tau_xxx: f64,
    pub tau_xx: f64,
    pub tau_x: f64,
    /// Direct TT radiative lifetime; infinite disables the TT line.
    pub tau_tt: f64,
    /// Fraction of exciton captures landing in 0SS; the rest is spread equally
    /// over 0ST, +3ST and −3ST.
    pub capture_ss: f64,
    /// TT states can capture a further pair into the triexciton.
    pub tt_capture: bool,
    pub line_map: LineMap,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            tau_xxx: 400.0,
            tau_xx: 400.0,
            tau_x: 400.0,
            tau_tt: f64::INFINITY,
            capture_ss: 1.0,
            tt_capture: true,
            line_map: LineMap::default(),
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_xxx", self.tau_xxx), ("tau_xx", self.tau_xx), ("tau_x", self.tau_x)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::param(name, "radiative lifetime must be positive and finite"));
            }
        }
        if self.tau_tt.is_nan() || self.tau_tt <= 0.0 {
            return Err(Error::param("tau_tt", "must be positive (inf disables)"));
        }
        if !(0.0..=1.0).contains(&self.capture_ss) {
            return Err(Error::param("capture_ss", "must lie in [0, 1]"));
        }
        for p in TtPair::ALL {
            self.line_map.line_of(p)?;
        }
        Ok(())
    }
}

struct Builder {
    transitions: Vec<Transition>,
}

impl Builder {
    fn push(&mut self, from: CascadeState, to: CascadeState, rate: f64, kind: TransitionKind, line: Option<Line>, pol: Polarization) {
        if rate > 0.0 {
            self.transitions.push(Transition {
                from: from.index(),
                to: to.index(),
                rate,
                kind,
                line,
                polarization: pol,
            });
        }
    }

    fn emit(&mut self, from: CascadeState, to: CascadeState, rate: f64, line: Line, pol: Polarization) {
        self.push(from, to, rate, TransitionKind::Radiative, Some(line), pol);
    }

    fn relax(&mut self, from: CascadeState, to: CascadeState, rate: f64) {
        self.push(from, to, rate, TransitionKind::Nonradiative, None, Polarization::Unpolarized);
    }

    fn generate(&mut self, from: CascadeState, to: CascadeState, rate: f64) {
        self.push(from, to, rate, TransitionKind::Generation, None, Polarization::Unpolarized);
    }
}

/// Assembles the 18-state cascade network.
pub fn build_rate_network(k: &ChannelRates, p: &NetworkParams, generation: f64) -> Result<RateNetwork> {
    use CascadeState as S;
    use Polarization::{SigmaMinus as Sm, SigmaPlus as Sp, Unpolarized as U, H, V};

    p.validate()?;
    if !generation.is_finite() || generation < 0.0 {
        return Err(Error::param("generation", format!("{generation} /ps must be non-negative")));
    }
    let channels = [
        k.h_3st, k.v_3st, k.h_ss, k.v_ss, k.h_st, k.v_st, k.two_ss, k.two_st, k.two_3st, k.zero_ss, k.zero_st,
        k.zero_3st,
    ];
    if channels.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::RateTable("channel rates must be finite and non-negative".into()));
    }

    let mut b = Builder {
        transitions: Vec::new(),
    };
    let g = generation;

    // Generation: empty dot → exciton → biexciton → triexciton.
    b.generate(S::Empty, S::ExcitonH, 0.5 * g);
    b.generate(S::Empty, S::ExcitonV, 0.5 * g);
    let rest = (1.0 - p.capture_ss) / 3.0;
    for x in [S::ExcitonH, S::ExcitonV] {
        b.generate(x, S::ZeroSs, g * p.capture_ss);
        for bx in [S::ZeroSt, S::Plus3St, S::Minus3St] {
            b.generate(x, bx, g * rest);
        }
    }
    let mut biexcitons: Vec<S> = S::GROUND_BIEXCITONS.to_vec();
    if p.tt_capture {
        biexcitons.extend(S::TT);
    }
    for bx in biexcitons {
        for xxx in S::XXX {
            b.generate(bx, xxx, 0.25 * g);
        }
    }

    // Triexciton emission into the TT doublets.
    let half_xxx = 0.5 / p.tau_xxx;
    for pair in TtPair::ALL {
        let line = p.line_map.line_of(pair)?;
        match pair {
            TtPair::H => {
                b.emit(S::DarkH, S::HPlusBranch, half_xxx, line, Sp);
                b.emit(S::DarkH, S::HMinusBranch, half_xxx, line, Sm);
            }
            TtPair::V => {
                b.emit(S::DarkV, S::VPlusBranch, half_xxx, line, Sp);
                b.emit(S::DarkV, S::VMinusBranch, half_xxx, line, Sm);
            }
            TtPair::Two => {
                b.emit(S::BrightPlus, S::Minus2, half_xxx, line, Sp);
                b.emit(S::BrightMinus, S::Plus2, half_xxx, line, Sm);
            }
            TtPair::ZeroTt => {
                b.emit(S::BrightPlus, S::Zero, half_xxx, line, Sm);
                b.emit(S::BrightMinus, S::Zero, half_xxx, line, Sp);
            }
        }
    }

    // Phonon-assisted TT relaxation. Flip-flop keeps the circular branch:
    // (+1,−3) → +3ST, (−1,+3) → −3ST.
    for (branch, target, k3, kss, kst) in [
        (S::HPlusBranch, S::Plus3St, k.h_3st, k.h_ss, k.h_st),
        (S::HMinusBranch, S::Minus3St, k.h_3st, k.h_ss, k.h_st),
        (S::VPlusBranch, S::Plus3St, k.v_3st, k.v_ss, k.v_st),
        (S::VMinusBranch, S::Minus3St, k.v_3st, k.v_ss, k.v_st),
    ] {
        b.relax(branch, target, k3);
        b.relax(branch, S::ZeroSs, kss);
        b.relax(branch, S::ZeroSt, kst);
    }
    for (two, target) in [(S::Plus2, S::Plus3St), (S::Minus2, S::Minus3St)] {
        b.relax(two, S::ZeroSs, k.two_ss);
        b.relax(two, S::ZeroSt, k.two_st);
        b.relax(two, target, k.two_3st);
    }
    b.relax(S::Zero, S::ZeroSs, k.zero_ss);
    b.relax(S::Zero, S::ZeroSt, k.zero_st);
    b.relax(S::Zero, S::Plus3St, 0.5 * k.zero_3st);
    b.relax(S::Zero, S::Minus3St, 0.5 * k.zero_3st);

    if p.tau_tt.is_finite() {
        for tt in S::TT {
            b.emit(tt, S::ExcitonH, 0.5 / p.tau_tt, Line::Tt, U);
            b.emit(tt, S::ExcitonV, 0.5 / p.tau_tt, Line::Tt, U);
        }
    }

    // Ground biexciton and exciton emission.
    let half_xx = 0.5 / p.tau_xx;
    for (bx, line) in [(S::ZeroSs, Line::Xx0), (S::ZeroSt, Line::Xx0T0)] {
        b.emit(bx, S::ExcitonH, half_xx, line, H);
        b.emit(bx, S::ExcitonV, half_xx, line, V);
    }
    for (bx, pol) in [(S::Plus3St, Sp), (S::Minus3St, Sm)] {
        b.emit(bx, S::ExcitonH, half_xx, Line::Xx0T3, pol);
        b.emit(bx, S::ExcitonV, half_xx, Line::Xx0T3, pol);
    }
    b.emit(S::ExcitonH, S::Empty, 1.0 / p.tau_x, Line::X0, H);
    b.emit(S::ExcitonV, S::Empty, 1.0 / p.tau_x, Line::X0, V);

    let labels = S::ALL.iter().map(|s| s.tag().to_string()).collect();
    RateNetwork::new(labels, b.transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::TabulatedLifetimes;

    fn table_channels() -> ChannelRates {
        ChannelRates::from_table(&RateTable::from_lifetimes(&TabulatedLifetimes::default()).unwrap()).unwrap()
    }

    #[test]
    fn eighteen_unique_states() {
        let mut tags: Vec<_> = CascadeState::ALL.iter().map(|s| s.tag()).collect();
        tags.sort();
        tags.dedup();
        assert_eq!(tags.len(), CascadeState::COUNT);
        for (i, s) in CascadeState::ALL.iter().enumerate() {
            assert_eq!(s.index(), i);
        }
    }

    #[test]
    fn column_sums_vanish() {
        let net = build_rate_network(&table_channels(), &NetworkParams::default(), 0.004).unwrap();
        assert!(net.column_sum_error() < 1e-18);
    }

    #[test]
    fn table_channel_rates() {
        let k = table_channels();
        assert!((k.h_3st - 1.0 / 50.0).abs() < 1e-15);
        assert!((k.v_3st - 1.0 / 3000.0).abs() < 1e-15);
        assert!((k.zero_ss - 1.0 / 1200.0).abs() < 1e-15);
        assert_eq!(k.two_3st, 0.0);
    }

    #[test]
    fn no_cross_circular_flip_flop() {
        use CascadeState as S;
        let net = build_rate_network(&table_channels(), &NetworkParams::default(), 0.004).unwrap();
        for (branch, wrong) in [
            (S::HPlusBranch, S::Minus3St),
            (S::HMinusBranch, S::Plus3St),
            (S::VPlusBranch, S::Minus3St),
            (S::VMinusBranch, S::Plus3St),
        ] {
            assert!(!net.transitions.iter().any(|t| t.from == branch.index() && t.to == wrong.index()));
        }
        assert!((net.rate_between(S::HPlusBranch.index(), S::Plus3St.index()) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn radiative_transitions_are_tagged() {
        let net = build_rate_network(&table_channels(), &NetworkParams::default(), 0.004).unwrap();
        for t in &net.transitions {
            assert_eq!(t.kind == TransitionKind::Radiative, t.line.is_some());
        }
        assert!(!net.has_line(Line::Tt));
    }

    #[test]
    fn generation_only_from_lower_manifolds() {
        use CascadeState as S;
        let net = build_rate_network(&table_channels(), &NetworkParams::default(), 0.004).unwrap();
        for t in net.transitions.iter().filter(|t| t.kind == TransitionKind::Generation) {
            let from = S::ALL[t.from];
            let to = S::ALL[t.to];
            assert!(!S::XXX.contains(&from));
            assert!(to != S::Empty);
        }
    }

    #[test]
    fn rejects_negative_rates() {
        let mut k = table_channels();
        k.v_ss = -1e-3;
        assert!(build_rate_network(&k, &NetworkParams::default(), 0.004).is_err());
        assert!(build_rate_network(&table_channels(), &NetworkParams::default(), -1.0).is_err());
    }

    #[test]
    fn rejects_incomplete_table() {
        let mut t = RateTable::from_lifetimes(&TabulatedLifetimes::default()).unwrap();
        t.entries.retain(|(from, _), _| *from != StateLabel::ZeroTt);
        assert!(ChannelRates::from_table(&t).is_err());
    }

    #[test]
    fn line_map_must_be_bijective() {
        let p = NetworkParams {
            line_map: LineMap {
                i: TtPair::H,
                ..LineMap::default()
            },
            ..NetworkParams::default()
        };
        assert!(build_rate_network(&table_channels(), &p, 0.004).is_err());
    }

    #[test]
    fn polarization_transmission() {
        use Polarization::*;
        assert_eq!(H.transmission(Some(H)), 1.0);
        assert_eq!(H.transmission(Some(V)), 0.0);
        assert_eq!(SigmaPlus.transmission(Some(SigmaMinus)), 0.0);
        assert_eq!(SigmaPlus.transmission(Some(H)), 0.5);
        assert_eq!(Unpolarized.transmission(Some(SigmaPlus)), 0.5);
        assert_eq!(Unpolarized.transmission(None), 1.0);
    }

    #[test]
    fn line_tags_round_trip() {
        for l in Line::ALL {
            assert_eq!(l.tag().parse::<Line>().unwrap(), l);
        }
        let err = "XXX_v".parse::<Line>().unwrap_err();
        assert!(err.to_string().contains("XX0_T3"));
    }
}
