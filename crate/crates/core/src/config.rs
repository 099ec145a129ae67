//! Sectioned `key = value [unit]` parameter files.
//!
//! ```text
//! [energies]
//! detuning = -3.5 meV
//! [dynamics]
//! generation = calibrate
//! ```
//!
//! Lines starting with `#` or `;` are comments. Missing keys keep their defaults.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{LineMap, NetworkParams};
use crate::error::{Error, Result};
use crate::hamiltonian::{EnergyParams, ExchangeParams, LevelPairs};
use crate::spectrum::{TabulatedLifetimes, TtPair, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generation {
    Calibrate,
    /// 1/ps
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    /// Rates from the diagonalized Hamiltonian at the configured detuning.
    Model,
    /// Tabulated lifetimes.
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub energies: EnergyParams,
    pub exchange: ExchangeParams,
    /// meV
    pub detuning: f64,
    pub network: NetworkParams,
    pub generation: Generation,
    pub rate_source: RateSource,
    pub lifetimes: TabulatedLifetimes,
    /// ps
    pub tau_step: f64,
    /// ps
    pub tau_span: f64,
    pub mc_events: usize,
    pub seed: u64,
    /// ps
    pub detector_fwhm: f64,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
    pub eigen_tol: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            energies: EnergyParams::default(),
            exchange: ExchangeParams::default(),
            detuning: -3.5,
            network: NetworkParams::default(),
            generation: Generation::Calibrate,
            rate_source: RateSource::Table,
            lifetimes: TabulatedLifetimes::default(),
            tau_step: 10.0,
            tau_span: 20000.0,
            mc_events: 0,
            seed: 20160101,
            detector_fwhm: 400.0,
            sweep_min: -10.0,
            sweep_max: 10.0,
            sweep_points: 401,
            eigen_tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    MeV,
    Ps,
    PerPs,
    None,
}

impl Unit {
    fn tag(self) -> &'static str {
        match self {
            Unit::MeV => "meV",
            Unit::Ps => "ps",
            Unit::PerPs => "/ps",
            Unit::None => "",
        }
    }

    fn parse(s: &str) -> Option<Unit> {
        match s {
            "meV" => Some(Unit::MeV),
            "ps" => Some(Unit::Ps),
            "/ps" | "1/ps" | "ps^-1" => Some(Unit::PerPs),
            _ => None,
        }
    }
}

const SECTIONS: [&str; 5] = ["energies", "exchange", "dynamics", "detector", "sweep"];

const LEVEL_KEYS: [&str; 4] = ["1e_1h", "1e_2h", "2e_1h", "2e_2h"];
const EXCHANGE_GROUPS: [&str; 5] = ["delta0", "delta1", "delta2", "delta_e", "delta_h"];

fn pairs_mut<'a>(x: &'a mut ExchangeParams, group: &str) -> Option<&'a mut LevelPairs> {
    match group {
        "delta0" => Some(&mut x.delta0),
        "delta1" => Some(&mut x.delta1),
        "delta2" => Some(&mut x.delta2),
        "delta_e" => Some(&mut x.delta_e),
        "delta_h" => Some(&mut x.delta_h),
        _ => None,
    }
}

fn level_mut<'a>(p: &'a mut LevelPairs, key: &str) -> Option<&'a mut f64> {
    match key {
        "1e_1h" => Some(&mut p.e1_h1),
        "1e_2h" => Some(&mut p.e1_h2),
        "2e_1h" => Some(&mut p.e2_h1),
        "2e_2h" => Some(&mut p.e2_h2),
        _ => None,
    }
}

fn energy_field<'a>(e: &'a mut EnergyParams, key: &str) -> Option<(&'a mut f64, Unit)> {
    let f = match key {
        "e_1h" => &mut e.e_1h,
        "e_2h" => &mut e.e_2h,
        "e_1e" => &mut e.e_1e,
        "e_2e" => &mut e.e_2e,
        "e_gap" => &mut e.e_gap,
        "coul_1e1e" => &mut e.coul_1e1e,
        "coul_2e1e" => &mut e.coul_2e1e,
        "coul_1h1h" => &mut e.coul_1h1h,
        "coul_1h2h" => &mut e.coul_1h2h,
        "coul_1e1h" => &mut e.coul_1e1h,
        "coul_2e1h" => &mut e.coul_2e1h,
        "coul_1e2h" => &mut e.coul_1e2h,
        "coul_2e2h" => &mut e.coul_2e2h,
        "exch_ee" => &mut e.exch_ee,
        "exch_hh" => &mut e.exch_hh,
        "e_lo" => &mut e.e_lo,
        "c_f" => &mut e.c_f,
        "tau_lo" => return Some((&mut e.tau_lo, Unit::Ps)),
        _ => return None,
    };
    Some((f, Unit::MeV))
}

const ENERGY_KEYS: [&str; 18] = [
    "e_1h", "e_2h", "e_1e", "e_2e", "e_gap", "coul_1e1e", "coul_2e1e", "coul_1h1h", "coul_1h2h", "coul_1e1h",
    "coul_2e1h", "coul_1e2h", "coul_2e2h", "exch_ee", "exch_hh", "e_lo", "c_f", "tau_lo",
];

fn parse_pair(s: &str) -> Option<TtPair> {
    match s {
        "2" => Some(TtPair::Two),
        "H" => Some(TtPair::H),
        "V" => Some(TtPair::V),
        "0TT" => Some(TtPair::ZeroTt),
        _ => None,
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
    unit: Option<&'a str>,
}

impl Entry<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.line,
            message: message.into(),
        }
    }

    fn check_unit(&self, expected: Unit) -> Result<()> {
        match (self.unit, expected) {
            (None, _) => Ok(()),
            (Some(u), Unit::None) => Err(self.err(format!("`{}` takes no unit, got `{u}`", self.key))),
            (Some(u), exp) => match Unit::parse(u) {
                Some(got) if got == exp => Ok(()),
                _ => Err(self.err(format!("`{}` expects unit `{}`, got `{u}`", self.key, exp.tag()))),
            },
        }
    }

    fn number(&self, unit: Unit) -> Result<f64> {
        self.check_unit(unit)?;
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.err(format!("`{}`: `{}` is not a number", self.key, self.value)))?;
        if v.is_nan() {
            return Err(self.err(format!("`{}` is NaN", self.key)));
        }
        Ok(v)
    }

    fn finite(&self, unit: Unit) -> Result<f64> {
        let v = self.number(unit)?;
        if !v.is_finite() {
            return Err(self.err(format!("`{}` must be finite", self.key)));
        }
        Ok(v)
    }

    fn count(&self) -> Result<usize> {
        self.check_unit(Unit::None)?;
        self.value
            .parse()
            .map_err(|_| self.err(format!("`{}`: `{}` is not a non-negative integer", self.key, self.value)))
    }

    fn flag(&self) -> Result<bool> {
        self.check_unit(Unit::None)?;
        match self.value {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            v => Err(self.err(format!("`{}`: `{v}` is not a boolean", self.key))),
        }
    }
}

fn apply(p: &mut ModelParams, section: &str, e: &Entry) -> Result<()> {
    let unknown = || e.err(format!("unknown key `{}` in [{section}]", e.key));
    match section {
        "energies" => {
            if e.key == "detuning" {
                p.detuning = e.finite(Unit::MeV)?;
            } else {
                let (f, unit) = energy_field(&mut p.energies, e.key).ok_or_else(unknown)?;
                *f = e.finite(unit)?;
            }
        }
        "exchange" => {
            let (group, level) = EXCHANGE_GROUPS
                .iter()
                .find_map(|g| e.key.strip_prefix(g).and_then(|r| r.strip_prefix('_')).map(|r| (*g, r)))
                .ok_or_else(unknown)?;
            let pairs = pairs_mut(&mut p.exchange, group).ok_or_else(unknown)?;
            let f = level_mut(pairs, level).ok_or_else(unknown)?;
            *f = e.finite(Unit::MeV)?;
        }
        "dynamics" => match e.key {
            "tau_xxx" => p.network.tau_xxx = e.finite(Unit::Ps)?,
            "tau_xx" => p.network.tau_xx = e.finite(Unit::Ps)?,
            "tau_x" => p.network.tau_x = e.finite(Unit::Ps)?,
            "tau_tt" => p.network.tau_tt = e.number(Unit::Ps)?,
            "capture_ss" => p.network.capture_ss = e.finite(Unit::None)?,
            "tt_capture" => p.network.tt_capture = e.flag()?,
            "line_i" | "line_ii" | "line_iii" | "line_iv" => {
                e.check_unit(Unit::None)?;
                let pair = parse_pair(e.value)
                    .ok_or_else(|| e.err(format!("`{}`: `{}` is not one of 2, H, V, 0TT", e.key, e.value)))?;
                let m = &mut p.network.line_map;
                match e.key {
                    "line_i" => m.i = pair,
                    "line_ii" => m.ii = pair,
                    "line_iii" => m.iii = pair,
                    _ => m.iv = pair,
                }
            }
            "generation" => {
                p.generation = if e.value == "calibrate" {
                    e.check_unit(Unit::None)?;
                    Generation::Calibrate
                } else {
                    Generation::Fixed(e.finite(Unit::PerPs)?)
                }
            }
            "rate_source" => {
                e.check_unit(Unit::None)?;
                p.rate_source = match e.value {
                    "model" => RateSource::Model,
                    "table" => RateSource::Table,
                    v => return Err(e.err(format!("`rate_source`: `{v}` is not `model` or `table`"))),
                }
            }
            "lifetime_h_3st" => p.lifetimes.h_3st = e.number(Unit::Ps)?,
            "lifetime_v_3st" => p.lifetimes.v_3st = e.number(Unit::Ps)?,
            "lifetime_two_ss" => p.lifetimes.two_ss = e.number(Unit::Ps)?,
            "lifetime_two_st" => p.lifetimes.two_st = e.number(Unit::Ps)?,
            "lifetime_zero_ss" => p.lifetimes.zero_ss = e.number(Unit::Ps)?,
            "lifetime_hv_ss" => p.lifetimes.hv_ss = e.number(Unit::Ps)?,
            "tau_step" => p.tau_step = e.finite(Unit::Ps)?,
            "tau_span" => p.tau_span = e.finite(Unit::Ps)?,
            "mc_events" => p.mc_events = e.count()?,
            "seed" => {
                e.check_unit(Unit::None)?;
                p.seed = e
                    .value
                    .parse()
                    .map_err(|_| e.err(format!("`seed`: `{}` is not a u64", e.value)))?;
            }
            _ => return Err(unknown()),
        },
        "detector" => match e.key {
            "fwhm" => p.detector_fwhm = e.finite(Unit::Ps)?,
            _ => return Err(unknown()),
        },
        "sweep" => match e.key {
            "d_min" => p.sweep_min = e.finite(Unit::MeV)?,
            "d_max" => p.sweep_max = e.finite(Unit::MeV)?,
            "points" => p.sweep_points = e.count()?,
            "eigen_tol" => p.eigen_tol = e.finite(Unit::None)?,
            _ => return Err(unknown()),
        },
        _ => unreachable!("section validated by caller"),
    }
    Ok(())
}

/// Parses configuration text on top of the defaults.
pub fn parse_config(text: &str) -> Result<ModelParams> {
    let mut p = ModelParams::default();
    let mut section: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split(['#', ';']).next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config {
                    line,
                    message: format!("malformed section header `{body}`"),
                })?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", ")),
                });
            }
            section = Some(SECTIONS.iter().find(|s| **s == name).copied().unwrap());
            continue;
        }
        let (key, rest) = body.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{body}`"),
        })?;
        let mut tokens = rest.split_whitespace();
        let value = tokens.next().ok_or_else(|| Error::Config {
            line,
            message: format!("missing value for `{}`", key.trim()),
        })?;
        let unit = tokens.next();
        if let Some(extra) = tokens.next() {
            return Err(Error::Config {
                line,
                message: format!("unexpected trailing `{extra}`"),
            });
        }
        let sec = section.ok_or_else(|| Error::Config {
            line,
            message: "key outside of any section".into(),
        })?;
        apply(
            &mut p,
            sec,
            &Entry {
                line,
                key: key.trim(),
                value,
                unit,
            },
        )?;
    }
    p.validate()?;
    Ok(p)
}

pub fn load_config(path: &Path) -> Result<ModelParams> {
    parse_config(&std::fs::read_to_string(path)?)
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.energies.validate()?;
        self.exchange.validate()?;
        self.energies.with_detuning(self.detuning).validate()?;
        self.network.validate()?;
        self.lifetimes.validate()?;
        if let Generation::Fixed(g) = self.generation {
            if g < 0.0 {
                return Err(Error::param("generation", "must be non-negative"));
            }
        }
        if !(self.tau_step > 0.0) || !(self.tau_span > self.tau_step) {
            return Err(Error::Grid(format!(
                "tau_step {} ps and tau_span {} ps need 0 < step < span",
                self.tau_step, self.tau_span
            )));
        }
        if !(self.detector_fwhm > 0.0) {
            return Err(Error::param("fwhm", "must be positive"));
        }
        if !(self.sweep_min < self.sweep_max) || self.sweep_points < 2 {
            return Err(Error::param("sweep", "needs d_min < d_max and at least 2 points"));
        }
        if !(self.eigen_tol > 0.0 && self.eigen_tol < 1e-6) {
            return Err(Error::param("eigen_tol", "must lie in (0, 1e-6)"));
        }
        Ok(())
    }

    /// Resolved configuration in the input format; parses back to `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let e = &self.energies;
        let mut energies = e.clone();
        s.push_str("[energies]\n");
        for key in ENERGY_KEYS {
            let (v, unit) = energy_field(&mut energies, key).unwrap();
            let _ = writeln!(s, "{key} = {} {}", *v, unit.tag());
        }
        let _ = writeln!(s, "detuning = {} meV", self.detuning);

        s.push_str("\n[exchange]\n");
        let mut x = self.exchange;
        for g in EXCHANGE_GROUPS {
            for l in LEVEL_KEYS {
                let v = *level_mut(pairs_mut(&mut x, g).unwrap(), l).unwrap();
                let _ = writeln!(s, "{g}_{l} = {v} meV");
            }
        }

        let n = &self.network;
        let pair = |p: TtPair| p.tag();
        s.push_str("\n[dynamics]\n");
        let _ = writeln!(s, "tau_xxx = {} ps", n.tau_xxx);
        let _ = writeln!(s, "tau_xx = {} ps", n.tau_xx);
        let _ = writeln!(s, "tau_x = {} ps", n.tau_x);
        let _ = writeln!(s, "tau_tt = {} ps", n.tau_tt);
        let _ = writeln!(s, "capture_ss = {}", n.capture_ss);
        let _ = writeln!(s, "tt_capture = {}", n.tt_capture);
        let LineMap { i, ii, iii, iv } = n.line_map;
        let _ = writeln!(s, "line_i = {}", pair(i));
        let _ = writeln!(s, "line_ii = {}", pair(ii));
        let _ = writeln!(s, "line_iii = {}", pair(iii));
        let _ = writeln!(s, "line_iv = {}", pair(iv));
        match self.generation {
            Generation::Calibrate => s.push_str("generation = calibrate\n"),
            Generation::Fixed(g) => {
                let _ = writeln!(s, "generation = {g} /ps");
            }
        }
        let _ = writeln!(
            s,
            "rate_source = {}",
            match self.rate_source {
                RateSource::Model => "model",
                RateSource::Table => "table",
            }
        );
        let t = &self.lifetimes;
        for (k, v) in [
            ("lifetime_h_3st", t.h_3st),
            ("lifetime_v_3st", t.v_3st),
            ("lifetime_two_ss", t.two_ss),
            ("lifetime_two_st", t.two_st),
            ("lifetime_zero_ss", t.zero_ss),
            ("lifetime_hv_ss", t.hv_ss),
        ] {
            let _ = writeln!(s, "{k} = {v} ps");
        }
        let _ = writeln!(s, "tau_step = {} ps", self.tau_step);
        let _ = writeln!(s, "tau_span = {} ps", self.tau_span);
        let _ = writeln!(s, "mc_events = {}", self.mc_events);
        let _ = writeln!(s, "seed = {}", self.seed);

        s.push_str("\n[detector]\n");
        let _ = writeln!(s, "fwhm = {} ps", self.detector_fwhm);

        s.push_str("\n[sweep]\n");
        let _ = writeln!(s, "d_min = {} meV", self.sweep_min);
        let _ = writeln!(s, "d_max = {} meV", self.sweep_max);
        let _ = writeln!(s, "points = {}", self.sweep_points);
        let _ = writeln!(s, "eigen_tol = {:e}", self.eigen_tol);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let p = parse_config("").unwrap();
        assert_eq!(p, ModelParams::default());
        assert_eq!(p.energies.coul_1h2h, 19.7);
        assert_eq!(p.exchange.delta1.e1_h2, 0.324);
        assert_eq!(p.lifetimes.h_3st, 50.0);
        assert_eq!(p.detuning, -3.5);
    }

    #[test]
    fn shipped_default_config_matches() {
        let text = include_str!("../../../configs/default.conf");
        assert_eq!(parse_config(text).unwrap(), ModelParams::default());
    }

    #[test]
    fn overrides_apply() {
        let p = parse_config("[energies]\ndetuning = 0.6 meV\n[exchange]\ndelta_e_2e_1h = 0.01\n").unwrap();
        assert_eq!(p.detuning, 0.6);
        assert_eq!(p.exchange.delta_e.e2_h1, 0.01);
        assert_eq!(p.exchange.delta_e.e1_h1, 0.003);
    }

    #[test]
    fn non_numeric_rejected_with_line() {
        let err = parse_config("# header\n[exchange]\ndelta0_1e_1h = abc\n").unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("[energies]\n\ne_3e = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
        assert!(parse_config("[spectrum]\n").is_err());
        assert!(parse_config("detuning = 1\n").is_err());
    }

    #[test]
    fn unit_mismatch_rejected() {
        let err = parse_config("[energies]\ndetuning = 1.0 ps\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        assert!(parse_config("[dynamics]\ngeneration = 0.01 meV\n").is_err());
        assert!(parse_config("[sweep]\npoints = 5 ps\n").is_err());
        assert!(parse_config("[dynamics]\ngeneration = 0.01 /ps\n").is_ok());
    }

    #[test]
    fn invalid_physics_rejected() {
        assert!(parse_config("[energies]\ne_lo = -1\n").is_err());
        assert!(parse_config("[exchange]\ndelta1_1e_1h = 20\n").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut p = ModelParams::default();
        p.detuning = 0.125;
        p.generation = Generation::Fixed(0.0042);
        p.rate_source = RateSource::Model;
        p.network.tau_tt = 800.0;
        p.network.line_map.i = TtPair::ZeroTt;
        p.network.line_map.iv = TtPair::Two;
        assert_eq!(parse_config(&p.to_config_string()).unwrap(), p);
        let d = ModelParams::default();
        assert_eq!(parse_config(&d.to_config_string()).unwrap(), d);
    }
}
