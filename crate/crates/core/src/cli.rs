//! Command-line front end: `spectrum`, `sweep` and `g2` subcommands writing CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::config::{load_config, Generation, ModelParams, RateSource};
use crate::dynamics::{
    build_rate_network, calibrate_cascade, convolve_response, g2_with, mc_oracle, steady_state, ChannelRates,
    Detection, Line, Polarization, Propagator, RateNetwork, TauGrid,
};
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::spectrum::{
    detuning_sweep, eigendecompose, label_states, parent_vectors, phonon_projection, relaxation_rates,
    GroundBiexciton, LabeledSpectrum, RateTable, StateLabel,
};

#[derive(Debug, Parser)]
#[command(name = "qd-cascade", version, about = "Quantum-dot biexciton spin-phonon relaxation and cascade g2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Parameter file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "QD_CASCADE_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Overrides the Monte-Carlo seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenstates, phonon projections and relaxation rates at the configured detuning.
    Spectrum(Common),
    /// Energies and phonon content versus detuning.
    Sweep(Common),
    /// Two-photon correlation functions.
    G2 {
        #[command(flatten)]
        common: Common,
        /// `LINE_A,LINE_B,POL_A,POL_B`, e.g. `XXX_ii,XX0_T3,s+,s+` (POL may be H, V, s+, s-, u).
        #[arg(long, conflicts_with = "all16")]
        pair: Option<String>,
        /// The 4×4 triexciton × biexciton grid plus four circular combinations.
        #[arg(long)]
        all16: bool,
    },
}

/// Fixed 12-significant-digit scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn load(common: &Common) -> Result<ModelParams> {
    let mut p = match &common.config {
        Some(path) => load_config(path)?,
        None => ModelParams::default(),
    };
    if let Some(s) = common.seed {
        p.seed = s;
    }
    Ok(p)
}

/// Labeled spectrum at the configured detuning.
pub fn labeled_spectrum(p: &ModelParams) -> Result<LabeledSpectrum> {
    let h = build_hamiltonian(&p.energies, &p.exchange, p.detuning)?;
    Ok(label_states(eigendecompose(&h, p.eigen_tol)?, &parent_vectors()))
}

/// Relaxation rates per the configured rate source.
pub fn rate_table(p: &ModelParams) -> Result<RateTable> {
    match p.rate_source {
        RateSource::Table => RateTable::from_lifetimes(&p.lifetimes),
        RateSource::Model => {
            let ls = labeled_spectrum(p)?;
            Ok(relaxation_rates(&phonon_projection(&ls), p.energies.tau_lo))
        }
    }
}

/// Network at the configured (or calibrated) generation rate.
pub fn cascade_network(p: &ModelParams) -> Result<(RateNetwork, f64)> {
    let k = ChannelRates::from_table(&rate_table(p)?)?;
    let g = match p.generation {
        Generation::Fixed(g) => g,
        Generation::Calibrate => calibrate_cascade(&k, &p.network)?.generation,
    };
    Ok((build_rate_network(&k, &p.network, g)?, g))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn manifest(p: &ModelParams, command: &str, outputs: &[PathBuf], extra: &str) -> String {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "# qd-cascade {} {command}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# seed {}", p.seed);
    let _ = writeln!(s, "# unix_time {stamp}");
    for o in outputs {
        let _ = writeln!(s, "# output {}", o.file_name().unwrap_or_default().to_string_lossy());
    }
    s.push_str(extra);
    s.push('\n');
    s.push_str(&p.to_config_string());
    s
}

pub fn spectrum_csv(p: &ModelParams) -> Result<String> {
    let ls = labeled_spectrum(p)?;
    let rates = relaxation_rates(&phonon_projection(&ls), p.energies.tau_lo);
    let mut s = String::from("label,energy_meV,overlap");
    for g in GroundBiexciton::ALL {
        let _ = write!(s, ",p_{}", g.tag());
    }
    for g in GroundBiexciton::ALL {
        let _ = write!(s, ",rate_{}_per_ps", g.tag());
    }
    for g in GroundBiexciton::ALL {
        let _ = write!(s, ",lifetime_{}_ps", g.tag());
    }
    s.push('\n');
    for label in StateLabel::ALL {
        let k = ls.index_of(label);
        let v = ls.spectrum.vector(k);
        let _ = write!(s, "{},{},{}", label, fmt_num(ls.spectrum.eigenvalues[k]), fmt_num(ls.overlaps[k]));
        for g in GroundBiexciton::ALL {
            let _ = write!(s, ",{}", fmt_num(v[g.phonon_index()].powi(2)));
        }
        for g in GroundBiexciton::ALL {
            match rates.entries.get(&(label, g)) {
                Some(e) => {
                    let _ = write!(s, ",{}", fmt_num(e.rate));
                }
                None => s.push(','),
            }
        }
        for g in GroundBiexciton::ALL {
            match rates.entries.get(&(label, g)) {
                Some(e) => {
                    let _ = write!(s, ",{}", fmt_num(e.lifetime()));
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn sweep_csv(p: &ModelParams) -> Result<String> {
    let full = detuning_sweep(&p.energies, &p.exchange, p.sweep_min, p.sweep_max, p.sweep_points, p.eigen_tol)?;
    let flip_flop = detuning_sweep(
        &p.energies,
        &p.exchange.without_dark_bright_mixing(),
        p.sweep_min,
        p.sweep_max,
        p.sweep_points,
        p.eigen_tol,
    )?;
    let mut s = String::from(
        "detuning_meV,label,energy_meV,overlap,phonon_total,phonon_flip_flop,phonon_spin_flip,rate_per_ps,strong_mixing\n",
    );
    for (a, b) in full.iter().zip(&flip_flop) {
        let pa = phonon_projection(&a.spectrum);
        let pb = phonon_projection(&b.spectrum);
        for label in StateLabel::ALL.iter().filter(|l| !l.has_phonon()) {
            let total: f64 = pa[label].iter().sum();
            let ff: f64 = pb[label].iter().sum();
            let rate = total / p.energies.tau_lo;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                fmt_num(a.detuning),
                label,
                fmt_num(a.spectrum.energy(*label)),
                fmt_num(a.spectrum.overlap(*label)),
                fmt_num(total),
                fmt_num(ff),
                fmt_num(total - ff),
                fmt_num(rate),
                u8::from(a.strong_mixing)
            );
        }
    }
    Ok(s)
}

fn parse_pol(s: &str) -> Result<Option<Polarization>> {
    let p: Polarization = s.parse()?;
    Ok(if p == Polarization::Unpolarized { None } else { Some(p) })
}

/// Parses `LINE_A,LINE_B,POL_A,POL_B`.
pub fn parse_pair(s: &str) -> Result<(Detection, Detection)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, pa, pb] = parts.as_slice() else {
        return Err(Error::param("pair", format!("`{s}` is not LINE_A,LINE_B,POL_A,POL_B")));
    };
    Ok((Detection::new(a.parse()?, parse_pol(pa)?), Detection::new(b.parse()?, parse_pol(pb)?)))
}

/// The correlation grid: every triexciton line against every biexciton line,
/// then lines (ii) and (iii) against XX⁰_T±3 in co- and cross-circular polarization.
pub fn all16_pairs() -> Vec<(Detection, Detection)> {
    let mut out = Vec::new();
    for a in Line::XXX {
        for b in Line::BIEXCITON {
            out.push((Detection::any(a), Detection::any(b)));
        }
    }
    let (sp, sm) = (Some(Polarization::SigmaPlus), Some(Polarization::SigmaMinus));
    for a in [Line::XxxII, Line::XxxIII] {
        for b in [sp, sm] {
            out.push((Detection::new(a, sp), Detection::new(Line::Xx0T3, b)));
        }
    }
    out
}

fn file_pol(d: &Detection) -> &'static str {
    match d.filter {
        None => "u",
        Some(Polarization::H) => "H",
        Some(Polarization::V) => "V",
        Some(Polarization::SigmaPlus) => "sp",
        Some(Polarization::SigmaMinus) => "sm",
        Some(Polarization::Unpolarized) => "u",
    }
}

pub fn g2_file_name(a: &Detection, b: &Detection) -> String {
    format!("g2_{}_{}_{}_{}.csv", a.line, b.line, file_pol(a), file_pol(b))
}

/// CSV for one pair. With `mc_events > 0` two Monte-Carlo columns are appended.
pub fn g2_csv(
    p: &ModelParams,
    net: &RateNetwork,
    ss: &DVector<f64>,
    prop: &Propagator,
    grid: &TauGrid,
    a: &Detection,
    b: &Detection,
) -> Result<String> {
    let raw = g2_with(net, ss, prop, a, b, grid)?;
    let conv = convolve_response(&raw, p.detector_fwhm)?;
    let mc = if p.mc_events > 0 {
        Some(mc_oracle(net, a, b, grid, p.mc_events, p.seed)?)
    } else {
        None
    };
    let mut s = String::from("tau_ps,g2_raw,g2_convolved");
    if mc.is_some() {
        s.push_str(",g2_mc,sigma_mc");
    }
    s.push('\n');
    for i in 0..grid.len() {
        let _ = write!(s, "{},{},{}", fmt_num(grid.tau(i)), fmt_num(raw.values[i]), fmt_num(conv.values[i]));
        if let Some(m) = &mc {
            let _ = write!(s, ",{},{}", fmt_num(m.trace.values[i]), fmt_num(m.sigma[i]));
        }
        s.push('\n');
    }
    Ok(s)
}

fn run_g2(p: &ModelParams, pairs: &[(Detection, Detection)], out: &Path) -> Result<(Vec<PathBuf>, String)> {
    let (net, g) = cascade_network(p)?;
    let ss = steady_state(&net)?;
    let grid = TauGrid::with_span(p.tau_step, p.tau_span)?;
    let prop = Propagator::new(&net, grid.step)?;
    let files = pairs
        .par_iter()
        .map(|(a, b)| Ok((g2_file_name(a, b), g2_csv(p, &net, &ss, &prop, &grid, a, b)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut paths = Vec::with_capacity(files.len());
    for (name, csv) in files {
        paths.push(write_file(out, &name, &csv)?);
    }
    Ok((paths, format!("# generation_per_ps {}\n", fmt_num(g))))
}

/// Executes a parsed command line and returns the files written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let (name, common, outputs, extra) = match cli.command {
        Command::Spectrum(c) => {
            let p = load(&c)?;
            let path = write_file(&c.out, "spectrum.csv", &spectrum_csv(&p)?)?;
            ("spectrum", c, vec![path], String::new())
        }
        Command::Sweep(c) => {
            let p = load(&c)?;
            let path = write_file(&c.out, "sweep.csv", &sweep_csv(&p)?)?;
            ("sweep", c, vec![path], String::new())
        }
        Command::G2 { common, pair, all16 } => {
            let p = load(&common)?;
            let pairs = match (pair, all16) {
                (Some(s), _) => vec![parse_pair(&s)?],
                (None, true) => all16_pairs(),
                (None, false) => return Err(Error::param("g2", "give --pair A,B,polA,polB or --all16")),
            };
            let (paths, extra) = run_g2(&p, &pairs, &common.out)?;
            ("g2", common, paths, extra)
        }
    };
    let p = load(&common)?;
    let m = manifest(&p, name, &outputs, &extra);
    let mpath = write_file(&common.out, &format!("manifest_{name}.txt"), &m)?;
    let mut all = outputs;
    all.push(mpath);
    Ok(all)
}
