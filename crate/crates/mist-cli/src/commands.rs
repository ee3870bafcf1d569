//! One function per subcommand. Each reads its options, runs the library and
//! writes its files through the staged output directory.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use mist::branch::{
    ac_stark_curve, analyse_flux, mist_map_over_flux, stark_extrapolation, write_branch_csv, write_crossings_json,
    CrossingSearch,
};
use mist::classical::{
    chirikov_scan, default_initial_conditions, harmonic_coefficients, plasma_frequency, poincare_section,
    separatrix_rings, write_section_csv, write_separatrix_csv, CouplingKind, IntegratorOptions, SectionOptions,
    Splitting,
};
use mist::fitting::{
    fit as run_fit, fit_report, read_points_csv, synthetic_points, write_points_csv, Anchor, FitOptions, FitProblem,
    FreeParam, TransitionId,
};
use mist::hilbert::{normal_modes, transmon_eigensystem, ModelKind};
use mist::readout::{
    classify, confusion, linear_chi, optimize_clear, photon_calibration, pointer_positions, read_iq_csv, sample_shots,
    thermal_fit, write_envelope_csv, write_iq_csv, ClearOptions, PulseEnvelope, DEFAULT_RADIUS_FACTOR,
};
use mist::{Error, Result};
use num_complex::Complex64;
use serde_json::json;

use crate::output::OutputDir;
use crate::{Common, Context};

fn open(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('-').ok_or_else(|| format!("expected a pair like 0-4, got '{s}'"))?;
    let a = a.trim().parse().map_err(|_| format!("bad branch index in '{s}'"))?;
    let b = b.trim().parse().map_err(|_| format!("bad branch index in '{s}'"))?;
    Ok((a, b))
}

fn search_for(pairs: &[(usize, usize)], d: usize, n_max: Option<usize>) -> CrossingSearch {
    let mut s = if pairs.is_empty() { CrossingSearch::partners(&[0, 1], d) } else { CrossingSearch::pairs(pairs) };
    s.n_max = n_max;
    s
}

#[derive(Args, Debug)]
pub struct BranchesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cosphi")]
    model: ModelArg,
    /// Reduced external flux Phi/Phi0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    flux: f64,
    /// Branch pairs to search, e.g. 0-4,1-5 (default: 0 and 1 against every other branch)
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pairs: Vec<(usize, usize)>,
    /// Ignore crossings above this photon number
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ModelArg {
    Cosphi,
    Transverse,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Cosphi => ModelKind::Cosphi,
            ModelArg::Transverse => ModelKind::Transverse,
        }
    }
}

pub fn branches(ctx: &Context, a: &BranchesArgs, out: &mut OutputDir) -> Result<()> {
    let p = ctx.params.with_flux(a.flux);
    let pt = analyse_flux(a.model.into(), &p, &ctx.spec, &search_for(&a.pairs, ctx.spec.d, a.n_max))?;
    if !pt.table.ambiguities.is_empty() {
        log::info!("{} labeling ties resolved by energy", pt.table.ambiguities.len());
    }
    let mut w = out.file("branches.csv")?;
    write_branch_csv(&mut w, a.flux, &pt.table, true)?;
    w.flush()?;
    let mut w = out.file("crossings.json")?;
    write_crossings_json(&mut w, &pt.events)?;
    w.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct MistMapArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cosphi")]
    model: ModelArg,
    #[arg(long, default_value_t = -0.2, allow_negative_numbers = true)]
    flux_min: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    flux_max: f64,
    #[arg(long, default_value_t = 21)]
    flux_points: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, default_value = "0-4,1-5")]
    pairs: Vec<(usize, usize)>,
    #[arg(long)]
    n_max: Option<usize>,
}

pub fn mist_map(ctx: &Context, a: &MistMapArgs, out: &mut OutputDir) -> Result<()> {
    if a.flux_points < 2 || !(a.flux_max > a.flux_min) {
        return Err(Error::InvalidParameter("need flux_points >= 2 and flux_max > flux_min".into()));
    }
    let grid: Vec<f64> = (0..a.flux_points)
        .map(|k| a.flux_min + (a.flux_max - a.flux_min) * k as f64 / (a.flux_points - 1) as f64)
        .collect();
    let map = mist_map_over_flux(a.model.into(), &ctx.params, &ctx.spec, &grid, &search_for(&a.pairs, ctx.spec.d, a.n_max))?;
    let mut w = csv::Writer::from_writer(out.file("mist_map.csv")?);
    w.write_record(["pair", "flux", "n_c_star", "zero_photon_detuning_GHz"])?;
    for c in &map.curves {
        for k in 0..c.flux.len() {
            w.write_record([
                format!("{}-{}", c.pair.0, c.pair.1),
                format!("{:.6}", c.flux[k]),
                c.n_c_star[k].map(|n| format!("{n:.4}")).unwrap_or_default(),
                format!("{:.9}", c.zero_photon_detuning[k]),
            ])?;
        }
    }
    w.flush()?;
    let mut w = out.file("crossings.json")?;
    write_crossings_json(&mut w, map.events())?;
    w.flush()?;
    let summary: Vec<_> = map
        .curves
        .iter()
        .map(|c| json!({ "pair": [c.pair.0, c.pair.1], "zero_photon_flux": c.zero_photon_flux }))
        .collect();
    out.json("zero_photon.json", &summary)
}

#[derive(Args, Debug)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cosphi")]
    model: ModelArg,
    /// Mean drive photon number
    #[arg(long, default_value_t = 300.0)]
    nbar: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    flux: f64,
    /// Periods per trajectory (default from the preset)
    #[arg(long)]
    periods: Option<usize>,
    /// Initial conditions on the phi = 0 line
    #[arg(long, default_value_t = 81)]
    ics: usize,
    /// Extra initial conditions placed on each separatrix ring
    #[arg(long, default_value_t = 0)]
    ring_points: usize,
    #[arg(long, default_value_t = 1024)]
    steps_per_period: usize,
    #[arg(long, value_enum, default_value = "yoshida4")]
    splitting: SplittingArg,
    /// Highest resonance order drawn and used for the initial-condition span
    #[arg(long, default_value_t = 2)]
    m_max: usize,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum SplittingArg {
    Strang,
    Yoshida4,
}

pub fn poincare(ctx: &Context, a: &PoincareArgs, out: &mut OutputDir) -> Result<()> {
    let p = ctx.params.with_flux(a.flux);
    let modes = normal_modes(&p)?;
    let kind = CouplingKind::from(ModelKind::from(a.model));
    let series = harmonic_coefficients(kind, &p, &modes, a.nbar)?;
    let mut ics = default_initial_conditions(&series, a.m_max, a.ics);
    if a.ring_points > 0 {
        ics.extend(separatrix_rings(&series, a.m_max, a.ring_points));
    }
    let splitting = match a.splitting {
        SplittingArg::Strang => Splitting::Strang,
        SplittingArg::Yoshida4 => Splitting::Yoshida4,
    };
    let opts = SectionOptions {
        n_periods: a.periods.unwrap_or_else(|| ctx.periods()),
        integrator: IntegratorOptions { steps_per_period: a.steps_per_period, splitting, dense: false },
        m_max: a.m_max,
    };
    let section = poincare_section(&series, &ics, &opts)?;
    let mut w = out.file("section.csv")?;
    write_section_csv(&mut w, &section)?;
    w.flush()?;
    let mut w = out.file("separatrices.csv")?;
    write_separatrix_csv(&mut w, &section.separatrices)?;
    w.flush()?;
    out.json(
        "chaos.json",
        &json!({
            "model": format!("{:?}", a.model).to_lowercase(),
            "n_bar": a.nbar,
            "eta": series.eta,
            "period_ns": section.period,
            "chaotic_fraction": section.chaos.chaotic_fraction,
            "initial_conditions": section.initial_conditions,
            "lyapunov_per_period": section.chaos.lyapunov.iter().map(|l| l * section.period).collect::<Vec<_>>(),
            "chaotic": section.chaos.chaotic,
            "harmonics": series.iter().filter(|(_, v)| *v != 0.0).collect::<Vec<_>>(),
        }),
    )
}

#[derive(Args, Debug)]
pub struct ChirikovArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 750.0)]
    nbar_max: f64,
    #[arg(long, default_value_t = 751)]
    samples: usize,
}

pub fn chirikov(ctx: &Context, a: &ChirikovArgs, out: &mut OutputDir) -> Result<()> {
    let p = ctx.params;
    let modes = normal_modes(&p)?;
    let wp = plasma_frequency(p.e_j, p.e_cq);
    let scans: Vec<_> = [CouplingKind::Cosphi, CouplingKind::Transverse]
        .into_iter()
        .map(|kind| {
            let unit = harmonic_coefficients(kind, &p, &modes, 1.0)?;
            Ok(chirikov_scan(kind, unit.omega_d, wp, unit.eta, a.nbar_max, a.samples))
        })
        .collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(out.file("chirikov.csv")?);
    w.write_record(["n_bar", "eta_cosphi", "margin_cosphi", "eta_transverse", "margin_transverse"])?;
    for k in 0..scans[0].n_bar.len() {
        w.write_record([
            format!("{:.6}", scans[0].n_bar[k]),
            format!("{:.9}", scans[0].eta[k]),
            format!("{:.9}", scans[0].margin[k]),
            format!("{:.9}", scans[1].eta[k]),
            format!("{:.9}", scans[1].margin[k]),
        ])?;
    }
    w.flush()?;
    let summary: Vec<_> = scans
        .iter()
        .map(|s| json!({ "model": format!("{:?}", s.kind).to_lowercase(), "min_margin": s.min_margin, "argmin_n_bar": s.argmin_n_bar }))
        .collect();
    out.json("chirikov.json", &summary)
}

#[derive(Args, Debug)]
pub struct StarkArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cosphi")]
    model: ModelArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    flux: f64,
    #[arg(long, default_value = "0-1", value_parser = parse_pair)]
    pair: (usize, usize),
    /// Photon window of the linear fit
    #[arg(long, default_value_t = 20)]
    window: usize,
}

pub fn stark(ctx: &Context, a: &StarkArgs, out: &mut OutputDir) -> Result<()> {
    let p = ctx.params.with_flux(a.flux);
    let pt = analyse_flux(a.model.into(), &p, &ctx.spec, &CrossingSearch::default())?;
    let curve = ac_stark_curve(&pt.table, a.pair, a.window)?;
    let mut w = csv::Writer::from_writer(out.file("stark.csv")?);
    w.write_record(["n_c", "frequency_GHz"])?;
    for (n, f) in curve.frequency.iter().enumerate() {
        w.write_record([n.to_string(), format!("{f:.12}")])?;
    }
    w.flush()?;
    let extrapolation = if a.pair.0 == 0 && a.pair.1 >= 2 { Some(stark_extrapolation(&pt.table, a.pair.1, a.window)?) } else { None };
    out.json(
        "stark.json",
        &json!({
            "pair": [a.pair.0, a.pair.1],
            "flux": a.flux,
            "slope_GHz_per_photon": curve.slope,
            "intercept_GHz": curve.intercept,
            "window": curve.window,
            "chi_qc_GHz": pt.table.chi_qc(),
            "extrapolation": extrapolation,
        }),
    )
}

#[derive(Args, Debug)]
pub struct ReadoutArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dispersive shift per excitation (GHz; default from the parameters)
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<f64>,
    /// Drive detuning from the bare cavity in units of chi
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    drive_offset: f64,
    #[arg(long, default_value_t = mist::readout::DEFAULT_SNR)]
    snr: f64,
    /// Pointer states generated (the last one anchors the 6+ disc)
    #[arg(long, default_value_t = 10)]
    states: usize,
    /// Synthetic shots per state when no IQ file is given
    #[arg(long, default_value_t = 2000)]
    shots: usize,
    /// Classify this IQ CSV (columns I, Q) instead of synthetic shots
    #[arg(long)]
    iq: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RADIUS_FACTOR)]
    radius_factor: f64,
    /// Measured populations of states 0..4 for a thermal fit
    #[arg(long, value_delimiter = ',')]
    populations: Vec<f64>,
    /// Also optimise a CLEAR envelope and compare it with a square pulse
    #[arg(long)]
    clear: bool,
}

pub fn readout(ctx: &Context, a: &ReadoutArgs, out: &mut OutputDir) -> Result<()> {
    let p = ctx.params;
    let modes = normal_modes(&p)?;
    let chi = a.chi.unwrap_or(p.chi_qc_target);
    let omega_c = modes.omega_c_pol;
    let states = pointer_positions(omega_c, p.kappa_c, &linear_chi(chi, a.states), omega_c + a.drive_offset * chi, a.snr)?;
    let mut w = csv::Writer::from_writer(out.file("pointers.csv")?);
    w.write_record(["k", "I", "Q", "sigma"])?;
    for s in &states {
        w.write_record([s.k.to_string(), format!("{:.12e}", s.center.0), format!("{:.12e}", s.center.1), format!("{:.12e}", s.sigma)])?;
    }
    w.flush()?;

    let (points, truth): (Vec<(f64, f64)>, Option<Vec<usize>>) = match &a.iq {
        Some(path) => (read_iq_csv(open(path)?)?, None),
        None => {
            let shots = sample_shots(&states, a.shots, ctx.seed);
            let mut w = out.file("iq.csv")?;
            write_iq_csv(&mut w, &shots.iter().map(|s| s.1).collect::<Vec<_>>())?;
            w.flush()?;
            (shots.iter().map(|s| s.1).collect(), Some(shots.iter().map(|s| s.0).collect()))
        }
    };
    let labels = classify(&points, &states, a.radius_factor)?;
    let mut w = csv::Writer::from_writer(out.file("labels.csv")?);
    w.write_record(["I", "Q", "label"])?;
    for (pt, l) in points.iter().zip(&labels) {
        w.write_record([format!("{:.12e}", pt.0), format!("{:.12e}", pt.1), l.to_string()])?;
    }
    w.flush()?;
    if let Some(truth) = truth {
        out.json("confusion.json", &confusion(&truth, &labels, a.states))?;
    }

    if !a.populations.is_empty() {
        let tb = transmon_eigensystem(&p, &ctx.spec)?;
        let e: Vec<f64> = tb.energies.iter().map(|v| v - tb.energies[0]).collect();
        out.json("thermal.json", &thermal_fit(&a.populations, &e))?;
    }

    if a.clear {
        let hold = Complex64::new(1.0, 0.0);
        let detuning = 0.0;
        let r = optimize_clear(p.kappa_c, detuning, hold, &ClearOptions::default())?;
        let square = PulseEnvelope::square(r.envelope.total_duration(), hold)?;
        let dt = 0.25;
        let n = (r.envelope.total_duration() / dt).round() as usize;
        let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let mut w = out.file("clear_envelope.csv")?;
        write_envelope_csv(&mut w, &t, &t.iter().map(|&x| r.envelope.amplitude_at(x)).collect::<Vec<_>>())?;
        w.flush()?;
        let resp = mist::readout::cavity_response(&r.envelope, p.kappa_c, detuning, dt)?;
        let sq = mist::readout::cavity_response(&square, p.kappa_c, detuning, dt)?;
        let mut w = csv::Writer::from_writer(out.file("cavity_field.csv")?);
        w.write_record(["t_ns", "abs_alpha_clear", "abs_alpha_square"])?;
        for k in 0..resp.t.len().min(sq.t.len()) {
            w.write_record([format!("{:.3}", resp.t[k]), format!("{:.9e}", resp.alpha[k].norm()), format!("{:.9e}", sq.alpha[k].norm())])?;
        }
        w.flush()?;
        out.json("clear.json", &r)?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Digitised points (columns flux, transition_id, freq_GHz, band_GHz); synthetic if absent
    #[arg(long)]
    points: Option<PathBuf>,
    /// Relative noise of synthetic points
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 21)]
    flux_points: usize,
    /// Free parameters (E_Cq, E_Ca, E_J, L_a0, omega_c_bare, g_ac)
    #[arg(long, value_delimiter = ',', default_value = "E_J,E_Cq,g_ac,omega_c_bare")]
    free: Vec<String>,
    /// Include the measured omega_q, omega_c and chi_qc anchors
    #[arg(long)]
    anchors: bool,
    /// Relative half-width of the parameter bounds
    #[arg(long, default_value_t = 0.5)]
    bounds: f64,
    /// Perturbed starts in addition to the initial guess
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Start E_J this fraction away from the parameter file value
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    perturb_ej: f64,
}

pub fn fit(ctx: &Context, a: &FitArgs, out: &mut OutputDir) -> Result<()> {
    let free: Vec<FreeParam> = a.free.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?;
    let points = match &a.points {
        Some(path) => read_points_csv(open(path)?)?,
        None => {
            if a.flux_points < 2 {
                return Err(Error::InvalidParameter("need at least two flux points".into()));
            }
            let grid: Vec<f64> = (0..a.flux_points).map(|k| -0.2 + 0.4 * k as f64 / (a.flux_points - 1) as f64).collect();
            let pts = synthetic_points(&ctx.params, &grid, &TransitionId::ALL, 0.01, a.noise, ctx.seed)?;
            let mut w = out.file("points.csv")?;
            write_points_csv(&mut w, &pts)?;
            w.flush()?;
            pts
        }
    };
    let mut initial = ctx.params;
    initial.e_j *= 1.0 + a.perturb_ej;
    let anchors = if a.anchors { Anchor::measured() } else { Vec::new() };
    let problem = FitProblem::new(points, anchors, free, &initial, a.bounds)?;
    let opts = FitOptions { extra_starts: a.starts, seed: ctx.seed, ..Default::default() };
    let result = match run_fit(&problem, &initial, &opts) {
        Ok(r) => r,
        Err(Error::FitFailed { best, .. }) => {
            out.json("fit_report.json", &fit_report(&best))?;
            return Err(Error::InvalidParameter(format!("fit did not converge (best cost {:e})", best.cost)));
        }
        Err(e) => return Err(e),
    };
    out.json("fit_report.json", &fit_report(&result))?;
    if let Some(b) = &result.breakdown {
        let mut w = csv::Writer::from_writer(out.file("residuals.csv")?);
        w.write_record(["flux", "transition_id", "data_GHz", "model_GHz", "weighted"])?;
        for r in &b.points {
            w.write_record([
                format!("{}", r.flux),
                r.transition_id.to_string(),
                format!("{:.9}", r.data),
                r.model.map(|m| format!("{m:.9}")).unwrap_or_default(),
                r.weighted.map(|m| format!("{m:.6e}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct CalibArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with columns power, delta_omega_GHz
    #[arg(long)]
    stark: PathBuf,
    /// Dispersive shift (GHz; default from the parameters)
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<f64>,
}

#[derive(serde::Deserialize)]
struct StarkRow {
    power: f64,
    #[serde(rename = "delta_omega_GHz")]
    delta_omega: f64,
}

pub fn calib(ctx: &Context, a: &CalibArgs, out: &mut OutputDir) -> Result<()> {
    let mut rdr = csv::Reader::from_reader(open(&a.stark)?);
    let rows: Vec<(f64, f64)> =
        rdr.deserialize::<StarkRow>().map(|r| r.map(|r| (r.power, r.delta_omega)).map_err(Error::from)).collect::<Result<_>>()?;
    let c = photon_calibration(&rows, a.chi.unwrap_or(ctx.params.chi_qc_target))?;
    let mut w = csv::Writer::from_writer(out.file("calibration.csv")?);
    w.write_record(["power", "delta_omega_GHz", "n_bar"])?;
    for (k, (pw, d)) in rows.iter().enumerate() {
        w.write_record([format!("{pw}"), format!("{d}"), format!("{:.9}", c.n_bar[k])])?;
    }
    w.flush()?;
    out.json("calibration.json", &c)
}
