//! Scenario runners. Each composes the simulator kernels and returns a
//! [`ResultTable`] whose metadata reproduces the run.

use catlattice::bpm::{bloch_period, bpm_propagate, solve_fundamental_mode, BpmGrid, BpmModel, BpmOptions, UM_PER_CM};
use catlattice::cat::{CatState, SURVIVAL_TOLERANCE};
use catlattice::lattice::{build_defect_lattice, propagate, required_truncation, uniform_grid};
use catlattice::revival::{detect_revivals, mean_spacing, zener_damping, DEFAULT_RELATIVE_PROMINENCE};
use catlattice::spectrum::{
    asymptotics, coupling_threshold, find_bound_states, golden_rule_rate, truncated_out_of_band_count, BlochBath,
};
use catlattice::{coherence_factor, Error};
use log::{info, warn};
use num_complex::Complex;
use rayon::prelude::*;

use crate::config::{BlochConfig, ConfigFile, OscillatorConfig, SpectrumConfig};
use crate::error::CliError;
use crate::output::{Column, Metadata, ResultTable, Value};

pub const UNITARITY_TOLERANCE: f64 = 1e-10;
pub const BPM_NORM_TOLERANCE: f64 = 1e-8;

fn cat_from(cfg: &OscillatorConfig) -> Result<CatState<f64>, CliError> {
    let ((ar, ai), (br, bi)) = cfg.amplitudes();
    Ok(CatState::new(Complex::new(ar, ai), Complex::new(br, bi))?)
}

/// Decay of the cat in the defect guide of a semi-infinite array.
///
/// Columns: `kappa z`, `|S00|^2`, `|G|`, `ln|G|`, the Markovian reference
/// `exp(-gamma z)` with its `|G|`, then optional per-site intensities.
pub fn run_oscillator(cfg: &OscillatorConfig) -> Result<ResultTable, CliError> {
    cfg.validate()?;
    let kappa = cfg.kappa;
    let z_max = cfg.z_max / kappa;
    let required = required_truncation(kappa, z_max, cfg.margin);
    let num_sites = cfg.num_sites.unwrap_or(required);
    let mut meta = Metadata::new(
        "oscillator",
        ConfigFile {
            oscillator: Some(cfg.clone()),
            ..Default::default()
        },
    );
    if num_sites < required {
        warn!("num_sites = {num_sites} is below the light-cone truncation {required}; edge reflections may reach the defect");
        meta.notes
            .push(format!("num_sites = {num_sites} overrides the required truncation {required}"));
    }
    let sites_out = cfg.site_intensities.min(num_sites);
    let model = build_defect_lattice(cfg.kappa0, cfg.sigma0, kappa, num_sites)?;
    let z = uniform_grid(z_max, cfg.samples);
    info!("oscillator: {num_sites} sites, {} samples", z.len());
    let result = propagate(&model, &z)?;
    let drift = result
        .total_probability()
        .iter()
        .map(|p| (p - 1.0).abs())
        .fold(0.0, f64::max);
    if drift > UNITARITY_TOLERANCE {
        return Err(CliError::Contract(format!("probability drift {drift:e} exceeds {UNITARITY_TOLERANCE:e}")));
    }

    let cat = cat_from(cfg)?;
    let bath = BlochBath::new(kappa, cfg.kappa0, cfg.sigma0)?;
    let gamma = match golden_rule_rate(&bath) {
        Ok(g) => g,
        Err(Error::OutsideBand { .. }) => {
            meta.notes
                .push("sigma0 outside the band: no resonant decay channel, gamma = 0".into());
            0.0
        }
        Err(e) => return Err(e.into()),
    };
    let trace = coherence_factor(&cat, &z, &result.survival)?.with_markovian_reference(&cat, gamma);
    let bound = find_bound_states(&bath)?;
    let asym = asymptotics(&bound);

    let d = &mut meta.derived;
    d.insert("num_sites".into(), num_sites.into());
    d.insert("gamma".into(), gamma.into());
    d.insert("markovian_lifetime".into(), (1.0 / (2.0 * gamma * cat.mean_photons)).into());
    d.insert("bound_states".into(), bound.count().into());
    for (i, s) in bound.states.iter().enumerate() {
        d.insert(format!("bound_energy_{}", i + 1), s.energy.into());
        d.insert(format!("bound_residue_{}", i + 1), s.residue.into());
    }
    d.insert("plateau".into(), asym.plateau.into());
    d.insert(
        "plateau_G".into(),
        cat.coherence(Complex::from(asym.plateau.sqrt())).norm().into(),
    );
    if let Some(p) = asym.revival_period {
        d.insert("revival_period".into(), (kappa * p).into());
    }
    if let Some((lo, hi)) = asym.envelope {
        d.insert("envelope_min".into(), lo.into());
        d.insert("envelope_max".into(), hi.into());
    }
    if let Some(zc) = trace.crossing((-1.0f64).exp()) {
        d.insert("G_e_fold".into(), (kappa * zc).into());
    }
    meta.tolerances.insert("unitarity".into(), UNITARITY_TOLERANCE);
    meta.tolerances.insert("survival".into(), SURVIVAL_TOLERANCE);
    meta.notes
        .push("z in units of 1/kappa; G is |G|, ln_G its natural log".into());

    let mut columns = vec![
        Column::new("z", "1/kappa"),
        Column::new("S00_sq", ""),
        Column::new("G", ""),
        Column::new("ln_G", ""),
        Column::new("S00_sq_markov", ""),
        Column::new("G_markov", ""),
    ];
    columns.extend((0..sites_out).map(|j| Column::new(&format!("I_{j}"), "")));
    let mut table = ResultTable::new(meta, columns);
    let g = trace.g_modulus();
    let reference = trace.markovian_reference.as_deref().unwrap_or(&[]);
    for (i, &zz) in z.iter().enumerate() {
        let mut row: Vec<Value> = vec![
            (kappa * zz).into(),
            trace.survival_probability[i].into(),
            g[i].into(),
            g[i].ln().into(),
            (-gamma * zz).exp().into(),
            reference[i].into(),
        ];
        row.extend((0..sites_out).map(|j| Value::Num(result.amplitudes[[i, j]].norm_sqr())));
        table.push(row);
    }
    Ok(table)
}

/// Revival analysis of one gradient value.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSummary {
    pub gradient_per_cm: f64,
    /// `lambda / (F a)`; NaN without a gradient.
    pub bloch_period_cm: f64,
    /// Revival maxima `(z [cm], |S00|^2)`.
    pub revivals: Vec<(f64, f64)>,
    /// Mean revival spacing; NaN with fewer than two revivals.
    pub spacing_cm: f64,
    /// Per-cycle ratio of revival heights; NaN with fewer than two revivals.
    pub damping_ratio: f64,
    /// `|G|` at the first revival, one entry per mean photon number.
    pub g_first_revival: Vec<f64>,
    pub bound_modes: usize,
}

#[derive(Debug, Clone)]
pub struct BlochOutput {
    pub table: ResultTable,
    pub summaries: Vec<GradientSummary>,
    /// Max-normalized `|u(x, z)|`, one per gradient, when requested.
    pub field_maps: Vec<ResultTable>,
}

struct GradientRun {
    z_cm: Vec<f64>,
    survival: Vec<Complex<f64>>,
    power: Vec<f64>,
    summary: GradientSummary,
    field_map: Option<ResultTable>,
}

pub fn bpm_model(cfg: &BlochConfig, gradient_per_cm: f64) -> BpmModel<f64> {
    BpmModel {
        wavelength: cfg.wavelength_um,
        substrate_index: cfg.substrate_index,
        period: cfg.period_um,
        waveguide_width: cfg.waveguide_width_um,
        peak_contrast: cfg.peak_contrast,
        gradient: 0.0,
        num_guides: cfg.num_guides,
        device_length: cfg.length_cm * UM_PER_CM,
    }
    .with_gradient_per_cm(gradient_per_cm)
}

pub fn bpm_grid(cfg: &BlochConfig) -> BpmGrid<f64> {
    BpmGrid::new(cfg.period_um, cfg.num_points, cfg.points_per_period, cfg.dz_um)
}

fn run_gradient(cfg: &BlochConfig, f: f64) -> Result<GradientRun, CliError> {
    let model = bpm_model(cfg, f);
    model.validate()?;
    let grid = bpm_grid(cfg);
    grid.validate(&model)?;
    let mode = solve_fundamental_mode(&model, &grid)?;
    let options = BpmOptions {
        length: None,
        sample_every: cfg.sample_every,
        absorber: cfg.absorber,
        snapshot_every: cfg.field_map.then_some(cfg.field_map_every),
        snapshot_decimation: cfg.field_map_decimation,
    };
    info!("bloch: F = {f} /cm, {} steps", (model.device_length / grid.dz).round());
    let run = bpm_propagate(&model, &grid, &mode, &options)?;
    if !cfg.absorber {
        let drift = run.power.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        if drift > BPM_NORM_TOLERANCE {
            return Err(CliError::Contract(format!(
                "F = {f} /cm: power drift {drift:e} exceeds {BPM_NORM_TOLERANCE:e}"
            )));
        }
    }
    let z_cm: Vec<f64> = run.z.iter().map(|z| z / UM_PER_CM).collect();
    let p = run.survival_probability();
    let peaks = detect_revivals(&z_cm, &p, DEFAULT_RELATIVE_PROMINENCE)?;
    let damping_ratio = match zener_damping(&z_cm, &p, None) {
        Ok(d) => d.ratio,
        Err(Error::TooFewPeaks { .. }) => f64::NAN,
        Err(e) => return Err(e.into()),
    };
    let first = peaks.first().map(|pk| pk.value);
    let g_first_revival = cfg
        .mean_photons
        .iter()
        .map(|&n| -> Result<f64, CliError> {
            let cat = CatState::from_mean_photons(n)?;
            Ok(first.map_or(f64::NAN, |v| cat.coherence(Complex::from(v.sqrt())).norm()))
        })
        .collect::<Result<_, _>>()?;
    let summary = GradientSummary {
        gradient_per_cm: f,
        bloch_period_cm: bloch_period(&model).map_or(f64::NAN, |zb| zb / UM_PER_CM),
        revivals: peaks.iter().map(|pk| (pk.z, pk.value)).collect(),
        spacing_cm: mean_spacing(&peaks).unwrap_or(f64::NAN),
        damping_ratio,
        g_first_revival,
        bound_modes: mode.bound_modes,
    };
    let field_map = run.snapshots.as_ref().map(|s| {
        let peak = s.amplitude.iter().cloned().fold(0.0, f64::max);
        let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
        let mut meta = Metadata::new(
            "bloch-field",
            ConfigFile {
                bloch: Some(BlochConfig {
                    gradients_per_cm: vec![f],
                    ..cfg.clone()
                }),
                ..Default::default()
            },
        );
        meta.derived.insert("gradient_per_cm".into(), f.into());
        meta.notes.push(
            "|u(x, z)| normalized to its maximum over the map (arbitrary units); rows are z, columns are x".into(),
        );
        let mut columns = vec![Column::new("z", "cm")];
        columns.extend(s.x.iter().map(|x| Column::new(&format!("x={x:e}"), "um")));
        let mut table = ResultTable::new(meta, columns);
        for (i, z) in s.z.iter().enumerate() {
            let mut row = vec![Value::Num(z / UM_PER_CM)];
            row.extend(s.amplitude.row(i).iter().map(|a| Value::Num(a * scale)));
            table.push(row);
        }
        table
    });
    Ok(GradientRun {
        z_cm,
        survival: run.survival,
        power: run.power,
        summary,
        field_map,
    })
}

/// Beam propagation in the tilted array, one run per gradient, with `G` for
/// every mean photon number.
pub fn run_bloch(cfg: &BlochConfig) -> Result<BlochOutput, CliError> {
    cfg.validate()?;
    let runs: Vec<GradientRun> = cfg
        .gradients_per_cm
        .par_iter()
        .map(|&f| run_gradient(cfg, f))
        .collect::<Result<_, _>>()?;

    let mut meta = Metadata::new(
        "bloch",
        ConfigFile {
            bloch: Some(cfg.clone()),
            ..Default::default()
        },
    );
    meta.tolerances.insert("survival".into(), SURVIVAL_TOLERANCE);
    meta.tolerances.insert("bpm_norm".into(), BPM_NORM_TOLERANCE);
    meta.tolerances
        .insert("revival_relative_prominence".into(), DEFAULT_RELATIVE_PROMINENCE);
    meta.notes
        .push("z in cm; G is |G| of the balanced cat with alpha0 = sqrt(n) = -beta0".into());
    for r in &runs {
        let s = &r.summary;
        let key = |name: &str| format!("F{}/{name}", s.gradient_per_cm);
        let d = &mut meta.derived;
        d.insert(key("bloch_period_cm"), s.bloch_period_cm.into());
        d.insert(key("revivals"), s.revivals.len().into());
        d.insert(key("revival_spacing_cm"), s.spacing_cm.into());
        d.insert(key("damping_ratio"), s.damping_ratio.into());
        d.insert(key("bound_modes"), s.bound_modes.into());
        for (n, g) in cfg.mean_photons.iter().zip(&s.g_first_revival) {
            d.insert(key(&format!("G_first_revival_n{n}")), (*g).into());
        }
        if s.bound_modes > 1 {
            meta.notes.push(format!(
                "F = {} /cm: the isolated guide supports {} modes; the fundamental is launched",
                s.gradient_per_cm, s.bound_modes
            ));
        }
    }

    let columns = vec![
        Column::new("F", "1/cm"),
        Column::new("n", ""),
        Column::new("z", "cm"),
        Column::new("S00_sq", ""),
        Column::new("G", ""),
        Column::new("ln_G", ""),
        Column::new("power", ""),
    ];
    let mut table = ResultTable::new(meta, columns);
    for r in &runs {
        for &n in &cfg.mean_photons {
            let cat = CatState::from_mean_photons(n)?;
            let trace = coherence_factor(&cat, &r.z_cm, &r.survival)?;
            for (i, g) in trace.g_modulus().into_iter().enumerate() {
                table.push(vec![
                    r.summary.gradient_per_cm.into(),
                    n.into(),
                    r.z_cm[i].into(),
                    trace.survival_probability[i].into(),
                    g.into(),
                    g.ln().into(),
                    r.power[i].into(),
                ]);
            }
        }
    }
    let mut summaries = Vec::new();
    let mut field_maps = Vec::new();
    for r in runs {
        summaries.push(r.summary);
        field_maps.extend(r.field_map);
    }
    Ok(BlochOutput {
        table,
        summaries,
        field_maps,
    })
}

/// Position of `kappa0` relative to the coupling threshold.
fn threshold_status(kappa0: f64, threshold: f64, tol: f64) -> &'static str {
    if threshold.is_nan() {
        "none"
    } else if (kappa0 - threshold).abs() <= 10.0 * tol {
        "at"
    } else if kappa0 < threshold {
        "below"
    } else {
        "above"
    }
}

/// Bisection on the truncated-matrix count, same bracket as the pole search.
fn truncated_threshold(kappa: f64, sigma0: f64, lo: f64, hi: f64, tol: f64, sites: usize) -> Result<f64, CliError> {
    let count = |k0: f64| -> Result<usize, CliError> {
        let (b, a) = truncated_out_of_band_count(&BlochBath::new(kappa, k0, sigma0)?, sites)?;
        Ok(b + a)
    };
    let base = count(lo)?;
    if count(hi)? <= base {
        return Ok(f64::NAN);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if count(mid)? > base {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bound-state census over the `(kappa0, sigma0)` grid, with the coupling
/// threshold of each detuning row.
pub fn run_spectrum(cfg: &SpectrumConfig) -> Result<ResultTable, CliError> {
    cfg.validate()?;
    let kappa = cfg.kappa;
    let tol = cfg.threshold_tol * kappa;
    let mut meta = Metadata::new(
        "spectrum",
        ConfigFile {
            spectrum: Some(cfg.clone()),
            ..Default::default()
        },
    );
    meta.tolerances.insert("threshold".into(), tol);
    meta.notes.push(
        "threshold: smallest kappa0 at which the bound-state count rises above its weak-coupling value, by bisection on the pole equation; threshold_truncated bisects the truncated-matrix count".into(),
    );
    let columns = vec![
        Column::new("kappa0", "kappa"),
        Column::new("sigma0", "kappa"),
        Column::new("bound_states", ""),
        Column::new("truncated_count", ""),
        Column::new("E_1", "kappa"),
        Column::new("r_1", ""),
        Column::new("E_2", "kappa"),
        Column::new("r_2", ""),
        Column::new("plateau", ""),
        Column::new("revival_period", "1/kappa"),
        Column::new("threshold", "kappa"),
        Column::new("threshold_truncated", "kappa"),
        Column::new("status", ""),
    ];
    let mut table = ResultTable::new(meta, columns);
    for &s0 in &cfg.sigma0 {
        let hi = 4.0 * kappa + s0.abs();
        // Start just above zero: a vanishing coupling detaches the defect.
        let lo = tol;
        let threshold = match coupling_threshold(kappa, s0, lo, hi, tol) {
            Ok(t) => t,
            Err(Error::InvalidParameter { name: "hi", .. }) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        let truncated = truncated_threshold(kappa, s0, lo, hi, tol, cfg.truncation_sites)?;
        table
            .metadata
            .derived
            .insert(format!("threshold_sigma0_{}", s0 / kappa), (threshold / kappa).into());
        for k0 in cfg.kappa0_values() {
            let bath = BlochBath::new(kappa, k0, s0)?;
            let set = find_bound_states(&bath)?;
            let (below, above) = truncated_out_of_band_count(&bath, cfg.truncation_sites)?;
            let asym = asymptotics(&set);
            let state = |i: usize| set.states.get(i).map_or((f64::NAN, f64::NAN), |s| (s.energy, s.residue));
            let (e1, r1) = state(0);
            let (e2, r2) = state(1);
            table.push(vec![
                (k0 / kappa).into(),
                (s0 / kappa).into(),
                set.count().into(),
                (below + above).into(),
                (e1 / kappa).into(),
                r1.into(),
                (e2 / kappa).into(),
                r2.into(),
                asym.plateau.into(),
                asym.revival_period.map_or(f64::NAN, |p| p * kappa).into(),
                (threshold / kappa).into(),
                (truncated / kappa).into(),
                threshold_status(k0, threshold, tol).into(),
            ]);
        }
    }
    Ok(table)
}
