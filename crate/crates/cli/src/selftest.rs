//! Invariant suite run by `catlattice selftest`.

use std::str::FromStr;

use catlattice::bpm::{bpm_propagate, solve_fundamental_mode, BpmGrid, BpmModel, BpmOptions};
use catlattice::cat::{estimate_g_from_counts, mixture_probability, photon_number_distribution, CatState};
use catlattice::lattice::{build_defect_lattice, propagate, required_truncation, uniform_grid, LatticePropagator};
use catlattice::spectrum::{golden_rule_rate, markovian_rate, BlochBath};
use catlattice::special::bessel_j;
use catlattice::PhaseConvention;
use num_complex::Complex;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::output::{Column, Metadata, ResultTable};

/// Deliberate defects used to show that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Evolve with `exp(+iHz)`.
    SignFlip,
    /// Chains far shorter than the light cone.
    SmallTruncation,
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Mutation::None),
            "sign-flip" => Ok(Mutation::SignFlip),
            "small-truncation" => Ok(Mutation::SmallTruncation),
            _ => Err(format!("unknown mutation `{s}` (none, sign-flip, small-truncation)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Worst deviation found.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

const FIG1: [(f64, f64); 4] = [(0.2, 0.0), (std::f64::consts::SQRT_2, 0.0), (3.0, 0.0), (std::f64::consts::SQRT_2, 4.0)];

fn sites(mutation: Mutation, z_max: f64) -> usize {
    match mutation {
        Mutation::SmallTruncation => 8,
        _ => required_truncation(1.0, z_max, 1.25),
    }
}

/// `sum_j |S_{j,0}|^2 = 1` for the figure parameter sets.
fn unitarity(mutation: Mutation) -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for (k0, s0) in FIG1 {
        let model = build_defect_lattice(k0, s0, 1.0, sites(mutation, 20.0))?;
        let r = propagate(&model, &uniform_grid(20.0, 201))?;
        for p in r.total_probability() {
            worst = worst.max((p - 1.0).abs());
        }
    }
    Ok(Check::new("unitarity", worst, 1e-10))
}

/// Edge launch into a uniform chain against the image sum
/// `(-i)^j [J_j(2z) + J_{j+2}(2z)]`.
fn bessel_oracle(mutation: Mutation) -> Result<Check, CliError> {
    let n = match mutation {
        Mutation::SmallTruncation => 8,
        _ => 400,
    };
    let convention = match mutation {
        Mutation::SignFlip => PhaseConvention::Optics,
        _ => PhaseConvention::Schrodinger,
    };
    let model = build_defect_lattice(1.0, 0.0, 1.0, n)?;
    let prop = LatticePropagator::with_convention(&model, convention)?;
    let mut worst = 0.0f64;
    for z in uniform_grid(10.0, 51) {
        let column = prop.evolve_site(0, z);
        for (j, c) in column.iter().enumerate().take(40) {
            let magnitude = bessel_j(j as i32, 2.0 * z) + bessel_j(j as i32 + 2, 2.0 * z);
            let expected = Complex::new(0.0, -1.0).powu(j as u32) * magnitude;
            worst = worst.max((c - expected).norm());
        }
    }
    Ok(Check::new("bessel_oracle", worst, 1e-8))
}

/// Survival unchanged when the chain is doubled.
fn truncation(mutation: Mutation) -> Result<Check, CliError> {
    let z = uniform_grid(20.0, 201);
    let mut worst = 0.0f64;
    for (k0, s0) in FIG1 {
        let n = sites(mutation, 20.0);
        let a = propagate(&build_defect_lattice(k0, s0, 1.0, n)?, &z)?;
        let b = propagate(&build_defect_lattice(k0, s0, 1.0, 2 * required_truncation(1.0, 20.0, 1.25))?, &z)?;
        for (x, y) in a.survival.iter().zip(&b.survival) {
            worst = worst.max((x - y).norm());
        }
    }
    Ok(Check::new("truncation_independence", worst, 1e-8))
}

/// Golden-rule rate at the band centre equals `2 kappa0^2 / kappa`.
fn golden_rule() -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for (k0, kappa) in [(0.2f64, 1.0f64), (1.0, 2.5), (0.03, 0.4), (2.0, 1.0)] {
        let bath = BlochBath::new(kappa, k0, 0.0)?;
        let m = markovian_rate(&bath)?;
        worst = worst.max((golden_rule_rate(&bath)? - m).abs() / m.max(1.0));
    }
    Ok(Check::new("golden_rule", worst, 1e-12))
}

/// General coherence factor against the balanced closed form, and `G(0) = 1`.
fn coherence_identity() -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 3.0, 6.0] {
        let general = CatState::new(Complex::new(a, 0.0), Complex::new(-a, 0.0))?;
        worst = worst.max((general.coherence(Complex::new(1.0, 0.0)) - 1.0).norm());
        for s in [0.0, 0.3, 0.7, 0.95, 1.0] {
            let closed = (-2.0 * a * a * (1.0 - s * s)).exp();
            let g = general.coherence(Complex::new(s, 0.0));
            worst = worst.max((g - closed).norm() / closed.clamp(f64::MIN_POSITIVE, 1.0));
        }
    }
    Ok(Check::new("coherence_identity", worst, 1e-12))
}

/// Odd photon numbers vanish in a fully coherent even cat.
fn parity() -> Result<Check, CliError> {
    let cat = CatState::balanced(Complex::new(3.0, 0.0))?;
    let one = Complex::new(1.0, 0.0);
    let mut odd = 0.0;
    let mut total = 0.0;
    for n in 0..80 {
        let p = photon_number_distribution(&cat, one, one, n)?;
        total += p;
        if n % 2 == 1 {
            odd += p;
        }
    }
    Ok(Check::new("odd_photon_suppression", odd / total, 1e-12))
}

/// `G = P_n / P_n^mix - 1` recovers the input coherence.
fn estimator() -> Result<Check, CliError> {
    let cat = CatState::balanced(Complex::new(3.0, 0.0))?;
    let s = Complex::new(0.8, 0.0);
    let alpha = cat.alpha0 * s;
    let mut worst = 0.0f64;
    for g in [0.0f64, 0.1, 0.5, 0.9, 1.0] {
        for n in [4, 6, 8] {
            let p = photon_number_distribution(&cat, s, Complex::new(g, 0.0), n)?;
            // Mixture of |alpha> and |beta> with weights 1/2.
            let mix = 2.0 / cat.normalization * mixture_probability(alpha, n);
            worst = worst.max((estimate_g_from_counts(n, p, mix)? - g).abs());
        }
    }
    Ok(Check::new("estimator_round_trip", worst, 1e-6))
}

fn bpm_setup(f: f64) -> Result<(BpmModel<f64>, BpmGrid<f64>, catlattice::ModeProfile), CliError> {
    let model = BpmModel::lithium_niobate().with_gradient_per_cm(f);
    let grid = BpmGrid::default_for(&model);
    let mode = solve_fundamental_mode(&model, &grid)?;
    Ok((model, grid, mode))
}

/// Absorber-free split-step conserves power.
fn bpm_norm() -> Result<Check, CliError> {
    let (model, grid, mode) = bpm_setup(10.83)?;
    let options = BpmOptions {
        length: Some(500.0),
        sample_every: 20,
        absorber: false,
        ..Default::default()
    };
    let run = bpm_propagate(&model, &grid, &mode, &options)?;
    let worst = run.power.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    Ok(Check::new("bpm_norm", worst, 1e-8))
}

/// Halving the step leaves the survival amplitude unchanged.
fn bpm_convergence() -> Result<Check, CliError> {
    let (model, coarse, mode) = bpm_setup(7.22)?;
    let fine = BpmGrid {
        dz: coarse.dz / 2.0,
        ..coarse
    };
    let options = |every| BpmOptions {
        length: Some(200.0),
        sample_every: every,
        ..Default::default()
    };
    let a = bpm_propagate(&model, &coarse, &mode, &options(8))?;
    let b = bpm_propagate(&model, &fine, &mode, &options(16))?;
    let worst = a
        .survival
        .iter()
        .zip(&b.survival)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(Check::new("bpm_step_convergence", worst, 1e-6))
}

pub fn run_checks(mutation: Mutation) -> Result<Vec<Check>, CliError> {
    Ok(vec![
        unitarity(mutation)?,
        bessel_oracle(mutation)?,
        truncation(mutation)?,
        golden_rule()?,
        coherence_identity()?,
        parity()?,
        estimator()?,
        bpm_norm()?,
        bpm_convergence()?,
    ])
}

pub fn report(checks: &[Check], mutation: Mutation) -> ResultTable {
    let mut meta = Metadata::new("selftest", ConfigFile::default());
    if mutation != Mutation::None {
        meta.notes.push(format!("mutation injected: {mutation:?}"));
    }
    for c in checks {
        meta.tolerances.insert(c.name.into(), c.tolerance);
    }
    let columns = vec![
        Column::new("check", ""),
        Column::new("status", ""),
        Column::new("value", ""),
        Column::new("tolerance", ""),
    ];
    let mut table = ResultTable::new(meta, columns);
    for c in checks {
        table.push(vec![
            c.name.into(),
            (if c.passed { "pass" } else { "fail" }).into(),
            c.value.into(),
            c.tolerance.into(),
        ]);
    }
    table
}

pub fn failures(checks: &[Check]) -> Vec<String> {
    checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect()
}
