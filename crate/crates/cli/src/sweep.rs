//! Parameter sweeps. Points run concurrently and each writes its own file;
//! the summary is assembled after all points have finished.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{BlochConfig, ConfigFile, OscillatorConfig, SweepConfig};
use crate::error::CliError;
use crate::output::{Column, Format, Metadata, ResultTable, Value};
use crate::scenario::{run_bloch, run_oscillator};

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub summary: ResultTable,
    pub point_files: Vec<PathBuf>,
}

fn or_base(values: &[f64], base: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

fn point_path(dir: &Path, index: usize, format: Format) -> PathBuf {
    dir.join(format!("point_{index:04}.{}", format.extension()))
}

fn oscillator_points(sweep: &SweepConfig, base: &OscillatorConfig) -> Vec<OscillatorConfig> {
    let photons: Vec<Option<f64>> = if sweep.mean_photons.is_empty() {
        vec![base.mean_photons]
    } else {
        sweep.mean_photons.iter().map(|&n| Some(n)).collect()
    };
    let mut points = Vec::new();
    for k0 in or_base(&sweep.kappa0, base.kappa0) {
        for s0 in or_base(&sweep.sigma0, base.sigma0) {
            for &n in &photons {
                let mut p = OscillatorConfig {
                    kappa0: k0,
                    sigma0: s0,
                    ..base.clone()
                };
                if n.is_some() {
                    p.mean_photons = n;
                    p.alpha0 = None;
                    p.alpha0_im = 0.0;
                    p.beta0 = None;
                    p.beta0_im = None;
                }
                points.push(p);
            }
        }
    }
    points
}

fn bloch_points(sweep: &SweepConfig, base: &BlochConfig) -> Vec<BlochConfig> {
    let gradients = if sweep.gradients_per_cm.is_empty() {
        base.gradients_per_cm.clone()
    } else {
        sweep.gradients_per_cm.clone()
    };
    let photons = if sweep.mean_photons.is_empty() {
        base.mean_photons.clone()
    } else {
        sweep.mean_photons.clone()
    };
    gradients
        .into_iter()
        .map(|f| BlochConfig {
            gradients_per_cm: vec![f],
            mean_photons: photons.clone(),
            ..base.clone()
        })
        .collect()
}

fn derived(table: &ResultTable, key: &str) -> Value {
    table.metadata.derived.get(key).cloned().unwrap_or(Value::Num(f64::NAN))
}

/// Runs the sweep described by `config` and writes one file per point.
pub fn run_sweep(config: &ConfigFile, format: Format) -> Result<SweepOutcome, CliError> {
    let sweep = config.sweep.clone().unwrap_or_default();
    sweep.validate()?;
    let dir = PathBuf::from(&sweep.point_dir);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut resolved = ConfigFile {
        sweep: Some(sweep.clone()),
        ..Default::default()
    };

    let (columns, rows): (Vec<Column>, Vec<Vec<Vec<Value>>>) = if sweep.scenario == "bloch" {
        let base = config.bloch.clone().unwrap_or_default();
        resolved.bloch = Some(base.clone());
        let points = bloch_points(&sweep, &base);
        let rows = points
            .par_iter()
            .enumerate()
            .map(|(i, p)| -> Result<Vec<Vec<Value>>, CliError> {
                let out = run_bloch(p)?;
                let path = point_path(&dir, i, format);
                out.table.write(Some(&path), format)?;
                let s = &out.summaries[0];
                Ok(p.mean_photons
                    .iter()
                    .zip(&s.g_first_revival)
                    .map(|(&n, &g)| {
                        vec![
                            s.gradient_per_cm.into(),
                            n.into(),
                            s.bloch_period_cm.into(),
                            s.revivals.len().into(),
                            s.spacing_cm.into(),
                            s.damping_ratio.into(),
                            g.into(),
                            path.display().to_string().into(),
                        ]
                    })
                    .collect())
            })
            .collect::<Result<_, _>>()?;
        let columns = vec![
            Column::new("F", "1/cm"),
            Column::new("n", ""),
            Column::new("bloch_period", "cm"),
            Column::new("revivals", ""),
            Column::new("revival_spacing", "cm"),
            Column::new("damping_ratio", ""),
            Column::new("G_first_revival", ""),
            Column::new("file", ""),
        ];
        (columns, rows)
    } else {
        let base = config.oscillator.clone().unwrap_or_default();
        resolved.oscillator = Some(base.clone());
        let points = oscillator_points(&sweep, &base);
        let rows = points
            .par_iter()
            .enumerate()
            .map(|(i, p)| -> Result<Vec<Vec<Value>>, CliError> {
                let table = run_oscillator(p)?;
                let path = point_path(&dir, i, format);
                table.write(Some(&path), format)?;
                let last = table.rows.last().expect("at least two samples");
                let ((a, ai), _) = p.amplitudes();
                Ok(vec![vec![
                    p.kappa0.into(),
                    p.sigma0.into(),
                    (a * a + ai * ai).into(),
                    derived(&table, "bound_states"),
                    derived(&table, "plateau"),
                    derived(&table, "plateau_G"),
                    last[1].clone(),
                    last[2].clone(),
                    derived(&table, "G_e_fold"),
                    path.display().to_string().into(),
                ]])
            })
            .collect::<Result<_, _>>()?;
        let columns = vec![
            Column::new("kappa0", ""),
            Column::new("sigma0", ""),
            Column::new("n", ""),
            Column::new("bound_states", ""),
            Column::new("plateau", ""),
            Column::new("plateau_G", ""),
            Column::new("S00_sq_final", ""),
            Column::new("G_final", ""),
            Column::new("G_e_fold", "1/kappa"),
            Column::new("file", ""),
        ];
        (columns, rows)
    };

    let mut meta = Metadata::new("sweep", resolved);
    meta.derived.insert("points".into(), rows.len().into());
    meta.notes
        .push("one row per sweep point; `file` holds the full trace and its own metadata".into());
    let mut summary = ResultTable::new(meta, columns);
    let mut point_files = Vec::new();
    for point in rows {
        for row in point {
            if let Some(Value::Text(f)) = row.last() {
                let f = PathBuf::from(f);
                if point_files.last() != Some(&f) {
                    point_files.push(f);
                }
            }
            summary.push(row);
        }
    }
    Ok(SweepOutcome { summary, point_files })
}
