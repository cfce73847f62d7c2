//! Scenario configuration: a TOML file with one section per scenario, layered
//! over an optional named preset and the documented defaults.

use std::f64::consts::SQRT_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Table;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Oscillator,
    Bloch,
    Spectrum,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Oscillator => "oscillator",
            Scenario::Bloch => "bloch",
            Scenario::Spectrum => "spectrum",
            Scenario::Sweep => "sweep",
        }
    }
}

/// Defect waveguide side-coupled to a semi-infinite array, excited by a cat.
///
/// Distances are in units of `1/kappa`: `z_max` is the largest `kappa z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorConfig {
    /// Bulk hopping rate.
    pub kappa: f64,
    /// Defect-to-array coupling.
    pub kappa0: f64,
    /// Defect detuning.
    pub sigma0: f64,
    /// Real and imaginary part of the first cat component. Defaults to 3 when
    /// `mean_photons` is unset.
    pub alpha0: Option<f64>,
    pub alpha0_im: f64,
    /// Second component; `-alpha0` when unset.
    pub beta0: Option<f64>,
    pub beta0_im: Option<f64>,
    /// Balanced cat with real `alpha0 = sqrt(mean_photons)`.
    pub mean_photons: Option<f64>,
    pub z_max: f64,
    pub samples: usize,
    /// Truncation margin over the light cone `2 kappa z`.
    pub margin: f64,
    /// Fixed chain length instead of the automatic truncation.
    pub num_sites: Option<usize>,
    /// Emit `|S_{j,0}|^2` for the first this many sites.
    pub site_intensities: usize,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            kappa0: 0.2,
            sigma0: 0.0,
            alpha0: None,
            alpha0_im: 0.0,
            beta0: None,
            beta0_im: None,
            mean_photons: None,
            z_max: 20.0,
            samples: 401,
            margin: 1.25,
            num_sites: None,
            site_intensities: 0,
        }
    }
}

/// Continuous waveguide array with a transverse index gradient. Lengths in
/// micrometres unless the key says otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlochConfig {
    /// One run per gradient value.
    pub gradients_per_cm: Vec<f64>,
    /// Balanced cats evaluated on every run.
    pub mean_photons: Vec<f64>,
    pub wavelength_um: f64,
    pub substrate_index: f64,
    pub period_um: f64,
    pub waveguide_width_um: f64,
    pub peak_contrast: f64,
    pub num_guides: usize,
    pub length_cm: f64,
    pub dz_um: f64,
    pub num_points: usize,
    pub points_per_period: usize,
    pub absorber: bool,
    /// Output a row every this many steps.
    pub sample_every: usize,
    /// Dump the max-normalized `|u(x, z)|` next to the output file.
    pub field_map: bool,
    /// Keep every this many output rows in the map.
    pub field_map_every: usize,
    /// Keep every this many transverse samples in the map.
    pub field_map_decimation: usize,
}

impl Default for BlochConfig {
    fn default() -> Self {
        Self {
            gradients_per_cm: vec![3.61],
            mean_photons: vec![9.0],
            wavelength_um: 1.44,
            substrate_index: 2.1381,
            period_um: 13.0,
            waveguide_width_um: 11.5,
            peak_contrast: 3.0e-3,
            num_guides: 49,
            length_cm: 5.0,
            dz_um: 0.25,
            num_points: 2048,
            points_per_period: 32,
            absorber: true,
            sample_every: 40,
            field_map: false,
            field_map_every: 10,
            field_map_decimation: 8,
        }
    }
}

/// Bound-state census over a `(kappa0, sigma0)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub kappa: f64,
    pub kappa0: Vec<f64>,
    /// `[start, stop, count]`; replaces `kappa0` when set.
    pub kappa0_linspace: Option<[f64; 3]>,
    pub sigma0: Vec<f64>,
    /// Chain length of the truncated-matrix cross-check.
    pub truncation_sites: usize,
    /// Bisection tolerance of the coupling threshold.
    pub threshold_tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            kappa0: vec![0.2, SQRT_2, 3.0],
            kappa0_linspace: None,
            sigma0: vec![0.0, 4.0],
            truncation_sites: 2000,
            threshold_tol: 1e-6,
        }
    }
}

/// Parameter sweep over the `oscillator` or `bloch` section. Empty lists keep
/// the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// `oscillator` or `bloch`.
    pub scenario: String,
    pub kappa0: Vec<f64>,
    pub sigma0: Vec<f64>,
    pub mean_photons: Vec<f64>,
    pub gradients_per_cm: Vec<f64>,
    /// Directory for the per-point result files.
    pub point_dir: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scenario: "oscillator".into(),
            kappa0: vec![0.2, SQRT_2, 3.0],
            sigma0: vec![0.0, 4.0],
            mean_photons: Vec::new(),
            gradients_per_cm: Vec::new(),
            point_dir: "sweep-points".into(),
        }
    }
}

/// Whole configuration file. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<OscillatorConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ConfigFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub const PRESETS: &[&str] = &[
    "fig1-curve1",
    "fig1-curve2",
    "fig1-curve3",
    "fig1-curve4",
    "fig1-census",
    "fig2b",
    "fig2c",
    "fig2d",
];

/// Named parameter sets of the published figures.
pub fn preset(name: &str) -> Result<ConfigFile, CliError> {
    let oscillator = |kappa0: f64, sigma0: f64| ConfigFile {
        oscillator: Some(OscillatorConfig {
            kappa0,
            sigma0,
            alpha0: Some(3.0),
            beta0: Some(-3.0),
            ..Default::default()
        }),
        ..Default::default()
    };
    let bloch = |gradients: &[f64], photons: &[f64], field_map: bool| ConfigFile {
        bloch: Some(BlochConfig {
            gradients_per_cm: gradients.to_vec(),
            mean_photons: photons.to_vec(),
            field_map,
            ..Default::default()
        }),
        ..Default::default()
    };
    Ok(match name {
        "fig1-curve1" => oscillator(0.2, 0.0),
        "fig1-curve2" => oscillator(SQRT_2, 0.0),
        "fig1-curve3" => oscillator(3.0, 0.0),
        "fig1-curve4" => oscillator(SQRT_2, 4.0),
        "fig1-census" => ConfigFile {
            spectrum: Some(SpectrumConfig::default()),
            ..Default::default()
        },
        "fig2b" => bloch(&[3.61], &[9.0], true),
        "fig2c" => bloch(&[3.61, 7.22, 10.83], &[9.0], false),
        "fig2d" => bloch(&[3.61], &[9.0, 36.0, 144.0], false),
        _ => {
            return Err(CliError::Config(format!(
                "unknown preset `{name}`; available: {}",
                PRESETS.join(", ")
            )))
        }
    })
}

/// Merges `top` over `base` key by key, one level into each section.
fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => {
                for (k, v) in t {
                    b.insert(k, v);
                }
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Resolves preset, file and defaults into a configuration.
pub fn resolve(preset_name: Option<&str>, file: Option<&Path>) -> Result<ConfigFile, CliError> {
    let mut table = match preset_name {
        Some(name) => Table::try_from(preset(name)?).expect("preset serializes"),
        None => Table::new(),
    };
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let top: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut table, top);
    }
    let text = toml::to_string(&table).expect("table serializes");
    ConfigFile::from_toml(&text)
}

fn check(ok: bool, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(what.to_string()))
    }
}

fn positive(value: f64, name: &str) -> Result<(), CliError> {
    check(value.is_finite() && value > 0.0, &format!("`{name}` must be positive, got {value}"))
}

fn finite(value: f64, name: &str) -> Result<(), CliError> {
    check(value.is_finite(), &format!("`{name}` must be finite, got {value}"))
}

impl OscillatorConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive(self.kappa, "kappa")?;
        check(self.kappa0.is_finite() && self.kappa0 >= 0.0, "`kappa0` must be >= 0")?;
        finite(self.sigma0, "sigma0")?;
        positive(self.z_max, "z_max")?;
        check(self.samples >= 2, "`samples` must be at least 2")?;
        positive(self.margin, "margin")?;
        if let Some(n) = self.num_sites {
            check(n >= 2, "`num_sites` must be at least 2")?;
        }
        if self.mean_photons.is_some() {
            check(
                self.alpha0.is_none() && self.beta0.is_none() && self.beta0_im.is_none() && self.alpha0_im == 0.0,
                "give either `mean_photons` or the amplitudes `alpha0`/`beta0`, not both",
            )?;
        }
        for v in [self.alpha0, self.beta0, self.beta0_im, self.mean_photons].into_iter().flatten() {
            finite(v, "cat amplitude")?;
        }
        finite(self.alpha0_im, "alpha0_im")
    }

    /// Cat amplitudes `(alpha0, beta0)` as `(re, im)` pairs.
    pub fn amplitudes(&self) -> ((f64, f64), (f64, f64)) {
        if let Some(n) = self.mean_photons {
            let a = n.sqrt();
            return ((a, 0.0), (-a, 0.0));
        }
        let alpha = (self.alpha0.unwrap_or(3.0), self.alpha0_im);
        let beta = (self.beta0.unwrap_or(-alpha.0), self.beta0_im.unwrap_or(-alpha.1));
        (alpha, beta)
    }
}

impl BlochConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(!self.gradients_per_cm.is_empty(), "`gradients_per_cm` is empty")?;
        for &f in &self.gradients_per_cm {
            check(f.is_finite() && f >= 0.0, "gradients must be >= 0")?;
        }
        check(!self.mean_photons.is_empty(), "`mean_photons` is empty")?;
        for &n in &self.mean_photons {
            check(n.is_finite() && n >= 0.0, "`mean_photons` must be >= 0")?;
        }
        for (v, name) in [
            (self.wavelength_um, "wavelength_um"),
            (self.substrate_index, "substrate_index"),
            (self.period_um, "period_um"),
            (self.waveguide_width_um, "waveguide_width_um"),
            (self.peak_contrast, "peak_contrast"),
            (self.length_cm, "length_cm"),
            (self.dz_um, "dz_um"),
        ] {
            positive(v, name)?;
        }
        check(self.num_guides >= 1, "`num_guides` must be at least 1")?;
        check(self.sample_every >= 1, "`sample_every` must be at least 1")?;
        check(
            self.field_map_every >= 1 && self.field_map_decimation >= 1,
            "field-map intervals must be at least 1",
        )
    }
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive(self.kappa, "kappa")?;
        if let Some([a, b, n]) = self.kappa0_linspace {
            check(
                a.is_finite() && b.is_finite() && a >= 0.0 && b > a && n >= 2.0 && n.fract() == 0.0,
                "`kappa0_linspace` must be [start >= 0, stop > start, count >= 2]",
            )?;
        } else {
            check(!self.kappa0.is_empty(), "`kappa0` is empty")?;
            for &k in &self.kappa0 {
                check(k.is_finite() && k >= 0.0, "`kappa0` values must be >= 0")?;
            }
        }
        check(!self.sigma0.is_empty(), "`sigma0` is empty")?;
        for &s in &self.sigma0 {
            finite(s, "sigma0")?;
        }
        check(self.truncation_sites >= 2, "`truncation_sites` must be at least 2")?;
        positive(self.threshold_tol, "threshold_tol")
    }

    pub fn kappa0_values(&self) -> Vec<f64> {
        match self.kappa0_linspace {
            Some([a, b, n]) => {
                let n = n as usize;
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
            None => self.kappa0.clone(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(
            self.scenario == "oscillator" || self.scenario == "bloch",
            "`scenario` must be `oscillator` or `bloch`",
        )?;
        check(!self.point_dir.is_empty(), "`point_dir` is empty")?;
        if self.scenario == "bloch" {
            check(
                self.kappa0.is_empty() && self.sigma0.is_empty(),
                "`kappa0`/`sigma0` do not apply to a bloch sweep",
            )?;
        } else {
            check(self.gradients_per_cm.is_empty(), "`gradients_per_cm` does not apply to an oscillator sweep")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_figure_parameters() {
        let c = preset("fig1-curve4").unwrap().oscillator.unwrap();
        assert_eq!((c.kappa0, c.sigma0, c.kappa), (SQRT_2, 4.0, 1.0));
        assert_eq!(c.amplitudes(), ((3.0, 0.0), (-3.0, 0.0)));
        let b = preset("fig2d").unwrap().bloch.unwrap();
        assert_eq!(b.gradients_per_cm, vec![3.61]);
        assert_eq!(b.mean_photons, vec![9.0, 36.0, 144.0]);
        assert_eq!(preset("fig2c").unwrap().bloch.unwrap().gradients_per_cm, vec![3.61, 7.22, 10.83]);
        for name in PRESETS {
            assert!(preset(name).is_ok());
        }
        assert!(preset("fig3").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::from_toml("[oscillator]\nkapa0 = 1.0\n").is_err());
        assert!(ConfigFile::from_toml("[oscilator]\nkappa0 = 1.0\n").is_err());
        let ok = ConfigFile::from_toml("[oscillator]\nkappa0 = 1.0\n").unwrap();
        assert_eq!(ok.oscillator.unwrap().kappa0, 1.0);
    }

    #[test]
    fn file_overrides_preset() {
        let mut base = Table::try_from(preset("fig1-curve3").unwrap()).unwrap();
        merge(&mut base, "[oscillator]\nz_max = 7.5\n".parse().unwrap());
        let c: ConfigFile = toml::from_str(&toml::to_string(&base).unwrap()).unwrap();
        let o = c.oscillator.unwrap();
        assert_eq!((o.kappa0, o.z_max, o.alpha0), (3.0, 7.5, Some(3.0)));
    }

    #[test]
    fn toml_round_trip() {
        let c = ConfigFile {
            oscillator: Some(OscillatorConfig::default()),
            bloch: Some(BlochConfig::default()),
            spectrum: Some(SpectrumConfig::default()),
            sweep: Some(SweepConfig::default()),
        };
        assert_eq!(ConfigFile::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn cat_parameters_are_exclusive() {
        let c = OscillatorConfig {
            mean_photons: Some(4.0),
            alpha0: Some(2.0),
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = OscillatorConfig {
            mean_photons: Some(4.0),
            ..Default::default()
        };
        assert_eq!(c.amplitudes(), ((2.0, 0.0), (-2.0, 0.0)));
    }
}
