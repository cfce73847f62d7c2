use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::scalar::{cis_neg, Real};

use super::mode::ModeProfile;
use super::model::{build_index_profile, BpmGrid, BpmModel};

/// Largest potential phase accumulated in one step.
const MAX_PHASE_PER_STEP: f64 = std::f64::consts::FRAC_PI_4;
const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmOptions<T> {
    /// Propagation length; the device length when `None`.
    pub length: Option<T>,
    /// Record `S00` and the power every this many steps.
    pub sample_every: usize,
    pub absorber: bool,
    /// Record `|u(x, z)|` every this many samples, keeping every
    /// `snapshot_decimation`-th transverse point.
    pub snapshot_every: Option<usize>,
    pub snapshot_decimation: usize,
}

impl<T: Real> Default for BpmOptions<T> {
    fn default() -> Self {
        Self {
            length: None,
            sample_every: 4,
            absorber: true,
            snapshot_every: None,
            snapshot_decimation: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FieldSnapshots<T> {
    pub z: Vec<T>,
    pub x: Vec<T>,
    /// Rows: z planes. Columns: decimated x samples.
    pub amplitude: Array2<T>,
}

#[derive(Debug, Clone)]
pub struct BpmRun<T> {
    pub z: Vec<T>,
    /// `S00(z) = int conj(u(x)) u(x, z) dx / int |u|^2 dx`.
    pub survival: Vec<Complex<T>>,
    /// `int |u(x, z)|^2 dx`.
    pub power: Vec<T>,
    pub snapshots: Option<FieldSnapshots<T>>,
    /// Field at the last plane.
    pub final_field: Vec<Complex<T>>,
}

impl<T: Real> BpmRun<T> {
    pub fn survival_probability(&self) -> Vec<T> {
        self.survival.iter().map(|s| s.norm_sqr()).collect()
    }
}

/// Symmetrized split-step Fourier propagation of the launch field `u0`
/// (half potential step, full diffraction step in the spectral domain, half
/// potential step). The gradient term is flattened inside the absorbing
/// layers. The survival amplitude is the projection on `u0` at every sampled
/// plane.
pub fn bpm_propagate<T: Real>(
    model: &BpmModel<T>,
    grid: &BpmGrid<T>,
    u0: &ModeProfile<T>,
    options: &BpmOptions<T>,
) -> Result<BpmRun<T>> {
    let dn = build_index_profile(model, grid)?;
    let n = grid.num_points;
    if u0.samples.len() != n {
        return Err(invalid("u0", "launch field does not match the grid"));
    }
    let mode_norm = u0.norm();
    if (mode_norm - T::one()).abs() > T::lit(NORM_TOLERANCE) {
        return Err(invalid("u0", format!("launch field norm {} is not 1", mode_norm)));
    }
    if options.sample_every == 0 || options.snapshot_decimation == 0 {
        return Err(invalid("sample_every", "sampling intervals must be positive"));
    }
    let length = options.length.unwrap_or(model.device_length);
    if !(length >= T::zero()) {
        return Err(invalid("length", "must be >= 0"));
    }

    let k = model.wavenumber();
    let interior = grid.interior_half_width();
    let xs = grid.xs();
    let potential: Vec<T> = xs
        .iter()
        .zip(&dn)
        .map(|(&x, &d)| -k * (d + model.gradient * x.max(-interior).min(interior)))
        .collect();
    let reference = potential[n / 2];
    let spread = potential.iter().fold(T::zero(), |m, &v| m.max((v - reference).abs()));
    let phase = spread * grid.dz;
    if phase > T::lit(MAX_PHASE_PER_STEP) {
        return Err(Error::StepTooLarge {
            phase: phase.as_f64(),
            max_dz: (T::lit(MAX_PHASE_PER_STEP) / spread).as_f64(),
        });
    }

    let half = T::lit(0.5) * grid.dz;
    let edge_start = interior;
    let half_step: Vec<Complex<T>> = xs
        .iter()
        .zip(&potential)
        .map(|(&x, &v)| {
            let depth = (x.abs() - edge_start).max(T::zero()) / grid.absorber_width.max(T::min_positive_value());
            let damping = if options.absorber {
                grid.absorber_strength * depth * depth
            } else {
                T::zero()
            };
            cis_neg(v * half) * (-damping * half).exp()
        })
        .collect();

    let inv_n = T::one() / T::from_count(n);
    let dk = T::lit(2.0) * T::PI() / grid.window();
    let diffraction = T::one() / (T::lit(2.0) * k * model.substrate_index);
    let kinetic: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            let kx = dk * T::lit(m);
            cis_neg(diffraction * kx * kx * grid.dz) * inv_n
        })
        .collect();

    let mut planner = FftPlanner::<T>::new();
    let forward: Arc<dyn Fft<T>> = planner.plan_fft_forward(n);
    let inverse: Arc<dyn Fft<T>> = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); forward.get_inplace_scratch_len()];

    let steps = (length / grid.dz).round().to_usize().unwrap_or(0);
    let mut field = u0.samples.clone();
    let mut run = BpmRun {
        z: Vec::new(),
        survival: Vec::new(),
        power: Vec::new(),
        snapshots: options.snapshot_every.map(|_| FieldSnapshots {
            z: Vec::new(),
            x: xs.iter().step_by(options.snapshot_decimation).copied().collect(),
            amplitude: Array2::zeros((0, 0)),
        }),
        final_field: Vec::new(),
    };
    let mut snapshot_rows: Vec<T> = Vec::new();
    let mut record = |run: &mut BpmRun<T>, field: &[Complex<T>], z: T| {
        run.z.push(z);
        run.survival.push(u0.overlap(field) / mode_norm);
        run.power.push(field.iter().map(|c| c.norm_sqr()).sum::<T>() * grid.dx);
        if let (Some(every), Some(snap)) = (options.snapshot_every, run.snapshots.as_mut()) {
            if (run.z.len() - 1).is_multiple_of(every) {
                snap.z.push(z);
                snapshot_rows.extend(field.iter().step_by(options.snapshot_decimation).map(|c| c.norm()));
            }
        }
    };

    record(&mut run, &field, T::zero());
    for step in 1..=steps {
        field.iter_mut().zip(&half_step).for_each(|(f, h)| *f = *f * h);
        forward.process_with_scratch(&mut field, &mut scratch);
        field.iter_mut().zip(&kinetic).for_each(|(f, h)| *f = *f * h);
        inverse.process_with_scratch(&mut field, &mut scratch);
        field.iter_mut().zip(&half_step).for_each(|(f, h)| *f = *f * h);
        if step % options.sample_every == 0 || step == steps {
            record(&mut run, &field, grid.dz * T::from_count(step));
        }
    }

    if let Some(snap) = run.snapshots.as_mut() {
        let cols = snap.x.len();
        snap.amplitude =
            Array2::from_shape_vec((snap.z.len(), cols), snapshot_rows).expect("snapshot rows have equal length");
    }
    run.final_field = field;
    Ok(run)
}
