//! Revival detection on sampled survival-probability traces.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Default minimum prominence of a revival, relative to the most prominent
/// local maximum. Rejects the secondary maxima of a breathing pattern.
pub const DEFAULT_RELATIVE_PROMINENCE: f64 = 0.25;

/// A local maximum refined by parabolic interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub index: usize,
    pub z: T,
    pub value: T,
    pub prominence: T,
}

/// Interior local maxima of `values` with their topographic prominence.
fn local_maxima<T: Real>(values: &[T]) -> Vec<(usize, T)> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // Walk across a flat top.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let peak = (i + j) / 2;
                out.push((peak, prominence(values, peak)));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence<T: Real>(values: &[T], peak: usize) -> T {
    let height = values[peak];
    let mut left_min = height;
    for &v in values[..peak].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &values[peak + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

fn refine<T: Real>(z: &[T], values: &[T], i: usize) -> (T, T) {
    if i == 0 || i + 1 >= values.len() {
        return (z[i], values[i]);
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - T::lit(2.0) * b + c;
    if denom >= T::zero() {
        return (z[i], b);
    }
    let shift = T::lit(0.5) * (a - c) / denom;
    let h = T::lit(0.5) * (z[i + 1] - z[i - 1]);
    (z[i] + shift * h, b - T::lit(0.25) * (a - c) * shift)
}

/// Local maxima whose prominence is at least `relative_prominence` times the
/// largest prominence found.
pub fn detect_revivals<T: Real>(z: &[T], values: &[T], relative_prominence: T) -> Result<Vec<Peak<T>>> {
    if z.len() != values.len() {
        return Err(invalid("values", "trace and z grid lengths differ"));
    }
    let maxima = local_maxima(values);
    let largest = maxima.iter().fold(T::zero(), |m, &(_, p)| m.max(p));
    let threshold = relative_prominence * largest;
    Ok(maxima
        .into_iter()
        .filter(|&(_, p)| p > T::zero() && p >= threshold)
        .map(|(index, prominence)| {
            let (zp, value) = refine(z, values, index);
            Peak {
                index,
                z: zp,
                value,
                prominence,
            }
        })
        .collect())
}

/// Mean spacing between consecutive peaks.
pub fn mean_spacing<T: Real>(peaks: &[Peak<T>]) -> Option<T> {
    match peaks {
        [first, .., last] => Some((last.z - first.z) / T::from_count(peaks.len() - 1)),
        _ => None,
    }
}

/// Revival maxima of a survival trace and their geometric decay per cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenerDamping<T> {
    pub peak_z: Vec<T>,
    pub peak_values: Vec<T>,
    /// `(last / first)^(1 / (count - 1))`; 1 means lossless revivals.
    pub ratio: T,
}

impl<T: Real> ZenerDamping<T> {
    /// Fractional loss per cycle, `1 - ratio`.
    pub fn loss_per_cycle(&self) -> T {
        T::one() - self.ratio
    }
}

/// Per-cycle damping of the revivals of `|S00(z)|^2`.
///
/// Without `probe_period`, revivals are the prominent local maxima (see
/// [`detect_revivals`]). With a period `p`, the revival of cycle `m >= 1` is
/// the maximum over `[(m - 1/2) p, (m + 1/2) p]`, which also handles flat
/// traces that have no local maxima.
pub fn zener_damping<T: Real>(z: &[T], probability: &[T], probe_period: Option<T>) -> Result<ZenerDamping<T>> {
    if z.len() != probability.len() {
        return Err(invalid("probability", "trace and z grid lengths differ"));
    }
    let (peak_z, peak_values): (Vec<T>, Vec<T>) = match probe_period {
        None => detect_revivals(z, probability, T::lit(DEFAULT_RELATIVE_PROMINENCE))?
            .into_iter()
            .map(|p| (p.z, p.value))
            .unzip(),
        Some(period) => {
            if !(period > T::zero()) {
                return Err(invalid("probe_period", "must be positive"));
            }
            let z_end = *z.last().unwrap_or(&T::zero());
            let half = T::lit(0.5) * period;
            let mut out = (Vec::new(), Vec::new());
            let mut m = 1;
            while T::from_count(m) * period + half <= z_end {
                let centre = T::from_count(m) * period;
                let best = z
                    .iter()
                    .zip(probability)
                    .filter(|(zz, _)| (**zz - centre).abs() <= half)
                    .fold(None, |acc: Option<(T, T)>, (&zz, &p)| match acc {
                        Some((_, bp)) if bp >= p => acc,
                        _ => Some((zz, p)),
                    });
                if let Some((zz, p)) = best {
                    out.0.push(zz);
                    out.1.push(p);
                }
                m += 1;
            }
            out
        }
    };
    if peak_values.len() < 2 {
        return Err(Error::TooFewPeaks {
            found: peak_values.len(),
        });
    }
    let first = peak_values[0];
    let last = *peak_values.last().expect("at least two peaks");
    let cycles = T::from_count(peak_values.len() - 1);
    let ratio = (last / first).powf(T::one() / cycles);
    Ok(ZenerDamping {
        peak_z,
        peak_values,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn damped_cosine(period: f64, decay: f64, n: usize, dz: f64) -> (Vec<f64>, Vec<f64>) {
        let z: Vec<f64> = (0..n).map(|i| i as f64 * dz).collect();
        let p = z
            .iter()
            .map(|&x| (-decay * x).exp() * (0.5 + 0.5 * (2.0 * std::f64::consts::PI * x / period).cos()))
            .collect();
        (z, p)
    }

    #[test]
    fn recovers_spacing_and_ratio() {
        let (z, p) = damped_cosine(3.0, 0.1, 4000, 0.01);
        let peaks = detect_revivals(&z, &p, 0.01).unwrap();
        assert!(peaks.len() >= 10);
        assert_abs_diff_eq!(mean_spacing(&peaks).unwrap(), 3.0, epsilon = 2e-3);
        let d = zener_damping(&z, &p, None).unwrap();
        assert_abs_diff_eq!(d.ratio, (-0.3f64).exp(), epsilon = 1e-3);
    }

    #[test]
    fn small_ripples_are_ignored() {
        let z: Vec<f64> = (0..2000).map(|i| i as f64 * 0.01).collect();
        let p: Vec<f64> = z
            .iter()
            .map(|&x| (x * 2.0).cos().powi(2) + 1e-4 * (x * 40.0).sin())
            .collect();
        let peaks = detect_revivals(&z, &p, 0.01).unwrap();
        assert_abs_diff_eq!(mean_spacing(&peaks).unwrap(), std::f64::consts::FRAC_PI_2, epsilon = 5e-3);
    }

    #[test]
    fn breathing_subpeaks_are_not_revivals() {
        // Bloch breathing of a lattice site, |J0(A sin(pi z / T))|^2, has
        // secondary maxima between the full revivals at multiples of T.
        let z: Vec<f64> = (0..6000).map(|i| i as f64 * 0.001).collect();
        let p: Vec<f64> = z
            .iter()
            .map(|&x| crate::special::bessel_j(0, 4.0 * (std::f64::consts::PI * x / 1.5).sin()).powi(2))
            .collect();
        let all = detect_revivals(&z, &p, 0.01).unwrap();
        let main = detect_revivals(&z, &p, DEFAULT_RELATIVE_PROMINENCE).unwrap();
        assert!(all.len() > main.len());
        assert_eq!(main.len(), 3);
        assert_abs_diff_eq!(mean_spacing(&main).unwrap(), 1.5, epsilon = 1e-4);
    }

    #[test]
    fn flat_trace_with_probe_period() {
        let z: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let p = vec![1.0; 1000];
        assert!(matches!(zener_damping(&z, &p, None), Err(Error::TooFewPeaks { found: 0 })));
        let d = zener_damping(&z, &p, Some(2.0)).unwrap();
        assert_eq!(d.ratio, 1.0);
        assert_eq!(d.peak_values.len(), 4);
    }
}
