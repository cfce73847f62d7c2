use log::warn;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tridiag::SymTridiagonal;

use super::model::{BpmGrid, BpmModel};

/// Eighth-order central stencil for the second derivative, offsets 0..=4.
const STENCIL: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const BANDWIDTH: usize = 4;
const MAX_INVERSE_ITERATIONS: usize = 500;

/// Guided mode of the reference waveguide on the BPM grid.
#[derive(Debug, Clone)]
pub struct ModeProfile<T> {
    pub samples: Vec<Complex<T>>,
    /// Lowest eigenvalue of the transverse operator (negative for a guided
    /// mode); the propagation-constant shift is its negative.
    pub eigenvalue: T,
    /// Bound modes supported by the isolated guide.
    pub bound_modes: usize,
    pub dx: T,
}

impl<T: Real> ModeProfile<T> {
    pub fn propagation_constant(&self) -> T {
        -self.eigenvalue
    }

    /// `int |u|^2 dx`.
    pub fn norm(&self) -> T {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<T>() * self.dx
    }

    /// `int conj(u) f dx`.
    pub fn overlap(&self, field: &[Complex<T>]) -> Complex<T> {
        self.samples
            .iter()
            .zip(field)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (u, f)| acc + u.conj() * f)
            * self.dx
    }
}

/// Banded symmetric positive-definite Cholesky factor, `lower[i][k]` holding
/// `L[i][i - k]`.
struct BandCholesky<T> {
    lower: Vec<[T; BANDWIDTH + 1]>,
}

impl<T: Real> BandCholesky<T> {
    /// Factors `A - shift I` for the banded matrix with diagonal `diag` and
    /// constant off-diagonals `band[k]` at offset `k`. Fails if the shifted
    /// matrix is not positive definite.
    fn factor(diag: &[T], band: &[T; BANDWIDTH + 1], shift: T) -> Option<Self> {
        let n = diag.len();
        let mut lower = vec![[T::zero(); BANDWIDTH + 1]; n];
        for i in 0..n {
            for k in (1..=BANDWIDTH.min(i)).rev() {
                let j = i - k;
                let mut s = band[k];
                for m in 1..=BANDWIDTH {
                    if k + m > BANDWIDTH || m > j {
                        break;
                    }
                    // L[i][j-m] * L[j][j-m]
                    s = s - lower[i][k + m] * lower[j][m];
                }
                lower[i][k] = s / lower[j][0];
            }
            let mut d = diag[i] - shift;
            for l in &lower[i][1..=BANDWIDTH.min(i)] {
                d = d - *l * *l;
            }
            if !(d > T::zero()) {
                return None;
            }
            lower[i][0] = d.sqrt();
        }
        Some(Self { lower })
    }

    fn solve(&self, rhs: &mut [T]) {
        let n = rhs.len();
        for i in 0..n {
            let mut s = rhs[i];
            for k in 1..=BANDWIDTH.min(i) {
                s = s - self.lower[i][k] * rhs[i - k];
            }
            rhs[i] = s / self.lower[i][0];
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in 1..=BANDWIDTH {
                if i + k >= n {
                    break;
                }
                s = s - self.lower[i + k][k] * rhs[i + k];
            }
            rhs[i] = s / self.lower[i][0];
        }
    }
}

fn band_apply<T: Real>(diag: &[T], band: &[T; BANDWIDTH + 1], v: &[T]) -> Vec<T> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut acc = diag[i] * v[i];
            for k in 1..=BANDWIDTH {
                if i >= k {
                    acc = acc + band[k] * v[i - k];
                }
                if i + k < n {
                    acc = acc + band[k] * v[i + k];
                }
            }
            acc
        })
        .collect()
}

/// Fundamental mode of the isolated reference guide (array channels removed,
/// no gradient) for the transverse operator `-(1/2 k n_s) d^2/dx^2 - k dn_W(x)`.
///
/// A second-order finite-difference Sturm count gives the number of bound
/// modes and a starting shift; the eigenpair is then refined by shifted
/// inverse iteration on the eighth-order finite-difference operator.
pub fn solve_fundamental_mode<T: Real>(model: &BpmModel<T>, grid: &BpmGrid<T>) -> Result<ModeProfile<T>> {
    model.validate()?;
    grid.validate(model)?;
    let k = model.wavenumber();
    let s = T::one() / (T::lit(2.0) * k * model.substrate_index * grid.dx * grid.dx);
    let xs = grid.xs();
    let potential: Vec<T> = xs.iter().map(|&x| -k * model.channel(x, T::zero())).collect();

    let low_order = SymTridiagonal::new(
        potential.iter().map(|&v| T::lit(2.0) * s + v).collect(),
        vec![-s; xs.len() - 1],
    )?;
    let bound_modes = low_order.count_below(T::zero());
    if bound_modes == 0 {
        return Err(Error::NoBoundMode);
    }
    if bound_modes > 1 {
        warn!("isolated guide supports {bound_modes} bound modes; launching the fundamental");
    }
    let e0 = low_order.kth_eigenvalue(0);
    let e1 = low_order.kth_eigenvalue(1);

    let diag: Vec<T> = potential.iter().map(|&v| v - s * T::lit(STENCIL[0])).collect();
    let mut band = [T::zero(); BANDWIDTH + 1];
    for (b, c) in band.iter_mut().zip(STENCIL).skip(1) {
        *b = -s * T::lit(c);
    }

    let mut gap = T::lit(0.25) * (e1 - e0).min(e0.abs());
    let factor = loop {
        if let Some(f) = BandCholesky::factor(&diag, &band, e0 - gap) {
            break f;
        }
        gap = gap * T::lit(2.0);
        if !gap.is_finite() {
            return Err(Error::EigenFailure);
        }
    };

    let width = model.waveguide_width;
    let mut v: Vec<T> = xs.iter().map(|&x| (-(x / width).powi(2)).exp()).collect();
    let mut eigenvalue = e0;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        factor.solve(&mut v);
        let scale = v.iter().map(|&a| a * a).sum::<T>().sqrt();
        v.iter_mut().for_each(|a| *a = *a / scale);
        let av = band_apply(&diag, &band, &v);
        let rayleigh: T = v.iter().zip(&av).map(|(&a, &b)| a * b).sum();
        let residual = av
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - rayleigh * b).powi(2))
            .sum::<T>()
            .sqrt();
        let converged = (rayleigh - eigenvalue).abs() <= T::lit(4.0) * T::eps() * rayleigh.abs()
            && residual <= T::lit(1e-10).max(T::lit(100.0) * T::eps()) * rayleigh.abs();
        eigenvalue = rayleigh;
        if converged {
            break;
        }
    }

    let centre = grid.num_points / 2;
    if v[centre] < T::zero() {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    let norm = (v.iter().map(|&a| a * a).sum::<T>() * grid.dx).sqrt();
    let peak = v.iter().fold(T::zero(), |m, &a| m.max(a)) / norm;
    let samples: Vec<Complex<T>> = v.iter().map(|&a| Complex::from(a / norm)).collect();
    if samples.iter().any(|c| c.re < -T::lit(1e-8) * peak) {
        warn!("fundamental mode has a sign change; the grid may be under-resolved");
    }
    Ok(ModeProfile {
        samples,
        eigenvalue,
        bound_modes,
        dx: grid.dx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn band_cholesky_solves_dense_system() {
        let diag = vec![6.0; 12];
        let band = [0.0, -1.0, 0.5, -0.2, 0.1];
        let f = BandCholesky::factor(&diag, &band, 0.3).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let shifted: Vec<f64> = diag.iter().map(|d| d - 0.3).collect();
        let mut b = band_apply(&shifted, &band, &x);
        f.solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-13);
        }
        assert!(BandCholesky::factor(&diag, &band, 10.0).is_none());
    }

    #[test]
    fn mode_is_normalized_even_and_node_free() {
        let model = BpmModel::<f64>::lithium_niobate();
        let grid = BpmGrid::default_for(&model);
        let mode = solve_fundamental_mode(&model, &grid).unwrap();
        assert_abs_diff_eq!(mode.norm(), 1.0, epsilon = 1e-10);
        let c = grid.num_points / 2;
        for k in 1..200 {
            assert_abs_diff_eq!(mode.samples[c + k].re, mode.samples[c - k].re, epsilon = 1e-9);
        }
        let peak = mode.samples[c].re;
        assert!(mode.samples.iter().all(|u| u.re > -1e-8 * peak && u.im == 0.0));
        assert!(mode.eigenvalue < 0.0);
    }

    #[test]
    fn too_weak_guide_reports_no_mode() {
        // A 1-D well always binds; a vanishing contrast on a finite window with
        // Dirichlet walls does not.
        let model = BpmModel::<f64> {
            peak_contrast: 1e-12,
            ..BpmModel::lithium_niobate()
        };
        let grid = BpmGrid::new(13.0, 256, 16, 0.25);
        assert_eq!(solve_fundamental_mode(&model, &grid).unwrap_err(), Error::NoBoundMode);
    }
}
