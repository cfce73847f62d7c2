use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

use super::UM_PER_CM;

/// Physical parameters of the array. Lengths in micrometres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmModel<T> {
    pub wavelength: T,
    pub substrate_index: T,
    /// Lattice period `a`.
    pub period: T,
    pub waveguide_width: T,
    /// Peak index contrast of each channel.
    pub peak_contrast: T,
    /// Transverse index gradient `F` per micrometre.
    pub gradient: T,
    pub num_guides: usize,
    pub device_length: T,
}

impl<T: Real> BpmModel<T> {
    /// Lithium-niobate array at 1440 nm: n_s = 2.1381, a = 13 um, w = 11.5 um,
    /// 5 cm long, peak contrast 3e-3, 49 guides, no gradient.
    pub fn lithium_niobate() -> Self {
        Self {
            wavelength: T::lit(1.44),
            substrate_index: T::lit(2.1381),
            period: T::lit(13.0),
            waveguide_width: T::lit(11.5),
            peak_contrast: T::lit(3.0e-3),
            gradient: T::zero(),
            num_guides: 49,
            device_length: T::lit(5.0 * UM_PER_CM),
        }
    }

    pub fn with_gradient_per_cm(mut self, gradient: T) -> Self {
        self.gradient = gradient / T::lit(UM_PER_CM);
        self
    }

    pub fn gradient_per_cm(&self) -> T {
        self.gradient * T::lit(UM_PER_CM)
    }

    /// Single reference guide without gradient.
    pub fn isolated(mut self) -> Self {
        self.num_guides = 1;
        self.gradient = T::zero();
        self
    }

    /// Vacuum wavenumber `k = 2 pi / lambda`.
    pub fn wavenumber(&self) -> T {
        T::lit(2.0) * T::PI() / self.wavelength
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be positive and finite"))
            }
        };
        positive("wavelength", self.wavelength)?;
        positive("substrate_index", self.substrate_index)?;
        positive("period", self.period)?;
        positive("waveguide_width", self.waveguide_width)?;
        positive("device_length", self.device_length)?;
        positive("peak_contrast", self.peak_contrast)?;
        if self.waveguide_width >= self.period {
            return Err(invalid("waveguide_width", "must be smaller than the period"));
        }
        if !(self.gradient >= T::zero()) || !self.gradient.is_finite() {
            return Err(invalid("gradient", "must be finite and >= 0"));
        }
        if self.num_guides == 0 {
            return Err(invalid("num_guides", "need at least the reference guide"));
        }
        Ok(())
    }

    /// Channel centres; the reference guide sits at x = 0.
    pub fn guide_centres(&self) -> Vec<T> {
        let n = self.num_guides as i64;
        let first = -(n / 2);
        (first..first + n).map(|j| self.period * T::lit(j as f64)).collect()
    }

    /// Index contrast of a single channel centred at `centre`: flat-topped
    /// super-Gaussian `exp(-(2 (x - centre) / w)^8)`.
    pub fn channel(&self, x: T, centre: T) -> T {
        let s = T::lit(2.0) * (x - centre) / self.waveguide_width;
        self.peak_contrast * (-s.powi(8)).exp()
    }
}

/// Bloch-oscillation period `z_B = lambda / (F a)`.
pub fn bloch_period<T: Real>(model: &BpmModel<T>) -> Result<T> {
    if model.gradient == T::zero() {
        return Err(Error::NoBlochPeriod);
    }
    if !(model.gradient > T::zero()) {
        return Err(invalid("gradient", "must be positive"));
    }
    Ok(model.wavelength / (model.gradient * model.period))
}

/// Transverse and longitudinal discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmGrid<T> {
    /// Number of transverse samples (power of two).
    pub num_points: usize,
    pub dx: T,
    pub dz: T,
    /// Width of the absorbing layer on each side.
    pub absorber_width: T,
    /// Peak amplitude damping rate inside the layer, per micrometre.
    pub absorber_strength: T,
}

impl<T: Real> BpmGrid<T> {
    /// Grid with `points_per_period` samples per lattice period and a 10 %
    /// absorbing layer on each side.
    pub fn new(period: T, num_points: usize, points_per_period: usize, dz: T) -> Self {
        let dx = period / T::from_count(points_per_period);
        let window = dx * T::from_count(num_points);
        Self {
            num_points,
            dx,
            dz,
            absorber_width: T::lit(0.1) * window,
            absorber_strength: T::lit(0.02),
        }
    }

    /// 2048 points, 32 per period, dz = 0.25 um.
    pub fn default_for(model: &BpmModel<T>) -> Self {
        Self::new(model.period, 2048, 32, T::lit(0.25))
    }

    pub fn x_min(&self) -> T {
        -self.dx * T::from_count(self.num_points / 2)
    }

    pub fn x_max(&self) -> T {
        self.x(self.num_points - 1)
    }

    pub fn x(&self, i: usize) -> T {
        self.x_min() + self.dx * T::from_count(i)
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.num_points).map(|i| self.x(i)).collect()
    }

    pub fn window(&self) -> T {
        self.dx * T::from_count(self.num_points)
    }

    /// Half-width of the absorber-free interior.
    pub fn interior_half_width(&self) -> T {
        (-self.x_min()).min(self.x_max()) - self.absorber_width
    }

    /// Same window sampled twice as finely.
    pub fn refined(&self) -> Self {
        Self {
            num_points: self.num_points * 2,
            dx: self.dx * T::lit(0.5),
            ..*self
        }
    }

    pub fn validate(&self, model: &BpmModel<T>) -> Result<()> {
        if !self.num_points.is_power_of_two() || self.num_points < 16 {
            return Err(invalid("num_points", "must be a power of two >= 16"));
        }
        if !(self.dx > T::zero()) || !(self.dz > T::zero()) {
            return Err(invalid("dx", "grid steps must be positive"));
        }
        if model.period / self.dx < T::lit(16.0) - T::lit(1e-9) {
            return Err(invalid("dx", "need at least 16 samples per lattice period"));
        }
        if !(self.absorber_width >= T::zero()) || self.absorber_width >= T::lit(0.15) * self.window() {
            return Err(invalid("absorber_width", "absorbing layer must occupy < 15% of the window per side"));
        }
        if !(self.absorber_strength >= T::zero()) {
            return Err(invalid("absorber_strength", "must be >= 0"));
        }
        Ok(())
    }
}

/// Index modulation `dn(x)` of the array sampled on the grid. The gradient
/// term is applied by the propagator, not baked in here.
pub fn build_index_profile<T: Real>(model: &BpmModel<T>, grid: &BpmGrid<T>) -> Result<Vec<T>> {
    model.validate()?;
    grid.validate(model)?;
    let centres = model.guide_centres();
    let reach = centres.iter().fold(T::zero(), |acc, c| acc.max(c.abs())) + T::lit(0.5) * model.waveguide_width;
    if reach > grid.interior_half_width() {
        return Err(Error::GridTooNarrow {
            reason: format!(
                "{} guides reach |x| = {:.1} um but the absorber-free interior ends at {:.1} um",
                model.num_guides,
                reach.as_f64(),
                grid.interior_half_width().as_f64()
            ),
        });
    }
    Ok(grid
        .xs()
        .into_iter()
        .map(|x| centres.iter().map(|&c| model.channel(x, c)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn profile_shape() {
        let model = BpmModel::<f64>::lithium_niobate();
        let grid = BpmGrid::default_for(&model);
        let dn = build_index_profile(&model, &grid).unwrap();
        let centre = grid.num_points / 2;
        assert_abs_diff_eq!(dn[centre], model.peak_contrast, epsilon = 1e-12 * model.peak_contrast);
        // Midway between channels both neighbours contribute exp(-(a/w)^8).
        let mid = centre + 16;
        let expected = 2.0 * model.peak_contrast * (-(13.0f64 / 11.5).powi(8)).exp();
        assert_abs_diff_eq!(dn[mid], expected, epsilon = 1e-9 * model.peak_contrast);
        assert!(dn[mid] < dn[centre]);
        // Even about x = 0 for an odd guide count.
        for k in 1..600 {
            assert_abs_diff_eq!(dn[centre + k], dn[centre - k], epsilon = 1e-18);
        }
    }

    #[test]
    fn narrow_window_is_rejected() {
        let model = BpmModel::<f64> {
            num_guides: 101,
            ..BpmModel::lithium_niobate()
        };
        let grid = BpmGrid::default_for(&model);
        assert!(matches!(build_index_profile(&model, &grid), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn grid_constraints() {
        let model = BpmModel::<f64>::lithium_niobate();
        assert!(BpmGrid::new(13.0, 2048, 8, 0.25).validate(&model).is_err());
        assert!(BpmGrid::new(13.0, 2000, 32, 0.25).validate(&model).is_err());
        let mut g = BpmGrid::new(13.0, 2048, 32, 0.25);
        g.absorber_width = 0.2 * g.window();
        assert!(g.validate(&model).is_err());
    }

    #[test]
    fn bloch_period_scaling() {
        let model = BpmModel::<f64>::lithium_niobate().with_gradient_per_cm(3.61);
        let zb_cm = bloch_period(&model).unwrap() / UM_PER_CM;
        assert_abs_diff_eq!(zb_cm, 1.44e-4 / (3.61 * 13e-4), epsilon = 1e-15);
        assert_abs_diff_eq!(zb_cm, 3.068e-2, epsilon = 5e-5);
        let doubled = model.with_gradient_per_cm(7.22);
        assert_abs_diff_eq!(bloch_period(&doubled).unwrap(), 0.5 * bloch_period(&model).unwrap(), epsilon = 1e-12);
        let scaled = BpmModel {
            wavelength: model.wavelength * 3.0,
            gradient: model.gradient * 3.0,
            period: model.period * 3.0,
            ..model
        };
        assert_abs_diff_eq!(
            bloch_period(&scaled).unwrap(),
            bloch_period(&model).unwrap() / 3.0,
            epsilon = 1e-9
        );
        assert_eq!(bloch_period(&model.isolated()), Err(Error::NoBlochPeriod));
    }
}
