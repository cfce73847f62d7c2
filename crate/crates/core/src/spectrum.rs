//! Spectral analysis of a defect waveguide side-coupled to a semi-infinite
//! uniform array.
//!
//! In the Bloch-mode picture the array is a bath of oscillators with
//! dispersion `omega(q) = 2 kappa cos q` coupled to the defect through
//! `g(q) = kappa0 sqrt(2/pi) sin q`. Eliminating the bath gives the
//! self-energy
//!
//! ```text
//! Sigma(E) = (kappa0^2 / 2 kappa^2) (E - sgn(E) sqrt(E^2 - 4 kappa^2)),   |E| > 2 kappa
//! ```
//!
//! whose real poles `E = sigma0 + Sigma(E)` outside the band are the bound
//! (surface) states. Their residues `1 / (1 - Sigma'(E))` are the weights of
//! the non-decaying part of the survival amplitude.

use crate::error::{invalid, Error, Result};
use crate::lattice::build_defect_lattice;
use crate::scalar::Real;

/// Residual tolerance on the pole equation for a converged bound state.
const POLE_TOLERANCE: f64 = 1e-12;
/// Relative distance to the band edge below which the golden-rule rate is
/// declared undefined.
const BAND_EDGE_GUARD: f64 = 1e-9;

/// Bloch-mode bath seen by the defect waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochBath<T> {
    pub kappa: T,
    pub kappa0: T,
    pub sigma0: T,
}

impl<T: Real> BlochBath<T> {
    pub fn new(kappa: T, kappa0: T, sigma0: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(invalid("kappa", "bulk hopping rate must be positive and finite"));
        }
        if !(kappa0 >= T::zero()) || !kappa0.is_finite() {
            return Err(invalid("kappa0", "defect coupling must be finite and >= 0"));
        }
        if !sigma0.is_finite() {
            return Err(invalid("sigma0", "detuning must be finite"));
        }
        Ok(Self { kappa, kappa0, sigma0 })
    }

    /// Upper band edge `2 kappa`.
    pub fn band_edge(&self) -> T {
        T::lit(2.0) * self.kappa
    }

    /// Bath dispersion `omega(q) = 2 kappa cos q`.
    pub fn omega(&self, q: T) -> T {
        self.band_edge() * q.cos()
    }

    /// Colored coupling `g(q) = kappa0 sqrt(2/pi) sin q`.
    pub fn coupling(&self, q: T) -> T {
        self.kappa0 * (T::lit(2.0) / T::PI()).sqrt() * q.sin()
    }

    /// Self-energy on the physical sheet, defined outside the band only.
    pub fn self_energy(&self, energy: T) -> Option<T> {
        let edge = self.band_edge();
        if energy.abs() <= edge {
            return None;
        }
        let scale = self.kappa0 * self.kappa0 / (T::lit(2.0) * self.kappa * self.kappa);
        let root = (energy * energy - edge * edge).sqrt();
        Some(scale * (energy - energy.signum() * root))
    }

    /// `d Sigma / dE` outside the band.
    pub fn self_energy_derivative(&self, energy: T) -> Option<T> {
        let edge = self.band_edge();
        if energy.abs() <= edge {
            return None;
        }
        let scale = self.kappa0 * self.kappa0 / (T::lit(2.0) * self.kappa * self.kappa);
        let root = (energy * energy - edge * edge).sqrt();
        Some(scale * (T::one() - energy.abs() / root))
    }

    /// `E - sigma0 - Sigma(E)`; vanishes at a bound state.
    pub fn pole_residual(&self, energy: T) -> Option<T> {
        self.self_energy(energy).map(|s| energy - self.sigma0 - s)
    }
}

/// Weak-coupling decay rate `gamma = 2 kappa0^2 / kappa` of `|S00|^2`.
pub fn markovian_rate<T: Real>(bath: &BlochBath<T>) -> Result<T> {
    if !(bath.kappa > T::zero()) {
        return Err(invalid("kappa", "bulk hopping rate must be positive"));
    }
    Ok(T::lit(2.0) * bath.kappa0 * bath.kappa0 / bath.kappa)
}

/// Fermi golden rule `2 pi g(q0)^2 / |omega'(q0)|` at the resonant Bloch
/// mode `omega(q0) = sigma0`.
pub fn golden_rule_rate<T: Real>(bath: &BlochBath<T>) -> Result<T> {
    let ratio = bath.sigma0 / bath.band_edge();
    if ratio.abs() >= T::one() - T::lit(BAND_EDGE_GUARD) {
        return Err(Error::OutsideBand {
            sigma0: bath.sigma0.as_f64(),
            band_edge: bath.band_edge().as_f64(),
        });
    }
    let q0 = ratio.acos();
    let g = bath.coupling(q0);
    let group_velocity = (bath.band_edge() * q0.sin()).abs();
    Ok(T::lit(2.0) * T::PI() * g * g / group_velocity)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState<T> {
    pub energy: T,
    pub residue: T,
}

/// Out-of-band poles of the defect Green function, sorted by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSet<T> {
    pub states: Vec<BoundState<T>>,
}

impl<T: Real> BoundStateSet<T> {
    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn energies(&self) -> Vec<T> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn residues(&self) -> Vec<T> {
        self.states.iter().map(|s| s.residue).collect()
    }

    pub fn residue_sum(&self) -> T {
        self.states.iter().map(|s| s.residue).sum()
    }
}

/// Locates every bound state by bisection on the monotone pole equation on
/// each side of the band.
pub fn find_bound_states<T: Real>(bath: &BlochBath<T>) -> Result<BoundStateSet<T>> {
    let edge = bath.band_edge();
    let reach = edge
        + bath.sigma0.abs()
        + T::lit(2.0) * bath.kappa0 * bath.kappa0 / bath.kappa
        + T::lit(10.0) * bath.kappa;
    let mut states = Vec::with_capacity(2);
    for side in [-T::one(), T::one()] {
        if let Some(energy) = bracketed_pole(bath, side * edge, side * reach)? {
            let derivative = bath
                .self_energy_derivative(energy)
                .expect("pole lies outside the band");
            states.push(BoundState {
                energy,
                residue: T::one() / (T::one() - derivative),
            });
        }
    }
    states.sort_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energies"));
    Ok(BoundStateSet { states })
}

/// Root of the pole equation between the band edge `inner` and `outer`, if
/// any. `f(E) = E - sigma0 - Sigma(E)` is strictly increasing on each side.
fn bracketed_pole<T: Real>(bath: &BlochBath<T>, inner: T, outer: T) -> Result<Option<T>> {
    let f = |e: T| bath.pole_residual(e).expect("bracket lies outside the band");
    // Step just off the branch point.
    let nudge = inner.abs().max(T::one()) * T::eps() * T::lit(4.0);
    let near = inner + inner.signum() * nudge;
    let (mut lo, mut hi) = if inner > T::zero() { (near, outer) } else { (outer, near) };
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo > T::zero() || f_hi < T::zero() || f_lo == f_hi {
        return Ok(None);
    }
    if f_lo == T::zero() {
        return Ok(Some(lo));
    }
    if f_hi == T::zero() {
        return Ok(Some(hi));
    }
    let mut collapsed = false;
    for _ in 0..400 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            collapsed = true;
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    let residual = f(root).abs();
    let scale = root.abs().max(bath.kappa);
    let tolerance = POLE_TOLERANCE.max(100.0 * T::eps().as_f64()) * scale.as_f64();
    // Next to the branch point the slope is unbounded, so a bracket of
    // adjacent floats can still leave a visible residual.
    if !residual.is_finite() || (!collapsed && residual.as_f64() > tolerance) {
        return Err(Error::RootNotConverged {
            residual: residual.as_f64(),
        });
    }
    Ok(Some(root))
}

/// Long-distance structure of `|S00(z)|^2` implied by the bound states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics<T> {
    /// Time-averaged long-distance survival probability `sum_b r_b^2`.
    pub plateau: T,
    /// Beating period `2 pi / |E_1 - E_2|` when two bound states exist.
    pub revival_period: Option<T>,
    /// Lower and upper envelope `(r_1 - r_2)^2`, `(r_1 + r_2)^2` of the beating.
    pub envelope: Option<(T, T)>,
}

pub fn asymptotics<T: Real>(bound: &BoundStateSet<T>) -> Asymptotics<T> {
    match bound.states.as_slice() {
        [] => Asymptotics {
            plateau: T::zero(),
            revival_period: None,
            envelope: None,
        },
        [only] => Asymptotics {
            plateau: only.residue * only.residue,
            revival_period: None,
            envelope: None,
        },
        [a, b, ..] => Asymptotics {
            plateau: a.residue * a.residue + b.residue * b.residue,
            revival_period: Some(T::lit(2.0) * T::PI() / (a.energy - b.energy).abs()),
            envelope: Some(((a.residue - b.residue).powi(2), (a.residue + b.residue).powi(2))),
        },
    }
}

/// Smallest `kappa0` in `[lo, hi]` at which the bound-state count exceeds its
/// value at `lo`, located by bisection to `tol`.
pub fn coupling_threshold<T: Real>(kappa: T, sigma0: T, lo: T, hi: T, tol: T) -> Result<T> {
    let count = |k0: T| -> Result<usize> { Ok(find_bound_states(&BlochBath::new(kappa, k0, sigma0)?)?.count()) };
    let base = count(lo)?;
    if count(hi)? <= base {
        return Err(invalid("hi", "bound-state count does not change on the interval"));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = T::lit(0.5) * (a + b);
        if count(mid)? > base {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(T::lit(0.5) * (a + b))
}

/// Out-of-band eigenvalue counts `(below, above)` of the truncated
/// `num_sites` chain, by Sturm sequences.
pub fn truncated_out_of_band_count<T: Real>(bath: &BlochBath<T>, num_sites: usize) -> Result<(usize, usize)> {
    let h = build_defect_lattice(bath.kappa0, bath.sigma0, bath.kappa, num_sites)?.hamiltonian();
    let edge = bath.band_edge();
    Ok((h.count_below(-edge), h.count_above(edge)))
}
