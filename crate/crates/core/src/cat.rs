//! Decoherence observables of a two-component cat state launched into the
//! reference waveguide.
//!
//! Everything here depends on the lattice only through the single-photon
//! survival amplitude `S00(z)`: the coherent components shrink to
//! `alpha(z) = alpha0 S00(z)`, `beta(z) = beta0 S00(z)`, and their
//! interference is damped by
//!
//! ```text
//! G(z) = exp[-1/2 (1 - |S00|^2) (|alpha0|^2 + |beta0|^2 - 2 conj(alpha0) beta0)]
//! ```
//!
//! For the balanced cat `beta0 = -alpha0` this is `exp[-2 <n> (1 - |S00|^2)]`.

use log::warn;
use ndarray::Array2;
use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::special::{ln_factorial, poisson};

/// Allowed excess of `|S00|` over one before the trace is rejected.
pub const SURVIVAL_TOLERANCE: f64 = 1e-8;
/// Largest Fock-space norm deficit accepted for a truncated density matrix.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;
/// Smallest usable mixture probability for the coherence estimator.
pub const MIN_MIXTURE_PROBABILITY: f64 = 1e-30;

/// Input state `(|alpha0> + |beta0>) / sqrt(N)` of the reference waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatState<T> {
    pub alpha0: Complex<T>,
    pub beta0: Complex<T>,
    /// `N = 2 + 2 Re <alpha0|beta0>`.
    pub normalization: T,
    /// `<n> = |alpha0|^2`.
    pub mean_photons: T,
}

/// `<a|b>` for coherent states.
pub fn coherent_overlap<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    (a.conj() * b - Complex::from(half * (a.norm_sqr() + b.norm_sqr()))).exp()
}

impl<T: Real> CatState<T> {
    pub fn new(alpha0: Complex<T>, beta0: Complex<T>) -> Result<Self> {
        if !(alpha0.re.is_finite() && alpha0.im.is_finite() && beta0.re.is_finite() && beta0.im.is_finite()) {
            return Err(invalid("alpha0", "coherent amplitudes must be finite"));
        }
        let normalization = T::lit(2.0) + T::lit(2.0) * coherent_overlap(alpha0, beta0).re;
        if !(normalization > T::zero()) {
            return Err(invalid("beta0", "cat state has zero norm"));
        }
        Ok(Self {
            alpha0,
            beta0,
            normalization,
            mean_photons: alpha0.norm_sqr(),
        })
    }

    /// Balanced cat `beta0 = -alpha0`.
    pub fn balanced(alpha0: Complex<T>) -> Result<Self> {
        let mut cat = Self::new(alpha0, -alpha0)?;
        // Exact form of the balanced normalization.
        cat.normalization = T::lit(2.0) + T::lit(2.0) * (-T::lit(2.0) * alpha0.norm_sqr()).exp();
        Ok(cat)
    }

    /// Balanced cat with real `alpha0 = sqrt(<n>)`.
    pub fn from_mean_photons(mean_photons: T) -> Result<Self> {
        if !(mean_photons >= T::zero()) {
            return Err(invalid("mean_photons", "must be >= 0"));
        }
        Self::balanced(Complex::new(mean_photons.sqrt(), T::zero()))
    }

    pub fn is_balanced(&self) -> bool {
        let scale = self.alpha0.norm().max(T::one());
        (self.alpha0 + self.beta0).norm() <= T::lit(1e-12) * scale
    }

    /// `|alpha0|^2 + |beta0|^2 - 2 conj(alpha0) beta0`.
    fn decoherence_exponent(&self) -> Complex<T> {
        Complex::from(self.alpha0.norm_sqr() + self.beta0.norm_sqr()) - self.alpha0.conj() * self.beta0 * T::lit(2.0)
    }

    /// Coherence factor for a single survival amplitude.
    pub fn coherence(&self, survival: Complex<T>) -> Complex<T> {
        let loss = T::one() - survival.norm_sqr();
        (self.decoherence_exponent() * (-T::lit(0.5) * loss)).exp()
    }
}

/// `G(z)` and the decayed amplitudes along a survival trace.
#[derive(Debug, Clone)]
pub struct CoherenceTrace<T> {
    pub z: Vec<T>,
    pub survival_probability: Vec<T>,
    /// Coherence factor; real and in `(0, 1]` for a balanced cat.
    pub g: Vec<Complex<T>>,
    pub alpha_z: Vec<Complex<T>>,
    pub beta_z: Vec<Complex<T>>,
    /// `|G|` for the exponential law `|S00|^2 = exp(-gamma z)`.
    pub markovian_reference: Option<Vec<T>>,
}

impl<T: Real> CoherenceTrace<T> {
    pub fn g_modulus(&self) -> Vec<T> {
        self.g.iter().map(|g| g.norm()).collect()
    }

    pub fn ln_g_modulus(&self) -> Vec<T> {
        self.g.iter().map(|g| g.norm().ln()).collect()
    }

    /// Attaches the Markovian comparison curve for decay rate `gamma`.
    pub fn with_markovian_reference(mut self, cat: &CatState<T>, gamma: T) -> Self {
        let curve = self
            .z
            .iter()
            .map(|&z| {
                let s = Complex::from((-T::lit(0.5) * gamma * z).exp());
                cat.coherence(s).norm()
            })
            .collect();
        self.markovian_reference = Some(curve);
        self
    }

    /// First distance at which `|G|` drops to `level`, by linear interpolation.
    pub fn crossing(&self, level: T) -> Option<T> {
        let g = self.g_modulus();
        g.windows(2).enumerate().find_map(|(i, w)| {
            if w[0] >= level && w[1] < level {
                let t = (w[0] - level) / (w[0] - w[1]);
                Some(self.z[i] + t * (self.z[i + 1] - self.z[i]))
            } else {
                None
            }
        })
    }
}

/// Evaluates the coherence factor on every sample of a survival trace.
pub fn coherence_factor<T: Real>(cat: &CatState<T>, z: &[T], survival: &[Complex<T>]) -> Result<CoherenceTrace<T>> {
    if z.len() != survival.len() {
        return Err(invalid("survival", "trace and z grid lengths differ"));
    }
    let limit = T::one() + T::lit(SURVIVAL_TOLERANCE);
    if let Some((index, s)) = survival.iter().enumerate().find(|(_, s)| !(s.norm() <= limit)) {
        return Err(Error::SurvivalExceedsUnity {
            value: s.norm().as_f64(),
            index,
        });
    }
    Ok(CoherenceTrace {
        z: z.to_vec(),
        survival_probability: survival.iter().map(|s| s.norm_sqr()).collect(),
        g: survival.iter().map(|&s| cat.coherence(s)).collect(),
        alpha_z: survival.iter().map(|&s| cat.alpha0 * s).collect(),
        beta_z: survival.iter().map(|&s| cat.beta0 * s).collect(),
        markovian_reference: None,
    })
}

/// Fock amplitudes `<n|a> = e^{-|a|^2/2} a^n / sqrt(n!)`, `n = 0..=n_max`.
pub fn coherent_amplitudes<T: Real>(a: Complex<T>, n_max: usize) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex::from((-T::lit(0.5) * a.norm_sqr()).exp());
    out.push(c);
    for n in 1..=n_max {
        c = c * a / T::from_count(n).sqrt();
        out.push(c);
    }
    out
}

/// Default Fock cutoff `ceil(|a|^2 + 8|a| + 20)`.
pub fn default_n_max<T: Real>(amplitude: T) -> usize {
    let a = amplitude.abs();
    (a * a + T::lit(8.0) * a + T::lit(20.0)).ceil().to_usize().unwrap_or(20)
}

/// Reduced state of the reference waveguide in a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct ReducedCatState<T> {
    pub rho: Array2<Complex<T>>,
    pub n_max: usize,
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
    pub coherence: Complex<T>,
    pub normalization: T,
}

impl<T: Real> ReducedCatState<T> {
    pub fn trace(&self) -> T {
        (0..=self.n_max).map(|n| self.rho[[n, n]].re).sum()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..=self.n_max).map(|n| self.rho[[n, n]].re).collect()
    }

    /// `<(-1)^n>`.
    pub fn parity(&self) -> T {
        (0..=self.n_max)
            .map(|n| if n % 2 == 0 { self.rho[[n, n]].re } else { -self.rho[[n, n]].re })
            .sum()
    }

    pub fn purity(&self) -> T {
        self.rho.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The two non-zero eigenvalues, ascending. The state lives in
    /// `span{|alpha>, |beta>}`, so they are those of the 2x2 product of the
    /// coefficient matrix with the Gram matrix.
    pub fn nonzero_eigenvalues(&self) -> [T; 2] {
        let inv_n = T::one() / self.normalization;
        let ca = coherent_amplitudes(self.alpha, self.n_max);
        let cb = coherent_amplitudes(self.beta, self.n_max);
        let dot = |u: &[Complex<T>], v: &[Complex<T>]| {
            u.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
        };
        let gram = [[dot(&ca, &ca), dot(&ca, &cb)], [dot(&cb, &ca), dot(&cb, &cb)]];
        let one = Complex::from(inv_n);
        let coeff = [[one, self.coherence * inv_n], [self.coherence.conj() * inv_n, one]];
        let mut prod = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                prod[i][j] = coeff[i][0] * gram[0][j] + coeff[i][1] * gram[1][j];
            }
        }
        let tr = (prod[0][0] + prod[1][1]).re;
        let det = (prod[0][0] * prod[1][1] - prod[0][1] * prod[1][0]).re;
        let disc = (tr * tr - T::lit(4.0) * det).max(T::zero()).sqrt();
        [T::lit(0.5) * (tr - disc), T::lit(0.5) * (tr + disc)]
    }
}

/// Reduced density matrix
/// `(1/N) [|a><a| + |b><b| + G |a><b| + G* |b><a|]` with `a = alpha0 S00`,
/// `b = beta0 S00`, in the Fock basis `0..=n_max`.
pub fn reduced_density_matrix<T: Real>(
    cat: &CatState<T>,
    survival: Complex<T>,
    coherence: Complex<T>,
    n_max: usize,
) -> Result<ReducedCatState<T>> {
    let alpha = cat.alpha0 * survival;
    let beta = cat.beta0 * survival;
    let ca = coherent_amplitudes(alpha, n_max);
    let cb = coherent_amplitudes(beta, n_max);
    let deficit = |c: &[Complex<T>]| T::one() - c.iter().map(|x| x.norm_sqr()).sum::<T>();
    let worst = deficit(&ca).max(deficit(&cb));
    if worst.as_f64() > TRUNCATION_TOLERANCE {
        return Err(Error::FockTruncation {
            n_max,
            deficit: worst.as_f64(),
        });
    }
    let inv_n = T::one() / cat.normalization;
    let dim = n_max + 1;
    let g = coherence;
    let mut rho = Array2::zeros((dim, dim));
    for m in 0..dim {
        for n in m..dim {
            let entry = (ca[m] * ca[n].conj()
                + cb[m] * cb[n].conj()
                + g * ca[m] * cb[n].conj()
                + g.conj() * cb[m] * ca[n].conj())
                * inv_n;
            // Mirror so the matrix is Hermitian to the last bit.
            if m == n {
                rho[[m, m]] = Complex::from(entry.re);
            } else {
                rho[[m, n]] = entry;
                rho[[n, m]] = entry.conj();
            }
        }
    }
    Ok(ReducedCatState {
        rho,
        n_max,
        alpha,
        beta,
        coherence,
        normalization: cat.normalization,
    })
}

/// Poisson statistics of a single coherent state of mean `|a|^2`, the photon
/// distribution of the incoherent mixture.
pub fn mixture_probability<T: Real>(amplitude: Complex<T>, n: usize) -> T {
    poisson(amplitude.norm_sqr(), n)
}

/// `P_n = (2/N) e^{-|a|^2} |a|^{2n} / n! [1 + (-1)^n Re G]` for a balanced cat,
/// the diagonal of the reduced density matrix.
pub fn photon_number_distribution<T: Real>(
    cat: &CatState<T>,
    survival: Complex<T>,
    coherence: Complex<T>,
    n: usize,
) -> Result<T> {
    if !cat.is_balanced() {
        return Err(Error::UnbalancedCat);
    }
    let alpha = cat.alpha0 * survival;
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    Ok(T::lit(2.0) / cat.normalization * mixture_probability(alpha, n) * (T::one() + sign * coherence.re))
}

/// Coherence estimate `P_n / P_n^mix - 1` from photon counting at even `n`.
pub fn estimate_g_from_counts<T: Real>(n: usize, p_n: T, p_n_mix: T) -> Result<T> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddPhotonNumber { n });
    }
    if !(p_n_mix >= T::lit(MIN_MIXTURE_PROBABILITY)) {
        return Err(Error::UnusablePhotonNumber { value: p_n_mix.as_f64() });
    }
    Ok(p_n / p_n_mix - T::one())
}

/// Wigner function on a rectangular quadrature grid.
#[derive(Debug, Clone)]
pub struct WignerMap<T> {
    pub x: Vec<T>,
    pub p: Vec<T>,
    /// `values[[i, j]] = W(x[i], p[j])`.
    pub values: Array2<T>,
    /// False when the window does not cover both lobes with a margin of
    /// four vacuum widths.
    pub covers_state: bool,
}

impl<T: Real> WignerMap<T> {
    /// Trapezoidal `int int W dx dp`.
    pub fn integral(&self) -> T {
        let wx = trapezoid_weights(&self.x);
        let wp = trapezoid_weights(&self.p);
        let mut acc = T::zero();
        for (i, &a) in wx.iter().enumerate() {
            for (j, &b) in wp.iter().enumerate() {
                acc = acc + a * b * self.values[[i, j]];
            }
        }
        acc
    }
}

fn trapezoid_weights<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { T::zero() };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { T::zero() };
            T::lit(0.5) * (left + right)
        })
        .collect()
}

/// Wigner function `W(x, p)` of a Fock-basis density matrix, with quadratures
/// `a = (x + i p) / sqrt(2)` normalized so that `int W dx dp = 1` and the
/// vacuum has `W(0, 0) = 1/pi`.
///
/// Uses the displaced-parity expansion: the Wigner function of `|m><n|`
/// (`m >= n`) is `(1/pi) (-1)^n sqrt(n!/m!) (2 conj(a))^(m-n) e^{-2|a|^2}
/// L_n^(m-n)(4|a|^2)`.
pub fn wigner_at<T: Real>(rho: &Array2<Complex<T>>, x: T, p: T) -> T {
    let dim = rho.nrows();
    let a = Complex::new(x, p) / T::SQRT_2();
    let r2 = a.norm_sqr();
    let y = T::lit(4.0) * r2;
    let log_two_r = (T::lit(2.0) * a.norm()).ln();
    let phase = -a.arg();
    let scaled = (-T::lit(0.5) * y).exp();
    let ln_fact: Vec<T> = (0..dim).map(ln_factorial::<T>).collect();

    let mut total = T::zero();
    for k in 0..dim {
        // L_n^(k)(y) e^{-y/2} for n = 0..dim-k by the three-term recurrence.
        let kk = T::from_count(k);
        let mut prev = T::zero();
        let mut cur = scaled;
        let rotation = Complex::from_polar(T::one(), phase * kk);
        for n in 0..dim - k {
            let m = n + k;
            let radial = if k == 0 {
                T::zero()
            } else {
                kk * log_two_r
            };
            let magnitude = (T::lit(0.5) * (ln_fact[n] - ln_fact[m]) + radial).exp() * cur;
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            let w_mn = rotation * (sign * magnitude);
            let term = rho[[m, n]] * w_mn;
            total = total + if k == 0 { term.re } else { T::lit(2.0) * term.re };

            let nn = T::from_count(n);
            let next = ((T::lit(2.0) * nn + T::one() + kk - y) * cur - (nn + kk) * prev) / (nn + T::one());
            prev = cur;
            cur = next;
        }
    }
    total / T::PI()
}

/// Samples the Wigner function of `state` on the grid `x` by `p`.
pub fn wigner_function<T: Real>(state: &ReducedCatState<T>, x: &[T], p: &[T]) -> WignerMap<T> {
    let values = Array2::from_shape_fn((x.len(), p.len()), |(i, j)| wigner_at(&state.rho, x[i], p[j]));
    let margin = T::lit(4.0) / T::SQRT_2();
    let lobes = [state.alpha, state.beta].map(|c| (c.re * T::SQRT_2(), c.im * T::SQRT_2()));
    let covers = |axis: &[T], coord: &dyn Fn((T, T)) -> T| {
        let (Some(&lo), Some(&hi)) = (axis.first(), axis.last()) else {
            return false;
        };
        lobes.iter().all(|&l| coord(l) - margin >= lo && coord(l) + margin <= hi)
    };
    let covers_state = covers(x, &|l: (T, T)| l.0) && covers(p, &|l: (T, T)| l.1);
    if !covers_state {
        warn!("Wigner window does not cover both lobes plus four vacuum widths; its normalization is unreliable");
    }
    WignerMap {
        x: x.to_vec(),
        p: p.to_vec(),
        values,
        covers_state,
    }
}

/// Interference visibility at the midpoint between the two lobes: the
/// amplitude of the fringe pattern there divided by the sum of the two lobe
/// peaks. Equals `|G|` for well-separated components.
///
/// The interference term of `|a><b|` is a vacuum-width Gaussian centred on
/// the midpoint times a plane wave across the line joining the lobes. Its
/// amplitude follows from `W` at the midpoint and a quarter fringe period to
/// either side, with the Gaussian envelope divided out.
///
/// Returns `None` when the components coincide (no fringes).
pub fn fringe_visibility<T: Real>(state: &ReducedCatState<T>) -> Option<T> {
    let separation = state.alpha - state.beta;
    if separation.norm() < T::lit(1e-6) {
        return None;
    }
    let to_xp = |c: Complex<T>| (c.re * T::SQRT_2(), c.im * T::SQRT_2());
    let w = |c: Complex<T>| {
        let (x, p) = to_xp(c);
        wigner_at(&state.rho, x, p)
    };
    let mid = (state.alpha + state.beta) * T::lit(0.5);
    let across = Complex::new(T::zero(), T::one()) * separation / separation.norm();
    // Quarter of the fringe period pi / |alpha - beta| (amplitude units).
    let quarter = T::lit(0.25) * T::PI() / separation.norm();
    let in_phase = w(mid);
    let quadrature = T::lit(0.5) * (w(mid - across * quarter) - w(mid + across * quarter));
    // Envelope exp(-|d|^2) in quadrature units, |d| = sqrt(2) * quarter.
    let envelope = (T::lit(2.0) * quarter * quarter).exp();
    let amplitude = (in_phase * in_phase + (quadrature * envelope).powi(2)).sqrt();
    let lobes = w(state.alpha) + w(state.beta);
    Some(amplitude / lobes)
}
