use catlattice::cat::{
    coherence_factor, coherent_amplitudes, default_n_max, estimate_g_from_counts, fringe_visibility,
    mixture_probability, photon_number_distribution, reduced_density_matrix, wigner_at, wigner_function, CatState,
};
use ndarray::Array2;
use num_complex::Complex;
use proptest::prelude::*;

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

/// `<n|a>` from the power series, independent of the library recurrence.
fn fock_amplitude(a: C, n: usize) -> C {
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let magnitude = (-0.5 * a.norm_sqr() + n as f64 * a.norm().ln() - 0.5 * log_fact).exp();
    if a.norm() == 0.0 {
        return if n == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
    }
    Complex::from_polar(magnitude, n as f64 * a.arg())
}

fn brute_force_rho(cat: &CatState<f64>, s: C, g: C, n_max: usize) -> Array2<C> {
    let a: Vec<C> = (0..=n_max).map(|n| fock_amplitude(cat.alpha0 * s, n)).collect();
    let b: Vec<C> = (0..=n_max).map(|n| fock_amplitude(cat.beta0 * s, n)).collect();
    let mut rho = Array2::zeros((n_max + 1, n_max + 1));
    let terms = [(&a, &a, c(1.0, 0.0)), (&b, &b, c(1.0, 0.0)), (&a, &b, g), (&b, &a, g.conj())];
    for (u, v, w) in terms {
        for i in 0..=n_max {
            for j in 0..=n_max {
                rho[[i, j]] += w * u[i] * v[j].conj();
            }
        }
    }
    rho / cat.normalization
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi on its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`; each eigenvalue appears
/// twice there and is returned once.
fn hermitian_eigenvalues(h: &Array2<C>) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = Array2::<f64>::zeros((m, m));
    for i in 0..n {
        for j in 0..n {
            let z = h[[i, j]];
            a[[i, j]] = z.re;
            a[[i + n, j + n]] = z.re;
            a[[i, j + n]] = -z.im;
            a[[i + n, j]] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[[q, q]] - a[[p, p]]) / a[[p, q]];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let (cs, sn) = (1.0 / (t * t + 1.0).sqrt(), t / (t * t + 1.0).sqrt());
                for k in 0..m {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = cs * akp - sn * akq;
                    a[[k, q]] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = cs * apk - sn * aqk;
                    a[[q, k]] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[[i, i]]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev.into_iter().step_by(2).collect()
}

#[test]
fn density_matrix_matches_outer_products() {
    let cases = [
        (CatState::balanced(c(3.0, 0.0)).unwrap(), c(0.6, -0.3)),
        (CatState::new(c(1.2, 0.7), c(-0.4, 1.5)).unwrap(), c(0.5, 0.5)),
        (CatState::new(c(0.0, 2.0), c(0.5, 0.0)).unwrap(), c(-0.9, 0.1)),
    ];
    for (cat, s) in cases {
        let g = cat.coherence(s);
        let n_max = default_n_max(cat.alpha0.norm().max(cat.beta0.norm()));
        let state = reduced_density_matrix(&cat, s, g, n_max).unwrap();
        let oracle = brute_force_rho(&cat, s, g, n_max);
        for (x, y) in state.rho.iter().zip(oracle.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        for i in 0..=n_max {
            for j in 0..=n_max {
                assert_eq!(state.rho[[i, j]], state.rho[[j, i]].conj());
            }
        }
    }
}

#[test]
fn balanced_trace_is_preserved_along_the_decay() {
    let cat = CatState::balanced(c(1.0, 0.8)).unwrap();
    for s2 in [1.0, 0.7, 0.3, 0.05, 0.0] {
        let s = c(f64::sqrt(s2), 0.0);
        let state = reduced_density_matrix(&cat, s, cat.coherence(s), 40).unwrap();
        assert!((state.trace() - 1.0).abs() < 1e-8, "|S|^2 = {s2}: trace {}", state.trace());
    }
}

#[test]
fn pure_at_launch_and_mixture_when_incoherent() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let n_max = default_n_max(3.0);
    let pure = reduced_density_matrix(&cat, c(1.0, 0.0), cat.coherence(c(1.0, 0.0)), n_max).unwrap();
    let square = pure.rho.dot(&pure.rho);
    for (x, y) in square.iter().zip(pure.rho.iter()) {
        assert!((x - y).norm() < 1e-9);
    }
    assert!((pure.purity() - 1.0).abs() < 1e-9);

    let mixed = reduced_density_matrix(&cat, c(1.0, 0.0), c(0.0, 0.0), n_max).unwrap();
    let ev = hermitian_eigenvalues(&mixed.rho);
    let top = &ev[ev.len() - 2..];
    assert!((top[0] - 0.5).abs() < 1e-6 && (top[1] - 0.5).abs() < 1e-6, "{top:?}");
    assert!(ev[..ev.len() - 2].iter().all(|v| v.abs() < 1e-9));
    let [lo, hi] = mixed.nonzero_eigenvalues();
    assert!((lo - top[0]).abs() < 1e-9 && (hi - top[1]).abs() < 1e-9);
}

#[test]
fn positive_with_unit_trace_at_every_distance() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let n_max = default_n_max(3.0);
    for s2 in [1.0, 0.95, 0.8, 0.5, 0.2, 0.0] {
        let s = Complex::from_polar(f64::sqrt(s2), 0.7 * s2);
        let state = reduced_density_matrix(&cat, s, cat.coherence(s), n_max).unwrap();
        let ev = hermitian_eigenvalues(&state.rho);
        assert!(ev.iter().all(|&v| v > -1e-10), "min eigenvalue {}", ev[0]);
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!((state.trace() - 1.0).abs() < 1e-8);
        // Pure at launch and again at S00 = 0, where both components have
        // collapsed onto the vacuum.
        let purity = state.purity();
        assert!(purity <= 1.0 + 1e-12);
        if s2 > 0.0 && s2 < 1.0 {
            assert!(purity < 1.0 - 1e-6, "purity {purity} at |S|^2 = {s2}");
        } else {
            assert!((purity - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn photon_statistics_are_the_diagonal() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let n_max = default_n_max(3.0);
    for s in [c(1.0, 0.0), c(0.8, 0.0), c(0.5, 0.2), c(0.1, 0.0)] {
        // Any coherence value for the consistency check, the physical one for
        // the sum rule.
        for (g, physical) in [(c(0.4, 0.0), false), (c(0.0, 0.0), false), (cat.coherence(s), true)] {
            let diag = reduced_density_matrix(&cat, s, g, n_max).unwrap().diagonal();
            let p: Vec<f64> = (0..=n_max)
                .map(|n| photon_number_distribution(&cat, s, g, n).unwrap())
                .collect();
            for (a, b) in p.iter().zip(&diag) {
                assert!((a - b).abs() < 1e-12);
            }
            if physical {
                let total: f64 = p.iter().sum();
                assert!((total - 1.0).abs() < 1e-8, "sum {total}");
            }
        }
    }
}

#[test]
fn coherent_cat_has_only_even_photon_numbers() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let one = c(1.0, 0.0);
    let peak = photon_number_distribution(&cat, one, one, 8).unwrap();
    for n in (1..60).step_by(2) {
        assert!(photon_number_distribution(&cat, one, one, n).unwrap() < 1e-12 * peak);
    }
}

#[test]
fn incoherent_mixture_is_poissonian() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let s = c(0.6, 0.0);
    let mean = 9.0 * 0.36;
    for n in 0..30 {
        let p = photon_number_distribution(&cat, s, c(0.0, 0.0), n).unwrap() * cat.normalization / 2.0;
        let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        let poisson = (-mean + n as f64 * f64::ln(mean) - log_fact).exp();
        assert!((p - poisson).abs() < 1e-14);
    }
}

#[test]
fn unbalanced_cat_is_redirected() {
    let cat = CatState::new(c(1.0, 0.0), c(-0.5, 0.0)).unwrap();
    assert!(photon_number_distribution(&cat, c(1.0, 0.0), c(1.0, 0.0), 2).is_err());
}

#[test]
fn wigner_is_normalized_and_its_fock_projections_give_the_statistics() {
    let cat = CatState::balanced(c(2.0, 0.0)).unwrap();
    let s = c(0.9, 0.0);
    let state = reduced_density_matrix(&cat, s, cat.coherence(s), default_n_max(2.0)).unwrap();
    let axis: Vec<f64> = (0..=200).map(|i| -8.0 + 0.08 * i as f64).collect();
    let map = wigner_function(&state, &axis, &axis);
    assert!(map.covers_state);
    assert!((map.integral() - 1.0).abs() < 1e-3, "integral {}", map.integral());
    // P_n = 2 pi int int W_rho W_n.
    let dim = state.n_max + 1;
    for n in [0usize, 2, 4, 3] {
        let mut fock = Array2::<C>::zeros((dim, dim));
        fock[[n, n]] = c(1.0, 0.0);
        let mut acc = 0.0;
        for (i, &x) in axis.iter().enumerate() {
            for (j, &p) in axis.iter().enumerate() {
                acc += map.values[[i, j]] * wigner_at(&fock, x, p);
            }
        }
        let projected = 2.0 * std::f64::consts::PI * acc * 0.08 * 0.08;
        assert!((projected - state.rho[[n, n]].re).abs() < 1e-4, "n = {n}: {projected}");
    }
}

#[test]
fn narrow_window_is_flagged() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let state = reduced_density_matrix(&cat, c(1.0, 0.0), c(1.0, 0.0), default_n_max(3.0)).unwrap();
    let axis: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
    assert!(!wigner_function(&state, &axis, &axis).covers_state);
}

// Analytic cat Wigner function: two Gaussian lobes plus the interference
// term, in the same quadrature convention.
fn analytic_cat_wigner(alpha: f64, g: f64, norm: f64, x: f64, p: f64) -> f64 {
    let x0 = alpha * std::f64::consts::SQRT_2;
    let lobe = |c: f64| (-(x - c).powi(2) - p * p).exp() / std::f64::consts::PI;
    let fringe = 2.0 * g * (-x * x - p * p).exp() * (2.0 * x0 * p).cos() / std::f64::consts::PI;
    (lobe(x0) + lobe(-x0) + fringe) / norm
}

#[test]
fn fringe_visibility_tracks_coherence() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    for g in [1.0, 0.5, 0.1, 0.0] {
        let state = reduced_density_matrix(&cat, c(1.0, 0.0), c(g, 0.0), default_n_max(3.0)).unwrap();
        for (x, p) in [(0.0, 0.0), (0.3, 0.2), (4.2, -0.1), (-1.0, 0.5)] {
            let w = wigner_at(&state.rho, x, p);
            assert!((w - analytic_cat_wigner(3.0, g, cat.normalization, x, p)).abs() < 1e-10);
        }
        let v = fringe_visibility(&state).unwrap();
        if g == 0.0 {
            assert!(v < 1e-3, "visibility {v}");
        } else {
            assert!((v - g).abs() < 0.02 * g, "G = {g}: visibility {v}");
        }
    }
}

#[test]
fn g_depends_only_on_survival_probability() {
    let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
    let z = [0.0, 1.0, 2.0];
    let a = [c(1.0, 0.0), c(0.6, 0.0), c(0.0, 0.3)];
    let b = [c(1.0, 0.0), c(0.0, -0.6), c(-0.3, 0.0)];
    let ta = coherence_factor(&cat, &z, &a).unwrap();
    let tb = coherence_factor(&cat, &z, &b).unwrap();
    assert_eq!(ta.g, tb.g);
    assert_eq!(ta.g[0], c(1.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balanced_form_agrees(re in -4.0..4.0f64, im in -4.0..4.0f64, s in 0.0..1.0f64, phase in 0.0..6.3f64) {
        let cat = CatState::balanced(c(re, im)).unwrap();
        let survival = Complex::from_polar(s, phase);
        let g = cat.coherence(survival);
        let closed = (-2.0 * cat.mean_photons * (1.0 - s * s)).exp();
        prop_assert!((g.re - closed).abs() < 1e-12);
        prop_assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn coherence_decreases_with_loss_and_size(n in 0.5..50.0f64, s1 in 0.0..1.0f64, s2 in 0.0..1.0f64) {
        prop_assume!((s1 - s2).abs() > 1e-6);
        let cat = CatState::from_mean_photons(n).unwrap();
        let bigger = CatState::from_mean_photons(2.0 * n).unwrap();
        let (hi, lo) = if s1 > s2 { (s1, s2) } else { (s2, s1) };
        let g_hi = cat.coherence(c(hi, 0.0)).re;
        let g_lo = cat.coherence(c(lo, 0.0)).re;
        prop_assert!(g_lo <= g_hi);
        if g_hi > 1e-300 && hi < 1.0 {
            prop_assert!(bigger.coherence(c(hi, 0.0)).re < g_hi);
        }
    }

    #[test]
    fn estimator_round_trips(g in 0.0..1.0f64, half_n in 3usize..6) {
        let cat = CatState::balanced(c(3.0, 0.0)).unwrap();
        let n = 2 * half_n;
        let s = c(1.0, 0.0);
        let p = photon_number_distribution(&cat, s, c(g, 0.0), n).unwrap();
        // The mixture reference carries the same 2/N weight as the cat.
        let mix = 2.0 / cat.normalization * mixture_probability(cat.alpha0 * s, n);
        let estimate = estimate_g_from_counts(n, p, mix).unwrap();
        prop_assert!((estimate - g).abs() < 1e-6);
    }

    #[test]
    fn fock_vectors_are_normalized(re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let a = c(re, im);
        let amps = coherent_amplitudes(a, default_n_max(a.norm()));
        let total: f64 = amps.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for (n, x) in amps.iter().enumerate().take(30) {
            prop_assert!((x - fock_amplitude(a, n)).norm() < 1e-12);
        }
    }
}
