//! Real symmetric tridiagonal matrices: implicit QL eigensolver with
//! Wilkinson shifts, Sturm-sequence counting and bisection.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_QL_SWEEPS: usize = 60;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

/// Eigenpairs sorted by ascending eigenvalue. Column `k` of `vectors` is the
/// normalized eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Array2<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(crate::error::invalid("diag", "empty matrix"));
        }
        if off.len() + 1 != diag.len() {
            return Err(crate::error::invalid(
                "off",
                format!("expected {} off-diagonal entries, got {}", diag.len() - 1, off.len()),
            ));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().chain(self.off.iter()).all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> Array2<T> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[[i, i + 1]] = e;
            m[[i + 1, i]] = e;
        }
        m
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc = acc + self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.dim() {
            let coupling = if i == 0 { T::zero() } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { T::zero() } else { coupling / q };
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Number of eigenvalues strictly above `x`.
    pub fn count_above(&self, x: T) -> usize {
        // Count of values <= x equals count_below of the next representable value.
        let below_or_equal = self.count_below(next_up(x));
        self.dim() - below_or_equal
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn spectral_bounds(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> T {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.spectral_bounds();
        let pad = T::lit(1e-3) * (hi - lo).abs().max(T::one());
        lo = lo - pad;
        hi = hi + pad;
        for _ in 0..256 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        T::lit(0.5) * (lo + hi)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        if !self.is_finite() {
            return Err(Error::EigenFailure);
        }
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        implicit_ql(&mut d, &mut e, None)?;
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Ok(d)
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigen(&self) -> Result<SymEigen<T>> {
        if !self.is_finite() {
            return Err(Error::EigenFailure);
        }
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        let mut z = Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::one() } else { T::zero() });
        implicit_ql(&mut d, &mut e, Some(&mut z))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
        let values = order.iter().map(|&k| d[k]).collect();
        let vectors = Array2::from_shape_fn((n, n), |(i, k)| z[[i, order[k]]]);
        Ok(SymEigen { values, vectors })
    }
}

fn next_up<T: Real>(x: T) -> T {
    let step = x.abs().max(T::one()) * T::eps();
    x + step
}

/// Implicit QL with Wilkinson shifts on `d` (diagonal) and `e` (off-diagonal,
/// `e[i]` couples `i` and `i + 1`, last entry zero). Rotations are accumulated
/// into the columns of `z` when given.
fn implicit_ql<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut Array2<T>>) -> Result<()> {
    let n = d.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::eps() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::EigenFailure);
            }

            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let zf = z[[k, i + 1]];
                        let zi = z[[k, i]];
                        z[[k, i + 1]] = s * zi + c * zf;
                        z[[k, i]] = c * zi - s * zf;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn laplacian(n: usize) -> SymTridiagonal<f64> {
        SymTridiagonal::new(vec![0.0; n], vec![1.0; n - 1]).unwrap()
    }

    #[test]
    fn uniform_chain_matches_cosine_spectrum() {
        let n = 40;
        let vals = laplacian(n).eigenvalues().unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in vals.iter().zip(&expected) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let m = SymTridiagonal::new(vec![0.3, -1.2, 2.0, 0.5, 0.0], vec![0.7, 1.1, 0.0, -0.4]).unwrap();
        let eig = m.eigen().unwrap();
        let dense = m.to_dense();
        let v = &eig.vectors;
        for i in 0..5 {
            for j in 0..5 {
                let rec: f64 = (0..5).map(|k| v[[i, k]] * eig.values[k] * v[[j, k]]).sum();
                assert_abs_diff_eq!(rec, dense[[i, j]], epsilon = 1e-13);
                let ortho: f64 = (0..5).map(|k| v[[k, i]] * v[[k, j]]).sum();
                assert_abs_diff_eq!(ortho, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sturm_count_and_bisection_agree_with_ql() {
        let m = SymTridiagonal::new(
            (0..30).map(|i| (i as f64 * 0.37).sin()).collect(),
            (0..29).map(|i| 0.5 + (i as f64 * 0.11).cos()).collect(),
        )
        .unwrap();
        let vals = m.eigenvalues().unwrap();
        for (k, &v) in vals.iter().enumerate() {
            assert_abs_diff_eq!(m.kth_eigenvalue(k), v, epsilon = 1e-12);
            assert_eq!(m.count_below(v - 1e-9), k);
        }
        assert_eq!(m.count_above(vals[29] - 1e-9), 1);
        assert_eq!(m.count_above(vals[29] + 1e-9), 0);
    }

    #[test]
    fn rejects_non_finite_entries() {
        let m = SymTridiagonal::new(vec![0.0, f64::NAN, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(m.eigen().unwrap_err(), Error::EigenFailure);
    }

    #[test]
    fn single_precision_instantiation() {
        let m = SymTridiagonal::<f32>::new(vec![0.0; 8], vec![1.0; 7]).unwrap();
        let vals = m.eigenvalues().unwrap();
        assert!((vals[7] - 2.0 * (std::f32::consts::PI / 9.0).cos()).abs() < 1e-5);
    }
}
