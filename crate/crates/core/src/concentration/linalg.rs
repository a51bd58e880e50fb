//! Dense symmetric eigen-solves for the Rayleigh-quotient problems.
//!
//! Matrices are small (a few hundred rows at most), stored row-major.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn quad(&self, v: &[T]) -> T {
        v.iter().zip(self.mul_vec(v)).map(|(&a, b)| a * b).sum()
    }

    fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Principal submatrix on `rows`.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), |i, j| self.get(rows[i], rows[j]))
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<T>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect()
    }
}

/// Eigen-decomposition `A = V diag(values) Vᵀ`; column `k` of `vectors` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// Row-major `n × n`.
    pub vectors: Vec<T>,
}

impl<T: Real> Eigen<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        let n = self.values.len();
        (0..n).map(|i| self.vectors[i * n + k]).collect()
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn jacobi_eigen<T: Real>(a: &SymMatrix<T>) -> Result<Eigen<T>> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.frobenius();
    let tol = T::lit(T::EIGEN_TOL) * scale;
    let two = T::lit(2.0);
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<T>()
            .sqrt();
        if off <= tol || scale == T::zero() {
            let values = (0..n).map(|i| m[i * n + i]).collect();
            return Ok(Eigen { values, vectors: v });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::EigenNotConverged { residual: f64::NAN })
}

/// Lower Cholesky factor; fails when `a` is not numerically positive definite.
pub fn cholesky<T: Real>(a: &SymMatrix<T>) -> Result<Vec<T>> {
    let n = a.n;
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                // Pivots are judged against their own diagonal entry, so
                // badly scaled but definite matrices still factor.
                if !(s > T::epsilon() * T::lit(64.0) * a.get(i, i)) {
                    return Err(Error::DegenerateEnergy);
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn forward_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = l[i * n + k] * x[k];
            x[i] -= v;
        }
        x[i] /= l[i * n + i];
    }
    x
}

fn backward_solve_t<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            let v = l[k * n + i] * x[k];
            x[i] -= v;
        }
        x[i] /= l[i * n + i];
    }
    x
}

/// Largest generalized eigenpair of `A v = μ B v`, `B` positive definite.
#[derive(Debug, Clone)]
pub struct GeneralizedTop<T> {
    pub value: T,
    pub vector: Vec<T>,
    /// `‖A v − μ B v‖ / (‖A‖_F ‖v‖)`.
    pub residual: T,
}

pub fn generalized_top<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<GeneralizedTop<T>> {
    let n = a.n;
    let l = cholesky(b)?;
    // C = L⁻¹ A L⁻ᵀ, built column by column.
    let mut linv_a = vec![T::zero(); n * n];
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| a.get(i, j)).collect();
        let y = forward_solve(&l, n, &col);
        for i in 0..n {
            linv_a[i * n + j] = y[i];
        }
    }
    // Column i of C solves L x = (row i of L⁻¹ A).
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        let row: Vec<T> = (0..n).map(|j| linv_a[i * n + j]).collect();
        for (k, v) in forward_solve(&l, n, &row).into_iter().enumerate() {
            c[k * n + i] = v;
        }
    }
    let sym = SymMatrix::from_fn(n, |i, j| (c[i * n + j] + c[j * n + i]) / T::lit(2.0));
    let eig = jacobi_eigen(&sym)?;
    let (top, &value) = eig
        .values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty");
    let vector = backward_solve_t(&l, n, &eig.vector(top));
    let av = a.mul_vec(&vector);
    let bv = b.mul_vec(&vector);
    let r: T = av
        .iter()
        .zip(&bv)
        .map(|(&x, &y)| (x - value * y) * (x - value * y))
        .sum::<T>()
        .sqrt();
    let norm = vector.iter().map(|&v| v * v).sum::<T>().sqrt();
    let denom = a.frobenius() * norm;
    let residual = if denom > T::zero() { r / denom } else { r };
    Ok(GeneralizedTop {
        value,
        vector,
        residual,
    })
}

/// Moore–Penrose pseudo-inverse of a positive semi-definite matrix.
pub fn psd_pinv<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let n = a.n;
    if n == 0 {
        return Ok(a.clone());
    }
    let eig = jacobi_eigen(a)?;
    let top = eig.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let cut = top * T::epsilon() * T::from_usize_lossy(n) * T::lit(16.0);
    Ok(SymMatrix::from_fn(n, |i, j| {
        (0..n)
            .filter(|&k| eig.values[k] > cut)
            .map(|k| eig.vectors[i * n + k] * eig.vectors[j * n + k] / eig.values[k])
            .sum()
    }))
}

/// Reduces `max vᵀ M v / vᵀ E v` to the rows where `M` is nonzero by
/// minimizing the energy over the remaining coordinates.
pub struct Reduction<T> {
    pub active: Vec<usize>,
    pub m: SymMatrix<T>,
    pub e: SymMatrix<T>,
    /// Optimal inactive coordinates are `lift · v_active`.
    lift: Vec<Vec<T>>,
    inactive: Vec<usize>,
}

impl<T: Real> Reduction<T> {
    pub fn new(m: &SymMatrix<T>, e: &SymMatrix<T>) -> Result<Self> {
        let n = m.n;
        let (active, inactive): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| (0..n).any(|j| m.get(i, j) != T::zero()));
        let e_aa = e.select(&active);
        let e_ii = e.select(&inactive);
        let e_ia = e.block(&inactive, &active);
        let pinv = psd_pinv(&e_ii)?;
        // lift = −E_II⁺ E_IA
        let lift: Vec<Vec<T>> = (0..inactive.len())
            .map(|r| {
                (0..active.len())
                    .map(|c| {
                        -(0..inactive.len())
                            .map(|k| pinv.get(r, k) * e_ia[k][c])
                            .sum::<T>()
                    })
                    .collect()
            })
            .collect();
        let schur = SymMatrix::from_fn(active.len(), |i, j| {
            e_aa.get(i, j)
                + (0..inactive.len())
                    .map(|k| e_ia[k][i] * lift[k][j])
                    .sum::<T>()
        });
        Ok(Self {
            m: m.select(&active),
            e: schur,
            active,
            lift,
            inactive,
        })
    }

    /// Full coordinate vector from active coordinates.
    pub fn expand(&self, v: &[T], n: usize) -> Vec<T> {
        let mut out = vec![T::zero(); n];
        for (k, &i) in self.active.iter().enumerate() {
            out[i] = v[k];
        }
        for (r, &i) in self.inactive.iter().enumerate() {
            out[i] = self.lift[r].iter().zip(v).map(|(&a, &b)| a * b).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    use super::*;

    fn random_sym(seed: &[f64], n: usize) -> SymMatrix<f64> {
        SymMatrix::from_fn(n, |i, j| seed[(i * 7 + j * 3) % seed.len()] - 0.5)
    }

    #[test]
    fn two_by_two() {
        let a = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let mut e = jacobi_eigen(&a).unwrap().values;
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn jacobi_matches_nalgebra(seed in prop::collection::vec(0.0f64..1.0, 5..40), n in 1usize..12) {
            let a = random_sym(&seed, n);
            let mut ours = jacobi_eigen(&a).unwrap().values;
            ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let na = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
            let mut theirs: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (x, y) in ours.iter().zip(&theirs) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn generalized_matches_nalgebra(seed in prop::collection::vec(0.0f64..1.0, 5..40), n in 1usize..10) {
            let a = random_sym(&seed, n);
            let b = SymMatrix::from_fn(n, |i, j| if i == j { 1.0 + seed[i % seed.len()] } else if i == j + 1 { 0.3 } else { 0.0 });
            let top = generalized_top(&a, &b).unwrap();
            prop_assert!(top.residual <= 1e-12);
            // Oracle: B^{-1/2} A B^{-1/2} through nalgebra.
            let nb = DMatrix::from_fn(n, n, |i, j| b.get(i, j));
            let na = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
            let l = nb.cholesky().unwrap().l();
            let li = l.clone().try_inverse().unwrap();
            let c = &li * na * li.transpose();
            let c = (&c + c.transpose()) * 0.5;
            let best = c.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((top.value - best).abs() <= 1e-11);
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = SymMatrix::from_fn(2, |_, _| 1.0);
        assert!(matches!(cholesky(&a), Err(Error::DegenerateEnergy)));
    }

    #[test]
    fn pinv_of_rank_one() {
        let a = SymMatrix::from_fn(2, |_, _| 1.0);
        let p = psd_pinv(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(p.get(i, j), 0.25, epsilon = 1e-14);
            }
        }
    }
}
