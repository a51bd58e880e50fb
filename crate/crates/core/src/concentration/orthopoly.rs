//! Monic orthogonal polynomials for the Poisson and binomial weights.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrthoFamily<T> {
    /// Orthogonal under `Π_λ`.
    Charlier { lambda: T },
    /// Orthogonal under `B_{n,p}`.
    Krawtchouk { n: usize, p: T },
}

/// Highest Charlier degree tabulated; monic coefficients overflow soon after.
const CHARLIER_MAX_DEGREE: usize = 60;

/// Coefficient table: row `k` holds the monic degree-`k` polynomial, lowest
/// power first, built by the three-term recurrence
/// `p_{k+1} = (x − a_k) p_k − b_k p_{k−1}`.
pub fn orthogonal_polys<T: Real>(family: OrthoFamily<T>, max_degree: usize) -> Result<Vec<Vec<T>>> {
    let recurrence: Box<dyn Fn(usize) -> (T, T)> = match family {
        OrthoFamily::Charlier { lambda } => {
            if !(lambda > T::zero() && lambda.is_finite()) {
                return Err(Error::BadParameter(format!("charlier lambda = {lambda}")));
            }
            if max_degree > CHARLIER_MAX_DEGREE {
                return Err(Error::BadParameter(format!(
                    "charlier degree {max_degree} > {CHARLIER_MAX_DEGREE}"
                )));
            }
            Box::new(move |k| {
                let kf = T::from_usize_lossy(k);
                (kf + lambda, kf * lambda)
            })
        }
        OrthoFamily::Krawtchouk { n, p } => {
            if n == 0 || !(p > T::zero() && p < T::one()) {
                return Err(Error::BadParameter(format!("krawtchouk n = {n}, p = {p}")));
            }
            if max_degree > n {
                return Err(Error::BadParameter(format!(
                    "krawtchouk degree {max_degree} > n = {n}"
                )));
            }
            Box::new(move |k| {
                let kf = T::from_usize_lossy(k);
                let nf = T::from_usize_lossy(n);
                let q = T::one() - p;
                (p * (nf - kf) + kf * q, kf * (nf - kf + T::one()) * p * q)
            })
        }
    };
    let mut table: Vec<Vec<T>> = vec![vec![T::one()]];
    for k in 0..max_degree {
        let (a, b) = recurrence(k);
        let cur = &table[k];
        let mut next = vec![T::zero(); k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= a * c;
        }
        if k > 0 {
            for (i, &c) in table[k - 1].iter().enumerate() {
                next[i] -= b * c;
            }
        }
        table.push(next);
    }
    Ok(table)
}

/// Horner evaluation, lowest power first.
pub fn eval_poly<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}
