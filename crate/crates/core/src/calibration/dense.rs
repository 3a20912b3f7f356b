//! Small dense square systems for the least-squares solver (n ≤ 9).

use crate::scalar::Scalar;

/// Row-major n×n matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Square<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Square<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// `JᵀJ` for a Jacobian stored as rows (one per residual).
    pub fn gram_of_rows(rows: &[Vec<T>], n: usize) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rows.iter().fold(T::zero(), |acc, r| acc + r[i] * r[j]);
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&p, &q| a[p * n + k].abs().partial_cmp(&a[q * n + k].abs()).unwrap())
                .unwrap();
            if a[pivot * n + k] == T::zero() || !a[pivot * n + k].is_finite() {
                return None;
            }
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                x.swap(k, pivot);
            }
            for i in k + 1..n {
                let f = a[i * n + k] / a[k * n + k];
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    a[i * n + j] = a[i * n + j] - f * a[k * n + j];
                }
                x[i] = x[i] - f * x[k];
            }
        }
        for i in (0..n).rev() {
            let tail = (i + 1..n).fold(T::zero(), |acc, j| acc + a[i * n + j] * x[j]);
            x[i] = (x[i] - tail) / a[i * n + i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let mut a = self.clone();
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(T::zero(), |acc, (i, j)| acc + a.get(i, j) * a.get(i, j));
            let diag: T = (0..n).fold(T::zero(), |acc, i| acc + a.get(i, i) * a.get(i, i));
            if off <= eps * eps * diag || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let tau = (aqq - app) / (T::two() * apq);
                    let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eig: Vec<T> = (0..n).map(|i| a.get(i, i)).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }
}
