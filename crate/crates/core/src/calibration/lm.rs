//! Levenberg–Marquardt on a residual closure with a central-difference Jacobian.

use super::dense::Square;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmSettings<T> {
    pub max_iterations: usize,
    pub step_tolerance: T,
    pub gradient_tolerance: T,
    /// Relative finite-difference step.
    pub fd_step: T,
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome<T> {
    pub x: Vec<T>,
    pub residuals: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squared residuals at the start and after every accepted step.
    pub cost_history: Vec<T>,
}

fn sum_squares<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Jacobian rows (one per residual) over the parameters listed in `free`.
pub(crate) fn jacobian<T, F>(f: &F, x: &[T], free: &[usize], fd_step: T) -> Option<Vec<Vec<T>>>
where
    T: Scalar,
    F: Fn(&[T]) -> Option<Vec<T>>,
{
    let mut cols = Vec::with_capacity(free.len());
    let mut probe = x.to_vec();
    for &j in free {
        let h = fd_step * x[j].abs().max(T::one());
        probe[j] = x[j] + h;
        let plus = f(&probe)?;
        probe[j] = x[j] - h;
        let minus = f(&probe)?;
        probe[j] = x[j];
        let two_h = T::two() * h;
        cols.push(
            plus.iter()
                .zip(&minus)
                .map(|(&p, &m)| (p - m) / two_h)
                .collect::<Vec<_>>(),
        );
    }
    let m = cols.first().map_or(0, Vec::len);
    Some(
        (0..m)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect(),
    )
}

/// Minimises `½‖f(x)‖²` over the coordinates in `free`; the rest stay fixed.
///
/// Returns `None` if `f` is undefined at `x0`.
pub(crate) fn minimize<T, F>(
    f: &F,
    x0: Vec<T>,
    free: &[usize],
    settings: &LmSettings<T>,
) -> Option<LmOutcome<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Option<Vec<T>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut cost = sum_squares(&r);
    let mut cost_history = vec![cost];
    let mut lambda = T::lit(1e-3);
    let lambda_min = T::lit(1e-15);
    let lambda_max = T::lit(1e16);
    let n = free.len();

    let mut iterations = 0;
    let mut converged = n == 0;
    while !converged && iterations < settings.max_iterations {
        iterations += 1;
        let Some(jac) = jacobian(f, &x, free, settings.fd_step) else {
            break;
        };
        let gradient: Vec<T> = (0..n)
            .map(|j| {
                jac.iter()
                    .zip(&r)
                    .fold(T::zero(), |acc, (row, &ri)| acc + row[j] * ri)
            })
            .collect();
        if inf_norm(&gradient) < settings.gradient_tolerance {
            converged = true;
            break;
        }
        let normal = Square::gram_of_rows(&jac, n);
        let diag_floor = (0..n).fold(T::zero(), |acc, i| acc.max(normal.get(i, i))) * T::lit(1e-12);

        // Raise damping until a step lowers the cost or becomes negligible.
        loop {
            let mut damped = normal.clone();
            for i in 0..n {
                let d = normal.get(i, i).max(diag_floor);
                damped.set(i, i, normal.get(i, i) + lambda * d);
            }
            let rhs: Vec<T> = gradient.iter().map(|&g| -g).collect();
            let step = damped.solve(&rhs);
            let Some(step) = step else {
                lambda = lambda * T::lit(4.0);
                if lambda > lambda_max {
                    break;
                }
                continue;
            };
            if inf_norm(&step) < settings.step_tolerance {
                converged = true;
                break;
            }
            let mut trial = x.clone();
            for (k, &j) in free.iter().enumerate() {
                trial[j] = trial[j] + step[k];
            }
            match f(&trial) {
                Some(r_trial) if sum_squares(&r_trial) < cost => {
                    x = trial;
                    r = r_trial;
                    cost = sum_squares(&r);
                    cost_history.push(cost);
                    lambda = (lambda / T::lit(3.0)).max(lambda_min);
                    break;
                }
                _ => {
                    lambda = lambda * T::lit(4.0);
                    if lambda > lambda_max {
                        // no descent direction left at working precision
                        converged = true;
                        break;
                    }
                }
            }
        }
    }

    Some(LmOutcome {
        x,
        residuals: r,
        iterations,
        converged,
        cost_history,
    })
}
