//! Nelder–Mead simplex minimisation (unconstrained).

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexSettings<T> {
    pub max_evaluations: usize,
    /// Stop when the spread of simplex values falls below this.
    pub value_tolerance: T,
    /// ... and the simplex diameter (∞-norm) falls below this.
    pub size_tolerance: T,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evaluations: usize,
}

/// Minimises `f` from `x0` with an axis-aligned initial simplex of edge `steps`.
pub(crate) fn minimize<T, F>(
    f: F,
    x0: &[T],
    steps: &[T],
    settings: &SimplexSettings<T>,
) -> SimplexResult<T>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    let n = x0.len();
    let half = T::lit(0.5);
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[T]| {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = v[i] + steps[i];
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    loop {
        // stable sort keeps the ordering deterministic on ties
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = (worst - best).abs();
        let diameter = simplex[1..].iter().fold(T::zero(), |acc, (v, _)| {
            v.iter()
                .zip(&simplex[0].0)
                .fold(acc, |a, (&p, &q)| a.max((p - q).abs()))
        });
        if (spread <= settings.value_tolerance && diameter <= settings.size_tolerance)
            || evaluations.get() >= settings.max_evaluations
        {
            break;
        }

        let centroid: Vec<T> = (0..n)
            .map(|j| {
                simplex[..n]
                    .iter()
                    .fold(T::zero(), |acc, (v, _)| acc + v[j])
                    / T::from_count(n)
            })
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(T::one());
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(T::two());
            let fe = eval(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let c = along(half);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = along(-half);
            let fc = eval(&c);
            (c, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let shrunk: Vec<T> = vertex
                .0
                .iter()
                .zip(&best_x)
                .map(|(&v, &b)| b + half * (v - b))
                .collect();
            let fv = eval(&shrunk);
            *vertex = (shrunk, fv);
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evaluations.get(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> SimplexSettings<f64> {
        SimplexSettings {
            max_evaluations: 10_000,
            value_tolerance: 1e-14,
            size_tolerance: 1e-9,
        }
    }

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let r = minimize(f, &[0.0, 0.0], &[0.5, 0.5], &settings());
        assert!(
            (r.x[0] - 1.0).abs() < 1e-7 && (r.x[1] + 2.0).abs() < 1e-7,
            "{:?}",
            r.x
        );
        assert!(r.value < 1e-13);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], &settings());
        assert!((r.x[0] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn evaluation_budget_is_respected() {
        let f = |x: &[f64]| x[0] * x[0];
        let mut s = settings();
        s.max_evaluations = 10;
        let r = minimize(f, &[5.0], &[1.0], &s);
        // one iteration may overshoot the budget by at most n + 1 evaluations
        assert!(r.evaluations <= 10 + 2);
    }
}
