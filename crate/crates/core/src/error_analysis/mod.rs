//! Error made by treating non-orthogonal axes as orthogonal.
//!
//! For measured values `a` the orthogonal assumption gives `|a|₂` while the
//! true magnitude is the oblique-frame magnitude. This module maximises the
//! absolute error on the gravity sphere and the relative error over a
//! measurement box, builds Monte-Carlo histograms of the relative error, and
//! extracts the sampled regions above or below a relative-error threshold.
//!
//! Both maximisations reduce to a search over a unit direction `u` (two sphere
//! angles) and the three inter-axis angles: the absolute error on the gravity
//! sphere is `g |1 − |u|₂ / |u|_nonorth|` at `a = g u / |u|_nonorth`, and the
//! relative error is invariant under scaling of `a`. The search is a coarse
//! grid over the five-dimensional space followed by simplex refinement of the
//! best grid cells.

mod nelder_mead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    magnitude_nonorth, magnitude_orth, AngleBounds, AxisAngles, GravityConstant,
};
use crate::linalg::Vec3;
use crate::rng::CounterRng;
use crate::scalar::Scalar;

use nelder_mead::SimplexSettings;

/// Largest angle tolerance accepted by the extremal problems.
pub const MAX_PROBLEM_ANGLE_TOLERANCE: f64 = 0.1;

/// Samples with a norm below this are discarded before computing relative errors.
pub const MIN_SAMPLE_NORM: f64 = 1e-9;

/// Default inter-axis angles for histograms and domain clouds (phi, psi, theta).
pub const REFERENCE_ANGLES: [f64; 3] = [1.53938, 1.60221, 1.60221];

/// Default half-width of the sampled measurement cube, m/s².
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;

pub const DEFAULT_SEED: u64 = 42;

const SAMPLE_STREAM: u64 = 0x05A3_D1E5;

/// Smallest upper edge of an automatically ranged histogram; relative errors
/// below this are rounding noise (e.g. at exactly orthogonal axes).
pub const MIN_AUTO_RANGE: f64 = 1e-9;

/// `| |a|_nonorth − |a|₂ |`.
pub fn abs_error<T: Scalar>(a: Vec3<T>, angles: &AxisAngles<T>) -> Result<T> {
    Ok((magnitude_nonorth(a, angles)? - magnitude_orth(a)).abs())
}

/// `abs_error / |a|_nonorth`; undefined at `a = 0`.
pub fn rel_error<T: Scalar>(a: Vec3<T>, angles: &AxisAngles<T>) -> Result<T> {
    let nonorth = magnitude_nonorth(a, angles)?;
    if nonorth == T::zero() {
        return Err(Error::Domain(
            "relative error undefined at zero acceleration".into(),
        ));
    }
    Ok((nonorth - magnitude_orth(a)).abs() / nonorth)
}

/// Maximum of an extremal problem and where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProblemResult<T> {
    /// m/s² for the absolute-error problem, dimensionless for the relative one.
    pub max_value: T,
    pub argmax: Vec3<T>,
    pub angles: AxisAngles<T>,
    pub evaluations: usize,
}

/// Settings of the grid-then-simplex search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Grid points per dimension.
    pub grid_points: usize,
    /// Number of best grid cells refined by the simplex method.
    pub refine_top: usize,
    /// Evaluation budget of each simplex run.
    pub max_simplex_evaluations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 25,
            refine_top: 10,
            max_simplex_evaluations: 20_000,
        }
    }
}

fn problem_bounds<T: Scalar>(angle_tol: T) -> Result<AngleBounds<T>> {
    if angle_tol > T::lit(MAX_PROBLEM_ANGLE_TOLERANCE) {
        return Err(Error::Domain(format!(
            "angle tolerance {angle_tol} exceeds {MAX_PROBLEM_ANGLE_TOLERANCE}"
        )));
    }
    AngleBounds::new(angle_tol)
}

/// Largest absolute error `| |a|_nonorth − |a|₂ |` subject to `|a|_nonorth = g`
/// and every angle within `(π/2)(1 ± angle_tol)`.
pub fn solve_problem1<T: Scalar>(
    g: GravityConstant<T>,
    angle_tol: T,
    opts: &SearchOptions,
) -> Result<ErrorProblemResult<T>> {
    let bounds = problem_bounds(angle_tol)?;
    let g = g.value();
    let on_sphere = move |u: Vec3<T>, angles: &AxisAngles<T>| -> Option<Vec3<T>> {
        let m = magnitude_nonorth(u, angles).ok()?;
        (m > T::zero()).then(|| u.scale(g / m))
    };
    let found = search(&bounds, opts, |u, angles| {
        let m = magnitude_nonorth(u, angles).ok()?;
        (m > T::zero()).then(|| g * (T::one() - magnitude_orth(u) / m).abs())
    });
    let argmax = on_sphere(found.direction, &found.angles)
        .ok_or_else(|| Error::Domain("degenerate maximiser".into()))?;
    Ok(ErrorProblemResult {
        max_value: abs_error(argmax, &found.angles)?,
        argmax,
        angles: found.angles,
        evaluations: found.evaluations,
    })
}

/// Largest relative error over the box `[−h, h]³` (`h = box_half_width`) and
/// every angle within `(π/2)(1 ± angle_tol)`.
///
/// Candidates are placed on the surface of the box along each search
/// direction, so the optimiser sees the actual points of the box.
pub fn solve_problem2<T: Scalar>(
    box_half_width: T,
    angle_tol: T,
    opts: &SearchOptions,
) -> Result<ErrorProblemResult<T>> {
    if !(box_half_width > T::zero()) || !box_half_width.is_finite() {
        return Err(Error::Domain(format!(
            "box half-width {box_half_width} must be positive"
        )));
    }
    let bounds = problem_bounds(angle_tol)?;
    let to_box = move |u: Vec3<T>| u.scale(box_half_width / u.max_abs());
    let found = search(&bounds, opts, |u, angles| rel_error(to_box(u), angles).ok());
    let argmax = to_box(found.direction);
    Ok(ErrorProblemResult {
        max_value: rel_error(argmax, &found.angles)?,
        argmax,
        angles: found.angles,
        evaluations: found.evaluations,
    })
}

struct SearchOutcome<T> {
    direction: Vec3<T>,
    angles: AxisAngles<T>,
    evaluations: usize,
}

/// Search coordinates `(polar, azimuth, t_phi, t_psi, t_theta)` with each
/// angle `π/2 + w sin t`.
struct Coordinates<T> {
    bounds: AngleBounds<T>,
}

impl<T: Scalar> Coordinates<T> {
    fn direction(polar: T, azimuth: T) -> Vec3<T> {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Vec3::new(sp * ca, sp * sa, cp)
    }

    fn angle(&self, t: T) -> T {
        self.bounds.center() + self.bounds.half_width() * t.sin()
    }

    fn t_of(&self, angle: T) -> T {
        let w = self.bounds.half_width();
        if w == T::zero() {
            T::zero()
        } else {
            ((angle - self.bounds.center()) / w)
                .max(-T::one())
                .min(T::one())
                .asin()
        }
    }

    fn decode(&self, x: &[T]) -> Option<(Vec3<T>, AxisAngles<T>)> {
        let angles = AxisAngles::within(
            self.angle(x[2]),
            self.angle(x[3]),
            self.angle(x[4]),
            &self.bounds,
        )
        .ok()?;
        Some((Self::direction(x[0], x[1]), angles))
    }
}

fn search<T, F>(bounds: &AngleBounds<T>, opts: &SearchOptions, objective: F) -> SearchOutcome<T>
where
    T: Scalar,
    F: Fn(Vec3<T>, &AxisAngles<T>) -> Option<T> + Sync,
{
    let n = opts.grid_points.max(2);
    let coords = Coordinates { bounds: *bounds };
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let nf = T::from_count(n);
    let step = |k: usize, m: usize| T::from_count(k) / T::from_count(m);
    let angle_grid: Vec<T> = (0..n).map(|k| lo + (hi - lo) * step(k, n - 1)).collect();
    let directions: Vec<(T, T)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                T::PI() * step(i, n - 1),
                T::two() * T::PI() * T::from_count(j) / nf,
            )
        })
        .collect();
    let combos: Vec<[usize; 3]> = (0..n)
        .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| [a, b, c])))
        .collect();

    // Each angle combination contributes its own best cells; candidates carry
    // their flat grid index so the merge is independent of scheduling.
    let keep = opts.refine_top.max(1);
    let mut candidates: Vec<(T, usize)> = combos
        .par_iter()
        .enumerate()
        .flat_map_iter(|(ci, idx)| {
            let angles = AxisAngles::within(
                angle_grid[idx[0]],
                angle_grid[idx[1]],
                angle_grid[idx[2]],
                bounds,
            )
            .expect("grid angles lie inside the band");
            let mut local: Vec<(T, usize)> = directions
                .iter()
                .enumerate()
                .filter_map(|(di, &(p, a))| {
                    let v = objective(Coordinates::direction(p, a), &angles)?;
                    Some((v, ci * directions.len() + di))
                })
                .collect();
            local.sort_by(rank);
            local.truncate(keep);
            local
        })
        .collect();
    candidates.sort_by(rank);
    candidates.truncate(keep);
    let grid_evaluations = combos.len() * directions.len();

    let settings = SimplexSettings {
        max_evaluations: opts.max_simplex_evaluations,
        value_tolerance: T::lit(1e-15),
        size_tolerance: T::lit(1e-10),
    };
    let grid_step = T::PI() / T::from_count(n - 1);
    let angle_step = T::lit(0.3);
    let steps = [grid_step, grid_step, angle_step, angle_step, angle_step];

    let refined: Vec<(T, Vec<T>, usize)> = candidates
        .par_iter()
        .map(|&(_, flat)| {
            let (ci, di) = (flat / directions.len(), flat % directions.len());
            let (polar, azimuth) = directions[di];
            let idx = combos[ci];
            let x0 = [
                polar,
                azimuth,
                coords.t_of(angle_grid[idx[0]]),
                coords.t_of(angle_grid[idx[1]]),
                coords.t_of(angle_grid[idx[2]]),
            ];
            let neg = |x: &[T]| match coords.decode(x).and_then(|(u, ang)| objective(u, &ang)) {
                Some(v) => -v,
                None => T::infinity(),
            };
            let r = nelder_mead::minimize(neg, &x0, &steps, &settings);
            (-r.value, r.x, r.evaluations)
        })
        .collect();

    let simplex_evaluations: usize = refined.iter().map(|r| r.2).sum();
    // best value wins; ties go to the earlier candidate
    let best = refined
        .into_iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.0.partial_cmp(&b.0).unwrap().then(j.cmp(i)))
        .map(|(_, r)| r)
        .expect("at least one candidate");
    let (direction, angles) = coords.decode(&best.1).expect("refined point decodes");
    SearchOutcome {
        direction,
        angles,
        evaluations: grid_evaluations + simplex_evaluations,
    }
}

/// Descending by value, ascending by index.
fn rank<T: Scalar>(a: &(T, usize), b: &(T, usize)) -> std::cmp::Ordering {
    b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1))
}

/// Uniform Monte-Carlo sampling of the cube `[−h, h]³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec<T> {
    pub angles: AxisAngles<T>,
    pub half_width: T,
    pub samples: usize,
    pub seed: u64,
}

impl<T: Scalar> SamplingSpec<T> {
    /// Reference angles, `[−20, 20]³`, seed 42.
    pub fn reference(samples: usize) -> Self {
        let [phi, psi, theta] = REFERENCE_ANGLES.map(T::lit);
        Self {
            angles: AxisAngles::new(phi, psi, theta).expect("reference angles are in range"),
            half_width: T::lit(DEFAULT_HALF_WIDTH),
            samples,
            seed: DEFAULT_SEED,
        }
    }
}

/// Sampled points with their relative errors, in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSamples<T> {
    pub points: Vec<(Vec3<T>, T)>,
    /// Points dropped for having a norm below [`MIN_SAMPLE_NORM`].
    pub discarded: usize,
}

/// Draws `spec.samples` points and evaluates the relative error at each.
///
/// Point `i` uses counters `3i .. 3i + 2` of a fixed stream, so the result is
/// the same for any number of worker threads.
pub fn sample_relative_errors<T: Scalar>(spec: &SamplingSpec<T>) -> Result<ErrorSamples<T>> {
    if spec.samples == 0 {
        return Err(Error::Input("sample count must be at least 1".into()));
    }
    if !(spec.half_width > T::zero()) || !spec.half_width.is_finite() {
        return Err(Error::Input(format!(
            "half-width {} must be positive",
            spec.half_width
        )));
    }
    let rng = CounterRng::new(spec.seed, SAMPLE_STREAM);
    let h = spec.half_width.to_f64().expect("finite half-width");
    let drawn: Vec<Option<(Vec3<T>, T)>> = (0..spec.samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = Vec3::new(
                rng.uniform_range_at(3 * i, -h, h),
                rng.uniform_range_at(3 * i + 1, -h, h),
                rng.uniform_range_at(3 * i + 2, -h, h),
            )
            .cast::<T>();
            if p.norm() < T::lit(MIN_SAMPLE_NORM) {
                return None;
            }
            rel_error(p, &spec.angles).ok().map(|e| (p, e))
        })
        .collect();
    let discarded = drawn.iter().filter(|d| d.is_none()).count();
    Ok(ErrorSamples {
        points: drawn.into_iter().flatten().collect(),
        discarded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec<T> {
    pub sampling: SamplingSpec<T>,
    pub bins: usize,
    /// Upper edge of the last bin; the largest observed error when `None`.
    pub range_max: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    /// `bins + 1` strictly increasing edges starting at 0.
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
    /// Samples with a defined relative error.
    pub kept: usize,
    pub discarded: usize,
    /// Kept samples above the last edge (only with an explicit `range_max`).
    pub overflow: usize,
}

impl<T: Scalar> Histogram<T> {
    /// Equal-width bins over `[0, upper]`; the last bin is closed on the right.
    pub fn from_values(values: &[T], bins: usize, range_max: Option<T>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Input("bin count must be at least 1".into()));
        }
        let upper = match range_max {
            Some(m) if m > T::zero() && m.is_finite() => m,
            Some(m) => {
                return Err(Error::Input(format!(
                    "histogram range {m} must be positive"
                )))
            }
            None => {
                let observed = values.iter().fold(T::zero(), |acc, &v| acc.max(v));
                observed.max(T::lit(MIN_AUTO_RANGE))
            }
        };
        let nb = T::from_count(bins);
        let edges: Vec<T> = (0..=bins).map(|i| upper * T::from_count(i) / nb).collect();
        let mut counts = vec![0usize; bins];
        let mut overflow = 0;
        for &v in values {
            if v > upper {
                overflow += 1;
                continue;
            }
            let idx = (v / upper * nb)
                .floor()
                .to_usize()
                .unwrap_or(0)
                .min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Self {
            edges,
            counts,
            kept: values.len(),
            discarded: 0,
            overflow,
        })
    }

    /// Index of the bin containing `value`, if inside the range.
    pub fn bin_of(&self, value: T) -> Option<usize> {
        let last = *self.edges.last()?;
        if value < T::zero() || value > last {
            return None;
        }
        let nb = T::from_count(self.counts.len());
        Some(
            (value / last * nb)
                .floor()
                .to_usize()?
                .min(self.counts.len() - 1),
        )
    }
}

/// Histogram of the relative error over uniformly sampled points of the cube.
pub fn histogram<T: Scalar>(spec: &HistogramSpec<T>) -> Result<Histogram<T>> {
    if spec.bins == 0 {
        return Err(Error::Input("bin count must be at least 1".into()));
    }
    let samples = sample_relative_errors(&spec.sampling)?;
    let values: Vec<T> = samples.points.iter().map(|p| p.1).collect();
    let mut h = Histogram::from_values(&values, spec.bins, spec.range_max)?;
    h.discarded = samples.discarded;
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
}

impl Comparison {
    pub fn holds<T: Scalar>(self, value: T, threshold: T) -> bool {
        match self {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
        }
    }
}

/// Sampled points whose relative error lies on one side of a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainCloud<T> {
    pub threshold: T,
    pub comparison: Comparison,
    /// `(point, relative error)` after thinning.
    pub points: Vec<(Vec3<T>, T)>,
    /// Matching samples before thinning.
    pub matched: usize,
    pub kept: usize,
}

impl<T: Scalar> DomainCloud<T> {
    /// Selects matching samples, keeping every k-th match when there are more
    /// than `max_points` of them.
    pub fn from_samples(
        samples: &ErrorSamples<T>,
        threshold: T,
        comparison: Comparison,
        max_points: Option<usize>,
    ) -> Result<Self> {
        if !(threshold >= T::zero()) {
            return Err(Error::Input(format!("threshold {threshold} must be >= 0")));
        }
        let matching: Vec<(Vec3<T>, T)> = samples
            .points
            .iter()
            .copied()
            .filter(|&(_, e)| comparison.holds(e, threshold))
            .collect();
        let matched = matching.len();
        let points = match max_points {
            Some(0) => Vec::new(),
            Some(budget) if matched > budget => {
                let stride = matched.div_ceil(budget);
                matching.into_iter().step_by(stride).collect()
            }
            _ => matching,
        };
        Ok(Self {
            threshold,
            comparison,
            points,
            matched,
            kept: samples.points.len(),
        })
    }
}

/// Samples the cube and returns the points on the chosen side of `threshold`.
pub fn domain_cloud<T: Scalar>(
    threshold: T,
    comparison: Comparison,
    spec: &SamplingSpec<T>,
    max_points: Option<usize>,
) -> Result<DomainCloud<T>> {
    let samples = sample_relative_errors(spec)?;
    DomainCloud::from_samples(&samples, threshold, comparison, max_points)
}
