//! Deterministic adaptive quadrature.
//!
//! Tensor-product Gauss-Legendre rules with adaptive bisection drive every
//! integral in the crate. Each cell is evaluated with two rules (order p and
//! p+2); the difference is the local error estimate and the cell is split
//! along its longest axis until the estimate meets the volume-weighted
//! tolerance. Traversal order is fixed, accumulation is compensated, and the
//! Monte Carlo cross-check for constraint regions draws from a seeded stream,
//! so identical inputs give bit-identical outputs.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Controls for the adaptive quadrature and the Monte Carlo cross-check.
#[derive(Debug, Clone)]
pub struct QuadSpec {
    /// Order of the low rule; the high rule uses `order + 2` points per axis.
    pub order: usize,
    /// Maximum bisection depth.
    pub max_depth: usize,
    /// Forced bisection depth before the tolerance test applies.
    pub min_depth: usize,
    /// Absolute tolerance for the whole integral.
    pub abs_tol: f64,
    /// Relative tolerance for the whole integral.
    pub rel_tol: f64,
    /// Seed for the Monte Carlo stream.
    pub seed: u64,
    /// Sample count for the Monte Carlo cross-check.
    pub mc_samples: usize,
}

impl QuadSpec {
    /// Defaults tuned per dimension: absolute 1e-8 up to two axes, 1e-4 above.
    pub fn for_dim(dim: usize) -> Self {
        let abs_tol = if dim <= 2 { 1e-8 } else { 1e-4 };
        QuadSpec {
            order: if dim <= 2 { 10 } else { 6 },
            max_depth: if dim <= 2 { 16 } else { 6 },
            min_depth: 0,
            abs_tol,
            rel_tol: 0.0,
            seed: 7,
            mc_samples: 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Config("quadrature order must be at least 2".into()));
        }
        if self.abs_tol <= 0.0 && self.rel_tol <= 0.0 {
            return Err(Error::Config("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub cells: usize,
    pub evals: usize,
    /// False when the depth budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; standard cosine initial guess.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Rule { nodes, weights }
    }

    /// Tensor-product evaluation over a cell.
    fn integrate<F: FnMut(&[f64]) -> f64>(
        &self,
        f: &mut F,
        cell: &[(f64, f64)],
        evals: &mut usize,
    ) -> f64 {
        let dim = cell.len();
        let k = self.nodes.len();
        let total = k.pow(dim as u32);
        let mut point = vec![0.0; dim];
        let mut sum = 0.0;
        let mut comp = 0.0;
        for flat in 0..total {
            let mut rest = flat;
            let mut w = 1.0;
            for (d, &(lo, hi)) in cell.iter().enumerate() {
                let idx = rest % k;
                rest /= k;
                let half = 0.5 * (hi - lo);
                point[d] = lo + half * (self.nodes[idx] + 1.0);
                w *= half * self.weights[idx];
            }
            *evals += 1;
            let term = w * f(&point);
            // Neumaier compensated accumulation
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }
}

fn cell_volume(cell: &[(f64, f64)]) -> f64 {
    cell.iter().map(|(lo, hi)| hi - lo).product()
}

fn longest_axis(cell: &[(f64, f64)]) -> usize {
    let mut axis = 0;
    let mut best = -1.0;
    for (d, &(lo, hi)) in cell.iter().enumerate() {
        if hi - lo > best {
            best = hi - lo;
            axis = d;
        }
    }
    axis
}

/// Adaptive integral of `f` over an axis-aligned box.
///
/// Depth exhaustion is not an error: the result comes back with the inflated
/// error estimate and `converged = false`.
pub fn quad_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bounds: &[(f64, f64)],
    spec: &QuadSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    for &(lo, hi) in bounds {
        // rejects NaN endpoints as well
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Config(format!("empty integration axis [{lo}, {hi}]")));
        }
    }
    let low = Rule::new(spec.order);
    let high = Rule::new(spec.order + 2);
    let root_vol = cell_volume(bounds);

    let mut value = 0.0;
    let mut value_comp = 0.0;
    let mut err = 0.0;
    let mut cells = 0usize;
    let mut evals = 0usize;
    let mut converged = true;

    let mut stack: Vec<(Vec<(f64, f64)>, usize)> = vec![(bounds.to_vec(), 0)];
    while let Some((cell, depth)) = stack.pop() {
        if depth < spec.min_depth {
            let axis = longest_axis(&cell);
            let (lo, hi) = cell[axis];
            let mid = 0.5 * (lo + hi);
            let mut left = cell.clone();
            let mut right = cell;
            left[axis].1 = mid;
            right[axis].0 = mid;
            stack.push((right, depth + 1));
            stack.push((left, depth + 1));
            continue;
        }
        let i_low = low.integrate(&mut f, &cell, &mut evals);
        let i_high = high.integrate(&mut f, &cell, &mut evals);
        let cell_err = (i_high - i_low).abs().max(1e-16 * i_high.abs());
        let budget =
            spec.abs_tol.max(spec.rel_tol * i_high.abs()) * (cell_volume(&cell) / root_vol);
        if cell_err <= budget || depth >= spec.max_depth {
            if cell_err > budget {
                converged = false;
            }
            cells += 1;
            let t = value + i_high;
            if value.abs() >= i_high.abs() {
                value_comp += (value - t) + i_high;
            } else {
                value_comp += (i_high - t) + value;
            }
            value = t;
            err += cell_err;
        } else {
            let axis = longest_axis(&cell);
            let (lo, hi) = cell[axis];
            let mid = 0.5 * (lo + hi);
            let mut left = cell.clone();
            let mut right = cell;
            left[axis].1 = mid;
            right[axis].0 = mid;
            stack.push((right, depth + 1));
            stack.push((left, depth + 1));
        }
    }
    Ok(QuadResult {
        value: value + value_comp,
        error_estimate: err,
        cells,
        evals,
        converged,
    })
}

/// Integral of `f` over a constraint region inside a bounding box.
#[derive(Debug, Clone)]
pub struct RegionQuad {
    pub value: f64,
    /// Max of the smooth-cell estimate and the boundary-cell uncertainty.
    pub error_estimate: f64,
    pub mc_value: f64,
    pub mc_sigma: f64,
    pub cells: usize,
    pub evals: usize,
    pub converged: bool,
}

/// Sharp-cutoff quadrature over `{p : inside(p)}` with a seeded Monte Carlo
/// cross-check.
///
/// Cells whose sample points (rule nodes, corners, center) all test inside are
/// integrated as smooth cells; fully outside cells are dropped; mixed cells
/// are refined to `max_depth` and then counted with their whole |f|-mass as
/// uncertainty. The integrand is never smoothed across the cutoff.
pub fn quad_region<F, G>(
    mut f: F,
    inside: G,
    bounds: &[(f64, f64)],
    spec: &QuadSpec,
) -> Result<RegionQuad>
where
    F: FnMut(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    spec.validate()?;
    let dim = bounds.len();
    let low = Rule::new(spec.order);
    let high = Rule::new(spec.order + 2);
    let root_vol = cell_volume(bounds);

    let mut value = 0.0;
    let mut smooth_err = 0.0;
    let mut boundary_err = 0.0;
    let mut cells = 0usize;
    let mut evals = 0usize;
    let mut converged = true;

    // sample layout per cell: corners, center and low-rule nodes
    let classify = |cell: &[(f64, f64)], evals: &mut usize| -> (bool, bool) {
        let mut any_in = false;
        let mut any_out = false;
        let corners = 1usize << dim;
        let mut p = vec![0.0; dim];
        for c in 0..corners {
            for d in 0..dim {
                p[d] = if c >> d & 1 == 0 { cell[d].0 } else { cell[d].1 };
            }
            *evals += 1;
            if inside(&p) {
                any_in = true;
            } else {
                any_out = true;
            }
        }
        for d in 0..dim {
            p[d] = 0.5 * (cell[d].0 + cell[d].1);
        }
        if inside(&p) {
            any_in = true;
        } else {
            any_out = true;
        }
        let k = low.nodes.len();
        let total = k.pow(dim as u32);
        for flat in 0..total {
            let mut rest = flat;
            for (d, &(lo, hi)) in cell.iter().enumerate() {
                let idx = rest % k;
                rest /= k;
                p[d] = lo + 0.5 * (hi - lo) * (low.nodes[idx] + 1.0);
            }
            if inside(&p) {
                any_in = true;
            } else {
                any_out = true;
            }
            if any_in && any_out {
                break;
            }
        }
        (any_in, any_out)
    };

    let mut stack: Vec<(Vec<(f64, f64)>, usize)> = vec![(bounds.to_vec(), 0)];
    let min_depth = spec.min_depth.max(2).min(spec.max_depth);
    while let Some((cell, depth)) = stack.pop() {
        let split = |stack: &mut Vec<(Vec<(f64, f64)>, usize)>, cell: Vec<(f64, f64)>| {
            let axis = longest_axis(&cell);
            let (lo, hi) = cell[axis];
            let mid = 0.5 * (lo + hi);
            let mut left = cell.clone();
            let mut right = cell;
            left[axis].1 = mid;
            right[axis].0 = mid;
            stack.push((right, depth + 1));
            stack.push((left, depth + 1));
        };
        if depth < min_depth {
            split(&mut stack, cell);
            continue;
        }
        let (any_in, any_out) = classify(&cell, &mut evals);
        if !any_in {
            cells += 1;
            continue;
        }
        if !any_out {
            // treated as fully interior
            let i_low = low.integrate(&mut f, &cell, &mut evals);
            let i_high = high.integrate(&mut f, &cell, &mut evals);
            let cell_err = (i_high - i_low).abs().max(1e-16 * i_high.abs());
            let budget = spec.abs_tol.max(spec.rel_tol * i_high.abs())
                * (cell_volume(&cell) / root_vol);
            if cell_err <= budget || depth >= spec.max_depth {
                if cell_err > budget {
                    converged = false;
                }
                cells += 1;
                value += i_high;
                smooth_err += cell_err;
            } else {
                split(&mut stack, cell);
            }
            continue;
        }
        // mixed cell
        if depth < spec.max_depth {
            split(&mut stack, cell);
        } else {
            let mut fmax = 0.0f64;
            let masked = high.integrate(
                &mut |p: &[f64]| {
                    if inside(p) {
                        let v = f(p);
                        fmax = fmax.max(v.abs());
                        v
                    } else {
                        0.0
                    }
                },
                &cell,
                &mut evals,
            );
            cells += 1;
            value += masked;
            boundary_err += cell_volume(&cell) * fmax;
        }
    }

    // Monte Carlo cross-check with a fixed seed.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut p = vec![0.0; dim];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..spec.mc_samples {
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            p[d] = rng.random_range(lo..hi);
        }
        let v = if inside(&p) { f(&p) } else { 0.0 };
        sum += v;
        sum_sq += v * v;
    }
    let nf = spec.mc_samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    let mc_value = root_vol * mean;
    let mc_sigma = root_vol * (var / nf).sqrt();

    let error_estimate = smooth_err.max(boundary_err);
    let allowance = 5.0 * (error_estimate + mc_sigma) + 1e-12;
    if (value - mc_value).abs() > allowance {
        return Err(Error::EstimateInconsistency {
            quad: value,
            mc: mc_value,
            allowance,
        });
    }
    Ok(RegionQuad {
        value,
        error_estimate,
        mc_value,
        mc_sigma,
        cells,
        evals,
        converged,
    })
}

/// Plain seeded Monte Carlo over a box (exposed for the sampling-rate tests).
pub fn monte_carlo_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bounds: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = bounds.len();
    let mut p = vec![0.0; dim];
    let vol = cell_volume(bounds);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            p[d] = rng.random_range(lo..hi);
        }
        let v = f(&p);
        sum += v;
        sum_sq += v * v;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    (vol * mean, vol * (var / nf).sqrt())
}
