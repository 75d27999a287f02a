//! Constraint regions: manifolds with corners inside a metric chart.
//!
//! A region is the set {p : c_i(p) >= 0 for all i} for a list of smooth
//! constraint functions. Faces are the loci where a subset of constraints is
//! active; the builtin catalog supplies explicit parametrizations for its
//! faces (and for the region interiors), which is what lets the polyhedral
//! Gauss-Bonnet assembly integrate to tight tolerances.
//!
//! The outer angle at a boundary point is the set of unit vectors making a
//! nonpositive inner product with every tangent-cone direction; it spans the
//! cone of negated constraint gradients. Its normalized spherical measure is
//! exact for one or two active constraints and seeded rejection sampling
//! beyond that.
//!
//! Sign convention: the second fundamental form of a face is
//! II = -Hess(c) / |grad c| restricted to the face tangent space, which makes
//! the boundary circle of a flat disk have II = +1/r. The two-dimensional
//! assembly closes to the classical Gauss-Bonnet identity with this choice.

use crate::chart::{MetricChart, Point};
use crate::curvature::christoffel;
use crate::linalg;
use crate::quad::{self, QuadSpec};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// One defining inequality c(p) >= 0.
#[derive(Clone)]
pub struct Constraint {
    pub label: String,
    f: ScalarFn,
    grad: Option<VecFn>,
    hess: Option<VecFn>,
    /// Typical magnitude of c, used to scale activity tolerances.
    pub scale: f64,
}

impl Constraint {
    pub fn new(label: &str, f: ScalarFn) -> Self {
        Constraint {
            label: label.to_string(),
            f,
            grad: None,
            hess: None,
            scale: 1.0,
        }
    }

    pub fn with_derivatives(mut self, grad: VecFn, hess: VecFn) -> Self {
        self.grad = Some(grad);
        self.hess = Some(hess);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn value(&self, coords: &[f64]) -> f64 {
        (self.f)(coords)
    }

    /// Coordinate partials dc (a covector).
    pub fn grad_covector(&self, chart: &MetricChart, coords: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = &self.grad {
            return Ok(g(coords));
        }
        let n = chart.dim();
        let mut out = vec![0.0; n];
        for axis in 0..n {
            let h = chart.fd_step(axis)?;
            let d = |h: f64| {
                let mut plus = coords.to_vec();
                let mut minus = coords.to_vec();
                plus[axis] += h;
                minus[axis] -= h;
                ((self.f)(&plus) - (self.f)(&minus)) / (2.0 * h)
            };
            out[axis] = (4.0 * d(0.5 * h) - d(h)) / 3.0;
        }
        Ok(out)
    }

    /// Plain second-partials matrix of c (no connection term).
    pub fn hess_coords(&self, chart: &MetricChart, coords: &[f64]) -> Result<Vec<f64>> {
        if let Some(h) = &self.hess {
            return Ok(h(coords));
        }
        let n = chart.dim();
        let mut out = vec![0.0; n * n];
        for axis in 0..n {
            let h = chart.fd_outer_step(axis)?;
            let d = |h: f64| -> Result<Vec<f64>> {
                let mut plus = coords.to_vec();
                let mut minus = coords.to_vec();
                plus[axis] += h;
                minus[axis] -= h;
                let gp = self.grad_covector(chart, &plus)?;
                let gm = self.grad_covector(chart, &minus)?;
                Ok(gp
                    .iter()
                    .zip(&gm)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect())
            };
            let coarse = d(h)?;
            let fine = d(0.5 * h)?;
            for j in 0..n {
                out[axis * n + j] = (4.0 * fine[j] - coarse[j]) / 3.0;
            }
        }
        // symmetrize the mixed partials
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }
}

/// Parametrized piece of a face (or of the region interior, `dim == n`).
#[derive(Clone)]
pub struct FaceChart {
    pub label: String,
    /// Indices of the constraints active on this face (empty for interiors).
    pub active: Vec<usize>,
    /// Intrinsic dimension of the piece.
    pub dim: usize,
    /// Parameter box.
    pub domain: Vec<(f64, f64)>,
    map: MapFn,
}

impl FaceChart {
    pub fn new(label: &str, active: Vec<usize>, domain: Vec<(f64, f64)>, map: MapFn) -> Self {
        let dim = domain.len();
        FaceChart {
            label: label.to_string(),
            active,
            dim,
            domain,
            map,
        }
    }

    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        (self.map)(t)
    }

    /// Jacobian d(map)/dt as an n x m matrix (columns indexed by parameters),
    /// by Richardson-refined central differences.
    pub fn jacobian(&self, t: &[f64], ambient_dim: usize) -> Vec<f64> {
        let m = self.dim;
        let mut j = vec![0.0; ambient_dim * m];
        for a in 0..m {
            let range = self.domain[a].1 - self.domain[a].0;
            let h = (1e-6 * range).max(1e-7);
            let d = |h: f64| -> Vec<f64> {
                let mut plus = t.to_vec();
                let mut minus = t.to_vec();
                plus[a] += h;
                minus[a] -= h;
                let fp = (self.map)(&plus);
                let fm = (self.map)(&minus);
                fp.iter()
                    .zip(&fm)
                    .map(|(x, y)| (x - y) / (2.0 * h))
                    .collect()
            };
            let coarse = d(h);
            let fine = d(0.5 * h);
            for i in 0..ambient_dim {
                j[i * m + a] = (4.0 * fine[i] - coarse[i]) / 3.0;
            }
        }
        j
    }
}

/// Known topological data: the inner Euler characteristic is
/// chi(P) - chi(boundary P).
#[derive(Debug, Clone, Copy)]
pub struct RegionTopology {
    pub chi: i64,
    pub chi_boundary: i64,
}

/// A manifold with corners cut out of a chart by constraints.
#[derive(Clone)]
pub struct Region {
    pub name: String,
    pub chart: MetricChart,
    pub constraints: Vec<Constraint>,
    /// Codimension-one faces with parametrizations (builtin regions).
    pub faces: Vec<FaceChart>,
    /// Corner points (chart coordinates) with their active sets.
    pub corners: Vec<(Vec<f64>, Vec<usize>)>,
    /// Full-dimensional parametrized pieces covering the interior, when known.
    pub interior: Vec<FaceChart>,
    pub topology: Option<RegionTopology>,
    /// Counts of inner cells per dimension, for chi' when topology is unknown.
    pub cell_data: Option<Vec<i64>>,
    /// Bounding box used by sharp-cutoff quadrature.
    pub bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn contains(&self, coords: &[f64], tol: f64) -> bool {
        self.constraints
            .iter()
            .all(|c| c.value(coords) >= -tol * c.scale)
    }

    /// Metric at raw coordinates (wraps periodic axes).
    pub fn metric(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let p = self.chart.point(coords)?;
        self.chart.metric_at(&p)
    }

    /// g-gradient vector of a constraint: g^{-1} dc.
    pub fn grad_vector(&self, idx: usize, coords: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let g = self.metric(coords)?;
        let ginv = linalg::inverse(&g, n).ok_or(Error::NotPositiveDefinite {
            context: format!("{} at {:?}", self.chart.name, coords),
        })?;
        let dc = self.constraints[idx].grad_covector(&self.chart, coords)?;
        let mut v = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                v[i] += ginv[i * n + j] * dc[j];
            }
        }
        Ok(v)
    }

    /// Covariant Hessian of a constraint: Hess_ij = d_i d_j c - Gamma^k_{ij} d_k c.
    pub fn covariant_hessian(&self, idx: usize, coords: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let p = self.chart.point(coords)?;
        let gamma = christoffel(&self.chart, &p)?;
        let dc = self.constraints[idx].grad_covector(&self.chart, coords)?;
        let mut h = self.constraints[idx].hess_coords(&self.chart, coords)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    h[i * n + j] -= gamma.get(k, i, j) * dc[k];
                }
            }
        }
        Ok(h)
    }
}

pub const DEFAULT_ACTIVE_TOL: f64 = 1e-8;

/// Indices of constraints active at p (|c_i| <= tol * scale).
pub fn active_constraints(region: &Region, p: &Point, tol: f64) -> Result<Vec<usize>> {
    let mut active = Vec::new();
    for (i, c) in region.constraints.iter().enumerate() {
        let v = c.value(p.coords());
        if v < -tol * c.scale {
            return Err(Error::OutsideRegion {
                index: i,
                violation: -v,
            });
        }
        if v.abs() <= tol * c.scale {
            active.push(i);
        }
    }
    Ok(active)
}

/// How the outer-angle measure was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterAngleMethod {
    /// Codimension one: the cell is the single outward normal.
    FullNormal,
    /// Exact planar formula for two active constraints.
    Exact,
    /// Seeded rejection sampling in the normal space.
    Sampled { samples: usize },
}

/// The outer angle at a boundary point: spanning unit normals and the
/// normalized measure of the spherical cell they bound in the normal space.
#[derive(Debug, Clone)]
pub struct OuterAngleCell {
    pub base: Vec<f64>,
    /// Outward unit normals (negated constraint gradients, g-normalized).
    pub normals: Vec<Vec<f64>>,
    /// Normalized spherical measure in [0, 1].
    pub measure: f64,
    pub codim: usize,
    pub method: OuterAngleMethod,
}

/// Default sample count for the rejection sampler.
pub const OUTER_ANGLE_SAMPLES: usize = 200_000;

/// Outer angle of the region at a boundary point.
///
/// Exact closed forms cover one and two active constraints; higher corner
/// codimension falls back to rejection sampling with the given seed.
pub fn outer_angle_measure(
    region: &Region,
    p: &Point,
    samples: usize,
    seed: u64,
) -> Result<OuterAngleCell> {
    let active = active_constraints(region, p, DEFAULT_ACTIVE_TOL)?;
    let k = active.len();
    if k == 0 {
        return Err(Error::Range(
            "outer angle requested at an interior point".into(),
        ));
    }
    let n = region.dim();
    let g = region.metric(p.coords())?;
    let mut grads = Vec::with_capacity(k);
    for &i in &active {
        let u = region.grad_vector(i, p.coords())?;
        let norm = linalg::g_dot(&g, n, &u, &u).sqrt();
        if norm < 1e-10 {
            return Err(Error::SingularGradient { norm });
        }
        grads.push(u);
    }
    // corner regularity: the Gram matrix of the gradients must be well
    // conditioned relative to its diagonal
    let mut gram = vec![0.0; k * k];
    let mut scale = 1.0f64;
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = linalg::g_dot(&g, n, &grads[a], &grads[b]);
        }
        scale *= gram[a * k + a];
    }
    if det_small(&gram, k).abs() < 1e-10 * scale.max(1e-300) {
        return Err(Error::CornerRegularity);
    }

    let normals: Vec<Vec<f64>> = grads
        .iter()
        .map(|u| {
            let norm = linalg::g_dot(&g, n, u, u).sqrt();
            u.iter().map(|x| -x / norm).collect()
        })
        .collect();

    if k == 1 {
        return Ok(OuterAngleCell {
            base: p.coords().to_vec(),
            normals,
            measure: 1.0,
            codim: 1,
            method: OuterAngleMethod::FullNormal,
        });
    }
    if k == 2 {
        let dot = linalg::g_dot(&g, n, &grads[0], &grads[1]);
        let n0 = linalg::g_dot(&g, n, &grads[0], &grads[0]).sqrt();
        let n1 = linalg::g_dot(&g, n, &grads[1], &grads[1]).sqrt();
        let alpha = (dot / (n0 * n1)).clamp(-1.0, 1.0).acos();
        return Ok(OuterAngleCell {
            base: p.coords().to_vec(),
            normals,
            measure: alpha / (2.0 * std::f64::consts::PI),
            codim: 2,
            method: OuterAngleMethod::Exact,
        });
    }

    let measure = sample_outer_measure(&g, n, &grads, samples, seed)?;
    Ok(OuterAngleCell {
        base: p.coords().to_vec(),
        normals,
        measure,
        codim: k,
        method: OuterAngleMethod::Sampled { samples },
    })
}

/// Rejection sampling of the outer-angle cell inside the unit sphere of the
/// normal space: a direction is accepted when its expansion over the
/// constraint gradients has no positive coefficient.
pub fn sample_outer_measure(
    g: &[f64],
    n: usize,
    grads: &[Vec<f64>],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let k = grads.len();
    // g-orthonormal basis of the normal space (gradients pre-normalized so the
    // degeneracy cutoff is relative)
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for u in grads {
        let norm0 = linalg::g_dot(g, n, u, u).sqrt();
        if norm0 < 1e-150 {
            return Err(Error::SingularGradient { norm: norm0 });
        }
        let mut v: Vec<f64> = u.iter().map(|x| x / norm0).collect();
        for e in &basis {
            let c = linalg::g_dot(g, n, &v, e);
            for (x, y) in v.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
        let norm2 = linalg::g_dot(g, n, &v, &v);
        if norm2 <= 1e-12 {
            return Err(Error::CornerRegularity);
        }
        let norm = norm2.sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
    }
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = linalg::g_dot(g, n, &grads[a], &grads[b]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0usize;
    for _ in 0..samples {
        // isotropic direction in the normal space
        let xi: Vec<f64> = (0..k).map(|_| gaussian(&mut rng)).collect();
        let mut v = vec![0.0; n];
        for (c, e) in xi.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(e) {
                *x += c * y;
            }
        }
        // coefficients of v over the gradients: solve Gram * mu = <u_i, v>
        let mut rhs: Vec<f64> = grads.iter().map(|u| linalg::g_dot(g, n, u, &v)).collect();
        let mut m = gram.clone();
        if linalg::solve(&mut m, &mut rhs, k).is_none() {
            return Err(Error::CornerRegularity);
        }
        if rhs.iter().all(|&mu| mu <= 0.0) {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / samples as f64)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn det_small(m: &[f64], k: usize) -> f64 {
    match k {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut a = m.to_vec();
            let mut det = 1.0;
            for col in 0..k {
                let mut pivot = col;
                for r in (col + 1)..k {
                    if a[r * k + col].abs() > a[pivot * k + col].abs() {
                        pivot = r;
                    }
                }
                if a[pivot * k + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for c in 0..k {
                        a.swap(col * k + c, pivot * k + c);
                    }
                    det = -det;
                }
                det *= a[col * k + col];
                for r in (col + 1)..k {
                    let f = a[r * k + col] / a[col * k + col];
                    for c in col..k {
                        a[r * k + c] -= f * a[col * k + c];
                    }
                }
            }
            det
        }
    }
}

/// The second fundamental form of a face restricted to its tangent space,
/// expressed in a g-orthonormal tangent basis.
#[derive(Debug, Clone)]
pub struct SecondFundamentalForm {
    /// Orthonormal basis of the face tangent space (coordinate components).
    pub basis: Vec<Vec<f64>>,
    /// Matrix of the form in that basis, (n-k) x (n-k), row-major.
    pub matrix: Vec<f64>,
}

impl SecondFundamentalForm {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The single entry of a one-dimensional form (edges, fibre circles).
    pub fn scalar(&self) -> f64 {
        self.matrix[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// II_Z at a face point for a normal direction Z in the outer cone.
///
/// The form is -Hess(c)/|grad c| per active constraint, combined linearly via
/// the decomposition of Z over the outward unit normals.
pub fn second_fundamental_form(
    region: &Region,
    active: &[usize],
    p: &Point,
    z: &[f64],
) -> Result<SecondFundamentalForm> {
    let n = region.dim();
    let k = active.len();
    if k == 0 || k >= n {
        return Err(Error::Range(format!(
            "second fundamental form needs 1 <= k < n active constraints (got {k})"
        )));
    }
    let g = region.metric(p.coords())?;
    let mut grads = Vec::with_capacity(k);
    let mut norms = Vec::with_capacity(k);
    for &i in active {
        let u = region.grad_vector(i, p.coords())?;
        let norm = linalg::g_dot(&g, n, &u, &u).sqrt();
        if norm < 1e-10 {
            return Err(Error::SingularGradient { norm });
        }
        grads.push(u);
        norms.push(norm);
    }
    // decompose Z over the outward unit normals n_i = -u_i / |u_i|
    let normals: Vec<Vec<f64>> = grads
        .iter()
        .zip(&norms)
        .map(|(u, &nm)| u.iter().map(|x| -x / nm).collect())
        .collect();
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = linalg::g_dot(&g, n, &normals[a], &normals[b]);
        }
    }
    let mut mu: Vec<f64> = normals
        .iter()
        .map(|nv| linalg::g_dot(&g, n, nv, z))
        .collect();
    let mut m = gram.clone();
    linalg::solve(&mut m, &mut mu, k).ok_or(Error::CornerRegularity)?;
    // Z must lie in the nonnegative span of the outward normals
    let mut recon = vec![0.0; n];
    for (c, nv) in mu.iter().zip(&normals) {
        for (x, y) in recon.iter_mut().zip(nv) {
            *x += c * y;
        }
    }
    let mut diff = 0.0;
    for (a, b) in recon.iter().zip(z) {
        diff += (a - b) * (a - b);
    }
    if diff.sqrt() > 1e-6 {
        return Err(Error::Range(
            "normal direction does not lie in the span of the active gradients".into(),
        ));
    }
    if mu.iter().any(|&c| c < -1e-9) {
        return Err(Error::Range(
            "normal direction lies outside the outer cone".into(),
        ));
    }

    // orthonormal basis of the face tangent space; candidates are coordinate
    // directions pre-normalized to unit g-length so axes with tiny metric
    // entries are not lost
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for a in 0..n {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        let norm0 = linalg::g_dot(&g, n, &v, &v).sqrt();
        for x in v.iter_mut() {
            *x /= norm0;
        }
        for u in &grads {
            let c = linalg::g_dot(&g, n, &v, u) / linalg::g_dot(&g, n, u, u);
            for (x, y) in v.iter_mut().zip(u) {
                *x -= c * y;
            }
        }
        for e in &basis {
            let c = linalg::g_dot(&g, n, &v, e);
            for (x, y) in v.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
        let norm2 = linalg::g_dot(&g, n, &v, &v);
        if norm2 > 1e-12 {
            let norm = norm2.sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            basis.push(v);
            if basis.len() == n - k {
                break;
            }
        }
    }
    if basis.len() != n - k {
        return Err(Error::CornerRegularity);
    }

    // II_Z = sum_i mu_i * (-Hess(c_i)/|grad c_i|)
    let mut matrix = vec![0.0; (n - k) * (n - k)];
    for (t, (&i, &norm)) in active.iter().zip(&norms).enumerate() {
        let hess = region.covariant_hessian(i, p.coords())?;
        let w = mu[t] / norm;
        for a in 0..(n - k) {
            for b in 0..(n - k) {
                let mut v = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        v += basis[a][x] * hess[x * n + y] * basis[b][y];
                    }
                }
                matrix[a * (n - k) + b] -= w * v;
            }
        }
    }
    Ok(SecondFundamentalForm { basis, matrix })
}

/// Riemannian volume of a parametrized face piece.
pub fn face_volume(region: &Region, face: &FaceChart, spec: &QuadSpec) -> Result<f64> {
    let n = region.dim();
    let m = face.dim;
    let r = quad::quad_box(
        |t| {
            let p = face.point(t);
            let g = region.chart.metric_raw(&p);
            let j = face.jacobian(t, n);
            // induced metric J^T g J
            let mut ind = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for x in 0..n {
                        for y in 0..n {
                            s += j[x * m + a] * g[x * n + y] * j[y * m + b];
                        }
                    }
                    ind[a * m + b] = s;
                }
            }
            linalg::spd_det(&ind, m).map(|d| d.sqrt()).unwrap_or(0.0)
        },
        &face.domain,
        spec,
    )?;
    Ok(r.value)
}

/// Inner Euler characteristic chi' = chi(P) - chi(boundary P).
///
/// For even-dimensional regions the boundary is closed and odd-dimensional,
/// so chi' = chi(P).
pub fn inner_euler(region: &Region) -> Result<i64> {
    if let Some(t) = region.topology {
        return Ok(t.chi - t.chi_boundary);
    }
    if let Some(cells) = &region.cell_data {
        let mut chi = 0i64;
        for (d, count) in cells.iter().enumerate() {
            if d % 2 == 0 {
                chi += count;
            } else {
                chi -= count;
            }
        }
        return Ok(chi);
    }
    Err(Error::InsufficientData)
}

/// Spot-check corner regularity at face sample points: the active constraint
/// gradients must stay linearly independent.
pub fn check_corner_regularity(region: &Region, samples_per_face: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = region.dim();
    for face in &region.faces {
        for _ in 0..samples_per_face {
            let t: Vec<f64> = face
                .domain
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect();
            let coords = face.point(&t);
            let g = region.metric(&coords)?;
            let k = face.active.len();
            let mut grads = Vec::with_capacity(k);
            for &i in &face.active {
                grads.push(region.grad_vector(i, &coords)?);
            }
            let mut gram = vec![0.0; k * k];
            let mut scale = 1.0;
            for a in 0..k {
                for b in 0..k {
                    gram[a * k + b] = linalg::g_dot(&g, n, &grads[a], &grads[b]);
                }
                scale *= gram[a * k + a];
            }
            if det_small(&gram, k).abs() < 1e-10 * scale.max(1e-300) {
                return Err(Error::CornerRegularity);
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// builtin catalog
// ---------------------------------------------------------------------------

/// Unit square in the flat plane.
pub fn unit_square() -> Region {
    let chart = crate::chart::euclidean(2);
    let mk = |label: &str, f: ScalarFn, grad: [f64; 2]| {
        Constraint::new(label, f).with_derivatives(
            Arc::new(move |_| grad.to_vec()),
            Arc::new(|_| vec![0.0; 4]),
        )
    };
    let constraints = vec![
        mk("left", Arc::new(|p: &[f64]| p[0]), [1.0, 0.0]),
        mk("right", Arc::new(|p: &[f64]| 1.0 - p[0]), [-1.0, 0.0]),
        mk("bottom", Arc::new(|p: &[f64]| p[1]), [0.0, 1.0]),
        mk("top", Arc::new(|p: &[f64]| 1.0 - p[1]), [0.0, -1.0]),
    ];
    let faces = vec![
        FaceChart::new(
            "left",
            vec![0],
            vec![(0.0, 1.0)],
            Arc::new(|t: &[f64]| vec![0.0, t[0]]),
        ),
        FaceChart::new(
            "right",
            vec![1],
            vec![(0.0, 1.0)],
            Arc::new(|t: &[f64]| vec![1.0, t[0]]),
        ),
        FaceChart::new(
            "bottom",
            vec![2],
            vec![(0.0, 1.0)],
            Arc::new(|t: &[f64]| vec![t[0], 0.0]),
        ),
        FaceChart::new(
            "top",
            vec![3],
            vec![(0.0, 1.0)],
            Arc::new(|t: &[f64]| vec![t[0], 1.0]),
        ),
    ];
    let corners = vec![
        (vec![0.0, 0.0], vec![0, 2]),
        (vec![1.0, 0.0], vec![1, 2]),
        (vec![1.0, 1.0], vec![1, 3]),
        (vec![0.0, 1.0], vec![0, 3]),
    ];
    let interior = vec![FaceChart::new(
        "interior",
        vec![],
        vec![(0.0, 1.0), (0.0, 1.0)],
        Arc::new(|t: &[f64]| t.to_vec()),
    )];
    Region {
        name: "square".into(),
        chart,
        constraints,
        faces,
        corners,
        interior,
        topology: Some(RegionTopology {
            chi: 1,
            chi_boundary: 0,
        }),
        cell_data: None,
        bounds: vec![(0.0, 1.0), (0.0, 1.0)],
    }
}

/// Planar wedge with a given interior angle at the origin, for outer-angle
/// tests.
pub fn planar_wedge(interior_angle: f64) -> Region {
    let chart = crate::chart::euclidean_box(&[(-2.0, 2.0), (-2.0, 2.0)]);
    let a = interior_angle;
    let c1 = Constraint::new("edge-0", Arc::new(|p: &[f64]| p[1])).with_derivatives(
        Arc::new(|_| vec![0.0, 1.0]),
        Arc::new(|_| vec![0.0; 4]),
    );
    // second edge along direction (cos a, sin a): interior on the side where
    // the rotated inward normal points
    let (sa, ca) = a.sin_cos();
    let c2 = Constraint::new("edge-a", Arc::new(move |p: &[f64]| sa * p[0] - ca * p[1]))
        .with_derivatives(
            Arc::new(move |_| vec![sa, -ca]),
            Arc::new(|_| vec![0.0; 4]),
        );
    Region {
        name: format!("wedge({a})"),
        chart,
        constraints: vec![c1, c2],
        faces: vec![],
        corners: vec![(vec![0.0, 0.0], vec![0, 1])],
        interior: vec![],
        topology: Some(RegionTopology {
            chi: 1,
            chi_boundary: 1,
        }),
        cell_data: None,
        bounds: vec![(-2.0, 2.0), (-2.0, 2.0)],
    }
}

/// Round disk of radius r in the flat plane.
pub fn flat_disk(r: f64) -> Region {
    let pad = 1.25 * r;
    let chart = crate::chart::euclidean_box(&[(-pad, pad), (-pad, pad)]);
    let r2 = r * r;
    let c = Constraint::new(
        "rim",
        Arc::new(move |p: &[f64]| r2 - p[0] * p[0] - p[1] * p[1]),
    )
    .with_derivatives(
        Arc::new(|p: &[f64]| vec![-2.0 * p[0], -2.0 * p[1]]),
        Arc::new(|_| vec![-2.0, 0.0, 0.0, -2.0]),
    )
    .with_scale(r * r);
    let rim = FaceChart::new(
        "rim",
        vec![0],
        vec![(0.0, 2.0 * std::f64::consts::PI)],
        Arc::new(move |t: &[f64]| vec![r * t[0].cos(), r * t[0].sin()]),
    );
    Region {
        name: "disk".into(),
        chart,
        constraints: vec![c],
        faces: vec![rim],
        corners: vec![],
        interior: vec![],
        topology: Some(RegionTopology {
            chi: 1,
            chi_boundary: 0,
        }),
        cell_data: None,
        bounds: vec![(-pad, pad), (-pad, pad)],
    }
}

/// Upper hemisphere of the unit sphere; its boundary is the equator.
pub fn hemisphere() -> Region {
    use std::f64::consts::PI;
    let chart = crate::chart::sphere(1.0);
    let c = Constraint::new("equator", Arc::new(|p: &[f64]| PI / 2.0 - p[0]))
        .with_derivatives(Arc::new(|_| vec![-1.0, 0.0]), Arc::new(|_| vec![0.0; 4]));
    let equator = FaceChart::new(
        "equator",
        vec![0],
        vec![(0.0, 2.0 * PI)],
        Arc::new(|t: &[f64]| vec![PI / 2.0, t[0]]),
    );
    Region {
        name: "hemisphere".into(),
        chart,
        constraints: vec![c],
        faces: vec![equator],
        corners: vec![],
        interior: vec![],
        topology: Some(RegionTopology {
            chi: 1,
            chi_boundary: 0,
        }),
        cell_data: None,
        bounds: vec![(1e-4, PI / 2.0), (0.0, 2.0 * PI)],
    }
}

/// Half of the hyperbolic plane chart bounded by the vertical geodesic x = 0.
pub fn half_plane_geodesic_wall() -> Region {
    let chart = crate::chart::half_plane();
    let c = Constraint::new("wall", Arc::new(|p: &[f64]| p[0]))
        .with_derivatives(Arc::new(|_| vec![1.0, 0.0]), Arc::new(|_| vec![0.0; 4]));
    let wall = FaceChart::new(
        "wall",
        vec![0],
        vec![(0.5, 4.0)],
        Arc::new(|t: &[f64]| vec![0.0, t[0]]),
    );
    Region {
        name: "half-plane-wall".into(),
        chart,
        constraints: vec![c],
        faces: vec![wall],
        corners: vec![],
        interior: vec![],
        topology: None,
        cell_data: None,
        bounds: vec![(0.0, 3.0), (0.05, 12.0)],
    }
}

/// Thick band {u <= u0} of the thin-part model metric; the boundary fibre is
/// the circle {u = u0}.
pub fn model_thick_band(u0: f64) -> Region {
    let chart = crate::chart::model_thin((u0 + 2.0).max(12.0));
    let c = Constraint::new("fibre", Arc::new(move |p: &[f64]| u0 - p[0]))
        .with_derivatives(Arc::new(|_| vec![-1.0, 0.0]), Arc::new(|_| vec![0.0; 4]));
    let fibre = FaceChart::new(
        "fibre",
        vec![0],
        vec![(0.0, 1.0)],
        Arc::new(move |t: &[f64]| vec![u0, t[0]]),
    );
    Region {
        name: "model-thick-band".into(),
        chart,
        constraints: vec![c],
        faces: vec![fibre],
        corners: vec![],
        interior: vec![FaceChart::new(
            "interior",
            vec![],
            vec![(0.0, u0), (0.0, 1.0)],
            Arc::new(|t: &[f64]| t.to_vec()),
        )],
        // annulus: chi = 0, the boundary circles are closed and odd-dimensional
        topology: Some(RegionTopology {
            chi: 0,
            chi_boundary: 0,
        }),
        cell_data: None,
        bounds: vec![(0.0, u0), (0.0, 1.0)],
    }
}

/// Cusp side {u >= u0} of the thin-part model; carries the level-set second
/// fundamental form probed by the uniformity checks.
pub fn model_cusp_side(u0: f64, u_max: f64) -> Region {
    let chart = crate::chart::model_thin(u_max);
    let c = Constraint::new("level", Arc::new(move |p: &[f64]| p[0] - u0))
        .with_derivatives(Arc::new(|_| vec![1.0, 0.0]), Arc::new(|_| vec![0.0; 4]));
    let level = FaceChart::new(
        "level",
        vec![0],
        vec![(0.0, 1.0)],
        Arc::new(move |t: &[f64]| vec![u0, t[0]]),
    );
    Region {
        name: "model-cusp-side".into(),
        chart,
        constraints: vec![c],
        faces: vec![level],
        corners: vec![],
        interior: vec![],
        topology: None,
        cell_data: None,
        bounds: vec![(u0, u_max), (0.0, 1.0)],
    }
}

// --- spherical right triangle ---------------------------------------------

fn embed(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

fn embed_dtheta(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        -theta.sin(),
    ]
}

fn embed_dphi(theta: f64, phi: f64) -> [f64; 3] {
    [-theta.sin() * phi.sin(), theta.sin() * phi.cos(), 0.0]
}

fn chart_coords(v: [f64; 3]) -> Vec<f64> {
    let theta = v[2].clamp(-1.0, 1.0).acos();
    let mut phi = v[1].atan2(v[0]);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    vec![theta, phi]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Corners of the coordinate octant rotated so their center sits on the
/// equator at longitude pi, away from both chart poles and the branch cut.
fn octant_corners() -> [[f64; 3]; 3] {
    let s3 = 3.0f64.sqrt();
    let u = [1.0 / s3, 1.0 / s3, 1.0 / s3];
    let m = [-1.0, 0.0, 0.0];
    let axis_raw = [
        u[1] * m[2] - u[2] * m[1],
        u[2] * m[0] - u[0] * m[2],
        u[0] * m[1] - u[1] * m[0],
    ];
    let an = dot3(axis_raw, axis_raw).sqrt();
    let axis = [axis_raw[0] / an, axis_raw[1] / an, axis_raw[2] / an];
    let cos_t = dot3(u, m);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let rotate = |v: [f64; 3]| -> [f64; 3] {
        let kv = [
            axis[1] * v[2] - axis[2] * v[1],
            axis[2] * v[0] - axis[0] * v[2],
            axis[0] * v[1] - axis[1] * v[0],
        ];
        let kdv = dot3(axis, v);
        [
            v[0] * cos_t + kv[0] * sin_t + axis[0] * kdv * (1.0 - cos_t),
            v[1] * cos_t + kv[1] * sin_t + axis[1] * kdv * (1.0 - cos_t),
            v[2] * cos_t + kv[2] * sin_t + axis[2] * kdv * (1.0 - cos_t),
        ]
    };
    [
        rotate([1.0, 0.0, 0.0]),
        rotate([0.0, 1.0, 0.0]),
        rotate([0.0, 0.0, 1.0]),
    ]
}

/// Spherical triangle with three right angles (one eighth of the unit
/// sphere), positioned on the equator away from the chart poles.
pub fn spherical_right_triangle() -> Region {
    use std::f64::consts::PI;
    let chart = crate::chart::sphere(1.0);
    let corners3 = octant_corners();

    let constraint_for = |v: [f64; 3], label: &str| {
        let f: ScalarFn = Arc::new(move |p: &[f64]| dot3(embed(p[0], p[1]), v));
        let grad: VecFn = Arc::new(move |p: &[f64]| {
            vec![
                dot3(embed_dtheta(p[0], p[1]), v),
                dot3(embed_dphi(p[0], p[1]), v),
            ]
        });
        let hess: VecFn = Arc::new(move |p: &[f64]| {
            let (th, ph) = (p[0], p[1]);
            let e = embed(th, ph);
            let dtt = [-e[0], -e[1], -e[2]];
            let dtp = [-th.cos() * ph.sin(), th.cos() * ph.cos(), 0.0];
            let dpp = [-th.sin() * ph.cos(), -th.sin() * ph.sin(), 0.0];
            vec![dot3(dtt, v), dot3(dtp, v), dot3(dtp, v), dot3(dpp, v)]
        });
        Constraint::new(label, f).with_derivatives(grad, hess)
    };
    let constraints = vec![
        constraint_for(corners3[0], "side-a"),
        constraint_for(corners3[1], "side-b"),
        constraint_for(corners3[2], "side-c"),
    ];

    // edge opposite corner i joins the other two corners along a quarter
    // great circle gamma(t) = cos t * A + sin t * B
    let edge = |i: usize| -> FaceChart {
        let a = corners3[(i + 1) % 3];
        let b = corners3[(i + 2) % 3];
        FaceChart::new(
            &format!("edge-{i}"),
            vec![i],
            vec![(0.0, PI / 2.0)],
            Arc::new(move |t: &[f64]| {
                let (s, c) = t[0].sin_cos();
                chart_coords([
                    c * a[0] + s * b[0],
                    c * a[1] + s * b[1],
                    c * a[2] + s * b[2],
                ])
            }),
        )
    };
    let faces = vec![edge(0), edge(1), edge(2)];
    let corners = (0..3)
        .map(|i| {
            let mut active = vec![(i + 1) % 3, (i + 2) % 3];
            active.sort_unstable();
            (chart_coords(corners3[i]), active)
        })
        .collect();

    // fan over the triangle from corner C through the opposite edge
    let (a, b, c) = (corners3[0], corners3[1], corners3[2]);
    let interior = vec![FaceChart::new(
        "interior",
        vec![],
        vec![(0.0, PI / 2.0), (0.0, PI / 2.0)],
        Arc::new(move |st: &[f64]| {
            let (ss, cs) = st[0].sin_cos();
            let q = [
                cs * a[0] + ss * b[0],
                cs * a[1] + ss * b[1],
                cs * a[2] + ss * b[2],
            ];
            let (stn, ctn) = st[1].sin_cos();
            chart_coords([
                ctn * c[0] + stn * q[0],
                ctn * c[1] + stn * q[1],
                ctn * c[2] + stn * q[2],
            ])
        }),
    )];

    let bounds = vec![(PI / 2.0 - 1.0, PI / 2.0 + 1.0), (PI - 1.3, PI + 1.3)];
    Region {
        name: "spherical-triangle".into(),
        chart,
        constraints,
        faces,
        corners,
        interior,
        topology: Some(RegionTopology {
            chi: 1,
            chi_boundary: 0,
        }),
        cell_data: None,
        bounds,
    }
}

// --- hyperbolic right-angled pentagon --------------------------------------

/// Cayley transform from the unit disk to the upper half-plane.
fn cayley(z: (f64, f64)) -> (f64, f64) {
    // w = i (1 + z) / (1 - z)
    let num = (1.0 + z.0, z.1);
    let den = (1.0 - z.0, -z.1);
    let d2 = den.0 * den.0 + den.1 * den.1;
    let q = (
        (num.0 * den.0 + num.1 * den.1) / d2,
        (num.1 * den.0 - num.0 * den.1) / d2,
    );
    (-q.1, q.0)
}

/// Regular right-angled pentagon in the hyperbolic plane, realized in the
/// half-plane chart.
///
/// Construction: in the disk model the five sides lie on circles of radius
/// rho = sqrt(d^2 - 1) centered at distance d = 1/sqrt(cos(2 pi / 5)) from the
/// origin (orthogonal to the unit circle, adjacent ones orthogonal to each
/// other). The whole picture is pushed through the Cayley transform, so every
/// side is a half-plane geodesic and all five interior angles are right.
pub fn hyperbolic_right_pentagon() -> Region {
    use std::f64::consts::PI;
    let chart = crate::chart::half_plane();
    let d = (1.0 / (2.0 * PI / 5.0).cos()).sqrt();
    let rho = (d * d - 1.0).sqrt();
    let centers: Vec<(f64, f64)> = (0..5)
        .map(|k| {
            let ang = 2.0 * PI * k as f64 / 5.0;
            (d * ang.cos(), d * ang.sin())
        })
        .collect();
    let t_in = {
        let c36 = (PI / 5.0).cos();
        d * c36 - (d * d * c36 * c36 - 1.0).sqrt()
    };
    let disk_vertices: Vec<(f64, f64)> = (0..5)
        .map(|k| {
            let ang = PI / 5.0 + 2.0 * PI * k as f64 / 5.0;
            (t_in * ang.cos(), t_in * ang.sin())
        })
        .collect();
    let vertices: Vec<(f64, f64)> = disk_vertices.iter().map(|&z| cayley(z)).collect();
    let center = cayley((0.0, 0.0)); // (0, 1)

    // edge k joins vertex k-1 to vertex k; its geodesic is the half-plane
    // circle through both with center on the real axis
    let mut hp_centers = Vec::with_capacity(5);
    let mut hp_radii = Vec::with_capacity(5);
    let mut signs = Vec::with_capacity(5);
    for k in 0..5 {
        let wa = vertices[(k + 4) % 5];
        let wb = vertices[k];
        let na = wa.0 * wa.0 + wa.1 * wa.1;
        let nb = wb.0 * wb.0 + wb.1 * wb.1;
        let xc = (na - nb) / (2.0 * (wa.0 - wb.0));
        let r = ((wa.0 - xc) * (wa.0 - xc) + wa.1 * wa.1).sqrt();
        let at_center = (center.0 - xc) * (center.0 - xc) + center.1 * center.1 - r * r;
        hp_centers.push(xc);
        hp_radii.push(r);
        signs.push(if at_center >= 0.0 { 1.0 } else { -1.0 });
    }

    let mut constraints = Vec::with_capacity(5);
    for k in 0..5 {
        let (xc, r, s) = (hp_centers[k], hp_radii[k], signs[k]);
        let f: ScalarFn =
            Arc::new(move |p: &[f64]| s * ((p[0] - xc) * (p[0] - xc) + p[1] * p[1] - r * r));
        let grad: VecFn = Arc::new(move |p: &[f64]| vec![2.0 * s * (p[0] - xc), 2.0 * s * p[1]]);
        let hess: VecFn = Arc::new(move |_| vec![2.0 * s, 0.0, 0.0, 2.0 * s]);
        constraints.push(
            Constraint::new(&format!("side-{k}"), f)
                .with_derivatives(grad, hess)
                .with_scale(r * r),
        );
    }

    let mut faces = Vec::with_capacity(5);
    for k in 0..5 {
        let (xc, r) = (hp_centers[k], hp_radii[k]);
        let wa = vertices[(k + 4) % 5];
        let wb = vertices[k];
        let ta = wa.1.atan2(wa.0 - xc);
        let tb = wb.1.atan2(wb.0 - xc);
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        faces.push(FaceChart::new(
            &format!("edge-{k}"),
            vec![k],
            vec![(lo, hi)],
            Arc::new(move |t: &[f64]| vec![xc + r * t[0].cos(), r * t[0].sin()]),
        ));
    }

    let corners = (0..5)
        .map(|k| {
            let mut active = vec![k, (k + 1) % 5];
            active.sort_unstable();
            (vec![vertices[k].0, vertices[k].1], active)
        })
        .collect();

    // interior fan: five sectors parametrized in the disk model (arc of side k
    // against the radial geodesic from the origin), then mapped to the
    // half-plane
    let mut interior = Vec::with_capacity(5);
    for k in 0..5 {
        let qc = centers[k];
        let va = disk_vertices[(k + 4) % 5];
        let vb = disk_vertices[k];
        let pa = (va.1 - qc.1).atan2(va.0 - qc.0);
        let mut pb = (vb.1 - qc.1).atan2(vb.0 - qc.0);
        if pb - pa > PI {
            pb -= 2.0 * PI;
        } else if pa - pb > PI {
            pb += 2.0 * PI;
        }
        interior.push(FaceChart::new(
            &format!("sector-{k}"),
            vec![],
            vec![(0.0, 1.0), (1e-9, 1.0)],
            Arc::new(move |st: &[f64]| {
                let psi = pa + st[0] * (pb - pa);
                let bpt = (qc.0 + rho * psi.cos(), qc.1 + rho * psi.sin());
                let bn = (bpt.0 * bpt.0 + bpt.1 * bpt.1).sqrt();
                // radial geodesic from the disk origin toward the arc point
                let dist = st[1] * bn.atanh();
                let rr = dist.tanh();
                let z = (rr * bpt.0 / bn, rr * bpt.1 / bn);
                let w = cayley(z);
                vec![w.0, w.1]
            }),
        ));
    }

    Region {
        name: "hyperbolic-pentagon".into(),
        chart,
        constraints,
        faces,
        corners,
        interior,
        topology: Some(RegionTopology {
            chi: 1,
            chi_boundary: 0,
        }),
        cell_data: None,
        bounds: vec![(-1.0, 1.0), (0.35, 1.95)],
    }
}

// --- truncated modular domain -----------------------------------------------

/// Fundamental domain of the modular group in the half-plane, truncated at
/// height `y_cut`: {|a| <= 1/2, a^2 + b^2 >= 1, b <= y_cut}.
pub fn modular_domain(y_cut: f64) -> Region {
    let chart = crate::chart::half_plane();
    assert!(
        y_cut > 1.0 && y_cut < 64.0,
        "cutoff must sit inside the chart"
    );
    let constraints = vec![
        Constraint::new("left", Arc::new(|p: &[f64]| p[0] + 0.5)).with_derivatives(
            Arc::new(|_| vec![1.0, 0.0]),
            Arc::new(|_| vec![0.0; 4]),
        ),
        Constraint::new("right", Arc::new(|p: &[f64]| 0.5 - p[0])).with_derivatives(
            Arc::new(|_| vec![-1.0, 0.0]),
            Arc::new(|_| vec![0.0; 4]),
        ),
        Constraint::new(
            "arc",
            Arc::new(|p: &[f64]| p[0] * p[0] + p[1] * p[1] - 1.0),
        )
        .with_derivatives(
            Arc::new(|p: &[f64]| vec![2.0 * p[0], 2.0 * p[1]]),
            Arc::new(|_| vec![2.0, 0.0, 0.0, 2.0]),
        ),
        Constraint::new("horocycle", Arc::new(move |p: &[f64]| y_cut - p[1]))
            .with_derivatives(Arc::new(|_| vec![0.0, -1.0]), Arc::new(|_| vec![0.0; 4])),
    ];
    use std::f64::consts::PI;
    let s3 = 3.0f64.sqrt() / 2.0;
    let faces = vec![
        FaceChart::new(
            "left",
            vec![0],
            vec![(s3, y_cut)],
            Arc::new(|t: &[f64]| vec![-0.5, t[0]]),
        ),
        FaceChart::new(
            "right",
            vec![1],
            vec![(s3, y_cut)],
            Arc::new(|t: &[f64]| vec![0.5, t[0]]),
        ),
        FaceChart::new(
            "arc",
            vec![2],
            vec![(-PI / 6.0, PI / 6.0)],
            Arc::new(|t: &[f64]| vec![t[0].sin(), t[0].cos()]),
        ),
        FaceChart::new(
            "horocycle",
            vec![3],
            vec![(-0.5, 0.5)],
            Arc::new(move |t: &[f64]| vec![t[0], y_cut]),
        ),
    ];
    let corners = vec![
        (vec![-0.5, s3], vec![0, 2]),
        (vec![0.5, s3], vec![1, 2]),
        (vec![0.5, y_cut], vec![1, 3]),
        (vec![-0.5, y_cut], vec![0, 3]),
    ];
    Region {
        name: "modular-domain".into(),
        chart,
        constraints,
        faces,
        corners,
        interior: vec![],
        topology: None, // orbifold quotient; topology lives on the covering
        cell_data: None,
        bounds: vec![(-0.5, 0.5), (0.8, y_cut)],
    }
}

/// The truncated domain carrying the topology of its level-3 principal
/// congruence covering: that cover of the modular curve has index 12 over the
/// projective modular group, genus 0 and 4 cusps, so chi = 2 - 0 - 4 = -2.
/// After truncation the boundary is 4 circles (chi 0).
pub fn modular_gamma3_region(y_cut: f64) -> Region {
    let mut r = modular_domain(y_cut);
    r.name = "modular-gamma3".into();
    r.topology = Some(RegionTopology {
        chi: -2,
        chi_boundary: 0,
    });
    r
}

/// Index of the level-3 congruence cover over the projective modular group.
pub const GAMMA3_INDEX: usize = 12;
/// Cusp count of the level-3 cover.
pub const GAMMA3_CUSPS: usize = 4;

/// Region catalog for the command-line harness.
pub fn region_by_name(name: &str) -> Result<Region> {
    match name {
        "square" => Ok(unit_square()),
        "spherical-triangle" => Ok(spherical_right_triangle()),
        "hyperbolic-pentagon" => Ok(hyperbolic_right_pentagon()),
        "disk" => Ok(flat_disk(1.0)),
        "hemisphere" => Ok(hemisphere()),
        other => Err(Error::Config(format!("unknown region '{other}'"))),
    }
}

pub fn region_catalog() -> &'static [&'static str] {
    &[
        "square",
        "spherical-triangle",
        "hyperbolic-pentagon",
        "disk",
        "hemisphere",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn active_sets_on_the_square() {
        let sq = unit_square();
        let interior = sq.chart.point(&[0.5, 0.5]).unwrap();
        assert!(active_constraints(&sq, &interior, 1e-8)
            .unwrap()
            .is_empty());
        let edge = sq.chart.point(&[0.0, 0.5]).unwrap();
        assert_eq!(active_constraints(&sq, &edge, 1e-8).unwrap(), vec![0]);
        let corner = sq.chart.point(&[0.0, 0.0]).unwrap();
        assert_eq!(active_constraints(&sq, &corner, 1e-8).unwrap(), vec![0, 2]);
    }

    #[test]
    fn outside_point_is_an_error() {
        let sq = unit_square();
        let p = sq.chart.point(&[0.5, 1.0]).unwrap();
        // nudge below the bottom edge via a fresh region evaluation
        let outside = Region {
            bounds: sq.bounds.clone(),
            ..sq.clone()
        };
        let q = outside.chart.point(&[0.5, 0.0]).unwrap();
        // q is exactly on the boundary, tol 0 still accepts it as active
        assert!(active_constraints(&outside, &q, 1e-8).is_ok());
        let violating = Constraint::new("shift", Arc::new(|p: &[f64]| p[1] - 0.25));
        let mut shifted = sq.clone();
        shifted.constraints.push(violating);
        let r = active_constraints(&shifted, &p, 1e-8);
        // p = (0.5, 1.0): new constraint gives 0.75 >= 0, top edge is active
        assert_eq!(r.unwrap(), vec![3]);
        let low = shifted.chart.point(&[0.5, 0.1]).unwrap();
        assert!(matches!(
            active_constraints(&shifted, &low, 1e-8),
            Err(Error::OutsideRegion { index: 4, .. })
        ));
    }

    #[test]
    fn outer_angles_on_the_square() {
        let sq = unit_square();
        let edge = sq.chart.point(&[0.0, 0.5]).unwrap();
        let cell = outer_angle_measure(&sq, &edge, 1000, 1).unwrap();
        assert_eq!(cell.codim, 1);
        assert_eq!(cell.method, OuterAngleMethod::FullNormal);
        assert!((cell.normals[0][0] + 1.0).abs() < 1e-12); // outward = -x

        let corner = sq.chart.point(&[0.0, 0.0]).unwrap();
        let cell = outer_angle_measure(&sq, &corner, 1000, 1).unwrap();
        assert_eq!(cell.codim, 2);
        assert!((cell.measure - 0.25).abs() < 1e-12);
    }

    #[test]
    fn wedge_outer_angle_is_exterior_angle() {
        let wedge = planar_wedge(2.0 * PI / 3.0);
        let corner = wedge.chart.point(&[0.0, 0.0]).unwrap();
        let cell = outer_angle_measure(&wedge, &corner, 1000, 1).unwrap();
        assert!(
            (cell.measure - 1.0 / 6.0).abs() < 1e-12,
            "measure {}",
            cell.measure
        );
    }

    #[test]
    fn sampled_measure_matches_exact_for_planar_corners() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let angle: f64 = rng.random_range(0.3..2.7);
            let wedge = planar_wedge(angle);
            let corner = wedge.chart.point(&[0.0, 0.0]).unwrap();
            let g = wedge.metric(corner.coords()).unwrap();
            let grads = vec![
                wedge.grad_vector(0, corner.coords()).unwrap(),
                wedge.grad_vector(1, corner.coords()).unwrap(),
            ];
            let sampled =
                sample_outer_measure(&g, 2, &grads, OUTER_ANGLE_SAMPLES, 99).unwrap();
            let exact = outer_angle_measure(&wedge, &corner, 10, 1).unwrap().measure;
            assert!(
                (sampled - exact).abs() < 2e-3,
                "angle {angle}: sampled {sampled} exact {exact}"
            );
        }
    }

    #[test]
    fn second_fundamental_form_examples() {
        // hyperplane face in flat space
        let sq = unit_square();
        let p = sq.chart.point(&[0.0, 0.5]).unwrap();
        let z = vec![-1.0, 0.0];
        let ii = second_fundamental_form(&sq, &[0], &p, &z).unwrap();
        assert!(ii.scalar().abs() < 1e-12);

        // circle of radius r in the flat plane: II = 1/r
        for r in [0.5f64, 1.0, 2.0] {
            let disk = flat_disk(r);
            let p = disk.chart.point(&[r, 0.0]).unwrap();
            let z = vec![1.0, 0.0]; // outward
            let ii = second_fundamental_form(&disk, &[0], &p, &z).unwrap();
            assert!(
                (ii.scalar() - 1.0 / r).abs() < 1e-9,
                "r={r}: {}",
                ii.scalar()
            );
        }

        // level set of the thin-part model: II = 3 independent of u0
        // (outward for the cusp side {u >= u0} is -du)
        for u0 in [0.0f64, 1.0, 5.0, 10.0] {
            let cusp = model_cusp_side(u0, 14.0);
            let p = cusp.chart.point(&[u0, 0.3]).unwrap();
            let z = vec![-1.0, 0.0];
            let ii = second_fundamental_form(&cusp, &[0], &p, &z).unwrap();
            assert!((ii.scalar() - 3.0).abs() < 1e-9, "u0={u0}: {}", ii.scalar());
        }
    }

    #[test]
    fn geodesic_hypersurfaces_have_vanishing_ii() {
        // great circle on the sphere
        let hs = hemisphere();
        let p = hs.chart.point(&[PI / 2.0, 1.1]).unwrap();
        let z = vec![1.0, 0.0]; // outward: increasing theta
        let ii = second_fundamental_form(&hs, &[0], &p, &z).unwrap();
        assert!(ii.scalar().abs() < 1e-6, "{}", ii.scalar());

        // vertical geodesic in the half-plane
        let wall = half_plane_geodesic_wall();
        let p = wall.chart.point(&[0.0, 2.0]).unwrap();
        let g = wall.metric(p.coords()).unwrap();
        let u = wall.grad_vector(0, p.coords()).unwrap();
        let norm = linalg::g_dot(&g, 2, &u, &u).sqrt();
        let z: Vec<f64> = u.iter().map(|x| -x / norm).collect();
        let ii = second_fundamental_form(&wall, &[0], &p, &z).unwrap();
        assert!(ii.scalar().abs() < 1e-6, "{}", ii.scalar());
    }

    #[test]
    fn face_volumes() {
        let spec = QuadSpec::for_dim(1);
        let sq = unit_square();
        let v = face_volume(&sq, &sq.faces[0], &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-10);

        let hs = hemisphere();
        let v = face_volume(&hs, &hs.faces[0], &spec).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-9, "equator length {v}");

        // fibre circle at u0 = -log(sqrt(eps)) has length eps^{3/2}
        for eps in [1e-1f64, 1e-2, 1e-3] {
            let u0 = -eps.sqrt().ln();
            let band = model_thick_band(u0);
            let v = face_volume(&band, &band.faces[0], &spec).unwrap();
            assert!(
                ((v - eps.powf(1.5)) / eps.powf(1.5)).abs() < 1e-10,
                "eps={eps}: {v}"
            );
        }
    }

    #[test]
    fn fibre_volume_scaling_slope() {
        let spec = QuadSpec::for_dim(1);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &eps in &[1e-1f64, 1e-2, 1e-3, 1e-4] {
            let u0 = -eps.sqrt().ln();
            let band = model_thick_band(u0);
            let v = face_volume(&band, &band.faces[0], &spec).unwrap();
            xs.push(eps.ln());
            ys.push(v.ln());
        }
        let m = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        assert!((slope - 1.5).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn model_level_set_ii_uniform_in_u0() {
        // sup over u0 in [0, 10] of |II - 3| stays at numerical zero
        let mut worst = 0.0f64;
        for i in 0..=20 {
            let u0 = 10.0 * i as f64 / 20.0;
            let cusp = model_cusp_side(u0, 14.0);
            let p = cusp.chart.point(&[u0, 0.5]).unwrap();
            let ii = second_fundamental_form(&cusp, &[0], &p, &[-1.0, 0.0]).unwrap();
            worst = worst.max((ii.scalar() - 3.0).abs());
        }
        assert!(worst < 1e-6, "worst deviation {worst}");
    }

    #[test]
    fn inner_euler_values() {
        assert_eq!(inner_euler(&unit_square()).unwrap(), 1);
        assert_eq!(inner_euler(&spherical_right_triangle()).unwrap(), 1);
        assert_eq!(inner_euler(&hyperbolic_right_pentagon()).unwrap(), 1);
        assert_eq!(inner_euler(&modular_gamma3_region(10.0)).unwrap(), -2);
        assert!(matches!(
            inner_euler(&modular_domain(10.0)),
            Err(Error::InsufficientData)
        ));
        // cell data fallback: a disk subdivided as one triangle
        let mut r = modular_domain(10.0);
        r.cell_data = Some(vec![3, 3, 1]);
        assert_eq!(inner_euler(&r).unwrap(), 1);
    }

    #[test]
    fn corner_regularity_spot_checks() {
        for region in [
            unit_square(),
            spherical_right_triangle(),
            hyperbolic_right_pentagon(),
            modular_domain(8.0),
        ] {
            check_corner_regularity(&region, 10, 7).unwrap();
        }
    }

    #[test]
    fn pentagon_geometry_is_right_angled() {
        let pent = hyperbolic_right_pentagon();
        // all five corners satisfy both adjacent constraints and meet at
        // right angles
        for (coords, active) in &pent.corners {
            let p = pent.chart.point(coords).unwrap();
            let got = active_constraints(&pent, &p, 1e-7).unwrap();
            assert_eq!(&got, active, "corner {coords:?}");
            let cell = outer_angle_measure(&pent, &p, 10, 1).unwrap();
            assert!(
                (cell.measure - 0.25).abs() < 1e-10,
                "corner angle measure {}",
                cell.measure
            );
        }
        // region membership matches the disk-model picture at the center
        assert!(pent.contains(&[0.0, 1.0], 1e-9));
        assert!(!pent.contains(&[0.0, 0.3], 1e-9));
        assert!(!pent.contains(&[0.0, 2.2], 1e-9));
    }

    #[test]
    fn spherical_triangle_corners_are_right_angles() {
        let tri = spherical_right_triangle();
        for (coords, _) in &tri.corners {
            let p = tri.chart.point(coords).unwrap();
            let cell = outer_angle_measure(&tri, &p, 10, 1).unwrap();
            assert!(
                (cell.measure - 0.25).abs() < 1e-10,
                "corner measure {}",
                cell.measure
            );
        }
    }

    #[test]
    fn sampled_outer_measure_in_three_dims() {
        // orthant corner of the flat unit cube: measure 1/8
        let chart = crate::chart::euclidean_box(&[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]);
        let g = linalg::identity(3);
        let grads = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let _ = chart;
        let m = sample_outer_measure(&g, 3, &grads, OUTER_ANGLE_SAMPLES, 17).unwrap();
        assert!((m - 0.125).abs() < 2e-3, "octant measure {m}");
    }
}
