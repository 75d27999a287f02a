//! Coordinate charts carrying a Riemannian metric.
//!
//! A [`MetricChart`] is an axis-aligned coordinate box together with a map
//! from points to symmetric positive-definite matrices, plus optional
//! closed-form first and second coordinate derivatives of the metric. When the
//! closed forms are absent (or the chart is switched to finite-difference
//! mode) derivatives come from central differences with one Richardson
//! extrapolation level.
//!
//! The builtin catalog covers every surface used by the verification suites:
//! flat space, round spheres, the hyperbolic half-plane, flat tori, metric
//! products, the round 4-sphere, S^2 x S^2 and the thin-part model metric
//! du^2 + e^{-6u} dtheta^2.

use crate::linalg;
use crate::{Error, Result};
use std::sync::Arc;

/// One coordinate axis of the chart domain.
#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Periodic axes identify `lo` and `hi`; evaluation wraps.
    pub periodic: bool,
}

impl Axis {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The chart domain: a box with optional periodic identifications.
#[derive(Debug, Clone)]
pub struct CoordBox {
    pub axes: Vec<Axis>,
}

impl CoordBox {
    pub fn new(axes: Vec<Axis>) -> Self {
        CoordBox { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Wrap periodic coordinates into [lo, hi); returns false when a
    /// non-periodic coordinate is outside the box.
    pub fn wrap(&self, coords: &mut [f64]) -> bool {
        for (axis, x) in self.axes.iter().zip(coords.iter_mut()) {
            if axis.periodic {
                let len = axis.len();
                let mut t = (*x - axis.lo) % len;
                if t < 0.0 {
                    t += len;
                }
                *x = axis.lo + t;
            } else if *x < axis.lo || *x > axis.hi {
                return false;
            }
        }
        true
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.lo, a.hi)).collect()
    }
}

/// A validated point of a chart (periodic coordinates already wrapped).
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Derivative strategy for metric partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Use the closed-form partials registered with the chart.
    Analytic,
    /// Central differences with one Richardson level. `step` overrides the
    /// default policy h = max(1e-5, 1e-6 * axis length).
    FiniteDifference { step: Option<f64> },
}

/// Metadata for charts that describe closed manifolds.
#[derive(Debug, Clone)]
pub struct ClosedTopology {
    pub expected_chi: i64,
    /// Axes whose endpoints are coordinate (not geometric) singularities.
    pub singular_axes: Vec<usize>,
    /// Exact Riemannian volume, used by the polar-cap correction.
    pub total_volume: f64,
}

type MetricFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type PartialFn = Arc<dyn Fn(&[f64], usize) -> Vec<f64> + Send + Sync>;
type SecondFn = Arc<dyn Fn(&[f64], usize, usize) -> Vec<f64> + Send + Sync>;

/// A coordinate box plus a point -> SPD matrix metric evaluator.
#[derive(Clone)]
pub struct MetricChart {
    pub name: String,
    dim: usize,
    pub domain: CoordBox,
    eval: MetricFn,
    partial: Option<PartialFn>,
    second: Option<SecondFn>,
    pub mode: DerivativeMode,
    pub closed: Option<ClosedTopology>,
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("mode", &self.mode)
            .finish()
    }
}

const SYMMETRY_TOL: f64 = 1e-12;

impl MetricChart {
    pub fn new(name: &str, domain: CoordBox, eval: MetricFn) -> Self {
        let dim = domain.dim();
        MetricChart {
            name: name.to_string(),
            dim,
            domain,
            eval,
            partial: None,
            second: None,
            mode: DerivativeMode::FiniteDifference { step: None },
            closed: None,
        }
    }

    pub fn with_partials(mut self, partial: PartialFn, second: SecondFn) -> Self {
        self.partial = Some(partial);
        self.second = Some(second);
        self.mode = DerivativeMode::Analytic;
        self
    }

    pub fn with_closed(mut self, closed: ClosedTopology) -> Self {
        self.closed = Some(closed);
        self
    }

    /// Switch to finite differences, ignoring any registered closed forms.
    pub fn with_finite_difference(mut self) -> Self {
        self.mode = DerivativeMode::FiniteDifference { step: None };
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Validate and wrap a coordinate tuple into a chart point.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        if coords.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: coords.len(),
            });
        }
        let mut c = coords.to_vec();
        if !self.domain.wrap(&mut c) {
            return Err(Error::OutsideDomain {
                point: coords.to_vec(),
            });
        }
        Ok(Point { coords: c })
    }

    /// Metric evaluation with symmetry and positivity checks.
    pub fn metric_at(&self, p: &Point) -> Result<Vec<f64>> {
        let g = (self.eval)(p.coords());
        let n = self.dim;
        let asym = linalg::asymmetry(&g, n);
        if asym > SYMMETRY_TOL {
            return Err(Error::AsymmetricMetric {
                residual: asym,
                context: format!("{} at {:?}", self.name, p.coords()),
            });
        }
        if linalg::cholesky(&g, n).is_none() {
            return Err(Error::NotPositiveDefinite {
                context: format!("{} at {:?}", self.name, p.coords()),
            });
        }
        Ok(g)
    }

    /// Raw evaluation for finite-difference offsets: wraps periodic axes but
    /// skips the definiteness check (a step may poke past a coordinate
    /// singularity where the formula is still finite).
    pub fn metric_raw(&self, coords: &[f64]) -> Vec<f64> {
        let mut c = coords.to_vec();
        let _ = self.domain.wrap(&mut c);
        (self.eval)(&c)
    }

    /// First-derivative step for an axis under the finite-difference policy.
    pub fn fd_step(&self, axis: usize) -> Result<f64> {
        let len = self.domain.axes[axis].len();
        let h = match self.mode {
            DerivativeMode::FiniteDifference { step: Some(h) } => h,
            _ => (1e-6 * len).max(1e-5),
        };
        if h < 1e-10 * len {
            return Err(Error::Config(format!(
                "finite-difference step {h:e} underflows axis {axis} (length {len:e})"
            )));
        }
        Ok(h)
    }

    /// Outer step for differentiating Christoffel symbols in FD mode. Larger
    /// than the inner step so first-level FD noise is not amplified.
    pub fn fd_outer_step(&self, axis: usize) -> Result<f64> {
        let len = self.domain.axes[axis].len();
        let h = (1e-4 * len).max(1e-3);
        if h < 1e-10 * len {
            return Err(Error::Config(format!(
                "finite-difference step {h:e} underflows axis {axis} (length {len:e})"
            )));
        }
        Ok(h)
    }

    /// Partial derivative of the metric along `axis`, closed form when in
    /// analytic mode, Richardson-refined central differences otherwise.
    pub fn metric_partial(&self, coords: &[f64], axis: usize) -> Result<Vec<f64>> {
        if self.mode == DerivativeMode::Analytic {
            if let Some(p) = &self.partial {
                return Ok(p(coords, axis));
            }
        }
        let h = self.fd_step(axis)?;
        Ok(self.fd_of(|c| self.metric_raw(c), coords, axis, h))
    }

    /// Second partial derivative of the metric, analytic mode only; the
    /// finite-difference pipeline differentiates Christoffel symbols instead.
    pub fn metric_second_partial(&self, coords: &[f64], a: usize, b: usize) -> Option<Vec<f64>> {
        if self.mode == DerivativeMode::Analytic {
            if let Some(s) = &self.second {
                return Some(s(coords, a, b));
            }
        }
        None
    }

    /// Central difference with one Richardson extrapolation level applied to a
    /// matrix-valued function of the coordinates.
    pub fn fd_of<F: Fn(&[f64]) -> Vec<f64>>(
        &self,
        f: F,
        coords: &[f64],
        axis: usize,
        h: f64,
    ) -> Vec<f64> {
        let d = |h: f64| -> Vec<f64> {
            let mut plus = coords.to_vec();
            let mut minus = coords.to_vec();
            plus[axis] += h;
            minus[axis] -= h;
            let fp = f(&plus);
            let fm = f(&minus);
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect()
        };
        let coarse = d(h);
        let fine = d(0.5 * h);
        fine.iter()
            .zip(&coarse)
            .map(|(f, c)| (4.0 * f - c) / 3.0)
            .collect()
    }

    /// The same chart with the metric multiplied by the constant `c2`.
    pub fn scaled(&self, c2: f64) -> MetricChart {
        let eval = self.eval.clone();
        let scaled_eval: MetricFn =
            Arc::new(move |p| eval(p).into_iter().map(|x| c2 * x).collect());
        let mut chart = MetricChart {
            name: format!("{}*{}", self.name, c2),
            dim: self.dim,
            domain: self.domain.clone(),
            eval: scaled_eval,
            partial: None,
            second: None,
            mode: self.mode,
            closed: None,
        };
        if let (Some(p), Some(s)) = (self.partial.clone(), self.second.clone()) {
            let sp: PartialFn = Arc::new(move |c, a| p(c, a).into_iter().map(|x| c2 * x).collect());
            let ss: SecondFn =
                Arc::new(move |c, a, b| s(c, a, b).into_iter().map(|x| c2 * x).collect());
            chart.partial = Some(sp);
            chart.second = Some(ss);
        }
        chart
    }
}

fn diag(n: usize, entries: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for (i, &e) in entries.iter().enumerate() {
        m[i * n + i] = e;
    }
    m
}

/// Flat Euclidean space on the unit box.
pub fn euclidean(n: usize) -> MetricChart {
    let axes = vec![
        Axis {
            lo: 0.0,
            hi: 1.0,
            periodic: false
        };
        n
    ];
    let eval: MetricFn = Arc::new(move |_| linalg::identity(n));
    let zeros = n * n;
    let partial: PartialFn = Arc::new(move |_, _| vec![0.0; zeros]);
    let second: SecondFn = Arc::new(move |_, _, _| vec![0.0; zeros]);
    MetricChart::new("euclidean", CoordBox::new(axes), eval).with_partials(partial, second)
}

/// Flat Euclidean metric on an arbitrary box (regions centered away from the
/// unit box use this).
pub fn euclidean_box(bounds: &[(f64, f64)]) -> MetricChart {
    let n = bounds.len();
    let axes = bounds
        .iter()
        .map(|&(lo, hi)| Axis {
            lo,
            hi,
            periodic: false,
        })
        .collect();
    let eval: MetricFn = Arc::new(move |_| linalg::identity(n));
    let zeros = n * n;
    let partial: PartialFn = Arc::new(move |_, _| vec![0.0; zeros]);
    let second: SecondFn = Arc::new(move |_, _, _| vec![0.0; zeros]);
    MetricChart::new("euclidean", CoordBox::new(axes), eval).with_partials(partial, second)
}

/// Round 2-sphere of radius r in colatitude/longitude coordinates.
pub fn sphere(r: f64) -> MetricChart {
    let axes = vec![
        Axis {
            lo: 0.0,
            hi: std::f64::consts::PI,
            periodic: false,
        },
        Axis {
            lo: 0.0,
            hi: 2.0 * std::f64::consts::PI,
            periodic: true,
        },
    ];
    let r2 = r * r;
    let eval: MetricFn = Arc::new(move |p| diag(2, &[r2, r2 * p[0].sin().powi(2)]));
    let partial: PartialFn = Arc::new(move |p, axis| {
        if axis == 0 {
            diag(2, &[0.0, r2 * (2.0 * p[0]).sin()])
        } else {
            vec![0.0; 4]
        }
    });
    let second: SecondFn = Arc::new(move |p, a, b| {
        if a == 0 && b == 0 {
            diag(2, &[0.0, 2.0 * r2 * (2.0 * p[0]).cos()])
        } else {
            vec![0.0; 4]
        }
    });
    MetricChart::new("sphere", CoordBox::new(axes), eval)
        .with_partials(partial, second)
        .with_closed(ClosedTopology {
            expected_chi: 2,
            singular_axes: vec![0],
            total_volume: 4.0 * std::f64::consts::PI * r2,
        })
}

/// Hyperbolic upper half-plane, curvature -1, on a box away from the real axis.
pub fn half_plane() -> MetricChart {
    let axes = vec![
        Axis {
            lo: -3.0,
            hi: 3.0,
            periodic: false,
        },
        Axis {
            lo: 0.05,
            hi: 64.0,
            periodic: false,
        },
    ];
    let eval: MetricFn = Arc::new(|p| {
        let s = 1.0 / (p[1] * p[1]);
        diag(2, &[s, s])
    });
    let partial: PartialFn = Arc::new(|p, axis| {
        if axis == 1 {
            let s = -2.0 / p[1].powi(3);
            diag(2, &[s, s])
        } else {
            vec![0.0; 4]
        }
    });
    let second: SecondFn = Arc::new(|p, a, b| {
        if a == 1 && b == 1 {
            let s = 6.0 / p[1].powi(4);
            diag(2, &[s, s])
        } else {
            vec![0.0; 4]
        }
    });
    MetricChart::new("half-plane", CoordBox::new(axes), eval).with_partials(partial, second)
}

/// Flat torus: identity metric on the unit box, all axes periodic.
pub fn flat_torus(n: usize) -> MetricChart {
    let axes = vec![
        Axis {
            lo: 0.0,
            hi: 1.0,
            periodic: true
        };
        n
    ];
    let eval: MetricFn = Arc::new(move |_| linalg::identity(n));
    let zeros = n * n;
    let partial: PartialFn = Arc::new(move |_, _| vec![0.0; zeros]);
    let second: SecondFn = Arc::new(move |_, _, _| vec![0.0; zeros]);
    MetricChart::new("flat-torus", CoordBox::new(axes), eval)
        .with_partials(partial, second)
        .with_closed(ClosedTopology {
            expected_chi: 0,
            singular_axes: vec![],
            total_volume: 1.0,
        })
}

/// Thin-part model metric du^2 + e^{-6u} dtheta^2 on [0, u_max] x S^1.
pub fn model_thin(u_max: f64) -> MetricChart {
    let axes = vec![
        Axis {
            lo: 0.0,
            hi: u_max,
            periodic: false,
        },
        Axis {
            lo: 0.0,
            hi: 1.0,
            periodic: true,
        },
    ];
    let eval: MetricFn = Arc::new(|p| diag(2, &[1.0, (-6.0 * p[0]).exp()]));
    let partial: PartialFn = Arc::new(|p, axis| {
        if axis == 0 {
            diag(2, &[0.0, -6.0 * (-6.0 * p[0]).exp()])
        } else {
            vec![0.0; 4]
        }
    });
    let second: SecondFn = Arc::new(|p, a, b| {
        if a == 0 && b == 0 {
            diag(2, &[0.0, 36.0 * (-6.0 * p[0]).exp()])
        } else {
            vec![0.0; 4]
        }
    });
    MetricChart::new("model-thin", CoordBox::new(axes), eval).with_partials(partial, second)
}

/// Metric product of two charts (block-diagonal metric).
pub fn product(a: &MetricChart, b: &MetricChart) -> MetricChart {
    let na = a.dim();
    let nb = b.dim();
    let n = na + nb;
    let mut axes = a.domain.axes.clone();
    axes.extend_from_slice(&b.domain.axes);
    let (ea, eb) = (a.eval.clone(), b.eval.clone());
    let eval: MetricFn = Arc::new(move |p| {
        let ga = ea(&p[..na]);
        let gb = eb(&p[na..]);
        let mut g = vec![0.0; n * n];
        for i in 0..na {
            for j in 0..na {
                g[i * n + j] = ga[i * na + j];
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                g[(na + i) * n + (na + j)] = gb[i * nb + j];
            }
        }
        g
    });
    let mut chart = MetricChart::new(
        &format!("product({},{})", a.name, b.name),
        CoordBox::new(axes),
        eval,
    );
    if let (Some(pa), Some(pb), Some(sa), Some(sb)) = (
        a.partial.clone(),
        b.partial.clone(),
        a.second.clone(),
        b.second.clone(),
    ) {
        let partial: PartialFn = Arc::new(move |p, axis| {
            let mut g = vec![0.0; n * n];
            if axis < na {
                let ga = pa(&p[..na], axis);
                for i in 0..na {
                    for j in 0..na {
                        g[i * n + j] = ga[i * na + j];
                    }
                }
            } else {
                let gb = pb(&p[na..], axis - na);
                for i in 0..nb {
                    for j in 0..nb {
                        g[(na + i) * n + (na + j)] = gb[i * nb + j];
                    }
                }
            }
            g
        });
        let second: SecondFn = Arc::new(move |p, x, y| {
            let mut g = vec![0.0; n * n];
            if x < na && y < na {
                let ga = sa(&p[..na], x, y);
                for i in 0..na {
                    for j in 0..na {
                        g[i * n + j] = ga[i * na + j];
                    }
                }
            } else if x >= na && y >= na {
                let gb = sb(&p[na..], x - na, y - na);
                for i in 0..nb {
                    for j in 0..nb {
                        g[(na + i) * n + (na + j)] = gb[i * nb + j];
                    }
                }
            }
            g
        });
        chart = chart.with_partials(partial, second);
    }
    if let (Some(ca), Some(cb)) = (&a.closed, &b.closed) {
        let mut singular = ca.singular_axes.clone();
        singular.extend(cb.singular_axes.iter().map(|&x| x + na));
        chart = chart.with_closed(ClosedTopology {
            expected_chi: ca.expected_chi * cb.expected_chi,
            singular_axes: singular,
            total_volume: ca.total_volume * cb.total_volume,
        });
    }
    chart
}

/// Round 4-sphere of radius r in nested spherical coordinates.
pub fn round_s4(r: f64) -> MetricChart {
    use std::f64::consts::PI;
    let axes = vec![
        Axis {
            lo: 0.0,
            hi: PI,
            periodic: false,
        },
        Axis {
            lo: 0.0,
            hi: PI,
            periodic: false,
        },
        Axis {
            lo: 0.0,
            hi: PI,
            periodic: false,
        },
        Axis {
            lo: 0.0,
            hi: 2.0 * PI,
            periodic: true,
        },
    ];
    let r2 = r * r;
    // g_kk = r^2 * prod_{i<k} sin^2(x_i)
    let entry = move |p: &[f64], k: usize| -> f64 {
        let mut v = r2;
        for x in p.iter().take(k) {
            v *= x.sin() * x.sin();
        }
        v
    };
    let eval: MetricFn = Arc::new(move |p| {
        diag(
            4,
            &[entry(p, 0), entry(p, 1), entry(p, 2), entry(p, 3)],
        )
    });
    // d/dx_a g_kk = r^2 * 2 sin x_a cos x_a * prod_{i<k, i != a} sin^2 x_i
    let d_entry = move |p: &[f64], k: usize, a: usize| -> f64 {
        if a >= k {
            return 0.0;
        }
        let mut v = r2 * (2.0 * p[a]).sin();
        for (i, x) in p.iter().enumerate().take(k) {
            if i != a {
                v *= x.sin() * x.sin();
            }
        }
        v
    };
    let dd_entry = move |p: &[f64], k: usize, a: usize, b: usize| -> f64 {
        if a >= k || b >= k {
            return 0.0;
        }
        if a == b {
            let mut v = r2 * 2.0 * (2.0 * p[a]).cos();
            for (i, x) in p.iter().enumerate().take(k) {
                if i != a {
                    v *= x.sin() * x.sin();
                }
            }
            v
        } else {
            let mut v = r2 * (2.0 * p[a]).sin() * (2.0 * p[b]).sin();
            for (i, x) in p.iter().enumerate().take(k) {
                if i != a && i != b {
                    v *= x.sin() * x.sin();
                }
            }
            v
        }
    };
    let partial: PartialFn = Arc::new(move |p, a| {
        diag(
            4,
            &[
                d_entry(p, 0, a),
                d_entry(p, 1, a),
                d_entry(p, 2, a),
                d_entry(p, 3, a),
            ],
        )
    });
    let second: SecondFn = Arc::new(move |p, a, b| {
        diag(
            4,
            &[
                dd_entry(p, 0, a, b),
                dd_entry(p, 1, a, b),
                dd_entry(p, 2, a, b),
                dd_entry(p, 3, a, b),
            ],
        )
    });
    MetricChart::new("s4", CoordBox::new(axes), eval)
        .with_partials(partial, second)
        .with_closed(ClosedTopology {
            expected_chi: 2,
            singular_axes: vec![0, 1, 2],
            total_volume: 8.0 * PI * PI * r2 * r2 / 3.0,
        })
}

/// Product of two unit 2-spheres.
pub fn s2xs2() -> MetricChart {
    let mut chart = product(&sphere(1.0), &sphere(1.0));
    chart.name = "s2xs2".into();
    chart
}

/// Catalog lookup by name with a flat parameter list.
///
/// Recognized names: `euclidean` (dim), `sphere` (radius), `half-plane`,
/// `flat-torus` (dim), `model-thin` (u-max), `s4` (radius), `s2xs2`.
pub fn by_name(name: &str, params: &[(String, f64)]) -> Result<MetricChart> {
    let get = |key: &str, default: f64| -> f64 {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or(default)
    };
    match name {
        "euclidean" => Ok(euclidean(get("dim", 2.0) as usize)),
        "sphere" => {
            let r = get("radius", 1.0);
            if r <= 0.0 {
                return Err(Error::Config("sphere radius must be positive".into()));
            }
            Ok(sphere(r))
        }
        "half-plane" => Ok(half_plane()),
        "flat-torus" => Ok(flat_torus(get("dim", 2.0) as usize)),
        "model-thin" => Ok(model_thin(get("u-max", 12.0))),
        "s4" => {
            let r = get("radius", 1.0);
            if r <= 0.0 {
                return Err(Error::Config("sphere radius must be positive".into()));
            }
            Ok(round_s4(r))
        }
        "s2xs2" => Ok(s2xs2()),
        other => Err(Error::Config(format!("unknown metric '{other}'"))),
    }
}

/// Names accepted by [`by_name`].
pub fn catalog() -> &'static [&'static str] {
    &[
        "euclidean",
        "sphere",
        "half-plane",
        "flat-torus",
        "model-thin",
        "s4",
        "s2xs2",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_wrap() {
        let chart = flat_torus(2);
        let p = chart.point(&[1.25, -0.25]).unwrap();
        assert!((p.coords()[0] - 0.25).abs() < 1e-15);
        assert!((p.coords()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn outside_domain_rejected() {
        let chart = euclidean(2);
        assert!(matches!(
            chart.point(&[1.5, 0.5]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn asymmetric_evaluator_is_rejected() {
        let cb = CoordBox::new(vec![
            Axis { lo: 0.0, hi: 1.0, periodic: false },
            Axis { lo: 0.0, hi: 1.0, periodic: false },
        ]);
        let chart = MetricChart::new(
            "lopsided",
            cb,
            Arc::new(|_| vec![1.0, 0.5, 0.0, 1.0]),
        );
        let p = chart.point(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            chart.metric_at(&p),
            Err(Error::AsymmetricMetric { .. })
        ));
    }

    #[test]
    fn sphere_pole_not_spd() {
        let chart = sphere(1.0);
        let p = chart.point(&[0.0, 0.3]).unwrap();
        assert!(matches!(
            chart.metric_at(&p),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn fd_partials_match_analytic() {
        for chart in [sphere(1.3), half_plane(), model_thin(4.0)] {
            let fd = chart.clone().with_finite_difference();
            let p = match chart.name.as_str() {
                "half-plane" => vec![0.4, 1.7],
                _ => vec![0.9, 0.4],
            };
            for axis in 0..2 {
                let a = chart.metric_partial(&p, axis).unwrap();
                let b = fd.metric_partial(&p, axis).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-8, "{} axis {axis}: {x} vs {y}", chart.name);
                }
            }
        }
    }

    #[test]
    fn product_blocks() {
        let chart = s2xs2();
        let p = chart.point(&[1.0, 2.0, 0.7, 0.1]).unwrap();
        let g = chart.metric_at(&p).unwrap();
        assert!((linalg::at(&g, 4, 1, 1) - 1.0f64.sin().powi(2)).abs() < 1e-15);
        assert!((linalg::at(&g, 4, 3, 3) - 0.7f64.sin().powi(2)).abs() < 1e-15);
        assert_eq!(linalg::at(&g, 4, 0, 2), 0.0);
        assert_eq!(chart.closed.as_ref().unwrap().expected_chi, 4);
    }

    #[test]
    fn step_underflow_is_config_error() {
        let chart = sphere(1.0).with_mode(DerivativeMode::FiniteDifference {
            step: Some(1e-12),
        });
        assert!(matches!(chart.fd_step(0), Err(Error::Config(_))));
    }
}
