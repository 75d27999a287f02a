//! Christoffel symbols, the Riemann tensor and orthonormal frames.
//!
//! Conventions: Gamma^k_{ij} = (1/2) g^{km} (d_i g_{jm} + d_j g_{im} - d_m g_{ij}),
//! R^m_{jkl} = d_k Gamma^m_{lj} - d_l Gamma^m_{kj}
//!           + Gamma^m_{ks} Gamma^s_{lj} - Gamma^m_{ls} Gamma^s_{kj},
//! and the fully covariant tensor R_{ijkl} = g_{im} R^m_{jkl}. With this sign
//! a space of constant curvature K satisfies
//! R_{ijkl} = K (g_{ik} g_{jl} - g_{il} g_{jk}), so the unit sphere has
//! R_{1212} = +1 in an orthonormal frame.

use crate::chart::{DerivativeMode, MetricChart, Point};
use crate::linalg;
use crate::{Error, Result};

/// Christoffel symbols of the second kind at a point, indexed `[k][i][j]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub n: usize,
    data: Vec<f64>,
    /// First-derivative step actually used (None in analytic mode).
    pub step: Option<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }
}

/// Gamma^k_{ij} from the metric and its first partials.
pub fn christoffel(chart: &MetricChart, p: &Point) -> Result<Christoffel> {
    let g = chart.metric_at(p)?;
    christoffel_from_metric(chart, p.coords(), &g)
}

/// Internal variant taking raw coordinates (used by finite-difference offsets,
/// where the offset point may sit just past the domain edge).
fn christoffel_raw(chart: &MetricChart, coords: &[f64]) -> Result<Christoffel> {
    let g = chart.metric_raw(coords);
    christoffel_from_metric(chart, coords, &g)
}

fn christoffel_from_metric(chart: &MetricChart, coords: &[f64], g: &[f64]) -> Result<Christoffel> {
    let n = chart.dim();
    let ginv = linalg::inverse(g, n).ok_or(Error::NotPositiveDefinite {
        context: format!("{} at {:?}", chart.name, coords),
    })?;
    let mut dg = Vec::with_capacity(n);
    for axis in 0..n {
        dg.push(chart.metric_partial(coords, axis)?);
    }
    let mut data = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for m in 0..n {
                    let term = dg[i][j * n + m] + dg[j][i * n + m] - dg[m][i * n + j];
                    s += ginv[k * n + m] * term;
                }
                let v = 0.5 * s;
                data[(k * n + i) * n + j] = v;
                data[(k * n + j) * n + i] = v;
            }
        }
    }
    let step = match chart.mode {
        DerivativeMode::Analytic => None,
        DerivativeMode::FiniteDifference { .. } => Some(chart.fd_step(0)?),
    };
    Ok(Christoffel { n, data, step })
}

/// d_axis Gamma^k_{ij}, flat-indexed like `Christoffel`.
fn christoffel_partial(chart: &MetricChart, coords: &[f64], axis: usize) -> Result<Vec<f64>> {
    if chart.mode == DerivativeMode::Analytic {
        if let Some(dd) = analytic_christoffel_partial(chart, coords, axis)? {
            return Ok(dd);
        }
    }
    // Finite differences of Gamma with the coarser outer step.
    let h = chart.fd_outer_step(axis)?;
    let eval = |c: &[f64]| -> Result<Vec<f64>> {
        let gamma = christoffel_raw(chart, c)?;
        Ok(gamma.data)
    };
    let d = |h: f64| -> Result<Vec<f64>> {
        let mut plus = coords.to_vec();
        let mut minus = coords.to_vec();
        plus[axis] += h;
        minus[axis] -= h;
        let fp = eval(&plus)?;
        let fm = eval(&minus)?;
        Ok(fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

/// Closed-form derivative of Gamma when the chart registers second partials:
/// d Gamma uses d(g^{-1}) = -g^{-1} (d g) g^{-1} and the second partials of g.
fn analytic_christoffel_partial(
    chart: &MetricChart,
    coords: &[f64],
    axis: usize,
) -> Result<Option<Vec<f64>>> {
    let n = chart.dim();
    let g = chart.metric_raw(coords);
    let ginv = match linalg::inverse(&g, n) {
        Some(gi) => gi,
        None => {
            return Err(Error::NotPositiveDefinite {
                context: format!("{} at {:?}", chart.name, coords),
            })
        }
    };
    let mut dg = Vec::with_capacity(n);
    for a in 0..n {
        dg.push(chart.metric_partial(coords, a)?);
    }
    let mut ddg = Vec::with_capacity(n);
    for a in 0..n {
        match chart.metric_second_partial(coords, a, axis) {
            Some(m) => ddg.push(m),
            None => return Ok(None),
        }
    }
    // d_axis g^{-1}
    let tmp = linalg::matmul(&ginv, &dg[axis], n);
    let dginv: Vec<f64> = linalg::matmul(&tmp, &ginv, n)
        .into_iter()
        .map(|x| -x)
        .collect();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for m in 0..n {
                    let first = dg[i][j * n + m] + dg[j][i * n + m] - dg[m][i * n + j];
                    let second = ddg[i][j * n + m] + ddg[j][i * n + m] - ddg[m][i * n + j];
                    s += dginv[k * n + m] * first + ginv[k * n + m] * second;
                }
                let v = 0.5 * s;
                out[(k * n + i) * n + j] = v;
                out[(k * n + j) * n + i] = v;
            }
        }
    }
    Ok(Some(out))
}

/// Coordinate components R_{ijkl} of the curvature tensor.
#[derive(Debug, Clone)]
pub struct Rank4 {
    pub n: usize,
    comp: Vec<f64>,
}

impl Rank4 {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.comp[((i * n + j) * n + k) * n + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.comp.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Fully covariant coordinate curvature R_{ijkl} at a point.
pub fn riemann_covariant(chart: &MetricChart, p: &Point) -> Result<Rank4> {
    let n = chart.dim();
    let g = chart.metric_at(p)?;
    let gamma = christoffel(chart, p)?;
    let mut dgamma = Vec::with_capacity(n);
    for axis in 0..n {
        dgamma.push(christoffel_partial(chart, p.coords(), axis)?);
    }
    let dg = |axis: usize, m: usize, i: usize, j: usize| dgamma[axis][(m * n + i) * n + j];

    let mut upper = vec![0.0; n * n * n * n]; // R^m_{jkl}
    for m in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dg(k, m, l, j) - dg(l, m, k, j);
                    for s in 0..n {
                        v += gamma.get(m, k, s) * gamma.get(s, l, j)
                            - gamma.get(m, l, s) * gamma.get(s, k, j);
                    }
                    upper[((m * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    let mut comp = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    for m in 0..n {
                        v += linalg::at(&g, n, i, m) * upper[((m * n + j) * n + k) * n + l];
                    }
                    comp[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    Ok(Rank4 { n, comp })
}

/// Orthonormal frame at a point: columns of E satisfy Eᵀ g E = identity,
/// built by Gram-Schmidt on the coordinate basis in fixed axis order.
pub fn orthonormal_frame(chart: &MetricChart, p: &Point) -> Result<Vec<f64>> {
    let g = chart.metric_at(p)?;
    linalg::gram_schmidt_frame(&g, chart.dim()).ok_or(Error::NotPositiveDefinite {
        context: format!("{} at {:?}", chart.name, p.coords()),
    })
}

/// Curvature components in an orthonormal frame with the full symmetry group
/// enforced by averaging.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    pub n: usize,
    comp: Vec<f64>,
    /// Largest change any component underwent during symmetrization.
    pub symmetry_residual: f64,
}

const QUALITY_RESIDUAL: f64 = 1e-6;

impl CurvatureTensor {
    /// Symmetrize raw components over the eight-element symmetry group
    /// (antisymmetry in each index pair, symmetry under pair exchange) and
    /// record the pre-symmetrization residual.
    pub fn from_raw(n: usize, raw: Vec<f64>) -> CurvatureTensor {
        assert_eq!(raw.len(), n * n * n * n);
        let at = |i: usize, j: usize, k: usize, l: usize| raw[((i * n + j) * n + k) * n + l];
        let mut comp = vec![0.0; raw.len()];
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = (at(i, j, k, l) - at(j, i, k, l) - at(i, j, l, k)
                            + at(j, i, l, k)
                            + at(k, l, i, j)
                            - at(l, k, i, j)
                            - at(k, l, j, i)
                            + at(l, k, j, i))
                            / 8.0;
                        residual = residual.max((v - at(i, j, k, l)).abs());
                        comp[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
        CurvatureTensor {
            n,
            comp,
            symmetry_residual: residual,
        }
    }

    /// Build from components that are already exactly symmetric (tests, models).
    pub fn from_components(n: usize, comp: Vec<f64>) -> CurvatureTensor {
        CurvatureTensor::from_raw(n, comp)
    }

    pub fn zero(n: usize) -> CurvatureTensor {
        CurvatureTensor {
            n,
            comp: vec![0.0; n * n * n * n],
            symmetry_residual: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.comp[((i * n + j) * n + k) * n + l]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.n;
        self.comp[((i * n + j) * n + k) * n + l] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.comp.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// True when the symmetrization moved components more than the quality
    /// threshold; surfaced as a warning, not a failure.
    pub fn quality_warning(&self) -> bool {
        self.symmetry_residual > QUALITY_RESIDUAL
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) + self.get(j, i, k, l)).abs());
                        worst = worst.max((self.get(i, j, k, l) + self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn pair_symmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    /// First Bianchi residual max |R_{ijkl} + R_{iklj} + R_{iljk}|.
    pub fn bianchi_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Contract against a new frame: R'_{abcd} = R_{ijkl} O_i^a O_j^b O_k^c O_l^d.
    pub fn change_frame(&self, o: &[f64]) -> CurvatureTensor {
        let n = self.n;
        // contract one index at a time
        let mut cur = self.comp.clone();
        for pos in 0..4 {
            let mut next = vec![0.0; cur.len()];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let idx = [i, j, k, l];
                            let mut v = 0.0;
                            for m in 0..n {
                                let mut src = idx;
                                src[pos] = m;
                                v += cur[((src[0] * n + src[1]) * n + src[2]) * n + src[3]]
                                    * o[m * n + idx[pos]];
                            }
                            next[((i * n + j) * n + k) * n + l] = v;
                        }
                    }
                }
            }
            cur = next;
        }
        CurvatureTensor {
            n,
            comp: cur,
            symmetry_residual: self.symmetry_residual,
        }
    }
}

/// Orthonormal-frame curvature components at a point.
pub fn riemann_orthonormal(chart: &MetricChart, p: &Point) -> Result<CurvatureTensor> {
    let coord = riemann_covariant(chart, p)?;
    let frame = orthonormal_frame(chart, p)?;
    let n = chart.dim();
    let raw = Rank4 {
        n,
        comp: coord.comp,
    };
    let contracted = raw.change_frame_cols(&frame);
    Ok(CurvatureTensor::from_raw(n, contracted))
}

impl Rank4 {
    /// R'_{abcd} = R_{ijkl} E_{i a} E_{j b} E_{k c} E_{l d} (columns of E are
    /// the frame vectors).
    fn change_frame_cols(&self, e: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut cur = self.comp.clone();
        for pos in 0..4 {
            let mut next = vec![0.0; cur.len()];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let idx = [i, j, k, l];
                            let mut v = 0.0;
                            for m in 0..n {
                                let mut src = idx;
                                src[pos] = m;
                                v += cur[((src[0] * n + src[1]) * n + src[2]) * n + src[3]]
                                    * e[m * n + idx[pos]];
                            }
                            next[((i * n + j) * n + k) * n + l] = v;
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

/// Sectional curvature of a surface chart: R_{1212} in an orthonormal frame.
pub fn gauss_curvature(chart: &MetricChart, p: &Point) -> Result<f64> {
    if chart.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            actual: chart.dim(),
        });
    }
    Ok(riemann_orthonormal(chart, p)?.get(0, 1, 0, 1))
}

/// Random tensor with all three curvature symmetries: sample a symmetric
/// expansion over antisymmetric index pairs, then project out the totally
/// antisymmetric (Bianchi-violating) part.
pub fn random_curvature_tensor<R: rand::Rng>(rng: &mut R, n: usize) -> CurvatureTensor {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    let np = pairs.len();
    let mut coeff = vec![0.0; np * np];
    for x in 0..np {
        for y in x..np {
            let v = rng.random_range(-1.0..1.0);
            coeff[x * np + y] = v;
            coeff[y * np + x] = v;
        }
    }
    let mut t = CurvatureTensor::zero(n);
    for (x, &(a, b)) in pairs.iter().enumerate() {
        for (y, &(c, d)) in pairs.iter().enumerate() {
            let v = coeff[x * np + y];
            t.set(a, b, c, d, v);
            t.set(b, a, c, d, -v);
            t.set(a, b, d, c, -v);
            t.set(b, a, d, c, v);
        }
    }
    // Bianchi projection: subtract 1/3 of the cyclic sum, which is totally
    // antisymmetric for tensors with the pair symmetries.
    let mut out = CurvatureTensor::zero(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let cyc = t.get(i, j, k, l) + t.get(i, k, l, j) + t.get(i, l, j, k);
                    out.set(i, j, k, l, t.get(i, j, k, l) - cyc / 3.0);
                }
            }
        }
    }
    CurvatureTensor::from_raw(n, out.comp)
}

/// Constant-curvature tensor R_{ijkl} = K (delta_ik delta_jl - delta_il delta_jk)
/// in an orthonormal frame.
pub fn constant_curvature_tensor(n: usize, k: f64) -> CurvatureTensor {
    let mut t = CurvatureTensor::zero(n);
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
                    t.set(i, j, a, b, k * (d(i, a) * d(j, b) - d(i, b) * d(j, a)));
                }
            }
        }
    }
    t
}
