//! The Gauss-Bonnet-Chern density.
//!
//! Two independent routes compute the same density from orthonormal curvature
//! components R_{ijkl}:
//!
//! - the double permutation sum
//!   Psi = 1/((2 pi)^{n/2} 2^n (n/2)!) * sum_{mu,nu} sign(mu) sign(nu)
//!   R_{mu1 mu2 nu1 nu2} ... R_{mu(n-1) mun nu(n-1) nun},
//! - the Pfaffian of the curvature two-form matrix Omega_{ij} =
//!   sum_{k<l} R_{ijkl} e^k ^ e^l, divided by (2 pi)^{n/2}.
//!
//! Their agreement on random symmetric tensors is one of the crate's standing
//! cross-checks. For a surface the density reduces to K / 2 pi.

use crate::chart::{MetricChart, Point};
use crate::curvature::{riemann_orthonormal, CurvatureTensor};
use crate::{Error, Result};

/// Which route produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    PermutationSum,
    Pfaffian,
}

/// Density value with respect to the Riemannian volume element.
#[derive(Debug, Clone, Copy)]
pub struct EulerDensity {
    pub value: f64,
    pub method: DensityMethod,
}

/// All permutations of {0..n-1} with signs, in lexicographic generation order.
fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if k <= 1 {
            let mut inv = 0usize;
            for a in 0..perm.len() {
                for b in (a + 1)..perm.len() {
                    if perm[a] > perm[b] {
                        inv += 1;
                    }
                }
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            out.push((perm.clone(), sign));
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut perm, &mut out);
    out
}

/// The permutation-sum density. Guarded at n <= 6: the sum has (n!)^2 terms.
pub fn gb_density_perm(r: &CurvatureTensor) -> Result<EulerDensity> {
    let n = r.n;
    if n % 2 == 1 {
        return Ok(EulerDensity {
            value: 0.0,
            method: DensityMethod::PermutationSum,
        });
    }
    if n > 6 {
        return Err(Error::Capability(format!(
            "permutation sum is limited to n <= 6 (got {n}); use the Pfaffian route"
        )));
    }
    let half = n / 2;
    let perms = signed_permutations(n);
    let mut total = 0.0;
    for (mu, smu) in &perms {
        for (nu, snu) in &perms {
            let mut prod = smu * snu;
            for t in 0..half {
                prod *= r.get(mu[2 * t], mu[2 * t + 1], nu[2 * t], nu[2 * t + 1]);
                if prod == 0.0 {
                    break;
                }
            }
            total += prod;
        }
    }
    let mut fact = 1.0;
    for k in 2..=half {
        fact *= k as f64;
    }
    let norm = (2.0 * std::f64::consts::PI).powi(half as i32) * (2f64).powi(n as i32) * fact;
    Ok(EulerDensity {
        value: total / norm,
        method: DensityMethod::PermutationSum,
    })
}

/// Multivector with even-degree components over subsets of {0..n-1}; the
/// commutative algebra the Pfaffian expansion lives in.
struct EvenForm {
    n: usize,
    /// coefficient per subset bitmask
    coeff: Vec<f64>,
}

impl EvenForm {
    fn zero(n: usize) -> Self {
        EvenForm {
            n,
            coeff: vec![0.0; 1 << n],
        }
    }

    fn scalar_one(n: usize) -> Self {
        let mut f = EvenForm::zero(n);
        f.coeff[0] = 1.0;
        f
    }

    /// Wedge with sign from the merge parity of disjoint index sets.
    fn wedge(&self, other: &EvenForm) -> EvenForm {
        let mut out = EvenForm::zero(self.n);
        for (a, &ca) in self.coeff.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in other.coeff.iter().enumerate() {
                if cb == 0.0 || a & b != 0 {
                    continue;
                }
                out.coeff[a | b] += merge_sign(a as u64, b as u64) * ca * cb;
            }
        }
        out
    }
}

/// Parity of the shuffle sorting the concatenation of two disjoint bitmask
/// sets: (-1)^{#{(x, y) in A x B : x > y}}.
fn merge_sign(a: u64, b: u64) -> f64 {
    let mut inversions = 0u32;
    let mut bits = b;
    while bits != 0 {
        let y = bits.trailing_zeros();
        // elements of a strictly greater than y
        inversions += (a >> (y + 1)).count_ones();
        bits &= bits - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

const ANTISYM_QUALITY: f64 = 1e-6;

/// The Pfaffian route: Pf(Omega) / (2 pi)^{n/2} with the curvature two-form
/// matrix expanded recursively (supported for n <= 8).
pub fn gb_density_pfaffian(r: &CurvatureTensor) -> Result<EulerDensity> {
    let n = r.n;
    if n % 2 == 1 {
        return Ok(EulerDensity {
            value: 0.0,
            method: DensityMethod::Pfaffian,
        });
    }
    if n > 8 {
        return Err(Error::Capability(format!(
            "Pfaffian expansion is limited to n <= 8 (got {n})"
        )));
    }
    let scale = r.max_abs().max(1.0);
    if r.antisymmetry_residual() > ANTISYM_QUALITY * scale {
        return Err(Error::NumericalQuality(format!(
            "antisymmetry residual {:e} above 1e-6",
            r.antisymmetry_residual()
        )));
    }
    // Omega_{ij} = sum_{k<l} R_{ijkl} e^k ^ e^l
    let mut omega = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut f = EvenForm::zero(n);
            for k in 0..n {
                for l in (k + 1)..n {
                    f.coeff[(1 << k) | (1 << l)] = r.get(i, j, k, l);
                }
            }
            omega.push(f);
        }
    }
    let indices: Vec<usize> = (0..n).collect();
    let pf = pfaffian_expand(&omega, n, &indices);
    let top = pf.coeff[(1usize << n) - 1];
    let norm = (2.0 * std::f64::consts::PI).powi((n / 2) as i32);
    Ok(EulerDensity {
        value: top / norm,
        method: DensityMethod::Pfaffian,
    })
}

/// Pf(M) = sum_{t>0} (-1)^{t-1} M[i0][it] ^ Pf(M without i0, it).
fn pfaffian_expand(omega: &[EvenForm], n: usize, indices: &[usize]) -> EvenForm {
    if indices.is_empty() {
        return EvenForm::scalar_one(n);
    }
    let i0 = indices[0];
    let mut acc = EvenForm::zero(n);
    for t in 1..indices.len() {
        let it = indices[t];
        let rest: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&x| x != i0 && x != it)
            .collect();
        let sub = pfaffian_expand(omega, n, &rest);
        let term = omega[i0 * n + it].wedge(&sub);
        let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
        for (mask, c) in term.coeff.iter().enumerate() {
            acc.coeff[mask] += sign * c;
        }
    }
    acc
}

/// Density of a chart at a point: curvature in an orthonormal frame piped into
/// the permutation sum (n <= 4) or the Pfaffian (n >= 6); both routes are
/// compared whenever the permutation sum is affordable.
pub fn gb_density(chart: &MetricChart, p: &Point) -> Result<EulerDensity> {
    let n = chart.dim();
    if n % 2 == 1 {
        return Ok(EulerDensity {
            value: 0.0,
            method: DensityMethod::PermutationSum,
        });
    }
    let r = riemann_orthonormal(chart, p)?;
    if n <= 4 {
        let perm = gb_density_perm(&r)?;
        let pf = gb_density_pfaffian(&r)?;
        let scale = perm.value.abs().max(1.0);
        if (perm.value - pf.value).abs() > 1e-9 * scale {
            return Err(Error::NumericalQuality(format!(
                "permutation-sum and Pfaffian densities disagree: {} vs {}",
                perm.value, pf.value
            )));
        }
        Ok(perm)
    } else if n == 6 {
        let pf = gb_density_pfaffian(&r)?;
        let perm = gb_density_perm(&r)?;
        let scale = pf.value.abs().max(1.0);
        if (perm.value - pf.value).abs() > 1e-9 * scale {
            return Err(Error::NumericalQuality(format!(
                "permutation-sum and Pfaffian densities disagree: {} vs {}",
                perm.value, pf.value
            )));
        }
        Ok(pf)
    } else {
        gb_density_pfaffian(&r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart;
    use crate::curvature::{constant_curvature_tensor, random_curvature_tensor, CurvatureTensor};
    use rand::SeedableRng;
    use std::f64::consts::PI;

    /// Brute-force n = 2 oracle: enumerate the four permutation pairs by hand.
    fn density_2d_by_hand(r: &CurvatureTensor) -> f64 {
        let terms = [
            (vec![0usize, 1], 1.0),
            (vec![1usize, 0], -1.0),
        ];
        let mut total = 0.0;
        for (mu, smu) in &terms {
            for (nu, snu) in &terms {
                total += smu * snu * r.get(mu[0], mu[1], nu[0], nu[1]);
            }
        }
        total / (2.0 * PI * 4.0)
    }

    #[test]
    fn zero_tensor_gives_zero() {
        for n in [2usize, 4] {
            let z = CurvatureTensor::zero(n);
            assert_eq!(gb_density_perm(&z).unwrap().value, 0.0);
            assert_eq!(gb_density_pfaffian(&z).unwrap().value, 0.0);
        }
    }

    #[test]
    fn odd_dimension_is_zero_by_definition() {
        let z = CurvatureTensor::zero(3);
        assert_eq!(gb_density_perm(&z).unwrap().value, 0.0);
    }

    #[test]
    fn unit_sphere_density() {
        let r = constant_curvature_tensor(2, 1.0);
        let perm = gb_density_perm(&r).unwrap().value;
        let pf = gb_density_pfaffian(&r).unwrap().value;
        let want = 1.0 / (2.0 * PI);
        assert!((perm - want).abs() < 1e-15);
        assert!((pf - want).abs() < 1e-15);
        assert!((density_2d_by_hand(&r) - want).abs() < 1e-15);
    }

    #[test]
    fn s2xs2_block_density() {
        // unit-sphere blocks: R_{0101} = 1 and R_{2323} = 1 with pair symmetries
        let mut r = CurvatureTensor::zero(4);
        for (a, b) in [(0usize, 1usize), (2, 3)] {
            r.set(a, b, a, b, 1.0);
            r.set(b, a, a, b, -1.0);
            r.set(a, b, b, a, -1.0);
            r.set(b, a, b, a, 1.0);
        }
        let want = 1.0 / (4.0 * PI * PI);
        assert!((gb_density_perm(&r).unwrap().value - want).abs() < 1e-15);
        assert!((gb_density_pfaffian(&r).unwrap().value - want).abs() < 1e-15);
    }

    #[test]
    fn round_s4_density() {
        let r = constant_curvature_tensor(4, 1.0);
        let want = 3.0 / (4.0 * PI * PI);
        assert!((gb_density_pfaffian(&r).unwrap().value - want).abs() < 1e-14);
        assert!((gb_density_perm(&r).unwrap().value - want).abs() < 1e-14);
    }

    #[test]
    fn n6_capability_error() {
        let z = CurvatureTensor::zero(8);
        assert!(matches!(gb_density_perm(&z), Err(Error::Capability(_))));
    }

    #[test]
    fn pfaffian_rejects_broken_antisymmetry() {
        let mut r = CurvatureTensor::zero(2);
        r.set(0, 1, 0, 1, 1.0); // the mirror entries stay zero
        assert!(matches!(
            gb_density_pfaffian(&r),
            Err(Error::NumericalQuality(_))
        ));
    }

    #[test]
    fn perm_equals_pfaffian_on_random_tensors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for n in [2usize, 4] {
            for _ in 0..100 {
                let r = random_curvature_tensor(&mut rng, n);
                let a = gb_density_perm(&r).unwrap().value;
                let b = gb_density_pfaffian(&r).unwrap().value;
                assert!(
                    (a - b).abs() < 1e-10 * a.abs().max(1.0),
                    "n={n}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn routes_agree_at_the_permutation_sum_cap() {
        // n = 6 sits at the documented cost limit of the permutation sum
        // (518400 terms); the Pfaffian must still reproduce it
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(66);
        let r = random_curvature_tensor(&mut rng, 6);
        let a = gb_density_perm(&r).unwrap().value;
        let b = gb_density_pfaffian(&r).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn surface_density_is_curvature_over_two_pi() {
        let probes = [
            (chart::sphere(1.0), vec![1.0, 0.2]),
            (chart::sphere(2.0), vec![0.8, 1.0]),
            (chart::half_plane(), vec![0.1, 1.5]),
            (chart::model_thin(4.0), vec![1.0, 0.5]),
            (chart::euclidean(2), vec![0.5, 0.5]),
        ];
        for (c, coords) in probes {
            let p = c.point(&coords).unwrap();
            let k = crate::curvature::gauss_curvature(&c, &p).unwrap();
            let d = gb_density(&c, &p).unwrap().value;
            let want = k / (2.0 * PI);
            assert!(
                (d - want).abs() <= 1e-12 * want.abs().max(1e-3),
                "{}: {d} vs {want}",
                c.name
            );
        }
    }

    #[test]
    fn pipeline_examples() {
        let torus = chart::flat_torus(2);
        let p = torus.point(&[0.3, 0.7]).unwrap();
        assert_eq!(gb_density(&torus, &p).unwrap().value, 0.0);

        let s2 = chart::sphere(2.0);
        let p = s2.point(&[1.3, 4.0]).unwrap();
        let want = 1.0 / (8.0 * PI);
        assert!((gb_density(&s2, &p).unwrap().value - want).abs() < 1e-12);

        let thin = chart::model_thin(4.0);
        let p = thin.point(&[1.0, 0.0]).unwrap();
        let want = -9.0 / (2.0 * PI);
        assert!((gb_density(&thin, &p).unwrap().value - want).abs() < 1e-9);
    }

    #[test]
    fn frame_rotation_invariance() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for n in [2usize, 4] {
            for _ in 0..20 {
                let r = random_curvature_tensor(&mut rng, n);
                // random orthogonal matrix via Gram-Schmidt on a random matrix
                let mut m = vec![0.0; n * n];
                for x in m.iter_mut() {
                    *x = rng.random_range(-1.0..1.0);
                }
                let o = random_orthogonal(&m, n);
                let rotated = r.change_frame(&o);
                let a = gb_density_perm(&r).unwrap().value;
                let b = gb_density_perm(&rotated).unwrap().value;
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    fn random_orthogonal(m: &[f64], n: usize) -> Vec<f64> {
        // Gram-Schmidt the columns of m against the identity metric.
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for c in 0..n {
            let mut v: Vec<f64> = (0..n).map(|r| m[r * n + c]).collect();
            for e in &cols {
                let dot: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= dot * y;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            cols.push(v);
        }
        let mut o = vec![0.0; n * n];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..n {
                o[r * n + c] = col[r];
            }
        }
        o
    }

    #[test]
    fn density_scales_with_metric() {
        // Psi(c^2 g) = c^{-n} Psi(g)
        let base = chart::sphere(1.0);
        for &c in &[0.5f64, 2.0, 10.0] {
            let scaled = base.scaled(c * c);
            let p0 = base.point(&[1.0, 0.4]).unwrap();
            let p1 = scaled.point(&[1.0, 0.4]).unwrap();
            let d0 = gb_density(&base, &p0).unwrap().value;
            let d1 = gb_density(&scaled, &p1).unwrap().value;
            let want = d0 / (c * c);
            assert!(((d1 - want) / want).abs() < 1e-6, "c={c}: {d1} vs {want}");
        }
    }
}
