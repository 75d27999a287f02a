//! Exact rational Euler-characteristic oracles.
//!
//! Everything in this module runs in exact arithmetic: Bernoulli numbers from
//! the defining recurrence, zeta at negative odd integers via
//! zeta(1-2g) = -B_{2g}/2g, the Harer-Zagier values for mapping class groups,
//! the symplectic-group product formula, and covering-index bookkeeping. These
//! are the integers and rationals the numerical integrals must land on.

use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Arbitrary-precision rational, normalized (gcd 1, positive denominator)
/// after every operation. Serializes as `"num/den"`.
pub type ExactRational = BigRational;

/// Render a rational the way reports expect: `num/den`, or just `num` when
/// the denominator is one.
pub fn rational_string(q: &ExactRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k.min(n - k) {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// Bernoulli number B_m by the recurrence sum_{j<=m} C(m+1, j) B_j = 0
/// (convention B_1 = -1/2).
///
/// Odd m > 1 give zero; the table is rebuilt per call, which is cheap for the
/// supported range m <= 200.
pub fn bernoulli(m: usize) -> Result<ExactRational> {
    if m > 200 {
        return Err(Error::Capability(format!(
            "Bernoulli index {m} above the supported bound 200"
        )));
    }
    let mut table: Vec<ExactRational> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        if k == 0 {
            table.push(ExactRational::one());
            continue;
        }
        // B_k = -1/(k+1) * sum_{j<k} C(k+1, j) B_j
        let mut acc = ExactRational::zero();
        for (j, bj) in table.iter().enumerate() {
            acc += ExactRational::from(binomial(k + 1, j)) * bj;
        }
        let b = -acc / ExactRational::from(BigInt::from(k as i64 + 1));
        table.push(b);
    }
    Ok(table.pop().expect("table is nonempty"))
}

/// zeta(1 - 2g) = -B_{2g} / 2g, exact.
pub fn zeta_neg(g: usize) -> Result<ExactRational> {
    if g == 0 {
        return Err(Error::Range("zeta_neg needs g >= 1".into()));
    }
    let b = bernoulli(2 * g)?;
    Ok(-b / ExactRational::from(BigInt::from(2 * g as i64)))
}

/// Euler characteristic of the mapping class group of a genus-g surface with
/// one puncture: zeta(1-2g), valid for g > 1.
pub fn chi_punctured(g: usize) -> Result<ExactRational> {
    if g <= 1 {
        return Err(Error::Range(format!(
            "chi_punctured is stated for g > 1 only (got g = {g})"
        )));
    }
    zeta_neg(g)
}

/// Euler characteristic of the mapping class group of a closed genus-g
/// surface: zeta(1-2g) / (2-2g), valid for g > 1.
pub fn chi_closed(g: usize) -> Result<ExactRational> {
    if g <= 1 {
        return Err(Error::Range(format!(
            "chi_closed is stated for g > 1 only (got g = {g})"
        )));
    }
    let denom = ExactRational::from(BigInt::from(2 - 2 * g as i64));
    Ok(zeta_neg(g)? / denom)
}

/// Euler characteristic of Sp(2n, Z): product of zeta(1-2k) for k = 1..n.
pub fn chi_sp(n: usize) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::Range("chi_sp needs n >= 1".into()));
    }
    let mut prod = ExactRational::one();
    for k in 1..=n {
        prod *= zeta_neg(k)?;
    }
    Ok(prod)
}

/// Covering bookkeeping: the characteristic of a degree-`index` covering is
/// `index` times the orbifold value.
pub fn chi_finite_cover(chi_orb: &ExactRational, index: usize) -> ExactRational {
    chi_orb * ExactRational::from(BigInt::from(index as i64))
}

/// Inverse direction: orbifold value from a covering of known degree.
pub fn chi_orbifold_from_cover(chi_cover: &ExactRational, index: usize) -> ExactRational {
    chi_cover / ExactRational::from(BigInt::from(index as i64))
}

/// Dimension bookkeeping for the Teichmueller space of S_{g,p}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeichDim {
    /// d = 3g - 3 + p
    pub d: usize,
    /// real dimension of Teichmueller space, 2d
    pub dim_teich: usize,
    /// dimension of the complex of curves, d - 1
    pub dim_curve_complex: usize,
}

pub fn teich_dim(g: usize, p: usize) -> Result<TeichDim> {
    let d = 3 * g as i64 - 3 + p as i64;
    if d <= 0 {
        return Err(Error::Range(format!(
            "3g - 3 + p must be positive (got {d} for g={g}, p={p})"
        )));
    }
    let d = d as usize;
    Ok(TeichDim {
        d,
        dim_teich: 2 * d,
        dim_curve_complex: d - 1,
    })
}

/// Denominator predicted by von Staudt-Clausen: the product of the primes p
/// with (p-1) | m.
pub fn von_staudt_clausen_denominator(m: usize) -> BigInt {
    let mut d = BigInt::one();
    for p in 2..=(m + 1) {
        let is_prime = p > 1 && (2..p).take_while(|q| q * q <= p).all(|q| p % q != 0);
        if is_prime && m % (p - 1) == 0 {
            d *= BigInt::from(p);
        }
    }
    d
}

/// Round a float to the nearest integer together with the gap, for the
/// "close to an integer means equal to it" step of integrality arguments.
pub fn nearest_integer(x: f64) -> (i64, f64) {
    let n = x.round();
    (n as i64, (x - n).abs())
}

/// True when the rational is an integer.
pub fn is_integer(q: &ExactRational) -> bool {
    q.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn bernoulli_small_values() {
        assert_eq!(bernoulli(0).unwrap(), q(1, 1));
        assert_eq!(bernoulli(1).unwrap(), q(-1, 2));
        assert_eq!(bernoulli(2).unwrap(), q(1, 6));
        assert_eq!(bernoulli(3).unwrap(), q(0, 1));
        assert_eq!(bernoulli(4).unwrap(), q(-1, 30));
        assert_eq!(bernoulli(12).unwrap(), q(-691, 2730));
    }

    #[test]
    fn bernoulli_capability_bound() {
        assert!(bernoulli(202).is_err());
        assert!(bernoulli(200).is_ok());
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_neg(1).unwrap(), q(-1, 12));
        assert_eq!(zeta_neg(2).unwrap(), q(1, 120));
        assert_eq!(zeta_neg(3).unwrap(), q(-1, 252));
    }

    #[test]
    fn zeta_alternates_in_sign() {
        for g in 1..=20 {
            let z = zeta_neg(g).unwrap();
            if g % 2 == 1 {
                assert!(z.is_negative(), "zeta(1-{}) should be negative", 2 * g);
            } else {
                assert!(z.is_positive(), "zeta(1-{}) should be positive", 2 * g);
            }
        }
    }

    #[test]
    fn mapping_class_group_values() {
        assert_eq!(chi_punctured(2).unwrap(), q(1, 120));
        assert_eq!(chi_punctured(3).unwrap(), q(-1, 252));
        assert!(chi_punctured(1).is_err());
        assert_eq!(chi_closed(2).unwrap(), q(-1, 240));
        assert_eq!(chi_closed(3).unwrap(), q(1, 1008));
        assert!(chi_closed(1).is_err());
    }

    #[test]
    fn symplectic_products() {
        assert_eq!(chi_sp(1).unwrap(), q(-1, 12));
        assert_eq!(chi_sp(2).unwrap(), q(-1, 1440));
        assert_eq!(chi_sp(3).unwrap(), q(1, 362_880));
    }

    #[test]
    fn closed_and_punctured_are_consistent() {
        for g in 2..=20 {
            let lhs = chi_closed(g).unwrap() * q(2 - 2 * g as i64, 1);
            assert_eq!(lhs, chi_punctured(g).unwrap());
        }
    }

    #[test]
    fn covering_bookkeeping() {
        let orb = q(-1, 6);
        assert_eq!(chi_finite_cover(&orb, 12), q(-2, 1));
        let orb2 = q(-1, 12);
        assert_eq!(chi_finite_cover(&orb2, 24), q(-2, 1));
        assert_eq!(chi_finite_cover(&orb, 1), orb);
        // composition law
        let a = chi_finite_cover(&chi_finite_cover(&orb, 3), 4);
        assert_eq!(a, chi_finite_cover(&orb, 12));
        assert_eq!(chi_orbifold_from_cover(&q(-2, 1), 12), q(-1, 6));
    }

    #[test]
    fn teich_dimensions() {
        let d = teich_dim(1, 1).unwrap();
        assert_eq!((d.d, d.dim_teich, d.dim_curve_complex), (1, 2, 0));
        let d = teich_dim(2, 0).unwrap();
        assert_eq!((d.d, d.dim_teich, d.dim_curve_complex), (3, 6, 2));
        assert!(teich_dim(0, 3).is_err());
    }

    #[test]
    fn von_staudt_clausen_denominators() {
        for g in 1..=20 {
            let b = bernoulli(2 * g).unwrap();
            assert_eq!(
                b.denom().clone(),
                von_staudt_clausen_denominator(2 * g),
                "denominator of B_{}",
                2 * g
            );
        }
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(rational_string(&q(1, 120)), "1/120");
        assert_eq!(rational_string(&q(-2, 1)), "-2");
        assert_eq!(rational_string(&q(-1, 1440)), "-1/1440");
    }
}
