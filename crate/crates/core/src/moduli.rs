//! Desk-scale models of moduli-space geometry for the once-punctured torus.
//!
//! Trace coordinates: a complete hyperbolic structure on the once-punctured
//! torus is pinned down by the traces (x, y, z) of two generators and their
//! product, subject to x^2 + y^2 + z^2 = x y z. The involution replacing one
//! entry by the product of the other two minus itself walks the tree of
//! simple closed geodesics; descending it until no entry can shrink reaches
//! the minimal triple, whose smallest entry gives the systole through
//! l = 2 acosh(t/2). Thick parts are systole superlevel sets.
//!
//! The thin-part (cusp-neighbourhood) geometry is modeled exactly by
//! du^2 + e^{-6u} dtheta^2 with u the logarithmic root length
//! u = -log sqrt(l): curvature -9, level-circle second fundamental form 3,
//! |grad l| = 2l, fibre volume eps^{3/2} at the eps-level. These constants
//! being independent of the level is precisely what the residual bounds of
//! the exhaustion argument consume.
//!
//! The modular curve (curvature -1) provides the integrality benchmark: the
//! truncated fundamental-domain area converges to pi/3, so the level-3
//! congruence cover (index 12, 4 cusps, genus 0) integrates to chi = -2.

use crate::quad::{self, QuadSpec};
use crate::{Error, Result};
use rand::Rng;

const MARKOV_TOL: f64 = 1e-9;

/// Trace coordinates (x, y, z) with x^2 + y^2 + z^2 = x y z and all entries
/// above 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrickeTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FrickeTriple {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let t = FrickeTriple { x, y, z };
        t.validate()?;
        Ok(t)
    }

    pub fn entries(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn relation_residual(&self) -> f64 {
        let (x, y, z) = (self.x, self.y, self.z);
        (x * x + y * y + z * z - x * y * z).abs()
    }

    pub fn validate(&self) -> Result<()> {
        // residual is compared against the natural magnitude of the relation
        let (x, y, z) = (self.x, self.y, self.z);
        let scale = x * x + y * y + z * z + (x * y * z).abs();
        if self.relation_residual() > MARKOV_TOL * scale.max(1.0) {
            return Err(Error::ModelConsistency(format!(
                "trace relation residual {:e}",
                self.relation_residual()
            )));
        }
        if self.x <= 2.0 || self.y <= 2.0 || self.z <= 2.0 {
            return Err(Error::ModelConsistency(format!(
                "trace entries must exceed 2 (got {:?})",
                self.entries()
            )));
        }
        Ok(())
    }

    /// The involution replacing one entry by the product of the other two
    /// minus itself. Preserves the trace relation exactly.
    pub fn markov_move(&self, which: usize) -> Result<FrickeTriple> {
        let (x, y, z) = (self.x, self.y, self.z);
        let t = match which {
            0 => FrickeTriple { x: y * z - x, y, z },
            1 => FrickeTriple { x, y: x * z - y, z },
            _ => FrickeTriple { x, y, z: x * y - z },
        };
        t.validate()?;
        Ok(t)
    }

    pub fn max_entry(&self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    pub fn min_entry(&self) -> f64 {
        self.x.min(self.y).min(self.z)
    }
}

/// Result of the descent: the minimal triple and the number of moves taken.
#[derive(Debug, Clone, Copy)]
pub struct ReducedTriple {
    pub triple: FrickeTriple,
    pub moves: usize,
}

const MAX_DESCENT: usize = 1_000_000;

/// Repeatedly flip the largest entry while that strictly decreases it.
pub fn fricke_reduce(t: &FrickeTriple) -> Result<ReducedTriple> {
    t.validate()?;
    let mut cur = *t;
    let mut moves = 0usize;
    loop {
        let entries = cur.entries();
        let mut which = 0;
        for i in 1..3 {
            if entries[i] > entries[which] {
                which = i;
            }
        }
        let other = [0, 1, 2]
            .iter()
            .filter(|&&i| i != which)
            .map(|&i| entries[i])
            .product::<f64>();
        let flipped = other - entries[which];
        if flipped >= entries[which] - 1e-15 * entries[which].abs() {
            return Ok(ReducedTriple { triple: cur, moves });
        }
        cur = cur.markov_move(which)?;
        moves += 1;
        if moves > MAX_DESCENT {
            return Err(Error::ModelConsistency(
                "descent did not terminate within the move budget".into(),
            ));
        }
    }
}

/// Geodesic length from a trace: l = 2 acosh(t / 2).
pub fn length_from_trace(trace: f64) -> f64 {
    2.0 * (trace / 2.0).acosh()
}

/// Systole: descend to the minimal triple and convert its smallest entry.
pub fn systole(t: &FrickeTriple) -> Result<f64> {
    let reduced = fricke_reduce(t)?;
    Ok(length_from_trace(reduced.triple.min_entry()))
}

/// Brute-force oracle: enumerate the tree of triples to the given depth and
/// take the smallest trace seen anywhere.
pub fn min_trace_by_tree_search(t: &FrickeTriple, depth: usize) -> Result<f64> {
    fn walk(t: &FrickeTriple, depth: usize, last: Option<usize>, best: &mut f64) -> Result<()> {
        *best = best.min(t.min_entry());
        if depth == 0 {
            return Ok(());
        }
        for which in 0..3 {
            if Some(which) == last {
                continue; // undoing the previous move revisits the parent
            }
            let next = t.markov_move(which)?;
            walk(&next, depth - 1, Some(which), best)?;
        }
        Ok(())
    }
    t.validate()?;
    let mut best = t.min_entry();
    walk(t, depth, None, &mut best)?;
    Ok(best)
}

/// Membership in the eps-thick part: systole at least eps.
pub fn thick_membership(t: &FrickeTriple, eps: f64) -> Result<bool> {
    if eps <= 0.0 {
        return Err(Error::Range("thickness parameter must be positive".into()));
    }
    Ok(systole(t)? >= eps)
}

/// Random point of the trace variety: sample two entries and solve the trace
/// relation for the third (larger root).
pub fn random_triple<R: Rng>(rng: &mut R) -> FrickeTriple {
    loop {
        let x: f64 = rng.random_range(3.0..10.0);
        let y: f64 = rng.random_range(3.0..10.0);
        let disc = x * x * y * y - 4.0 * (x * x + y * y);
        if disc <= 0.0 {
            continue;
        }
        let z = 0.5 * (x * y + disc.sqrt());
        if let Ok(t) = FrickeTriple::new(x, y, z) {
            return t;
        }
    }
}

// --- thin-part model quantities ----------------------------------------------

/// The logarithmic root length of a geodesic of length l.
pub fn log_root_length(l: f64) -> f64 {
    -l.sqrt().ln()
}

/// Thin-part model metric matrix diag(1, e^{-6u}) at logarithmic root
/// length u. The same metric is registered as the `model-thin` chart.
pub fn thin_model_metric(u: f64) -> Result<[[f64; 2]; 2]> {
    if u < 0.0 {
        return Err(Error::Range("u must be nonnegative".into()));
    }
    Ok([[1.0, 0.0], [0.0, (-6.0 * u).exp()]])
}

/// |grad l| in the model metric: with l = e^{-2u} the gradient is parallel to
/// du with norm 2 e^{-2u} = 2 l, so |grad l| / l = 2 identically.
pub fn grad_length_norm(u: f64) -> Result<f64> {
    if u < 0.0 {
        return Err(Error::Range("u must be nonnegative".into()));
    }
    Ok(2.0 * (-2.0 * u).exp())
}

/// Level-set second fundamental form of {u = u0}: the closed form (3,
/// independent of u0) next to the numerical value delegated to the
/// constraint machinery on the model chart.
#[derive(Debug, Clone, Copy)]
pub struct LevelSetForm {
    pub closed_form: f64,
    pub numeric: f64,
}

pub fn level_set_ii(u0: f64) -> Result<LevelSetForm> {
    if u0 < 0.0 {
        return Err(Error::Range("u0 must be nonnegative".into()));
    }
    let cusp = crate::region::model_cusp_side(u0, u0 + 4.0);
    let p = cusp.chart.point(&[u0, 0.25])?;
    // outward for the cusp side {u >= u0} is -du
    let ii = crate::region::second_fundamental_form(&cusp, &[0], &p, &[-1.0, 0.0])?;
    Ok(LevelSetForm {
        closed_form: 3.0,
        numeric: ii.scalar(),
    })
}

/// Volume of the m-torus fibre at the eps-level u0 = -log sqrt(eps), with the
/// two decay exponents worth comparing: the Riemannian circle scale gives
/// eps^{3m/2}, bounding each circle by its squared scale gives eps^{3m}.
/// Both decay faster than eps for every m >= 1.
#[derive(Debug, Clone, Copy)]
pub struct FibreVolume {
    pub volume: f64,
    pub riemannian_exponent: f64,
    pub squared_scale_exponent: f64,
}

pub fn thin_fibre_volume(eps: f64, m: usize) -> Result<FibreVolume> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Range("eps must lie in (0, 1)".into()));
    }
    if m == 0 {
        return Err(Error::Range("fibre rank must be positive".into()));
    }
    let u0 = -eps.sqrt().ln();
    let circle = (-3.0 * u0).exp(); // = eps^{3/2}
    Ok(FibreVolume {
        volume: circle.powi(m as i32),
        riemannian_exponent: 1.5 * m as f64,
        squared_scale_exponent: 3.0 * m as f64,
    })
}

/// Outer cone over a boundary point of the eps-thick part: the region
/// {u > u0} at a fixed fibre coordinate, with its retraction to the apex
/// level.
#[derive(Debug, Clone, Copy)]
pub struct OuterCone {
    pub apex_u: f64,
    pub theta: f64,
}

impl OuterCone {
    pub fn at_level(eps: f64, theta: f64) -> Result<OuterCone> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Range("eps must lie in (0, 1)".into()));
        }
        Ok(OuterCone {
            apex_u: -eps.sqrt().ln(),
            theta: theta.rem_euclid(1.0),
        })
    }

    pub fn contains(&self, u: f64, theta: f64) -> bool {
        u > self.apex_u && (theta.rem_euclid(1.0) - self.theta).abs() < 1e-12
    }

    /// Retraction (u, theta) -> (u0, theta); fixes the apex level pointwise.
    pub fn retract(&self, _u: f64, theta: f64) -> (f64, f64) {
        (self.apex_u, theta.rem_euclid(1.0))
    }

    /// Fibre circumference at level u; nonincreasing in u, which is the
    /// distance-nonincreasing property along the retraction direction.
    pub fn fibre_length(u: f64) -> f64 {
        (-3.0 * u).exp()
    }
}

// --- modular-curve model -------------------------------------------------------

/// Truncated area of the modular curve at height `y_cut`, scaled by a
/// covering index.
#[derive(Debug, Clone)]
pub struct ModularArea {
    pub area: f64,
    pub error_estimate: f64,
    /// Hyperbolic area above the truncation height: exactly 1/y per unit of
    /// cusp width.
    pub truncation_tail: f64,
    pub index: usize,
}

/// Area of {|a| <= 1/2, a^2 + b^2 >= 1, b <= y_cut} in the curvature -1
/// metric, times the covering index.
///
/// The b-fibre of the density b^{-2} integrates in closed form, leaving the
/// smooth profile 1/sqrt(1 - a^2) - 1/y_cut for adaptive quadrature; the
/// untruncated area is pi/3.
pub fn modular_thick_area(y_cut: f64, index: usize) -> Result<ModularArea> {
    if y_cut < 1.0 {
        return Err(Error::Range("cutoff must be at least 1".into()));
    }
    if index == 0 {
        return Err(Error::Range("covering index must be positive".into()));
    }
    let spec = QuadSpec::for_dim(1);
    let r = quad::quad_box(
        |p| 1.0 / (1.0 - p[0] * p[0]).sqrt() - 1.0 / y_cut,
        &[(-0.5, 0.5)],
        &spec,
    )?;
    Ok(ModularArea {
        area: index as f64 * r.value,
        error_estimate: index as f64 * r.error_estimate,
        truncation_tail: index as f64 / y_cut,
        index,
    })
}

/// Euler characteristic from a curvature -1 area: chi = -area / 2 pi.
pub fn chi_from_area(area: f64) -> Result<f64> {
    if area < 0.0 {
        return Err(Error::Range("area must be nonnegative".into()));
    }
    Ok(-area / (2.0 * std::f64::consts::PI))
}
