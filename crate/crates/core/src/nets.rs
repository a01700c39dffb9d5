//! Packings, coverings, nearest-center projection and VC checks for
//! spherical caps.
//!
//! A maximal `δ`-separated subset is also a `δ`-covering, so a single greedy
//! pass yields both a lower estimate of the packing number `M(K, δ)` and an
//! upper estimate of the covering number `N(K, δ)`. For every finite `K`
//! these satisfy `M(K, 2δ) <= N(K, δ) <= M(K, δ)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::E;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::onebit::xor_count;
use crate::sphere::{self, distance_from_dot, dot, geodesic_distance, sign_bit, UnitVector};
use crate::{Error, PointSet, Result};

/// Largest point count for which `shatter_check` enumerates dichotomies.
pub const MAX_SHATTER_POINTS: usize = 22;

/// Default number of random caps tried per shatter check.
pub const DEFAULT_CAP_BUDGET: usize = 100_000;

/// Default number of uniform draws used to estimate `d_P`.
pub const DEFAULT_ENTROPY_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NetReport {
    pub delta: f64,
    /// Size of the greedy maximal packing, a lower estimate of `M(K, δ)`.
    pub packing_size: usize,
    /// Upper estimate of `N(K, δ)` (the maximal packing is a covering).
    pub covering_size: usize,
    pub centers: PointSet,
    /// Indices of the centers in the input set.
    pub center_indices: Vec<usize>,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "delta",
            value: delta,
        })
    }
}

/// Greedy maximal packing under an arbitrary distance: visits `order` and
/// keeps each index whose distance to every kept index exceeds `delta`.
pub fn greedy_packing_by<F>(order: &[usize], delta: f64, dist: F) -> Vec<usize>
where
    F: Fn(usize, usize) -> f64,
{
    let mut centers: Vec<usize> = Vec::new();
    for &i in order {
        if centers.iter().all(|&c| dist(i, c) > delta) {
            centers.push(i);
        }
    }
    centers
}

/// Upper estimate of the covering number of `0..len` at radius `delta`
/// (greedy maximal packing in index order).
pub fn covering_number_by<F>(len: usize, delta: f64, dist: F) -> usize
where
    F: Fn(usize, usize) -> f64,
{
    let order: Vec<usize> = (0..len).collect();
    greedy_packing_by(&order, delta, dist).len()
}

/// Randomized greedy maximal `δ`-packing of `points` in the geodesic metric.
pub fn greedy_packing<R: Rng + ?Sized>(points: &PointSet, delta: f64, rng: &mut R) -> Result<NetReport> {
    if points.is_empty() {
        return Err(Error::Empty("point set"));
    }
    check_delta(delta)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    let pts = points.points();
    let center_indices = greedy_packing_by(&order, delta, |i, j| {
        distance_from_dot(pts[i].dot(&pts[j]))
    });
    Ok(NetReport {
        delta,
        packing_size: center_indices.len(),
        covering_size: center_indices.len(),
        centers: points.select(&center_indices),
        center_indices,
    })
}

/// Exhaustive check that the centers are pairwise more than `delta` apart.
pub fn is_separated(centers: &PointSet, delta: f64) -> bool {
    let c = centers.points();
    (0..c.len()).all(|i| ((i + 1)..c.len()).all(|j| distance_from_dot(c[i].dot(&c[j])) > delta))
}

/// Exhaustive check that every point is within `delta` of some center.
pub fn is_covering(points: &PointSet, centers: &PointSet, delta: f64) -> bool {
    points.iter().all(|p| {
        centers
            .iter()
            .any(|c| distance_from_dot(p.dot(c)) <= delta)
    })
}

/// The three estimates in `M(K, 2δ) <= N(K, δ) <= M(K, δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Sandwich {
    pub delta: f64,
    pub packing_double: usize,
    pub covering: usize,
    pub packing: usize,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.packing_double <= self.covering && self.covering <= self.packing
    }
}

/// Builds packings at `2δ` and `δ` and verifies separation and covering
/// exhaustively before reporting the sandwich.
pub fn packing_sandwich<R: Rng + ?Sized>(points: &PointSet, delta: f64, rng: &mut R) -> Result<Sandwich> {
    check_delta(delta)?;
    let fine = greedy_packing(points, delta, rng)?;
    let double = if 2.0 * delta < 1.0 {
        greedy_packing(points, 2.0 * delta, rng)?.packing_size
    } else {
        // Nothing is more than distance 1 apart.
        1
    };
    debug_assert!(is_separated(&fine.centers, delta));
    debug_assert!(is_covering(points, &fine.centers, delta));
    Ok(Sandwich {
        delta,
        packing_double: double,
        covering: fine.covering_size,
        packing: fine.packing_size,
    })
}

/// `π₀`: index of the geodesically nearest center, lowest index on ties.
pub fn nearest_center_projection(point: &UnitVector, centers: &PointSet) -> Result<usize> {
    if centers.is_empty() {
        return Err(Error::Empty("centers"));
    }
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = geodesic_distance(point, c)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VcReport {
    /// Sphere dimension of the points.
    pub n: usize,
    pub witness_points: PointSet,
    pub shattered: bool,
    pub dichotomies_realized: u64,
    pub total_dichotomies: u64,
    /// `(k e / (n+1))^{n+1}` for `k > 1` points.
    pub sauer_bound: Option<f64>,
    /// Random caps drawn before stopping.
    pub random_caps_tried: usize,
}

/// `{e₁, …, e_n, (e₁ + … + e_n)/√n}` placed in `R^{n+1}`.
pub fn cap_witness_set(n: usize) -> Result<PointSet> {
    if n < 1 {
        return Err(Error::InvalidDimension(n));
    }
    let dim = n + 1;
    let mut points = (0..n)
        .map(|j| UnitVector::basis(dim, j))
        .collect::<Result<Vec<_>>>()?;
    let mut ones = vec![1.0 / libm::sqrt(n as f64); n];
    ones.push(0.0);
    points.push(UnitVector::new(ones)?);
    PointSet::explicit(points)
}

/// Whether the cap `{a : c·a > t}` for the best threshold along `c`
/// separates the mask's points (inside) from the rest.
fn separates(proj: &[f64], mask: u32) -> bool {
    let mut inside_min = f64::INFINITY;
    let mut outside_max = f64::NEG_INFINITY;
    for (i, &p) in proj.iter().enumerate() {
        if mask >> i & 1 == 1 {
            inside_min = inside_min.min(p);
        } else {
            outside_max = outside_max.max(p);
        }
    }
    outside_max < inside_min
}

/// Constructive center: zero on coordinates used by the outside
/// points, positive on coordinates used only by inside points.
fn coordinate_center(points: &[UnitVector], mask: u32) -> Option<Vec<f64>> {
    let dim = points[0].dim();
    let mut c = vec![0.0; dim];
    let mut blocked = vec![false; dim];
    for (i, p) in points.iter().enumerate() {
        if mask >> i & 1 == 0 {
            for (j, &v) in p.coords().iter().enumerate() {
                if v.abs() > 1e-12 {
                    blocked[j] = true;
                }
            }
        }
    }
    for (i, p) in points.iter().enumerate() {
        if mask >> i & 1 == 1 {
            for (j, &v) in p.coords().iter().enumerate() {
                if v.abs() > 1e-12 && !blocked[j] {
                    c[j] = 1.0;
                }
            }
        }
    }
    if c.iter().all(|&v| v == 0.0) {
        None
    } else {
        Some(c)
    }
}

fn constructive_realizes(points: &[UnitVector], mask: u32, full: u32) -> bool {
    if mask == 0 || mask == full {
        // Empty cap (t > 1) or the whole sphere (t < −1).
        return true;
    }
    let project = |c: &[f64]| -> Vec<f64> { points.iter().map(|p| dot(c, p.coords())).collect() };
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if let Some(c) = coordinate_center(points, mask) {
        candidates.push(c);
    }
    // Complement construction, flipped.
    if let Some(c) = coordinate_center(points, full & !mask) {
        candidates.push(c.into_iter().map(|v| -v).collect());
    }
    if mask.count_ones() == 1 {
        candidates.push(points[mask.trailing_zeros() as usize].coords().to_vec());
    }
    let outside = full & !mask;
    if outside.count_ones() == 1 {
        candidates.push(points[outside.trailing_zeros() as usize].neg().into_coords());
    }
    let dim = points[0].dim();
    let mut diff = vec![0.0; dim];
    for (i, p) in points.iter().enumerate() {
        let sgn = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
        for (d, v) in diff.iter_mut().zip(p.coords()) {
            *d += sgn * v;
        }
    }
    candidates.push(diff);
    candidates.iter().any(|c| separates(&project(c), mask))
}

/// Brute-force shattering test for spherical caps `{a : c·a > t}`.
///
/// Every dichotomy is first tried against a family of constructive centers;
/// the rest are searched with up to `budget` random centers, each of which
/// realizes all of its threshold cuts at once. A dichotomy missing after the
/// search is "not realized within budget", not proven impossible.
pub fn shatter_check<R: Rng + ?Sized>(points: &PointSet, rng: &mut R, budget: usize) -> Result<VcReport> {
    let k = points.len();
    if k == 0 {
        return Err(Error::Empty("point set"));
    }
    if k > MAX_SHATTER_POINTS {
        return Err(Error::TooManyPoints {
            count: k,
            max: MAX_SHATTER_POINTS,
        });
    }
    let pts = points.points();
    let dim = pts[0].dim();
    let total = 1u64 << k;
    let full = (total - 1) as u32;
    let mut realized: Vec<bool> = (0..total)
        .map(|mask| constructive_realizes(pts, mask as u32, full))
        .collect();
    let mut count = realized.iter().filter(|&&r| r).count() as u64;

    let mut tried = 0;
    let mut order: Vec<usize> = (0..k).collect();
    while count < total && tried < budget {
        tried += 1;
        let c = sphere::uniform_direction(dim, rng);
        let proj: Vec<f64> = pts.iter().map(|p| c.dot(p)).collect();
        order.sort_by(|&a, &b| proj[b].partial_cmp(&proj[a]).unwrap());
        // Cap containing the top r points, whenever the cut is strict.
        let mut mask = 0u32;
        for r in 0..k {
            mask |= 1 << order[r];
            let strict = r + 1 == k || proj[order[r]] > proj[order[r + 1]];
            if strict && !realized[mask as usize] {
                realized[mask as usize] = true;
                count += 1;
            }
        }
    }

    let vc = dim;
    Ok(VcReport {
        n: dim - 1,
        witness_points: points.clone(),
        shattered: count == total,
        dichotomies_realized: count,
        total_dichotomies: total,
        sauer_bound: if k > 1 { Some(sauer_bound(k, vc)?) } else { None },
        random_caps_tried: tried,
    })
}

/// `(k e / d)^d`, the Sauer–Shelah growth bound for `k` points and VC
/// dimension `d`.
pub fn sauer_bound(num_points: usize, vc_dim: usize) -> Result<f64> {
    if num_points <= 1 {
        return Err(Error::OutOfRange {
            name: "num_points",
            value: num_points as f64,
        });
    }
    if vc_dim == 0 {
        return Err(Error::OutOfRange {
            name: "vc_dim",
            value: 0.0,
        });
    }
    let d = vc_dim as f64;
    Ok(libm::pow(num_points as f64 * E / d, d))
}

/// Which sets indexed by the sample are being covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SetClass {
    /// `H_x = {θ : θ·x >= 0}` for `x` in the sample.
    Hemispheres,
    /// `W_{x,y} = H_x △ H_y` for pairs `x ≠ y` of the sample.
    Wedges,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EntropyRow {
    pub delta: f64,
    pub covering_number: usize,
    /// `(δ/2)^{−4d}`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VcEntropyReport {
    pub vc_dim: usize,
    pub class: SetClass,
    pub sets: usize,
    pub draws: usize,
    pub rows: Vec<EntropyRow>,
}

/// Covering numbers of a set class under `d_P(C₁, C₂) = P(C₁ △ C₂)`, with
/// `P` uniform on the sphere and estimated from `draws` samples, compared with
/// `(δ/2)^{−4d}`.
pub fn vc_entropy_check<R: Rng + ?Sized>(
    vc_dim: usize,
    deltas: &[f64],
    sample: &PointSet,
    class: SetClass,
    draws: usize,
    rng: &mut R,
) -> Result<VcEntropyReport> {
    if sample.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if draws == 0 {
        return Err(Error::Empty("draws"));
    }
    if vc_dim == 0 {
        return Err(Error::OutOfRange {
            name: "vc_dim",
            value: 0.0,
        });
    }
    for &d in deltas {
        check_delta(d)?;
    }
    let dim = sample.dim().unwrap_or(0);
    let words = draws.div_ceil(64);
    let hemis: Vec<Vec<u64>> = {
        let thetas: Vec<UnitVector> = (0..draws)
            .map(|_| sphere::uniform_direction(dim, rng))
            .collect();
        sample
            .iter()
            .map(|x| {
                let mut bits = vec![0u64; words];
                for (j, t) in thetas.iter().enumerate() {
                    if sign_bit(t.dot(x)) {
                        bits[j / 64] |= 1 << (j % 64);
                    }
                }
                bits
            })
            .collect()
    };
    let sets: Vec<Vec<u64>> = match class {
        SetClass::Hemispheres => hemis,
        SetClass::Wedges => {
            let mut out = Vec::new();
            for i in 0..hemis.len() {
                for j in (i + 1)..hemis.len() {
                    out.push(hemis[i].iter().zip(&hemis[j]).map(|(a, b)| a ^ b).collect());
                }
            }
            out
        }
    };
    if sets.is_empty() {
        return Err(Error::Empty("set class (need two sample points for wedges)"));
    }
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.shuffle(rng);
    let dp = |a: usize, b: usize| xor_count(&sets[a], &sets[b]) as f64 / draws as f64;
    let rows = deltas
        .iter()
        .map(|&delta| {
            let n = greedy_packing_by(&order, delta, dp).len();
            let bound = libm::pow(delta / 2.0, -4.0 * vc_dim as f64);
            EntropyRow {
                delta,
                covering_number: n,
                bound,
                ratio: n as f64 / bound,
            }
        })
        .collect();
    Ok(VcEntropyReport {
        vc_dim,
        class,
        sets: sets.len(),
        draws,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn e(dim: usize, j: usize) -> UnitVector {
        UnitVector::basis(dim, j).unwrap()
    }

    #[test]
    fn antipodes_both_kept() {
        let x = e(3, 0);
        let set = PointSet::explicit(vec![x.clone(), x.neg()]).unwrap();
        let r = greedy_packing(&set, 0.5, &mut stream(1, 0, 0)).unwrap();
        assert_eq!(r.packing_size, 2);
    }

    #[test]
    fn duplicates_collapse_to_one() {
        let x = UnitVector::normalized(vec![1.0, 2.0, 3.0]).unwrap();
        let set = PointSet::explicit(vec![x.clone(); 7]).unwrap();
        for delta in [0.01, 0.3, 0.9] {
            let r = greedy_packing(&set, delta, &mut stream(2, 0, 0)).unwrap();
            assert_eq!(r.packing_size, 1);
        }
    }

    #[test]
    fn packing_input_validation() {
        let empty = PointSet::explicit(vec![]).unwrap();
        assert!(greedy_packing(&empty, 0.2, &mut stream(1, 0, 0)).is_err());
        let set = PointSet::explicit(vec![e(2, 0)]).unwrap();
        assert!(greedy_packing(&set, 0.0, &mut stream(1, 0, 0)).is_err());
        assert!(greedy_packing(&set, 1.0, &mut stream(1, 0, 0)).is_err());
    }

    #[test]
    fn projection_examples() {
        let centers = PointSet::explicit(vec![e(3, 0), e(3, 1), e(3, 2)]).unwrap();
        assert_eq!(nearest_center_projection(&e(3, 1), &centers).unwrap(), 1);
        // Equidistant from e₁ and e₂.
        let p = UnitVector::normalized(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(nearest_center_projection(&p, &centers).unwrap(), 0);
        let none = PointSet::explicit(vec![]).unwrap();
        assert_eq!(
            nearest_center_projection(&p, &none),
            Err(Error::Empty("centers"))
        );
    }

    #[test]
    fn sauer_examples() {
        assert!((sauer_bound(3, 1).unwrap() - 3.0 * E).abs() < 1e-12);
        for d in 2..6 {
            assert!((sauer_bound(d, d).unwrap() - libm::pow(E, d as f64)).abs() < 1e-9);
        }
        assert!(sauer_bound(1, 1).is_err());
        assert!(sauer_bound(4, 0).is_err());
    }

    #[test]
    fn witness_set_shattered_n3() {
        let set = cap_witness_set(3).unwrap();
        let r = shatter_check(&set, &mut stream(3, 0, 0), 1000).unwrap();
        assert!(r.shattered);
        assert_eq!(r.dichotomies_realized, 16);
        // The constructive family alone realizes every dichotomy.
        assert_eq!(r.random_caps_tried, 0);
    }

    #[test]
    fn single_point_shattered() {
        let set = PointSet::explicit(vec![e(3, 2)]).unwrap();
        let r = shatter_check(&set, &mut stream(4, 0, 0), 10).unwrap();
        assert!(r.shattered);
        assert_eq!(r.total_dichotomies, 2);
        assert_eq!(r.sauer_bound, None);
    }

    #[test]
    fn radon_configuration_not_shattered() {
        // Four coplanar points on S²: {±e₁} and {±e₂} have crossing hulls.
        let set = PointSet::explicit(vec![e(3, 0), e(3, 1), e(3, 0).neg(), e(3, 1).neg()]).unwrap();
        let r = shatter_check(&set, &mut stream(5, 0, 0), 20_000).unwrap();
        assert!(!r.shattered);
        assert!(r.dichotomies_realized < 16);
    }

    #[test]
    fn too_many_points_rejected() {
        let mut rng = stream(6, 0, 0);
        let set = PointSet::uniform(3, 23, &mut rng).unwrap();
        assert!(matches!(
            shatter_check(&set, &mut rng, 10),
            Err(Error::TooManyPoints { count: 23, .. })
        ));
    }

    #[test]
    fn entropy_covering_is_monotone_and_near_one_at_top() {
        let mut rng = stream(7, 0, 0);
        let sample = PointSet::uniform(1, 40, &mut rng).unwrap();
        let deltas = [0.05, 0.1, 0.25, 0.5, 0.9, 0.999];
        let r = vc_entropy_check(2, &deltas, &sample, SetClass::Hemispheres, 4000, &mut rng).unwrap();
        for w in r.rows.windows(2) {
            assert!(w[1].covering_number <= w[0].covering_number);
        }
        assert!(r.rows.last().unwrap().covering_number <= 2);
        assert!(vc_entropy_check(2, &[1.0], &sample, SetClass::Hemispheres, 10, &mut rng).is_err());
    }
}
