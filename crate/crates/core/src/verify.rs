//! Checks that a concrete measurement ensemble realizes the qualitative
//! guarantees of random hyperplane tessellations: small cells, margin
//! separation, additive near-isometry of the one-bit map and of the
//! sign-product and linear `ℓ¹` maps, and the conditional metric bound.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::onebit::{xor_count, EnsembleKind, MeasurementEnsemble, SignPattern, LAMBDA};
use crate::sphere::{check_dims, distance_from_dot, norm, sign_bit};
use crate::{Error, PointSet, Result, UnitVector};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CellReport {
    pub delta: f64,
    pub num_cells: usize,
    /// Largest geodesic distance between two points with the same pattern.
    pub max_cell_diameter: f64,
    /// A pair attaining `max_cell_diameter`, present iff it is `>= delta`.
    pub violating_pair: Option<(usize, usize)>,
}

impl CellReport {
    pub fn pass(&self) -> bool {
        self.violating_pair.is_none()
    }
}

/// Near-isometry report: `pass ⇔ sup_discrepancy <= delta_target`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RipReport {
    pub sup_discrepancy: f64,
    pub argmax_pair: (usize, usize),
    pub m: usize,
    pub delta_target: f64,
    pub pass: bool,
}

impl RipReport {
    fn new(sup: f64, argmax_pair: (usize, usize), m: usize, delta_target: f64) -> Self {
        Self {
            sup_discrepancy: sup,
            argmax_pair,
            m,
            delta_target,
            pass: sup <= delta_target,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MetricRatioReport {
    /// `sup |D² − d| / d` over distinct pairs.
    pub sup_ratio: f64,
    pub argmax_pair: (usize, usize),
    pub m: usize,
    pub min_sep: f64,
    pub pass: bool,
}

fn check_target(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "delta",
            value: delta,
        })
    }
}

fn check_points(points: &PointSet, ens: &MeasurementEnsemble) -> Result<()> {
    let dim = points.dim().ok_or(Error::Empty("point set"))?;
    check_dims(ens.dim(), dim)
}

/// Sign patterns of every point, projecting through the sparse rows.
pub(crate) fn sign_patterns(points: &PointSet, ens: &MeasurementEnsemble) -> Vec<SignPattern> {
    let rows = points.compressed();
    (0..rows.rows())
        .map(|i| SignPattern::from_signs(ens.directions().map(|d| sign_bit(rows.dot_row(i, d)))))
        .collect()
}

/// Row-major `k × m` matrix of projections `⟨x_i, g_j⟩`.
fn projections(points: &PointSet, ens: &MeasurementEnsemble) -> Vec<f64> {
    let rows = points.compressed();
    let mut out = Vec::with_capacity(rows.rows() * ens.m());
    for i in 0..rows.rows() {
        out.extend(ens.directions().map(|d| rows.dot_row(i, d)));
    }
    out
}

/// Indices of the points grouped by identical sign pattern, groups ordered
/// by pattern.
pub fn cells(points: &PointSet, ens: &MeasurementEnsemble) -> Result<Vec<Vec<usize>>> {
    check_points(points, ens)?;
    let mut groups: BTreeMap<SignPattern, Vec<usize>> = BTreeMap::new();
    for (i, p) in sign_patterns(points, ens).into_iter().enumerate() {
        groups.entry(p).or_default().push(i);
    }
    Ok(groups.into_values().collect())
}

/// Whether every cell of the tessellation induced on `points` has geodesic
/// diameter below `delta`.
pub fn small_cells_check(points: &PointSet, ens: &MeasurementEnsemble, delta: f64) -> Result<CellReport> {
    ens.require(EnsembleKind::UniformSphere)?;
    check_target(delta)?;
    let groups = cells(points, ens)?;
    let gram = points.gram();
    let k = points.len();
    let mut best = 0.0;
    let mut pair = None;
    for g in &groups {
        for (a, &i) in g.iter().enumerate() {
            for &j in &g[a + 1..] {
                let d = distance_from_dot(gram[i * k + j]);
                if pair.is_none() || d > best {
                    best = d;
                    pair = Some((i, j));
                }
            }
        }
    }
    Ok(CellReport {
        delta,
        num_cells: groups.len(),
        max_cell_diameter: best,
        violating_pair: pair.filter(|_| best >= delta),
    })
}

/// Number of directions with `⟨x,θ⟩ < −c < c < ⟨y,θ⟩` or the same with `x`
/// and `y` exchanged. For gaussian ensembles `c = margin·√n`, otherwise
/// `c = margin`.
pub fn margin_separation_count(
    x: &UnitVector,
    y: &UnitVector,
    ens: &MeasurementEnsemble,
    margin: f64,
) -> Result<usize> {
    check_dims(x.dim(), y.dim())?;
    check_dims(ens.dim(), x.dim())?;
    if !(margin >= 0.0) {
        return Err(Error::OutOfRange {
            name: "margin",
            value: margin,
        });
    }
    let c = match ens.kind() {
        EnsembleKind::UniformSphere => margin,
        EnsembleKind::Gaussian => margin * libm::sqrt((ens.dim() - 1) as f64),
    };
    let px = ens.project(x)?;
    let py = ens.project(y)?;
    Ok(px
        .iter()
        .zip(&py)
        .filter(|&(&a, &b)| (a < -c && b > c) || (b < -c && a > c))
        .count())
}

/// `½√(n+1) <= ‖g‖ <= 2√(n+1)` for `g ∈ R^{n+1}`.
pub fn is_moderate(g: &[f64]) -> bool {
    let r = norm(g);
    let scale = libm::sqrt(g.len() as f64);
    (0.5 * scale..=2.0 * scale).contains(&r)
}

/// Fraction of directions in the ensemble that are moderate.
pub fn moderate_fraction(ens: &MeasurementEnsemble) -> Result<f64> {
    if ens.m() == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let count = ens.directions().filter(|g| is_moderate(g)).count();
    Ok(count as f64 / ens.m() as f64)
}

/// `sup |d_H(sgn Ax, sgn Ay) − d(x, y)|` over all pairs of `points`.
///
/// Any ensemble kind is accepted; gaussian directions induce the same
/// patterns as their normalizations.
pub fn one_bit_rip(points: &PointSet, ens: &MeasurementEnsemble, delta_target: f64) -> Result<RipReport> {
    check_points(points, ens)?;
    check_target(delta_target)?;
    let m = ens.m();
    if m == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let patterns = sign_patterns(points, ens);
    let gram = points.gram();
    let k = points.len();
    let mut best = 0.0;
    let mut arg = (0, 0);
    for i in 0..k {
        for j in (i + 1)..k {
            let dh = xor_count(patterns[i].words(), patterns[j].words()) as f64 / m as f64;
            let gap = (dh - distance_from_dot(gram[i * k + j])).abs();
            if gap > best {
                best = gap;
                arg = (i, j);
            }
        }
    }
    Ok(RipReport::new(best, arg, m, delta_target))
}

/// `sup |(1/m) Σ_j sgn⟨x, g_j⟩⟨y, g_j⟩ − λ⟨x, y⟩|` over ordered pairs,
/// including `x = y`.
pub fn sign_product_rip(points: &PointSet, ens: &MeasurementEnsemble, delta_target: f64) -> Result<RipReport> {
    ens.require(EnsembleKind::Gaussian)?;
    check_points(points, ens)?;
    check_target(delta_target)?;
    let m = ens.m();
    if m == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let proj = projections(points, ens);
    let signs: Vec<f64> = proj.iter().map(|&t| if sign_bit(t) { 1.0 } else { -1.0 }).collect();
    let gram = points.gram();
    let k = points.len();
    let mut best = 0.0;
    let mut arg = (0, 0);
    for i in 0..k {
        let si = &signs[i * m..(i + 1) * m];
        for l in 0..k {
            let pl = &proj[l * m..(l + 1) * m];
            let s: f64 = si.iter().zip(pl).map(|(a, b)| a * b).sum();
            let gap = (s / m as f64 - LAMBDA * gram[i * k + l]).abs();
            if gap > best {
                best = gap;
                arg = (i, l);
            }
        }
    }
    Ok(RipReport::new(best, arg, m, delta_target))
}

/// `sup |(1/(mλ)) Σ_j |⟨g_j, x − y⟩| − ‖x − y‖₂|` over all pairs.
pub fn linear_rip(points: &PointSet, ens: &MeasurementEnsemble, delta_target: f64) -> Result<RipReport> {
    ens.require(EnsembleKind::Gaussian)?;
    check_points(points, ens)?;
    check_target(delta_target)?;
    let m = ens.m();
    if m == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let proj = projections(points, ens);
    let gram = points.gram();
    let k = points.len();
    let scale = 1.0 / (m as f64 * LAMBDA);
    let mut best = 0.0;
    let mut arg = (0, 0);
    for i in 0..k {
        let pi = &proj[i * m..(i + 1) * m];
        for j in (i + 1)..k {
            let pj = &proj[j * m..(j + 1) * m];
            let l1: f64 = pi.iter().zip(pj).map(|(a, b)| (a - b).abs()).sum();
            let chord = libm::sqrt((2.0 - 2.0 * gram[i * k + j]).max(0.0));
            let gap = (l1 * scale - chord).abs();
            if gap > best {
                best = gap;
                arg = (i, j);
            }
        }
    }
    Ok(RipReport::new(best, arg, m, delta_target))
}

/// `sup |D(x,y)² − d(x,y)| / d(x,y)` over distinct pairs, which must all be
/// at least `min_sep` apart; passes iff the supremum is at most 1.
pub fn metric_ratio_check(
    points: &PointSet,
    ens: &MeasurementEnsemble,
    min_sep: f64,
) -> Result<MetricRatioReport> {
    check_points(points, ens)?;
    if !(min_sep > 0.0) {
        return Err(Error::OutOfRange {
            name: "min_sep",
            value: min_sep,
        });
    }
    let m = ens.m();
    if m == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let gram = points.gram();
    let k = points.len();
    for i in 0..k {
        for j in (i + 1)..k {
            let d = distance_from_dot(gram[i * k + j]);
            if d < min_sep {
                return Err(Error::BelowSeparation {
                    i,
                    j,
                    distance: d,
                    min_sep,
                });
            }
        }
    }
    let patterns = sign_patterns(points, ens);
    let mut best = 0.0;
    let mut arg = (0, 0);
    for i in 0..k {
        for j in (i + 1)..k {
            let d = distance_from_dot(gram[i * k + j]);
            let d2 = xor_count(patterns[i].words(), patterns[j].words()) as f64 / m as f64;
            let ratio = (d2 - d).abs() / d;
            if ratio > best {
                best = ratio;
                arg = (i, j);
            }
        }
    }
    Ok(MetricRatioReport {
        sup_ratio: best,
        argmax_pair: arg,
        m,
        min_sep,
        pass: best <= 1.0,
    })
}

/// `⌈safety · δ⁻² · ln |K|⌉`.
pub fn embedding_dimension(num_points: usize, delta: f64, safety: f64) -> Result<usize> {
    if num_points < 2 {
        return Err(Error::OutOfRange {
            name: "num_points",
            value: num_points as f64,
        });
    }
    check_target(delta)?;
    if !(safety > 0.0 && safety.is_finite()) {
        return Err(Error::OutOfRange {
            name: "safety",
            value: safety,
        });
    }
    let m = libm::ceil(safety * libm::log(num_points as f64) / (delta * delta));
    Ok((m as usize).max(1))
}

/// Draws a uniform ensemble of size `⌈safety·δ⁻²·ln|K|⌉` and reports how
/// far the one-bit map is from a `δ`-isometry on `points`.
pub fn finite_embedding<R: Rng + ?Sized>(
    points: &PointSet,
    delta: f64,
    safety: f64,
    rng: &mut R,
) -> Result<(MeasurementEnsemble, RipReport)> {
    let m = embedding_dimension(points.len(), delta, safety)?;
    let dim = points.dim().ok_or(Error::Empty("point set"))?;
    let ens = MeasurementEnsemble::draw_with(EnsembleKind::UniformSphere, dim - 1, m, rng)?;
    let report = one_bit_rip(points, &ens, delta)?;
    Ok((ens, report))
}
