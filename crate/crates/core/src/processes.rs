//! Monte Carlo estimators for suprema of the two gaussian processes indexed
//! by a finite `K ⊂ S^n`:
//!
//! * the canonical process `γ_x = ⟨x, γ⟩`, whose expected range is the
//!   gaussian mean width `ω(K) = E sup_{x,y} ⟨x − y, γ⟩`;
//! * the hemisphere process `G_x` with `E G_x² = 1/4` and
//!   `E(G_x − G_y)² = d(x, y)`, whose expected range is `H(K)`.
//!
//! `H(K)` is estimated two independent ways: by factoring the covariance
//! `1/4 − d(x,y)/2`, and by the centered, `√m`-normalized hemisphere counts
//! of `m` uniform directions, which converge to `G_x`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::Cholesky;
use crate::nets::covering_number_by;
use crate::onebit::{one_bit_map, EnsembleKind, MeasurementEnsemble};
use crate::sphere::{chord_from_dot, distance_from_dot, gaussian_coords, geodesic_distance, sign_bit};
use crate::stats::Running;
use crate::{Error, PointSet, Result, UnitVector};

/// Largest set handled by the covariance-factorization estimator.
pub const MAX_CHOLESKY_POINTS: usize = 2000;

/// Smallest trial count accepted by the gaussian-width estimator.
pub const MIN_WIDTH_TRIALS: usize = 100;

/// Smallest inner sample size for the empirical hemisphere estimator.
pub const MIN_INNER_DRAWS: usize = 10_000;

/// `Cov(G_x, G_y) = 1/4 − d(x, y)/2`.
pub fn hemisphere_covariance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    Ok(0.25 - geodesic_distance(x, y)? / 2.0)
}

/// Covariance of the hemisphere process over a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn hemisphere(points: &PointSet) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point set"));
        }
        let k = points.len();
        let gram = points.gram();
        let entries = gram
            .iter()
            .enumerate()
            .map(|(idx, &t)| {
                if idx / k == idx % k {
                    0.25
                } else {
                    0.25 - distance_from_dot(t) / 2.0
                }
            })
            .collect();
        Ok(Self { k, entries })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.k).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Cholesky factor with the escalating diagonal jitter.
    pub fn factor(&self) -> Result<Cholesky> {
        Cholesky::factor_with_jitter(&self.entries, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WidthMethod {
    GaussianWidth,
    HemisphereCholesky,
    HemisphereEmpirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WidthEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: usize,
    pub method: WidthMethod,
}

impl WidthEstimate {
    fn from_running(r: &Running, method: WidthMethod) -> Self {
        Self {
            value: r.mean(),
            std_error: r.std_error(),
            trials: r.count() as usize,
            method,
        }
    }

    /// `|a − b|` in units of the combined standard error `√(se_a² + se_b²)`.
    pub fn z_score(&self, other: &WidthEstimate) -> f64 {
        let joint = libm::sqrt(self.std_error * self.std_error + other.std_error * other.std_error);
        let diff = (self.value - other.value).abs();
        if joint == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / joint
        }
    }
}

fn range(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// `ω(K)` by Monte Carlo: mean over `trials` gaussians of `max_x ⟨x,γ⟩ − min_x ⟨x,γ⟩`.
pub fn estimate_gaussian_width<R: Rng + ?Sized>(
    points: &PointSet,
    trials: usize,
    rng: &mut R,
) -> Result<WidthEstimate> {
    let dim = points.dim().ok_or(Error::Empty("point set"))?;
    if trials < MIN_WIDTH_TRIALS {
        return Err(Error::OutOfRange {
            name: "trials",
            value: trials as f64,
        });
    }
    let rows = points.compressed();
    let mut proj = vec![0.0; rows.rows()];
    let mut acc = Running::new();
    for _ in 0..trials {
        let g = gaussian_coords(dim, rng);
        for (i, p) in proj.iter_mut().enumerate() {
            *p = rows.dot_row(i, &g);
        }
        acc.push(range(&proj));
    }
    Ok(WidthEstimate::from_running(&acc, WidthMethod::GaussianWidth))
}

/// `H(K)` by sampling `G = L z` from the factored covariance.
pub fn estimate_hemisphere_width_cholesky<R: Rng + ?Sized>(
    points: &PointSet,
    trials: usize,
    rng: &mut R,
) -> Result<WidthEstimate> {
    if points.len() > MAX_CHOLESKY_POINTS {
        return Err(Error::TooManyPoints {
            count: points.len(),
            max: MAX_CHOLESKY_POINTS,
        });
    }
    if trials < 2 {
        return Err(Error::OutOfRange {
            name: "trials",
            value: trials as f64,
        });
    }
    let cov = CovarianceMatrix::hemisphere(points)?;
    let chol = cov.factor()?;
    let k = cov.dim();
    let mut z = vec![0.0; k];
    let mut g = vec![0.0; k];
    let mut acc = Running::new();
    for _ in 0..trials {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        chol.mul_into(&z, &mut g);
        acc.push(range(&g));
    }
    Ok(WidthEstimate::from_running(&acc, WidthMethod::HemisphereCholesky))
}

/// One realization of `(1/√m) Σ_j (1_{H_x}(θ_j) − ½)` for every point, from
/// `m_inner` uniform directions.
pub fn sample_hemisphere_process<R: Rng + ?Sized>(
    points: &PointSet,
    m_inner: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let dim = points.dim().ok_or(Error::Empty("point set"))?;
    if m_inner < MIN_INNER_DRAWS {
        return Err(Error::OutOfRange {
            name: "m_inner",
            value: m_inner as f64,
        });
    }
    Ok(hemisphere_counts(points, dim, m_inner, rng)
        .into_iter()
        .map(|c| (c as f64 - m_inner as f64 / 2.0) / libm::sqrt(m_inner as f64))
        .collect())
}

fn hemisphere_counts<R: Rng + ?Sized>(points: &PointSet, dim: usize, m: usize, rng: &mut R) -> Vec<u32> {
    let rows = points.compressed();
    let mut counts = vec![0u32; rows.rows()];
    let mut theta = vec![0.0; dim];
    for _ in 0..m {
        // Membership in H_x depends only on the direction of θ, so the
        // gaussian need not be normalized.
        for t in theta.iter_mut() {
            *t = rng.sample(StandardNormal);
        }
        for (i, c) in counts.iter_mut().enumerate() {
            *c += sign_bit(rows.dot_row(i, &theta)) as u32;
        }
    }
    counts
}

/// `H(K)` from the finite-`m` hemisphere empirical process.
pub fn estimate_hemisphere_width_empirical<R: Rng + ?Sized>(
    points: &PointSet,
    m_inner: usize,
    trials: usize,
    rng: &mut R,
) -> Result<WidthEstimate> {
    let dim = points.dim().ok_or(Error::Empty("point set"))?;
    if m_inner < MIN_INNER_DRAWS {
        return Err(Error::OutOfRange {
            name: "m_inner",
            value: m_inner as f64,
        });
    }
    if trials < 2 {
        return Err(Error::OutOfRange {
            name: "trials",
            value: trials as f64,
        });
    }
    let scale = libm::sqrt(m_inner as f64);
    let mut acc = Running::new();
    for _ in 0..trials {
        let counts = hemisphere_counts(points, dim, m_inner, rng);
        let (lo, hi) = counts
            .iter()
            .fold((u32::MAX, 0), |(lo, hi), &c| (lo.min(c), hi.max(c)));
        acc.push((hi - lo) as f64 / scale);
    }
    Ok(WidthEstimate::from_running(&acc, WidthMethod::HemisphereEmpirical))
}

/// `sup_{x,y} |Z_{x,y}|` with `Z_{x,y} = (1/√m) Σ_j ε_j 1_{W_{x,y}}(θ_j)` for
/// fresh Rademacher signs `ε_j`.
pub fn symmetrized_process_sup<R: Rng + ?Sized>(
    points: &PointSet,
    ens: &MeasurementEnsemble,
    rng: &mut R,
) -> Result<f64> {
    ens.require(EnsembleKind::UniformSphere)?;
    if points.is_empty() {
        return Err(Error::Empty("point set"));
    }
    let m = ens.m();
    if m == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let patterns = points
        .iter()
        .map(|x| one_bit_map(ens, x))
        .collect::<Result<Vec<_>>>()?;
    let words = m.div_ceil(64);
    let mut eps = vec![0u64; words];
    for j in 0..m {
        if rng.random::<bool>() {
            eps[j / 64] |= 1 << (j % 64);
        }
    }
    let mut best = 0i64;
    for i in 0..patterns.len() {
        for k in (i + 1)..patterns.len() {
            let (a, b) = (patterns[i].words(), patterns[k].words());
            let mut wedge = 0i64;
            let mut plus = 0i64;
            for ((p, q), e) in a.iter().zip(b).zip(&eps) {
                let w = p ^ q;
                wedge += w.count_ones() as i64;
                plus += (w & e).count_ones() as i64;
            }
            best = best.max((2 * plus - wedge).abs());
        }
    }
    Ok(best as f64 / libm::sqrt(m as f64))
}

/// Metric of the process whose entropy enters the Sudakov bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProcessMetric {
    /// `‖x − y‖₂`.
    Gaussian,
    /// `√d(x, y)`.
    Hemisphere,
}

impl ProcessMetric {
    pub fn from_dot(&self, t: f64) -> f64 {
        match self {
            ProcessMetric::Gaussian => chord_from_dot(t),
            ProcessMetric::Hemisphere => libm::sqrt(distance_from_dot(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SudakovRow {
    pub delta: f64,
    pub covering_number: usize,
    /// `δ √(log N(K, d_Z, δ))`.
    pub lhs: f64,
    /// `lhs / width`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SudakovReport {
    pub metric: ProcessMetric,
    pub width: f64,
    pub rows: Vec<SudakovRow>,
    pub max_ratio: f64,
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// `δ √(log N)` for each `δ`, with `N` the greedy covering number in the
/// chosen process metric, compared with the estimated expected supremum.
pub fn sudakov_check(
    points: &PointSet,
    metric: ProcessMetric,
    deltas: &[f64],
    width: &WidthEstimate,
) -> Result<SudakovReport> {
    if points.is_empty() {
        return Err(Error::Empty("point set"));
    }
    for &d in deltas {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::OutOfRange { name: "delta", value: d });
        }
    }
    let k = points.len();
    let gram = points.gram();
    let dist = |i: usize, j: usize| metric.from_dot(gram[i * k + j]);
    let rows: Vec<SudakovRow> = deltas
        .iter()
        .map(|&delta| {
            let n = covering_number_by(k, delta, dist);
            let lhs = delta * libm::sqrt(libm::log(n as f64));
            SudakovRow {
                delta,
                covering_number: n,
                lhs,
                ratio: safe_ratio(lhs, width.value),
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SudakovReport {
        metric,
        width: width.value,
        rows,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CompareRow {
    pub delta: f64,
    /// Greedy covering number in the geodesic metric.
    pub covering_number: usize,
    pub sqrt_log_n: f64,
    /// `C δ⁻¹ ω`.
    pub gaussian_bound: f64,
    /// `C δ^{−1/2} H`.
    pub hemisphere_bound: f64,
}

impl CompareRow {
    pub fn holds(&self) -> bool {
        self.sqrt_log_n <= self.gaussian_bound.min(self.hemisphere_bound)
    }
}

/// `√(log N(K, δ)) <= C · min(δ⁻¹ ω(K), δ^{−1/2} H(K))` on a grid of `δ`.
pub fn compare_chain(
    points: &PointSet,
    deltas: &[f64],
    omega: f64,
    hemisphere: f64,
    constant: f64,
) -> Result<Vec<CompareRow>> {
    if points.is_empty() {
        return Err(Error::Empty("point set"));
    }
    let k = points.len();
    let gram = points.gram();
    deltas
        .iter()
        .map(|&delta| {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::OutOfRange { name: "delta", value: delta });
            }
            let n = covering_number_by(k, delta, |i, j| distance_from_dot(gram[i * k + j]));
            Ok(CompareRow {
                delta,
                covering_number: n,
                sqrt_log_n: libm::sqrt(libm::log(n as f64)),
                gaussian_bound: constant * omega / delta,
                hemisphere_bound: constant * hemisphere / libm::sqrt(delta),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn e(dim: usize, j: usize) -> UnitVector {
        UnitVector::basis(dim, j).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let x = e(3, 0);
        assert_eq!(hemisphere_covariance(&x, &x).unwrap(), 0.25);
        assert!((hemisphere_covariance(&x, &x.neg()).unwrap() + 0.25).abs() < 1e-15);
        assert!(hemisphere_covariance(&x, &e(3, 1)).unwrap().abs() < 1e-15);
        assert!(hemisphere_covariance(&x, &e(4, 1)).is_err());
    }

    #[test]
    fn covariance_matrix_structure() {
        let mut rng = stream(1, 0, 0);
        let set = PointSet::uniform(4, 30, &mut rng).unwrap();
        let cov = CovarianceMatrix::hemisphere(&set).unwrap();
        assert!(cov.is_symmetric());
        for i in 0..30 {
            assert!((cov.get(i, i) - 0.25).abs() < 1e-12);
            for j in (0..30).filter(|&j| j != i) {
                let d = geodesic_distance(&set[i], &set[j]).unwrap();
                assert!((2.0 * (0.25 - cov.get(i, j)) - d).abs() < 1e-12);
            }
        }
        assert!(cov.factor().is_ok());
    }

    #[test]
    fn singletons_have_zero_width() {
        let mut rng = stream(2, 0, 0);
        let set = PointSet::explicit(vec![e(3, 1)]).unwrap();
        assert_eq!(estimate_gaussian_width(&set, 100, &mut rng).unwrap().value, 0.0);
        assert_eq!(
            estimate_hemisphere_width_cholesky(&set, 10, &mut rng).unwrap().value,
            0.0
        );
        assert_eq!(
            estimate_hemisphere_width_empirical(&set, 10_000, 2, &mut rng)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn estimator_preconditions() {
        let mut rng = stream(3, 0, 0);
        let set = PointSet::explicit(vec![e(3, 1), e(3, 0)]).unwrap();
        assert!(estimate_gaussian_width(&set, 99, &mut rng).is_err());
        assert!(estimate_hemisphere_width_empirical(&set, 9_999, 10, &mut rng).is_err());
        let empty = PointSet::explicit(vec![]).unwrap();
        assert!(estimate_gaussian_width(&empty, 100, &mut rng).is_err());
        let big = PointSet::uniform(2, MAX_CHOLESKY_POINTS + 1, &mut rng).unwrap();
        assert!(matches!(
            estimate_hemisphere_width_cholesky(&big, 10, &mut rng),
            Err(Error::TooManyPoints { .. })
        ));
    }

    #[test]
    fn symmetrized_singleton_is_zero_and_gaussian_rejected() {
        let mut rng = stream(4, 0, 0);
        let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 2, 100, 1).unwrap();
        let set = PointSet::explicit(vec![e(3, 0)]).unwrap();
        assert_eq!(symmetrized_process_sup(&set, &ens, &mut rng).unwrap(), 0.0);
        let g = MeasurementEnsemble::draw(EnsembleKind::Gaussian, 2, 100, 1).unwrap();
        assert!(matches!(
            symmetrized_process_sup(&set, &g, &mut rng),
            Err(Error::WrongEnsembleKind { .. })
        ));
    }

    #[test]
    fn sudakov_singleton_lhs_zero() {
        let set = PointSet::explicit(vec![e(3, 0)]).unwrap();
        let w = WidthEstimate {
            value: 0.0,
            std_error: 0.0,
            trials: 100,
            method: WidthMethod::GaussianWidth,
        };
        let r = sudakov_check(&set, ProcessMetric::Gaussian, &[0.1, 0.3], &w).unwrap();
        assert!(r.rows.iter().all(|row| row.lhs == 0.0 && row.covering_number == 1));
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn z_score_combines_errors() {
        let a = WidthEstimate {
            value: 1.0,
            std_error: 0.3,
            trials: 10,
            method: WidthMethod::HemisphereCholesky,
        };
        let b = WidthEstimate {
            value: 1.5,
            std_error: 0.4,
            ..a
        };
        assert!((a.z_score(&b) - 1.0).abs() < 1e-12);
    }
}
