//! Geometry of the unit sphere `S^n ⊂ R^{n+1}` and the random samplers.
//!
//! Sign convention: `sgn(t) = +1` for `t >= 0`, so every direction assigns
//! every point to exactly one closed/open hemisphere pair and sign patterns
//! are total functions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};
use core::ops::Index;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Relative tolerance on the norm of a [`UnitVector`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Tolerance on `|x·y|` below which endpoints count as equal or antipodal.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance of the bisection solve for the crossing parameter.
pub const BISECTION_TOLERANCE: f64 = 1e-12;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub(crate) fn sign_bit(t: f64) -> bool {
    t >= 0.0
}

/// A point of `S^n`, stored by its `n + 1` ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len().saturating_sub(1)));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self { coords })
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len().saturating_sub(1)));
        }
        let n = norm(&coords);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit { norm: n });
        }
        for c in &mut coords {
            *c /= n;
        }
        Ok(Self { coords })
    }

    /// The standard basis vector `e_{axis+1}` of `R^{dim}`.
    pub fn basis(dim: usize, axis: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim.saturating_sub(1)));
        }
        if axis >= dim {
            return Err(Error::DimensionMismatch {
                left: axis + 1,
                right: dim,
            });
        }
        let mut coords = vec![0.0; dim];
        coords[axis] = 1.0;
        Ok(Self { coords })
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() >= 2);
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Sphere dimension `n`.
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn neg(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.coords.iter().map(|c| c.abs()).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.coords.iter().filter(|&&c| c != 0.0).count()
    }

    fn check_same_dim(&self, other: &UnitVector) -> Result<()> {
        check_dims(self.dim(), other.dim())
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.coords
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// Parameters of the sparse set `K_s = {x ∈ S^n : #{j : x_j ≠ 0} <= s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseSpec {
    n: usize,
    s: usize,
}

impl SparseSpec {
    pub fn new(n: usize, s: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n));
        }
        if s == 0 || s > n {
            return Err(Error::InvalidSparsity { n, s });
        }
        Ok(Self { n, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// `s · ln(n / s)`, the sparse complexity term.
    pub fn complexity(&self) -> f64 {
        self.s as f64 * libm::log(self.n as f64 / self.s as f64)
    }
}

/// Normalized geodesic distance `arccos(x·y) / π`, in `[0, 1]`.
pub fn geodesic_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    x.check_same_dim(y)?;
    Ok(distance_from_dot(x.dot(y)))
}

/// Normalized geodesic distance from a precomputed inner product.
#[inline]
pub fn distance_from_dot(t: f64) -> f64 {
    libm::acos(t.clamp(-1.0, 1.0)) / PI
}

/// Euclidean chord length `‖x − y‖₂` from a precomputed inner product.
#[inline]
pub fn chord_from_dot(t: f64) -> f64 {
    libm::sqrt((2.0 - 2.0 * t).max(0.0))
}

/// `n + 1` iid standard normal coordinates.
pub fn sample_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(gaussian_coords(n + 1, rng))
}

pub(crate) fn gaussian_coords<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform point of `S^n` (normalized standard gaussian).
pub fn sample_uniform_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitVector> {
    if n < 1 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(uniform_direction(n + 1, rng))
}

pub(crate) fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitVector {
    loop {
        let g = gaussian_coords(dim, rng);
        let r = norm(&g);
        // r == 0 has probability zero but is not impossible in floating point.
        if r > 1e-300 {
            return UnitVector::from_unit_unchecked(g.into_iter().map(|c| c / r).collect());
        }
    }
}

/// A point of `K_s` with exactly `s` nonzero coordinates: uniform support,
/// uniform direction on the coordinate subsphere.
pub fn sample_sparse_unit<R: Rng + ?Sized>(spec: SparseSpec, rng: &mut R) -> Result<UnitVector> {
    Ok(sparse_on_random_support(spec.dim(), spec.s(), rng))
}

fn sparse_on_random_support<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> UnitVector {
    let mut support = index::sample(rng, dim, k).into_vec();
    support.sort_unstable();
    loop {
        let vals = gaussian_coords(k, rng);
        // Zero coordinates would drop below the requested support size.
        if vals.contains(&0.0) {
            continue;
        }
        let r = norm(&vals);
        let mut coords = vec![0.0; dim];
        for (&j, v) in support.iter().zip(vals) {
            coords[j] = v / r;
        }
        return UnitVector::from_unit_unchecked(coords);
    }
}

/// A point of `K_{n,s} = {x : ‖x‖₂ = 1, ‖x‖₁ <= s}`.
///
/// No canonical measure on `K_{n,s}` exists; the sampler mixes two families
/// of members: with probability 1/2 a `k`-sparse direction with `k` uniform in
/// `1..=⌊s²⌋`, otherwise a direction spread over a random `⌊s²⌋`-dimensional
/// coordinate subspace. Both are rejected unless `‖x‖₁ <= s` (a `k`-sparse
/// unit vector with `k <= s²` always passes by Cauchy–Schwarz).
pub fn sample_convex_sparse<R: Rng + ?Sized>(spec: SparseSpec, rng: &mut R) -> Result<UnitVector> {
    let s = spec.s() as f64;
    let k_max = (spec.s() * spec.s()).min(spec.dim());
    loop {
        let k = if rng.random::<bool>() {
            rng.random_range(1..=k_max)
        } else {
            k_max
        };
        let x = sparse_on_random_support(spec.dim(), k, rng);
        if x.l1_norm() <= s * (1.0 + 1e-12) {
            return Ok(x);
        }
    }
}

/// Membership in `K_{n,s}` up to floating tolerance.
pub fn in_convex_sparse(x: &UnitVector, s: usize) -> bool {
    x.l1_norm() <= s as f64 * (1.0 + 1e-12) && (norm(x.coords()) - 1.0).abs() <= UNIT_TOLERANCE
}

/// Whether `θ` lies in the wedge `W_{x,y} = H_x △ H_y`, i.e. the hyperplane
/// `θ^⊥` separates `x` from `y`.
pub fn in_wedge(theta: &UnitVector, x: &UnitVector, y: &UnitVector) -> Result<bool> {
    theta.check_same_dim(x)?;
    theta.check_same_dim(y)?;
    Ok(wedge_raw(theta.coords(), x.coords(), y.coords()))
}

#[inline]
pub(crate) fn wedge_raw(theta: &[f64], x: &[f64], y: &[f64]) -> bool {
    sign_bit(dot(theta, x)) != sign_bit(dot(theta, y))
}

/// The unique shortest great-circle arc between two points that are neither
/// equal nor antipodal.
#[derive(Debug, Clone)]
pub struct Geodesic {
    x: UnitVector,
    y: UnitVector,
    angle: f64,
    sin_angle: f64,
}

impl Geodesic {
    pub fn new(x: UnitVector, y: UnitVector) -> Result<Self> {
        x.check_same_dim(&y)?;
        let c = x.dot(&y);
        if c.abs() >= 1.0 - DEGENERATE_TOLERANCE {
            return Err(Error::DegenerateGeodesic);
        }
        let angle = libm::acos(c.clamp(-1.0, 1.0));
        Ok(Self {
            x,
            y,
            angle,
            sin_angle: libm::sin(angle),
        })
    }

    pub fn start(&self) -> &UnitVector {
        &self.x
    }

    pub fn end(&self) -> &UnitVector {
        &self.y
    }

    /// Arc angle `α = arccos(x·y)` in radians.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `d(x, y) = α / π`.
    pub fn length(&self) -> f64 {
        self.angle / PI
    }

    fn weights(&self, t: f64) -> (f64, f64) {
        (
            libm::sin((1.0 - t) * self.angle) / self.sin_angle,
            libm::sin(t * self.angle) / self.sin_angle,
        )
    }

    /// `γ(t) = (sin((1−t)α)·x + sin(tα)·y) / sin α`.
    pub fn point(&self, t: f64) -> Result<UnitVector> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange { name: "t", value: t });
        }
        let (a, b) = self.weights(t);
        let coords = self
            .x
            .coords()
            .iter()
            .zip(self.y.coords())
            .map(|(p, q)| a * p + b * q)
            .collect();
        Ok(UnitVector::from_unit_unchecked(coords))
    }

    /// `θ·γ(t)` without materializing `γ(t)`.
    fn crossing_value(&self, tx: f64, ty: f64, t: f64) -> f64 {
        let (a, b) = self.weights(t);
        a * tx + b * ty
    }

    /// Parameter `t*` at which `θ^⊥` crosses the arc, by bisection.
    pub fn crossing(&self, theta: &UnitVector) -> Result<f64> {
        self.x.check_same_dim(theta)?;
        let tx = dot(theta.coords(), self.x.coords());
        let ty = dot(theta.coords(), self.y.coords());
        if sign_bit(tx) == sign_bit(ty) {
            return Err(Error::NotSeparating);
        }
        let start_sign = sign_bit(tx);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > BISECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if sign_bit(self.crossing_value(tx, ty, mid)) == start_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Transversal separation test for `θ ∈ W_{x,y}`: the hyperplane meets the
    /// arc at an angle of at least π/4, at a point at distance at least
    /// `d(x,y)/4` from both endpoints.
    pub fn transversal(&self, theta: &UnitVector) -> Result<bool> {
        let t_star = self.crossing(theta)?;
        let tx = dot(theta.coords(), self.x.coords());
        let ty = dot(theta.coords(), self.y.coords());
        // γ'(t) = α(−cos((1−t)α)·x + cos(tα)·y)/sin α, and ‖γ'‖ = α.
        let a = -libm::cos((1.0 - t_star) * self.angle) / self.sin_angle;
        let b = libm::cos(t_star * self.angle) / self.sin_angle;
        let tangent_component = (a * tx + b * ty).abs().min(1.0);
        let steep = libm::asin(tangent_component) >= FRAC_PI_4;

        let z = self.point(t_star)?;
        let d = self.length();
        let dx = geodesic_distance(&self.x, &z)?;
        let dy = geodesic_distance(&self.y, &z)?;
        let central = dx.min(dy) >= d / 4.0;
        Ok(steep && central)
    }
}

/// Point at parameter `t` along the geodesic; `d(x, γ(t)) = t·d(x, y)`.
pub fn geodesic_point(geo: &Geodesic, t: f64) -> Result<UnitVector> {
    geo.point(t)
}

/// Whether `θ^⊥` transversely separates `x` and `y`.
pub fn transversal_separation(theta: &UnitVector, x: &UnitVector, y: &UnitVector) -> Result<bool> {
    theta.check_same_dim(x)?;
    if !in_wedge(theta, x, y)? {
        return Err(Error::NotSeparating);
    }
    Geodesic::new(x.clone(), y.clone())?.transversal(theta)
}

/// Probability that a uniform direction transversely separates two points at
/// distance `d` on `S^n`.
///
/// The crossing point is uniform along the arc and independent of the
/// squared length `|θ_P|²` of the projection onto the arc's plane, which is
/// `Beta(1, (n−1)/2)`; the angle condition is `|θ_P|² >= 1/2`. This gives
/// `d · ½ · 2^{−(n−1)/2}`, which equals `d/4` on `S³`.
pub fn transversal_probability(n: usize, d: f64) -> f64 {
    d * 0.5 * libm::pow(0.5, (n as f64 - 1.0) / 2.0)
}

/// Where a [`PointSet`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PointSource {
    UniformSphere { n: usize },
    Sparse { n: usize, s: usize },
    ConvexSparse { n: usize, s: usize },
    Explicit,
}

/// A finite list of unit vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointSet {
    points: Vec<UnitVector>,
    source: PointSource,
}

impl PointSet {
    pub fn new(points: Vec<UnitVector>, source: PointSource) -> Result<Self> {
        if let Some(first) = points.first() {
            for p in &points[1..] {
                check_dims(first.dim(), p.dim())?;
            }
        }
        Ok(Self { points, source })
    }

    pub fn explicit(points: Vec<UnitVector>) -> Result<Self> {
        Self::new(points, PointSource::Explicit)
    }

    pub fn uniform<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Result<Self> {
        let points = (0..count)
            .map(|_| sample_uniform_sphere(n, rng))
            .collect::<Result<_>>()?;
        Ok(Self {
            points,
            source: PointSource::UniformSphere { n },
        })
    }

    pub fn sparse<R: Rng + ?Sized>(spec: SparseSpec, count: usize, rng: &mut R) -> Result<Self> {
        let points = (0..count)
            .map(|_| sample_sparse_unit(spec, rng))
            .collect::<Result<_>>()?;
        Ok(Self {
            points,
            source: PointSource::Sparse {
                n: spec.n(),
                s: spec.s(),
            },
        })
    }

    pub fn convex_sparse<R: Rng + ?Sized>(
        spec: SparseSpec,
        count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let points = (0..count)
            .map(|_| sample_convex_sparse(spec, rng))
            .collect::<Result<_>>()?;
        Ok(Self {
            points,
            source: PointSource::ConvexSparse {
                n: spec.n(),
                s: spec.s(),
            },
        })
    }

    /// A seeded finite stand-in for `K_s`: `count − perturbations` sparse
    /// samples plus `perturbations` near-copies of sampled points (same
    /// support, small jitter) so short distances are represented.
    pub fn sparse_net<R: Rng + ?Sized>(
        spec: SparseSpec,
        count: usize,
        perturbations: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let base = count.saturating_sub(perturbations).max(1.min(count));
        let mut set = Self::sparse(spec, base, rng)?;
        for _ in base..count {
            let parent = &set.points[rng.random_range(0..base)];
            let scale = rng.random_range(0.01..0.1);
            let coords: Vec<f64> = parent
                .coords()
                .iter()
                .map(|&c| {
                    if c == 0.0 {
                        0.0
                    } else {
                        c + scale * rng.sample::<f64, _>(StandardNormal)
                    }
                })
                .collect();
            let p = UnitVector::normalized(coords)?;
            set.points.push(p);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension, if the set is nonempty.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(UnitVector::dim)
    }

    pub fn source(&self) -> PointSource {
        self.source
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn iter(&self) -> core::slice::Iter<'_, UnitVector> {
        self.points.iter()
    }

    pub fn push(&mut self, p: UnitVector) -> Result<()> {
        if let Some(d) = self.dim() {
            check_dims(d, p.dim())?;
        }
        self.points.push(p);
        Ok(())
    }

    /// Subset by indices, tagged explicit.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            source: PointSource::Explicit,
        }
    }

    /// Row-major `k × k` Gram matrix of inner products.
    pub fn gram(&self) -> Vec<f64> {
        let k = self.len();
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            g[i * k + i] = self.points[i].dot(&self.points[i]);
            for j in (i + 1)..k {
                let v = self.points[i].dot(&self.points[j]);
                g[i * k + j] = v;
                g[j * k + i] = v;
            }
        }
        g
    }

    /// Largest pairwise geodesic distance (zero for fewer than two points).
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.max(distance_from_dot(self.points[i].dot(&self.points[j])));
            }
        }
        best
    }

    /// Compressed rows of nonzero coordinates, for fast projections of sparse
    /// sets.
    pub(crate) fn compressed(&self) -> CompressedRows {
        let mut offsets = Vec::with_capacity(self.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for p in &self.points {
            for (j, &c) in p.coords().iter().enumerate() {
                if c != 0.0 {
                    cols.push(j);
                    vals.push(c);
                }
            }
            offsets.push(cols.len());
        }
        CompressedRows {
            offsets,
            cols,
            vals,
        }
    }
}

impl Index<usize> for PointSet {
    type Output = UnitVector;

    fn index(&self, i: usize) -> &UnitVector {
        &self.points[i]
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a UnitVector;
    type IntoIter = core::slice::Iter<'a, UnitVector>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

pub(crate) struct CompressedRows {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CompressedRows {
    #[inline]
    pub(crate) fn dot_row(&self, i: usize, v: &[f64]) -> f64 {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        self.cols[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(&j, &c)| c * v[j])
            .sum()
    }

    pub(crate) fn rows(&self) -> usize {
        self.offsets.len() - 1
    }
}
