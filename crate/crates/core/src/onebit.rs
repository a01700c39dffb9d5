//! Measurement ensembles and the maps they induce: the one-bit sign map, the
//! Hamming metric on sign patterns, the normalized linear `ℓ¹` map and the
//! sign-product statistic.

#[cfg(feature = "serde")]
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::rng::stream;
use crate::sphere::{self, check_dims, dot, gaussian_coords, norm, sign_bit, UnitVector};
use crate::{Error, Result};

/// `λ = √(2/π)`, the mean of `|g|` for a standard gaussian `g`.
pub const LAMBDA: f64 = 0.797_884_560_802_865_4;

const ENSEMBLE_TAG: u64 = 0x656e_7365_6d62_6c65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnsembleKind {
    UniformSphere,
    Gaussian,
}

/// `m` measurement directions in `R^{n+1}`, row-major.
///
/// Uniform ensembles hold unit vectors; gaussian ensembles hold the raw
/// standard normal vectors. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeasurementEnsemble {
    dim: usize,
    m: usize,
    kind: EnsembleKind,
    seed: u64,
    directions: Vec<f64>,
}

impl MeasurementEnsemble {
    /// Draws `m` directions in `R^{n+1}` from the stream owned by `seed`.
    pub fn draw(kind: EnsembleKind, n: usize, m: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n));
        }
        let dim = n + 1;
        let mut rng = stream(seed, 0, ENSEMBLE_TAG);
        let mut directions = Vec::with_capacity(m * dim);
        for _ in 0..m {
            match kind {
                EnsembleKind::UniformSphere => {
                    directions.extend(sphere::uniform_direction(dim, &mut rng).into_coords())
                }
                EnsembleKind::Gaussian => directions.extend(gaussian_coords(dim, &mut rng)),
            }
        }
        Ok(Self {
            dim,
            m,
            kind,
            seed,
            directions,
        })
    }

    /// Draws with a seed taken from `rng`.
    pub fn draw_with<R: Rng + ?Sized>(
        kind: EnsembleKind,
        n: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::draw(kind, n, m, rng.next_u64())
    }

    /// Builds an ensemble from explicit directions (all of dimension `dim`).
    pub fn from_directions(
        kind: EnsembleKind,
        dim: usize,
        directions: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim.saturating_sub(1)));
        }
        let m = directions.len();
        let mut flat = Vec::with_capacity(m * dim);
        for d in directions {
            check_dims(dim, d.len())?;
            if kind == EnsembleKind::UniformSphere {
                let r = norm(&d);
                if (r - 1.0).abs() > sphere::UNIT_TOLERANCE {
                    return Err(Error::NotUnit { norm: r });
                }
            }
            flat.extend(d);
        }
        Ok(Self {
            dim,
            m,
            kind,
            seed,
            directions: flat,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.directions[j * self.dim..(j + 1) * self.dim]
    }

    pub fn directions(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.directions.chunks_exact(self.dim)
    }

    /// The first `m` directions, so `prefix(m)` ⊆ `self` as ensembles.
    pub fn prefix(&self, m: usize) -> Self {
        let m = m.min(self.m);
        Self {
            dim: self.dim,
            m,
            kind: self.kind,
            seed: self.seed,
            directions: self.directions[..m * self.dim].to_vec(),
        }
    }

    /// Each direction rescaled to unit length (a uniform ensemble when the
    /// source is gaussian). Sign patterns are unchanged.
    pub fn normalized(&self) -> Self {
        let mut directions = self.directions.clone();
        for d in directions.chunks_exact_mut(self.dim) {
            let r = norm(d);
            if r > 0.0 {
                for c in d.iter_mut() {
                    *c /= r;
                }
            }
        }
        Self {
            kind: EnsembleKind::UniformSphere,
            directions,
            ..*self
        }
    }

    pub(crate) fn require(&self, kind: EnsembleKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongEnsembleKind {
                expected: kind,
                found: self.kind,
            })
        }
    }

    pub(crate) fn check_point(&self, x: &UnitVector) -> Result<()> {
        check_dims(self.dim, x.dim())
    }

    /// `[⟨θ_j, x⟩]_j`.
    pub fn project(&self, x: &UnitVector) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.directions().map(|d| dot(d, x.coords())).collect())
    }
}

/// A point of the Hamming cube `{−1, +1}^m`, bit-packed (`1` ↔ `+1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern {
    len: usize,
    words: Vec<u64>,
}

impl SignPattern {
    pub fn from_signs<I: IntoIterator<Item = bool>>(signs: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for positive in signs {
            if len % 64 == 0 {
                words.push(0);
            }
            if positive {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Signs of `values` under `sgn(0) = +1`.
    pub fn from_values(values: &[f64]) -> Self {
        Self::from_signs(values.iter().map(|&v| sign_bit(v)))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `j`-th entry as `±1`.
    pub fn get(&self, j: usize) -> i8 {
        assert!(j < self.len, "index {j} out of range for pattern of length {}", self.len);
        if self.words[j / 64] >> (j % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn negated(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            let used = self.len % 64;
            if used != 0 {
                *last &= (1u64 << used) - 1;
            }
        }
        Self {
            len: self.len,
            words,
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of disagreeing coordinates.
    pub fn disagreements(&self, other: &SignPattern) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(xor_count(&self.words, &other.words))
    }
}

#[inline]
pub(crate) fn xor_count(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p ^ q).count_ones() as usize)
        .sum()
}

/// Renders as a string of `+` and `-`.
impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.iter() {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Parses `+`/`-` strings; the typographic minus `−` is accepted as well.
impl FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(true),
                '-' | '\u{2212}' => Ok(false),
                other => Err(Error::InvalidSign(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_signs(signs))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for SignPattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use alloc::string::ToString;
        serializer.serialize_str(&self.to_string())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for SignPattern {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `sgn(Ax) = [sgn⟨θ_j, x⟩]_j` with `sgn(0) = +1`.
pub fn one_bit_map(ens: &MeasurementEnsemble, x: &UnitVector) -> Result<SignPattern> {
    ens.check_point(x)?;
    Ok(SignPattern::from_signs(
        ens.directions().map(|d| sign_bit(dot(d, x.coords()))),
    ))
}

/// `d_H(p, q)`: the fraction of coordinates where the patterns differ.
pub fn hamming_distance(p: &SignPattern, q: &SignPattern) -> Result<f64> {
    let diff = p.disagreements(q)?;
    if p.is_empty() {
        return Err(Error::Empty("sign patterns of length zero"));
    }
    Ok(diff as f64 / p.len() as f64)
}

/// `(1/(m·λ)) Σ_j |⟨g_j, x − y⟩|`, an unbiased estimate of `‖x − y‖₂` for a
/// gaussian ensemble.
pub fn linear_l1_distance(ens: &MeasurementEnsemble, x: &UnitVector, y: &UnitVector) -> Result<f64> {
    ens.require(EnsembleKind::Gaussian)?;
    ens.check_point(x)?;
    ens.check_point(y)?;
    if ens.m() == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let diff: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| a - b).collect();
    let total: f64 = ens.directions().map(|g| dot(g, &diff).abs()).sum();
    Ok(total / (ens.m() as f64 * LAMBDA))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SignProductReport {
    pub lambda: f64,
    /// `(1/m) Σ_j sgn⟨x, g_j⟩⟨y, g_j⟩ − λ⟨x, y⟩`.
    pub statistic: f64,
    pub x: UnitVector,
    pub y: UnitVector,
    pub m: usize,
}

impl SignProductReport {
    /// The uncentered mean `(1/m) Σ_j sgn⟨x, g_j⟩⟨y, g_j⟩`.
    pub fn raw_mean(&self) -> f64 {
        self.statistic + self.lambda * self.x.dot(&self.y)
    }
}

pub fn sign_product_statistic(
    ens: &MeasurementEnsemble,
    x: &UnitVector,
    y: &UnitVector,
) -> Result<SignProductReport> {
    ens.require(EnsembleKind::Gaussian)?;
    ens.check_point(x)?;
    ens.check_point(y)?;
    if ens.m() == 0 {
        return Err(Error::Empty("ensemble with m = 0"));
    }
    let sum: f64 = ens
        .directions()
        .map(|g| {
            let py = dot(g, y.coords());
            if sign_bit(dot(g, x.coords())) {
                py
            } else {
                -py
            }
        })
        .sum();
    Ok(SignProductReport {
        lambda: LAMBDA,
        statistic: sum / ens.m() as f64 - LAMBDA * x.dot(y),
        x: x.clone(),
        y: y.clone(),
        m: ens.m(),
    })
}

/// `D(x, y)² = (1/m) Σ_j 1_{W_{x,y}}(θ_j)`, the empirical wedge frequency.
/// Identical to the Hamming distance of the two sign patterns.
pub fn conditional_metric_sq(
    ens: &MeasurementEnsemble,
    x: &UnitVector,
    y: &UnitVector,
) -> Result<f64> {
    hamming_distance(&one_bit_map(ens, x)?, &one_bit_map(ens, y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn e(dim: usize, j: usize) -> UnitVector {
        UnitVector::basis(dim, j).unwrap()
    }

    #[test]
    fn lambda_matches_closed_form() {
        assert_eq!(LAMBDA, libm::sqrt(2.0 / core::f64::consts::PI));
    }

    #[test]
    fn self_directions_give_all_plus() {
        let x = UnitVector::normalized(vec![1.0, 2.0, -0.5]).unwrap();
        let ens = MeasurementEnsemble::from_directions(
            EnsembleKind::UniformSphere,
            3,
            vec![x.coords().to_vec(); 5],
            0,
        )
        .unwrap();
        let p = one_bit_map(&ens, &x).unwrap();
        assert!(p.iter().all(|s| s == 1));
        assert_eq!(p.to_string(), "+++++");
    }

    #[test]
    fn antipode_negates_pattern() {
        let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 4, 130, 9).unwrap();
        let x = UnitVector::normalized(vec![0.3, -1.0, 0.2, 0.7, 0.1]).unwrap();
        let p = one_bit_map(&ens, &x).unwrap();
        let q = one_bit_map(&ens, &x.neg()).unwrap();
        assert_eq!(q, p.negated());
        assert_eq!(hamming_distance(&p, &q).unwrap(), 1.0);
        assert_eq!(hamming_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn hamming_counts_slots() {
        let p: SignPattern = "++-+".parse().unwrap();
        let q: SignPattern = "+--+".parse().unwrap();
        assert_eq!(hamming_distance(&p, &q).unwrap(), 0.25);
        let r: SignPattern = "++-".parse().unwrap();
        assert!(matches!(
            hamming_distance(&p, &r),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pattern_string_round_trip_and_minus_sign() {
        let p: SignPattern = "+\u{2212}-+".parse().unwrap();
        assert_eq!(p.to_string(), "+--+");
        assert_eq!("+x".parse::<SignPattern>(), Err(Error::InvalidSign('x')));
    }

    #[test]
    fn bits_match_wedge_membership() {
        let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 3, 200, 11).unwrap();
        let x = UnitVector::normalized(vec![1.0, 0.5, -0.2, 0.0]).unwrap();
        let y = UnitVector::normalized(vec![-0.3, 0.5, 0.9, 0.1]).unwrap();
        let p = one_bit_map(&ens, &x).unwrap();
        let q = one_bit_map(&ens, &y).unwrap();
        for j in 0..ens.m() {
            let theta = UnitVector::new(ens.direction(j).to_vec()).unwrap();
            assert_eq!(p.get(j) != q.get(j), sphere::in_wedge(&theta, &x, &y).unwrap());
        }
        assert_eq!(
            conditional_metric_sq(&ens, &x, &y).unwrap(),
            hamming_distance(&p, &q).unwrap()
        );
        assert_eq!(conditional_metric_sq(&ens, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn kind_gates() {
        let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 2, 10, 1).unwrap();
        let x = e(3, 0);
        assert!(matches!(
            linear_l1_distance(&ens, &x, &x),
            Err(Error::WrongEnsembleKind { .. })
        ));
        assert!(sign_product_statistic(&ens, &x, &x).is_err());
        let g = MeasurementEnsemble::draw(EnsembleKind::Gaussian, 2, 10, 1).unwrap();
        assert_eq!(linear_l1_distance(&g, &x, &x).unwrap(), 0.0);
        assert!(one_bit_map(&g, &e(4, 0)).is_err());
    }

    #[test]
    fn uniform_directions_are_unit() {
        let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, 6, 50, 3).unwrap();
        for d in ens.directions() {
            assert!((norm(d) - 1.0).abs() < 1e-9);
        }
        assert!(MeasurementEnsemble::from_directions(
            EnsembleKind::UniformSphere,
            2,
            vec![vec![1.0, 1.0]],
            0
        )
        .is_err());
    }

    #[test]
    fn prefix_is_nested() {
        let ens = MeasurementEnsemble::draw(EnsembleKind::Gaussian, 3, 40, 5).unwrap();
        let pre = ens.prefix(17);
        assert_eq!(pre.m(), 17);
        for j in 0..17 {
            assert_eq!(pre.direction(j), ens.direction(j));
        }
    }

    #[test]
    fn negated_masks_tail_bits() {
        let p = SignPattern::from_signs([true, false, true]);
        let n = p.negated();
        assert_eq!(n.to_string(), "-+-");
        assert_eq!(n.negated(), p);
    }
}
