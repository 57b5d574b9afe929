//! Exact piecewise-linear circle homeomorphisms: the semantic oracle.
//!
//! A [`PLMap`] is an orientation-preserving PL self-map of the circle
//! `[0,1)/∼` with n-adic breakpoints and slopes that are integer powers of
//! `n`. Coordinates are arbitrary-precision rationals, so equality,
//! composition and inversion are exact.
//!
//! The breakpoint list is canonical: it always contains `x = 0` and the
//! preimage of `0`, and no other point where the left and right slopes
//! agree. Equality of maps is then literal equality of the lists.

use crate::element::Element;
use crate::ntree::Arity;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rational = BigRational;

fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Orientation-preserving PL circle map in canonical breakpoint form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PLMap {
    n: Arity,
    points: Vec<(Rational, Rational)>,
}

impl PLMap {
    /// The identity map.
    pub fn identity(n: Arity) -> PLMap {
        PLMap { n, points: vec![(Rational::zero(), Rational::zero())] }
    }

    pub fn arity(&self) -> Arity {
        self.n
    }

    /// Canonical breakpoints, `(x, f(x))` with `x` ascending in `[0,1)`.
    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    /// Build from sample points that include every slope change and `x = 0`,
    /// with the map affine between consecutive samples.
    fn from_samples(n: Arity, mut points: Vec<(Rational, Rational)>) -> PLMap {
        points.sort_by(|a, b| a.0.cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        assert!(!points.is_empty() && points[0].0.is_zero(), "samples must include x = 0");
        let lifted = lift(&points);
        let m = points.len();
        let mut keep = Vec::with_capacity(m);
        for i in 0..m {
            if i == 0 || points[i].1.is_zero() {
                keep.push(points[i].clone());
                continue;
            }
            let left = segment_slope(&points, &lifted, i - 1);
            let right = segment_slope(&points, &lifted, i);
            if left != right {
                keep.push(points[i].clone());
            }
        }
        PLMap { n, points: keep }
    }

    /// Exact image of a point of the circle.
    pub fn evaluate(&self, x: &Rational) -> Rational {
        let x = x - x.floor();
        let lifted = lift(&self.points);
        let m = self.points.len();
        // last breakpoint with x_i <= x
        let mut i = m - 1;
        for (j, p) in self.points.iter().enumerate() {
            if p.0 <= x {
                i = j;
            } else {
                break;
            }
        }
        let slope = segment_slope(&self.points, &lifted, i);
        let y = &lifted[i] + (&x - &self.points[i].0) * slope;
        if y >= Rational::one() {
            y - Rational::one()
        } else {
            y
        }
    }

    /// Exact composite `self ∘ other` (apply `other` first).
    pub fn compose_after(&self, other: &PLMap) -> Result<PLMap> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n.get(), other.n.get()));
        }
        let other_inv = other.invert();
        let mut xs: Vec<Rational> = vec![Rational::zero()];
        xs.extend(other.points.iter().map(|p| p.0.clone()));
        xs.extend(self.points.iter().map(|p| other_inv.evaluate(&p.0)));
        xs.sort();
        xs.dedup();
        let samples = xs
            .into_iter()
            .map(|x| {
                let y = self.evaluate(&other.evaluate(&x));
                (x, y)
            })
            .collect();
        Ok(PLMap::from_samples(self.n, samples))
    }

    /// Exact inverse map.
    pub fn invert(&self) -> PLMap {
        let mut swapped: Vec<(Rational, Rational)> =
            self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
        swapped.sort_by(|a, b| a.0.cmp(&b.0));
        PLMap::from_samples(self.n, swapped)
    }

    /// Exact equality as maps (canonical forms are literal).
    pub fn equals(&self, other: &PLMap) -> bool {
        self == other
    }

    /// Slopes of the linear pieces, one per canonical breakpoint.
    pub fn slopes(&self) -> Vec<Rational> {
        let lifted = lift(&self.points);
        (0..self.points.len()).map(|i| segment_slope(&self.points, &lifted, i)).collect()
    }
}

/// Lifted y-values: `lifted[i] = y_i + (0 or 1)` so the sequence increases.
fn lift(points: &[(Rational, Rational)]) -> Vec<Rational> {
    let mut lifted = Vec::with_capacity(points.len());
    let mut wrapped = false;
    for (i, (_, y)) in points.iter().enumerate() {
        if i > 0 && !wrapped && *y <= points[i - 1].1 {
            wrapped = true;
        }
        lifted.push(if wrapped { y + Rational::one() } else { y.clone() });
    }
    lifted
}

/// Slope of the segment starting at breakpoint `i` (the last segment closes
/// the circle at `x_0 + 1`, `y_0 + 1`).
fn segment_slope(points: &[(Rational, Rational)], lifted: &[Rational], i: usize) -> Rational {
    let m = points.len();
    let (x1, y1) = if i + 1 < m {
        (points[i + 1].0.clone(), lifted[i + 1].clone())
    } else {
        (&points[0].0 + Rational::one(), &points[0].1 + Rational::one())
    };
    (y1 - &lifted[i]) / (x1 - &points[i].0)
}

/// The PL map of a tree pair: the `i`-th source leaf interval is sent
/// affinely onto the `((i+ρ) mod L)`-th target leaf interval.
pub fn from_element(e: &Element) -> PLMap {
    let n = e.arity();
    let source = e.source().leaf_intervals(n);
    let target = e.target().leaf_intervals(n);
    let leaves = source.len();
    let rho = e.rotation();
    let samples = (0..leaves)
        .map(|i| (source[i].0.clone(), target[(i + rho) % leaves].0.clone()))
        .collect();
    PLMap::from_samples(n, samples)
}

/// True iff `q` is an exact integer power of `n` (used by invariant tests).
pub fn is_power_of(n: u32, q: &Rational) -> bool {
    if q.is_zero() || q.is_negative() {
        return false;
    }
    let n = BigInt::from(n);
    let check = |mut v: BigInt| {
        while v > BigInt::one() {
            if (&v % &n).is_zero() {
                v /= &n;
            } else {
                return false;
            }
        }
        true
    };
    check(q.numer().clone()) && check(q.denom().clone())
}

impl fmt::Display for PLMap {
    /// Text form: semicolon-separated `x:y` pairs in lowest terms, e.g.
    /// `0/1:1/2; 1/2:0/1` for the half rotation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, y)) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}/{}:{}/{}", x.numer(), x.denom(), y.numer(), y.denom())?;
        }
        Ok(())
    }
}

/// Parse the text form back into a map.
pub fn parse_plmap(s: &str, n: Arity) -> Result<PLMap> {
    let mut points = Vec::new();
    for (idx, chunk) in s.split(';').enumerate() {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let (xs, ys) = chunk
            .split_once(':')
            .ok_or_else(|| Error::Parse { pos: idx, msg: format!("expected x:y in {chunk:?}") })?;
        points.push((parse_rational(xs)?, parse_rational(ys)?));
    }
    if points.is_empty() {
        return Err(Error::Parse { pos: 0, msg: "empty PL map".into() });
    }
    Ok(PLMap::from_samples(n, points))
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse { pos: 0, msg: format!("bad numerator {num:?}") })?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse { pos: 0, msg: format!("bad denominator {den:?}") })?;
    if den.is_zero() {
        return Err(Error::Parse { pos: 0, msg: "zero denominator".into() });
    }
    Ok(BigRational::new(num, den))
}

/// The paper's generator `A` of `F = F_2` as a PL map.
#[cfg(test)]
pub(crate) fn map_a() -> PLMap {
    let n = Arity::new(2).unwrap();
    PLMap::from_samples(
        n,
        vec![
            (Rational::zero(), Rational::zero()),
            (rat(1, 2), rat(1, 4)),
            (rat(3, 4), rat(1, 2)),
        ],
    )
}

/// The paper's generator `B` of `F = F_2`.
#[cfg(test)]
pub(crate) fn map_b() -> PLMap {
    let n = Arity::new(2).unwrap();
    PLMap::from_samples(
        n,
        vec![
            (Rational::zero(), Rational::zero()),
            (rat(1, 2), rat(1, 2)),
            (rat(3, 4), rat(5, 8)),
            (rat(7, 8), rat(3, 4)),
        ],
    )
}

/// The paper's torsion generator `C` of `T = T_2` (rotation by 1/2).
#[cfg(test)]
pub(crate) fn map_c() -> PLMap {
    let n = Arity::new(2).unwrap();
    PLMap::from_samples(n, vec![(Rational::zero(), rat(1, 2)), (rat(1, 2), Rational::zero())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{parse_element, random_element, Element};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n2() -> Arity {
        Arity::new(2).unwrap()
    }

    #[test]
    fn displayed_formula_values() {
        assert_eq!(map_a().evaluate(&rat(1, 2)), rat(1, 4));
        assert_eq!(map_b().evaluate(&rat(3, 4)), rat(5, 8));
        assert_eq!(map_c().evaluate(&rat(1, 4)), rat(3, 4));
        assert_eq!(map_c().evaluate(&rat(3, 4)), rat(1, 4));
    }

    #[test]
    fn canonical_text_forms() {
        assert_eq!(map_c().to_string(), "0/1:1/2; 1/2:0/1");
        assert_eq!(PLMap::identity(n2()).to_string(), "0/1:0/1");
        assert_eq!(map_a().to_string(), "0/1:0/1; 1/2:1/4; 3/4:1/2");
        for s in ["0/1:1/2; 1/2:0/1", "0/1:0/1; 1/2:1/4; 3/4:1/2"] {
            assert_eq!(parse_plmap(s, n2()).unwrap().to_string(), s);
        }
    }

    #[test]
    fn compose_and_invert() {
        let c = map_c();
        assert_eq!(c.compose_after(&c).unwrap(), PLMap::identity(n2()));
        let a = map_a();
        assert_eq!(a.compose_after(&a.invert()).unwrap(), PLMap::identity(n2()));
        assert_eq!(a.invert().compose_after(&a).unwrap(), PLMap::identity(n2()));
        assert_eq!(a.invert().invert(), a);
        assert_eq!(a.compose_after(&PLMap::identity(n2())).unwrap(), a);
        assert!(!a.equals(&map_b()));
    }

    #[test]
    fn element_maps_match_displayed_generators() {
        // x_0 = A^{-1}, c_0 = C as tree pairs
        let x0 = parse_element("((. .) .) (. (. .)) @0", n2()).unwrap();
        assert_eq!(from_element(&x0), map_a().invert());
        assert_eq!(from_element(&x0.inverse()), map_a());
        let c0 = Element::c_generator(0, n2());
        assert_eq!(from_element(&c0), map_c());
        assert_eq!(from_element(&Element::identity(n2())), PLMap::identity(n2()));
    }

    #[test]
    fn oracle_homomorphism_and_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for arity in [2u32, 3] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..30 {
                let a = random_element(&mut rng, n, 4);
                let b = random_element(&mut rng, n, 4);
                let prod = a.multiply(&b).unwrap();
                // multiply(a, b) = apply a first = plmap(b) ∘ plmap(a)
                let composed = from_element(&b).compose_after(&from_element(&a)).unwrap();
                assert_eq!(from_element(&prod), composed);
                assert_eq!(from_element(&a), from_element(&a.reduce()));
            }
        }
    }

    #[test]
    fn from_element_identity_iff_reduces_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = n2();
        for _ in 0..40 {
            let e = random_element(&mut rng, n, 3);
            let is_flat = from_element(&e) == PLMap::identity(n);
            assert_eq!(is_flat, e.is_identity());
        }
    }

    #[test]
    fn slopes_are_powers_of_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for arity in [2u32, 3, 5] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..15 {
                let e = random_element(&mut rng, n, 5);
                let f = from_element(&e);
                for s in f.slopes() {
                    assert!(is_power_of(arity, &s), "slope {s} not a power of {arity}");
                }
                for (x, y) in f.points() {
                    assert!(is_power_of(arity, &denom_as_rational(x)));
                    assert!(is_power_of(arity, &denom_as_rational(y)));
                }
            }
        }
    }

    fn denom_as_rational(q: &Rational) -> Rational {
        BigRational::from_integer(q.denom().clone())
    }

    #[test]
    fn evaluate_is_cyclically_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = n2();
        let e = random_element(&mut rng, n, 4);
        let f = from_element(&e);
        // images of depth-5 dyadics are pairwise distinct (bijectivity)
        let mut seen = std::collections::HashSet::new();
        for k in 0..32i64 {
            let y = f.evaluate(&rat(k, 32));
            assert!(seen.insert(y.to_string()));
        }
    }
}
