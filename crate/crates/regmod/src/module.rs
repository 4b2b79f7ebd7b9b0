//! The ambient module M = ⊕ᵢ R/p^eᵢ, its elements, and the per-element
//! quantities the regularity theory is built from: exponent, height and
//! the (s, k; s1) profile.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::valuation::{is_prime, ExtNat};

/// Hard structural limit on module order; keeps all arithmetic comfortably
/// inside u64 and makes accidental huge inputs an immediate error.
pub const MAX_MODULE_ORDER: u64 = 1 << 20;

#[derive(Debug, PartialEq, Eq, Hash)]
struct ShapeData {
    prime: u64,
    exponents: Vec<u32>,
    order: u64,
}

/// The isomorphism type of a finite p-primary module: a prime together with
/// the exponent vector (e1 ≥ e2 ≥ … ≥ en ≥ 1) of its cyclic summands.
///
/// Exponents are sorted descending at construction so equal shapes are
/// structurally equal. Cloning is cheap; the data is shared.
#[derive(Clone)]
pub struct ModuleShape {
    inner: Arc<ShapeData>,
}

impl ModuleShape {
    pub fn new(prime: u64, exponents: &[u32]) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        if exponents.is_empty() {
            return Err(Error::EmptyShape);
        }
        if exponents.contains(&0) {
            return Err(Error::ZeroExponent);
        }
        let mut exponents = exponents.to_vec();
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        let mut order: u128 = 1;
        for &e in &exponents {
            for _ in 0..e {
                order *= prime as u128;
                if order > MAX_MODULE_ORDER as u128 {
                    return Err(Error::OrderTooLarge {
                        order,
                        limit: MAX_MODULE_ORDER,
                    });
                }
            }
        }
        Ok(ModuleShape {
            inner: Arc::new(ShapeData {
                prime,
                exponents,
                order: order as u64,
            }),
        })
    }

    pub fn prime(&self) -> u64 {
        self.inner.prime
    }

    /// Exponents in descending order.
    pub fn exponents(&self) -> &[u32] {
        &self.inner.exponents
    }

    /// Number of cyclic summands.
    pub fn rank(&self) -> usize {
        self.inner.exponents.len()
    }

    /// The largest exponent e1; p^e1 annihilates the whole module.
    pub fn top_exponent(&self) -> u32 {
        self.inner.exponents[0]
    }

    /// Number of elements, p^(e1 + … + en).
    pub fn order(&self) -> u64 {
        self.inner.order
    }

    /// p^eᵢ, the modulus of the i-th summand.
    pub fn summand_modulus(&self, i: usize) -> u64 {
        pow(self.prime(), self.inner.exponents[i])
    }

    /// The additive identity.
    pub fn zero(&self) -> Element {
        Element {
            shape: self.clone(),
            coords: vec![0; self.rank()],
        }
    }

    /// Builds an element from arbitrary integer coordinates, reducing each
    /// modulo its summand's p-power.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.rank() {
            return Err(Error::CoordinateLength {
                got: coords.len(),
                expected: self.rank(),
            });
        }
        let coords = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| (c as i128).rem_euclid(self.summand_modulus(i) as i128) as u64)
            .collect();
        Ok(Element {
            shape: self.clone(),
            coords,
        })
    }

    /// The i-th standard generator (1 in summand i, 0 elsewhere).
    pub fn standard_generator(&self, i: usize) -> Element {
        let mut coords = vec![0; self.rank()];
        coords[i] = 1;
        Element {
            shape: self.clone(),
            coords,
        }
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let moduli: Vec<u64> = (0..self.rank()).map(|i| self.summand_modulus(i)).collect();
        let rank = self.rank();
        let total = self.order();
        let mut coords = vec![0u64; rank];
        let mut emitted = 0u64;
        std::iter::from_fn(move || {
            if emitted == total {
                return None;
            }
            let out = Element {
                shape: self.clone(),
                coords: coords.clone(),
            };
            emitted += 1;
            for i in (0..rank).rev() {
                coords[i] += 1;
                if coords[i] < moduli[i] {
                    break;
                }
                coords[i] = 0;
            }
            Some(out)
        })
    }
}

impl PartialEq for ModuleShape {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for ModuleShape {}

impl std::hash::Hash for ModuleShape {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.hash(state);
    }
}

impl fmt::Debug for ModuleShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModuleShape(p={}, {:?})", self.prime(), self.exponents())
    }
}

impl fmt::Display for ModuleShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime();
        for (i, &e) in self.exponents().iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "Z/{}", pow(p, e))?;
        }
        Ok(())
    }
}

fn pow(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).expect("power fits in u64")
}

/// An element of a fixed module, stored as reduced coordinates
/// 0 ≤ aᵢ < p^eᵢ.
///
/// Elements carry their shape; mixing shapes in arithmetic is a bug and
/// panics. Ordering is lexicographic on coordinates, which is the
/// deterministic iteration order used throughout the crate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Element {
    shape: ModuleShape,
    coords: Vec<u64>,
}

impl Element {
    pub fn shape(&self) -> &ModuleShape {
        &self.shape
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub(crate) fn from_reduced(shape: ModuleShape, coords: Vec<u64>) -> Element {
        debug_assert_eq!(coords.len(), shape.rank());
        debug_assert!(coords
            .iter()
            .enumerate()
            .all(|(i, &c)| c < shape.summand_modulus(i)));
        Element { shape, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Fallible addition; reports a shape mismatch instead of panicking.
    pub fn checked_add(&self, rhs: &Element) -> Result<Element> {
        if self.shape != rhs.shape {
            return Err(Error::CoordinateLength {
                got: rhs.coords.len(),
                expected: self.coords.len(),
            });
        }
        Ok(self + rhs)
    }

    /// Multiplies by an arbitrary integer scalar, componentwise.
    pub fn scalar_mul(&self, c: i64) -> Element {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let m = self.shape.summand_modulus(i) as i128;
                ((c as i128 * a as i128).rem_euclid(m)) as u64
            })
            .collect();
        Element {
            shape: self.shape.clone(),
            coords,
        }
    }

    /// Multiplies by p^n.
    pub fn mul_p_pow(&self, n: u32) -> Element {
        let p = self.shape.prime();
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let e = self.shape.exponents()[i];
                if n >= e {
                    0
                } else {
                    let m = self.shape.summand_modulus(i);
                    mul_mod(a, pow(p, n), m)
                }
            })
            .collect();
        Element {
            shape: self.shape.clone(),
            coords,
        }
    }

    /// Smallest k ≥ 0 with p^k x = 0.
    pub fn exponent(&self) -> u32 {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let e = self.shape.exponents()[i];
                e - coord_valuation(self.shape.prime(), a, e)
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest s with x ∈ p^s M; infinite exactly for the zero element.
    pub fn height(&self) -> ExtNat {
        let mut min: Option<u32> = None;
        for (i, &a) in self.coords.iter().enumerate() {
            if a != 0 {
                let v = coord_valuation(self.shape.prime(), a, self.shape.exponents()[i]);
                min = Some(min.map_or(v, |m| m.min(v)));
            }
        }
        match min {
            Some(v) => ExtNat::Finite(v),
            None => ExtNat::Infinity,
        }
    }

    /// height(x) + exponent(x). Constant on the nonzero elements of a cyclic
    /// direct summand; its jumps along x, px, p²x, … locate the split points
    /// of a decomposition into regular parts.
    pub fn g_value(&self) -> ExtNat {
        self.height() + self.exponent()
    }

    /// True iff heights grow exactly one step per multiplication by p:
    /// h(p^j x) = j + h(x) for j = 1, …, e(x) − 1. The zero element is
    /// regular by convention (infinite height).
    ///
    /// Checking the last step suffices: heights can only grow faster than
    /// forced, so equality at j = e(x) − 1 pins every intermediate step.
    pub fn is_regular(&self) -> bool {
        let k = self.exponent();
        if k <= 1 {
            return true;
        }
        let s = self.height();
        self.mul_p_pow(k - 1).height() == s + (k - 1)
    }

    /// The (s, k; s1) data of a nonzero element: height, exponent, and the
    /// excess height of its last nonzero multiple, s1 = h(p^(k−1) x) − (k−1).
    pub fn profile(&self) -> Result<ElementProfile> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let s = self.height().finite().expect("nonzero element has finite height");
        let k = self.exponent();
        let top = self
            .mul_p_pow(k - 1)
            .height()
            .finite()
            .expect("p^(k-1) x is nonzero");
        Ok(ElementProfile {
            s,
            k,
            s1: top - (k - 1),
        })
    }
}

/// Valuation of a reduced coordinate, treating 0 as "at least e".
fn coord_valuation(p: u64, a: u64, e: u32) -> u32 {
    if a == 0 {
        return e;
    }
    let mut v = 0;
    let mut rest = a;
    while rest.is_multiple_of(p) {
        rest /= p;
        v += 1;
    }
    debug_assert!(v < e);
    v
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl Add for &Element {
    type Output = Element;

    fn add(self, rhs: &Element) -> Element {
        assert_eq!(self.shape, rhs.shape, "element shapes differ");
        let coords = self
            .coords
            .iter()
            .zip(&rhs.coords)
            .enumerate()
            .map(|(i, (&a, &b))| {
                let m = self.shape.summand_modulus(i);
                (a + b) % m
            })
            .collect();
        Element {
            shape: self.shape.clone(),
            coords,
        }
    }
}

impl Sub for &Element {
    type Output = Element;

    fn sub(self, rhs: &Element) -> Element {
        self + &(-rhs)
    }
}

impl Neg for &Element {
    type Output = Element;

    fn neg(self) -> Element {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let m = self.shape.summand_modulus(i);
                (m - a) % m
            })
            .collect();
        Element {
            shape: self.shape.clone(),
            coords,
        }
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.shape.prime(), self.shape.exponents(), &self.coords).cmp(&(
            other.shape.prime(),
            other.shape.exponents(),
            &other.coords,
        ))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The (s, k; s1) invariants of a nonzero element. s1 ≥ s always, and
/// s1 = s exactly for regular elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementProfile {
    /// Height h(x).
    pub s: u32,
    /// Exponent e(x).
    pub k: u32,
    /// h(p^(k−1) x) − (k − 1).
    pub s1: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape31() -> ModuleShape {
        ModuleShape::new(2, &[3, 1]).unwrap()
    }

    #[test]
    fn shape_normalizes_and_validates() {
        let s = ModuleShape::new(2, &[1, 3]).unwrap();
        assert_eq!(s.exponents(), &[3, 1]);
        assert_eq!(s.order(), 16);
        assert_eq!(ModuleShape::new(6, &[1]), Err(Error::NotPrime(6)));
        assert_eq!(ModuleShape::new(2, &[]), Err(Error::EmptyShape));
        assert_eq!(ModuleShape::new(2, &[2, 0]), Err(Error::ZeroExponent));
        assert!(matches!(
            ModuleShape::new(2, &[21]),
            Err(Error::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn zero_element() {
        assert_eq!(shape31().zero().coords(), &[0, 0]);
        let s3 = ModuleShape::new(3, &[2]).unwrap();
        assert_eq!(s3.zero().coords(), &[0]);
    }

    #[test]
    fn element_reduction() {
        let s = shape31();
        let x = s.element(&[10, 3]).unwrap();
        assert_eq!(x.coords(), &[2, 1]);
        let y = s.element(&[-1, -1]).unwrap();
        assert_eq!(y.coords(), &[7, 1]);
        assert_eq!(
            s.element(&[1, 2, 3]),
            Err(Error::CoordinateLength { got: 3, expected: 2 })
        );
    }

    #[test]
    fn addition_and_inverses() {
        let s = shape31();
        let x = s.element(&[2, 1]).unwrap();
        let y = s.element(&[6, 1]).unwrap();
        assert!((&x + &y).is_zero());
        assert_eq!(&x + &s.zero(), x);
        assert_eq!(&x - &x, s.zero());
    }

    #[test]
    fn scalar_multiplication() {
        let s = shape31();
        let x = s.element(&[2, 1]).unwrap();
        assert_eq!(x.scalar_mul(2).coords(), &[4, 0]);
        assert_eq!(x.scalar_mul(1), x);
        assert_eq!(x.scalar_mul(-1), -&x);
        assert_eq!(x.mul_p_pow(1), x.scalar_mul(2));
        assert_eq!(x.mul_p_pow(5), s.zero());
    }

    #[test]
    fn checked_add_rejects_shape_mismatch() {
        let a = shape31().zero();
        let b = ModuleShape::new(2, &[2]).unwrap().zero();
        assert!(a.checked_add(&b).is_err());
    }

    /// Brute-force exponent: smallest k with p^k x = 0.
    fn exponent_by_scan(x: &Element) -> u32 {
        let mut k = 0;
        let mut y = x.clone();
        while !y.is_zero() {
            y = y.mul_p_pow(1);
            k += 1;
        }
        k
    }

    /// Brute-force height: largest s with x in p^s M, by scanning all
    /// preimages.
    fn height_by_scan(x: &Element) -> ExtNat {
        if x.is_zero() {
            return ExtNat::Infinity;
        }
        let mut best = 0;
        for s in 0..=x.shape().top_exponent() {
            if x.shape().elements().any(|y| &y.mul_p_pow(s) == x) {
                best = s;
            }
        }
        ExtNat::Finite(best)
    }

    #[test]
    fn exponent_examples() {
        let s = shape31();
        assert_eq!(s.zero().exponent(), 0);
        let x = s.element(&[2, 1]).unwrap();
        assert_eq!(exponent_by_scan(&x), 2);
        assert_eq!(x.exponent(), 2);
        assert_eq!(s.element(&[1, 0]).unwrap().exponent(), 3);
    }

    #[test]
    fn height_examples() {
        let s = shape31();
        assert_eq!(s.zero().height(), ExtNat::Infinity);
        let x = s.element(&[4, 0]).unwrap();
        assert_eq!(height_by_scan(&x), ExtNat::Finite(2));
        assert_eq!(x.height(), ExtNat::Finite(2));
        assert_eq!(s.element(&[0, 1]).unwrap().height(), ExtNat::Finite(0));
    }

    #[test]
    fn heights_and_exponents_match_scans_exhaustively() {
        for shape in [
            ModuleShape::new(2, &[3, 1]).unwrap(),
            ModuleShape::new(2, &[2, 2]).unwrap(),
            ModuleShape::new(3, &[2, 1]).unwrap(),
        ] {
            for x in shape.elements() {
                assert_eq!(x.exponent(), exponent_by_scan(&x), "exponent of {x}");
                assert_eq!(x.height(), height_by_scan(&x), "height of {x}");
            }
        }
    }

    #[test]
    fn g_value_examples() {
        let s = shape31();
        assert_eq!(s.element(&[2, 1]).unwrap().g_value(), ExtNat::Finite(2));
        assert_eq!(s.element(&[4, 0]).unwrap().g_value(), ExtNat::Finite(3));
        assert_eq!(s.zero().g_value(), ExtNat::Infinity);
    }

    #[test]
    fn regularity_examples() {
        let s = shape31();
        assert!(s.element(&[2, 0]).unwrap().is_regular());
        assert!(!s.element(&[2, 1]).unwrap().is_regular());
        // Exponent-1 elements are regular vacuously.
        assert!(s.element(&[0, 1]).unwrap().is_regular());
        assert!(s.element(&[4, 1]).unwrap().is_regular());
        assert!(s.zero().is_regular());
    }

    /// Regularity by the definition, checking every intermediate step.
    fn regular_by_definition(x: &Element) -> bool {
        if x.is_zero() {
            return true;
        }
        let s = x.height();
        (1..x.exponent()).all(|j| x.mul_p_pow(j).height() == s + j)
    }

    #[test]
    fn last_step_shortcut_matches_definition() {
        for shape in [
            ModuleShape::new(2, &[3, 1]).unwrap(),
            ModuleShape::new(2, &[4, 2]).unwrap(),
            ModuleShape::new(3, &[3, 1]).unwrap(),
        ] {
            for x in shape.elements() {
                assert_eq!(x.is_regular(), regular_by_definition(&x), "at {x}");
            }
        }
    }

    #[test]
    fn profile_examples() {
        let s = shape31();
        let p = s.element(&[2, 1]).unwrap().profile().unwrap();
        assert_eq!((p.s, p.k, p.s1), (0, 2, 1));
        let p = s.element(&[2, 0]).unwrap().profile().unwrap();
        assert_eq!((p.s, p.k, p.s1), (1, 2, 1));
        let p = s.element(&[0, 1]).unwrap().profile().unwrap();
        assert_eq!((p.s, p.k, p.s1), (0, 1, 0));
        assert_eq!(s.zero().profile(), Err(Error::ZeroElement));
    }

    #[test]
    fn profile_bounds_hold_everywhere() {
        let shape = ModuleShape::new(2, &[3, 2, 1]).unwrap();
        for x in shape.elements().filter(|x| !x.is_zero()) {
            let p = x.profile().unwrap();
            assert!(p.s1 >= p.s);
            assert_eq!(x.is_regular(), p.s1 == p.s);
            // Bounded order: finite heights stay below e1.
            assert!(x.height() < ExtNat::Finite(shape.top_exponent()));
        }
    }

    #[test]
    fn element_iteration_is_lexicographic() {
        let s = ModuleShape::new(2, &[2, 1]).unwrap();
        let all: Vec<Element> = s.elements().collect();
        assert_eq!(all.len(), 8);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert!(all[0].is_zero());
    }
}
