//! Submodules of a fixed ambient module, held in a canonical form.
//!
//! Each coordinate aᵢ of an element embeds into Z/p^e1 as aᵢ · p^(e1−eᵢ);
//! a submodule is then the row span of its embedded generators and is
//! stored as the Howell normal form of that span. Two submodules are equal
//! exactly when their canonical matrices are identical, which makes
//! equality, hashing and deduplication during enumeration trivial.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::howell::HowellContext;
use crate::module::{Element, ModuleShape};
use crate::valuation::ExtNat;

/// Default cap for enumeration entry points. Callers that genuinely need
/// more pass their own bound.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 16;

/// A submodule W of a fixed module, represented by the Howell canonical
/// form of its embedded generator matrix. Immutable after construction.
#[derive(Clone)]
pub struct Submodule {
    shape: ModuleShape,
    canon: Vec<Vec<u64>>,
    order: u64,
}

impl Submodule {
    fn ctx(shape: &ModuleShape) -> HowellContext {
        HowellContext::new(shape.prime(), shape.top_exponent())
    }

    /// Scale factor p^(e1 − eᵢ) for embedding coordinate i.
    fn embed_factor(shape: &ModuleShape, i: usize) -> u64 {
        shape
            .prime()
            .checked_pow(shape.top_exponent() - shape.exponents()[i])
            .expect("factor fits in u64")
    }

    fn embed(shape: &ModuleShape, x: &Element) -> Vec<u64> {
        x.coords()
            .iter()
            .enumerate()
            .map(|(i, &a)| a * Self::embed_factor(shape, i))
            .collect()
    }

    fn unembed(shape: &ModuleShape, row: &[u64]) -> Element {
        let coords = row
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let f = Self::embed_factor(shape, i);
                debug_assert_eq!(b % f, 0, "canonical row lies in the embedded module");
                b / f
            })
            .collect();
        Element::from_reduced(shape.clone(), coords)
    }

    fn from_rows(shape: ModuleShape, rows: Vec<Vec<u64>>) -> Submodule {
        let ctx = Self::ctx(&shape);
        let canon = ctx.howellize(rows, shape.rank());
        let order = ctx.span_order(&canon);
        Submodule { shape, canon, order }
    }

    /// The zero submodule.
    pub fn zero(shape: &ModuleShape) -> Submodule {
        Submodule {
            shape: shape.clone(),
            canon: Vec::new(),
            order: 1,
        }
    }

    /// The whole module as a submodule of itself.
    pub fn full(shape: &ModuleShape) -> Submodule {
        let gens: Vec<Element> = (0..shape.rank()).map(|i| shape.standard_generator(i)).collect();
        Self::span(shape, &gens)
    }

    /// The submodule spanned by the given elements. An empty list spans the
    /// zero submodule. Panics if a generator has a different shape.
    pub fn span(shape: &ModuleShape, generators: &[Element]) -> Submodule {
        let rows = generators
            .iter()
            .map(|g| {
                assert_eq!(g.shape(), shape, "generator shape differs");
                Self::embed(shape, g)
            })
            .collect();
        Self::from_rows(shape.clone(), rows)
    }

    /// The span of this submodule together with one extra element.
    pub fn span_with(&self, x: &Element) -> Submodule {
        assert_eq!(x.shape(), &self.shape, "element shape differs");
        let mut rows = self.canon.clone();
        rows.push(Self::embed(&self.shape, x));
        Self::from_rows(self.shape.clone(), rows)
    }

    pub fn shape(&self) -> &ModuleShape {
        &self.shape
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.canon.is_empty()
    }

    /// The canonical generators (the rows of the Howell form, pulled back to
    /// module coordinates). They span the submodule.
    pub fn canonical_generators(&self) -> Vec<Element> {
        self.canon
            .iter()
            .map(|row| Self::unembed(&self.shape, row))
            .collect()
    }

    /// Membership, decided by reduction against the canonical form.
    /// Panics on shape mismatch.
    pub fn contains(&self, x: &Element) -> bool {
        assert_eq!(x.shape(), &self.shape, "element shape differs");
        Self::ctx(&self.shape).is_member(&self.canon, &Self::embed(&self.shape, x))
    }

    pub fn is_subset(&self, other: &Submodule) -> bool {
        assert_eq!(self.shape, other.shape, "submodule shapes differ");
        let ctx = Self::ctx(&self.shape);
        self.canon.iter().all(|row| ctx.is_member(&other.canon, row))
    }

    /// The sum A + B.
    pub fn sum(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.shape, other.shape, "submodule shapes differ");
        let mut rows = self.canon.clone();
        rows.extend(other.canon.iter().cloned());
        Self::from_rows(self.shape.clone(), rows)
    }

    /// The intersection A ∩ B, by the block trick: Howell-reduce the rows
    /// [a | a] for a in A and [b | 0] for b in B; the right halves of the
    /// rows whose left half vanished span exactly A ∩ B, because the span
    /// property guarantees those rows generate every combination with zero
    /// left block.
    pub fn intersect(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.shape, other.shape, "submodule shapes differ");
        let n = self.shape.rank();
        let ctx = Self::ctx(&self.shape);
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(self.canon.len() + other.canon.len());
        for a in &self.canon {
            let mut row = a.clone();
            row.extend_from_slice(a);
            rows.push(row);
        }
        for b in &other.canon {
            let mut row = b.clone();
            row.extend(std::iter::repeat_n(0, n));
            rows.push(row);
        }
        let big = ctx.howellize(rows, 2 * n);
        let halves = big
            .into_iter()
            .filter(|row| row[..n].iter().all(|&x| x == 0))
            .map(|row| row[n..].to_vec())
            .collect();
        Self::from_rows(self.shape.clone(), halves)
    }

    /// p^n W.
    pub fn scale(&self, n: u32) -> Submodule {
        let ctx = Self::ctx(&self.shape);
        let factor = if n >= self.shape.top_exponent() {
            0
        } else {
            ctx.p_pow(n)
        };
        let rows = self
            .canon
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&a| ((a as u128 * factor as u128) % ctx.modulus as u128) as u64)
                    .collect()
            })
            .collect();
        Self::from_rows(self.shape.clone(), rows)
    }

    /// The p^k-torsion layer M[p^k] = { x | p^k x = 0 }.
    pub fn torsion_layer(shape: &ModuleShape, k: u32) -> Submodule {
        let gens: Vec<Element> = (0..shape.rank())
            .map(|i| {
                let e = shape.exponents()[i];
                shape.standard_generator(i).mul_p_pow(e.saturating_sub(k))
            })
            .collect();
        Self::span(shape, &gens)
    }

    /// The layer p^s M ∩ M[p^k]: elements of height at least s and exponent
    /// at most k.
    pub fn layer(shape: &ModuleShape, s: u32, k: u32) -> Submodule {
        Self::full(shape).scale(s).intersect(&Self::torsion_layer(shape, k))
    }

    /// Largest s with x ∈ p^s W, infinite for x = 0; errors when x ∉ W.
    pub fn height_in(&self, x: &Element) -> Result<ExtNat> {
        if !self.contains(x) {
            return Err(Error::NotInSubmodule);
        }
        if x.is_zero() {
            return Ok(ExtNat::Infinity);
        }
        let mut height = 0;
        for s in 1..self.shape.top_exponent() {
            if self.scale(s).contains(x) {
                height = s;
            } else {
                break;
            }
        }
        Ok(ExtNat::Finite(height))
    }

    /// Finds x̃ ∈ W with p^n x̃ = p^n target and height ≥ the requested
    /// minimum, choosing a solution of maximal height (ties broken by
    /// lexicographically smallest coordinates). The solution set is the
    /// coset target + (W ∩ M[p^n]).
    pub fn solve_coset(&self, query: &CosetQuery) -> Result<Option<Element>> {
        if !self.contains(&query.target) {
            return Err(Error::NotInSubmodule);
        }
        let kernel = self.intersect(&Self::torsion_layer(&self.shape, query.power));
        let mut best: Option<(ExtNat, Element)> = None;
        for k in kernel.elements_unchecked() {
            let candidate = &query.target + &k;
            let h = candidate.height();
            if h < ExtNat::Finite(query.min_height) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bh, bc)) => h > *bh || (h == *bh && candidate < *bc),
            };
            if better {
                best = Some((h, candidate));
            }
        }
        Ok(best.map(|(_, c)| c))
    }

    /// All elements in lexicographic coordinate order; errors when the
    /// order exceeds `cap`.
    pub fn enumerate_elements(&self, cap: u64) -> Result<Vec<Element>> {
        if self.order > cap {
            return Err(Error::CapExceeded {
                required: self.order,
                cap,
            });
        }
        Ok(self.elements_unchecked())
    }

    pub(crate) fn elements_unchecked(&self) -> Vec<Element> {
        let ctx = Self::ctx(&self.shape);
        let mut rows = ctx.span_elements(&self.canon, self.shape.rank());
        debug_assert_eq!(rows.len() as u64, self.order);
        rows.sort_unstable();
        rows.dedup();
        debug_assert_eq!(rows.len() as u64, self.order);
        rows.into_iter()
            .map(|row| Self::unembed(&self.shape, &row))
            .collect()
    }

    /// Every submodule of the ambient module, each exactly once, sorted by
    /// canonical form. Breadth-first closure: grow by one generator at a
    /// time and deduplicate canonically. Errors when order(M) exceeds `cap`.
    pub fn enumerate_all(shape: &ModuleShape, cap: u64) -> Result<Vec<Submodule>> {
        if shape.order() > cap {
            return Err(Error::CapExceeded {
                required: shape.order(),
                cap,
            });
        }
        let elements: Vec<Element> = shape.elements().collect();
        let zero = Self::zero(shape);
        let mut seen: HashSet<Vec<Vec<u64>>> = HashSet::new();
        seen.insert(zero.canon.clone());
        let mut queue = VecDeque::from([zero.clone()]);
        let mut out = vec![zero];
        while let Some(current) = queue.pop_front() {
            for x in &elements {
                if x.is_zero() || current.contains(x) {
                    continue;
                }
                let grown = current.span_with(x);
                if seen.insert(grown.canon.clone()) {
                    out.push(grown.clone());
                    queue.push_back(grown);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

impl PartialEq for Submodule {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.canon == other.canon
    }
}

impl Eq for Submodule {}

impl std::hash::Hash for Submodule {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.shape.hash(state);
        self.canon.hash(state);
    }
}

impl PartialOrd for Submodule {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on the canonical matrix; the deterministic order used for
/// reports.
impl Ord for Submodule {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.shape.prime(), self.shape.exponents(), &self.canon).cmp(&(
            other.shape.prime(),
            other.shape.exponents(),
            &other.canon,
        ))
    }
}

impl fmt::Debug for Submodule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Submodule(order {}, gens ", self.order)?;
        f.debug_list().entries(self.canonical_generators()).finish()?;
        write!(f, ")")
    }
}

/// A named layer M^s_k = p^s M ∩ M[p^k] with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmoduleLayer {
    pub s: u32,
    pub k: u32,
    pub value: Submodule,
}

impl SubmoduleLayer {
    pub fn new(shape: &ModuleShape, s: u32, k: u32) -> SubmoduleLayer {
        SubmoduleLayer {
            s,
            k,
            value: Submodule::layer(shape, s, k),
        }
    }
}

/// The request solved by [`Submodule::solve_coset`]: an element x̃ of the
/// submodule with p^power · x̃ = p^power · target and height ≥ min_height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetQuery {
    pub target: Element,
    pub power: u32,
    pub min_height: u32,
}
