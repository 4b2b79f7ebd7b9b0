//! Simultaneous bases: a direct-sum basis of the ambient module whose
//! p-power multiples form a direct-sum basis of a given submodule. One
//! exists exactly for regular submodules, so [`find_simultaneous_basis`]
//! first runs the element-wise regularity checker and then constructs a
//! basis.
//!
//! Construction outline. In any simultaneous basis the nonzero pieces
//! p^dᵢ xᵢ of W are regular elements whose height-plus-exponent sum equals
//! the exponent eᵢ of their slot, so W splits as a direct sum of cyclics
//! generated by regular elements. The search peels such pieces off W
//! (largest g first, preferring large exponents), then lifts each piece π
//! through multiplication by p^h(π) — any lift generates a pure cyclic
//! summand — and finally fills the untouched slots with elements of the
//! right exponent, keeping the partial sum direct throughout. Every stage
//! backtracks; a global node budget turns pathological searches into an
//! error instead of a hang.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::module::{Element, ModuleShape};
use crate::regularity::check_k;
use crate::submodule::Submodule;
use crate::valuation::ExtNat;

/// Node budget for the backtracking search; generous for everything at
/// enumeration scale.
const SEARCH_NODES: u64 = 4_000_000;

/// A basis x₁, …, xₙ of the ambient module together with depths dᵢ such
/// that W = ⟨p^d₁ x₁⟩ ⊕ … ⊕ ⟨p^dₙ xₙ⟩. A depth of eᵢ makes slot i
/// contribute the zero summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimultaneousBasis {
    pub basis: Vec<Element>,
    pub depths: Vec<u32>,
}

/// Checks both defining properties by explicit span and order computations:
/// the basis elements have the shape's exponents and span the whole module
/// (which forces the sum to be direct), and the depth-scaled basis spans
/// exactly `w`.
pub fn verify_simultaneous_basis(w: &Submodule, candidate: &SimultaneousBasis) -> bool {
    let shape = w.shape();
    let n = shape.rank();
    if candidate.basis.len() != n || candidate.depths.len() != n {
        return false;
    }
    for (i, x) in candidate.basis.iter().enumerate() {
        if x.shape() != shape
            || x.exponent() != shape.exponents()[i]
            || candidate.depths[i] > shape.exponents()[i]
        {
            return false;
        }
    }
    if Submodule::span(shape, &candidate.basis) != Submodule::full(shape) {
        return false;
    }
    let scaled: Vec<Element> = candidate
        .basis
        .iter()
        .zip(&candidate.depths)
        .map(|(x, &d)| x.mul_p_pow(d))
        .collect();
    Submodule::span(shape, &scaled) == *w
}

/// Finds a simultaneous basis for `w` when one exists, `None` otherwise.
/// Errors when order(M) exceeds `cap` or the search budget runs out.
pub fn find_simultaneous_basis(w: &Submodule, cap: u64) -> Result<Option<SimultaneousBasis>> {
    let shape = w.shape();
    if shape.order() > cap {
        return Err(Error::CapExceeded {
            required: shape.order(),
            cap,
        });
    }
    if !check_k(w).verdict {
        return Ok(None);
    }
    let mut search = Search {
        shape: shape.clone(),
        by_exponent: Vec::new(),
        budget: SEARCH_NODES,
    };
    let mut pieces = Vec::new();
    match search.peel(w, &mut pieces)? {
        Some(found) => {
            debug_assert!(verify_simultaneous_basis(w, &found));
            Ok(Some(found))
        }
        // The regularity check passed, so a basis exists; an exhausted
        // search means the construction missed it, which we refuse to
        // silently report as "none exists".
        None => Err(Error::SearchBudget),
    }
}

struct Search {
    shape: ModuleShape,
    /// Module elements grouped by exponent, built lazily for slot filling.
    by_exponent: Vec<Vec<Element>>,
    budget: u64,
}

impl Search {
    fn spend(&mut self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::SearchBudget);
        }
        self.budget -= 1;
        Ok(())
    }

    /// Splits the remainder of W into regular cyclic pieces and hands the
    /// complete piece list to `realize`. Backtracks over the choice of
    /// piece and of complement.
    fn peel(&mut self, rem: &Submodule, pieces: &mut Vec<Element>) -> Result<Option<SimultaneousBasis>> {
        self.spend()?;
        if rem.is_zero() {
            return self.realize(pieces);
        }
        let members = rem.elements_unchecked();
        let max_g = members
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| x.g_value())
            .max()
            .expect("nonzero submodule");
        let mut candidates: Vec<Element> = members
            .iter()
            .filter(|x| !x.is_zero() && x.g_value() == max_g && x.is_regular())
            .cloned()
            .collect();
        candidates.sort_by(|a, b| b.exponent().cmp(&a.exponent()).then_with(|| a.cmp(b)));
        for piece in candidates {
            let cyclic = Submodule::span(&self.shape, std::slice::from_ref(&piece));
            let greedy = self.greedy_complement(rem, &cyclic)?;
            if let Some(complement) = &greedy {
                pieces.push(piece.clone());
                let found = self.peel(complement, pieces)?;
                pieces.pop();
                if found.is_some() {
                    return Ok(found);
                }
            }
            for complement in self.all_complements(rem, &cyclic)? {
                if greedy.as_ref() == Some(&complement) {
                    continue;
                }
                pieces.push(piece.clone());
                let found = self.peel(&complement, pieces)?;
                pieces.pop();
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(None)
    }

    /// First-fit complement of the cyclic submodule `a` inside `v`: grow a
    /// disjoint submodule until it reaches order |v| / |a| — the sum is
    /// then automatically direct and exhausts v.
    fn greedy_complement(&mut self, v: &Submodule, a: &Submodule) -> Result<Option<Submodule>> {
        let target = v.order() / a.order();
        let mut current = Submodule::zero(&self.shape);
        if target == 1 {
            return Ok(Some(current));
        }
        for x in v.elements_unchecked() {
            if x.is_zero() || current.contains(&x) {
                continue;
            }
            self.spend()?;
            let grown = current.span_with(&x);
            if grown.order() <= target && grown.intersect(a).is_zero() {
                current = grown;
                if current.order() == target {
                    return Ok(Some(current));
                }
            }
        }
        Ok(None)
    }

    /// Every complement of `a` in `v`, deduplicated and sorted. Only
    /// reached when the greedy complement led nowhere.
    fn all_complements(&mut self, v: &Submodule, a: &Submodule) -> Result<Vec<Submodule>> {
        let target = v.order() / a.order();
        let members = v.elements_unchecked();
        let mut seen: HashSet<Submodule> = HashSet::new();
        let mut found: Vec<Submodule> = Vec::new();
        let mut stack = vec![(Submodule::zero(&self.shape), 0usize)];
        while let Some((current, start)) = stack.pop() {
            if current.order() == target {
                found.push(current);
                continue;
            }
            for (i, x) in members.iter().enumerate().skip(start) {
                if x.is_zero() || current.contains(x) {
                    continue;
                }
                self.spend()?;
                let grown = current.span_with(x);
                if grown.order() <= target
                    && grown.intersect(a).is_zero()
                    && seen.insert(grown.clone())
                {
                    stack.push((grown, i + 1));
                }
            }
        }
        found.sort_unstable();
        found.dedup();
        Ok(found)
    }

    /// Turns a complete piece list into a basis: assign each piece to a
    /// slot with matching exponent, lift it, and fill the remaining slots,
    /// keeping the partial span direct at every step.
    fn realize(&mut self, pieces: &[Element]) -> Result<Option<SimultaneousBasis>> {
        let exponents = self.shape.exponents().to_vec();
        let n = exponents.len();
        let mut slot_piece: Vec<Option<Element>> = vec![None; n];
        for piece in pieces {
            let g = piece
                .g_value()
                .finite()
                .expect("pieces are nonzero");
            let Some(slot) = (0..n).find(|&i| exponents[i] == g && slot_piece[i].is_none()) else {
                return Ok(None);
            };
            slot_piece[slot] = Some(piece.clone());
        }
        let order: Vec<usize> = (0..n)
            .filter(|&i| slot_piece[i].is_some())
            .chain((0..n).filter(|&i| slot_piece[i].is_none()))
            .collect();
        if self.by_exponent.is_empty() {
            let top = self.shape.top_exponent() as usize;
            self.by_exponent = vec![Vec::new(); top + 1];
            for x in self.shape.elements() {
                self.by_exponent[x.exponent() as usize].push(x);
            }
        }
        let mut assignment: Vec<Option<(Element, u32)>> = vec![None; n];
        let span = Submodule::zero(&self.shape);
        if self.fill_slots(&order, 0, &slot_piece, span, &mut assignment)? {
            let basis: Vec<Element> = assignment
                .iter()
                .map(|slot| slot.as_ref().expect("all slots filled").0.clone())
                .collect();
            let depths: Vec<u32> = assignment
                .iter()
                .map(|slot| slot.as_ref().expect("all slots filled").1)
                .collect();
            return Ok(Some(SimultaneousBasis { basis, depths }));
        }
        Ok(None)
    }

    fn fill_slots(
        &mut self,
        order: &[usize],
        position: usize,
        slot_piece: &[Option<Element>],
        span: Submodule,
        assignment: &mut Vec<Option<(Element, u32)>>,
    ) -> Result<bool> {
        let Some(&slot) = order.get(position) else {
            debug_assert_eq!(span.order(), self.shape.order());
            return Ok(true);
        };
        let exponent = self.shape.exponents()[slot];
        let slot_order = self.shape.prime().pow(exponent);
        let (candidates, depth) = match &slot_piece[slot] {
            Some(piece) => (self.lifts_of(piece), piece_depth(piece)),
            None => (self.by_exponent[exponent as usize].clone(), exponent),
        };
        for x in candidates {
            self.spend()?;
            debug_assert_eq!(x.exponent(), exponent);
            let grown = span.span_with(&x);
            if grown.order() as u128 != span.order() as u128 * slot_order as u128 {
                continue;
            }
            assignment[slot] = Some((x, depth));
            if self.fill_slots(order, position + 1, slot_piece, grown, assignment)? {
                return Ok(true);
            }
            assignment[slot] = None;
        }
        Ok(false)
    }

    /// All solutions of p^d x = piece where d = h(piece), in lexicographic
    /// order: one particular lift shifted by the p^d-torsion layer. Every
    /// lift has height zero and exponent h + e, and generates a pure cyclic
    /// summand.
    fn lifts_of(&mut self, piece: &Element) -> Vec<Element> {
        let depth = piece_depth(piece);
        let scale = self.shape.prime().pow(depth);
        let base: Vec<i64> = piece.coords().iter().map(|&c| (c / scale) as i64).collect();
        let particular = self.shape.element(&base).expect("lift has valid coordinates");
        debug_assert_eq!(particular.mul_p_pow(depth), *piece);
        let mut lifts: Vec<Element> = Submodule::torsion_layer(&self.shape, depth)
            .elements_unchecked()
            .iter()
            .map(|t| &particular + t)
            .collect();
        lifts.sort_unstable();
        lifts
    }
}

fn piece_depth(piece: &Element) -> u32 {
    match piece.height() {
        ExtNat::Finite(h) => h,
        ExtNat::Infinity => unreachable!("pieces are nonzero"),
    }
}
