//! Brute-force reference implementations used to cross-validate the fast
//! paths.
//!
//! Everything here works by materializing element sets: membership is set
//! membership, submodule sums are pairwise sums of closures, heights come
//! from scanning all p^s-multiples of the whole module, and the regularity
//! checkers compare both sides of their defining set identities literally.
//! Nothing is shared with the canonical-form machinery beyond the element
//! value type, so agreement between the two layers is meaningful evidence.
//! Runtime is allowed to be exponential in the module order.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::module::{Element, ModuleShape};
use crate::regularity::{BaerDecomposition, BaerPart, Certificate, RegularityReport};
use crate::submodule::Submodule;
use crate::valuation::ExtNat;

/// All elements of a submodule by additive closure of its generators,
/// in lexicographic order.
pub fn element_closure(w: &Submodule) -> Vec<Element> {
    let generators = w.canonical_generators();
    let zero = w.shape().zero();
    let mut set: BTreeSet<Element> = BTreeSet::new();
    set.insert(zero.clone());
    let mut frontier = vec![zero];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &generators {
                let sum = x + g;
                if set.insert(sum.clone()) {
                    next.push(sum);
                }
            }
        }
        frontier = next;
    }
    set.into_iter().collect()
}

/// Membership by closure.
pub fn oracle_contains(w: &Submodule, x: &Element) -> bool {
    element_closure(w).binary_search(x).is_ok()
}

/// The element set of A + B: pairwise sums of the two closures.
pub fn oracle_sum(a: &Submodule, b: &Submodule, cap: u64) -> Result<Vec<Element>> {
    check_cap(a.order().saturating_mul(b.order()), cap)?;
    let mut out: BTreeSet<Element> = BTreeSet::new();
    for x in element_closure(a) {
        for y in element_closure(b) {
            out.insert(&x + &y);
        }
    }
    Ok(out.into_iter().collect())
}

/// The element set of A ∩ B.
pub fn oracle_intersect(a: &Submodule, b: &Submodule, cap: u64) -> Result<Vec<Element>> {
    check_cap(a.order().max(b.order()), cap)?;
    let set_b: BTreeSet<Element> = element_closure(b).into_iter().collect();
    Ok(element_closure(a)
        .into_iter()
        .filter(|x| set_b.contains(x))
        .collect())
}

fn check_cap(required: u64, cap: u64) -> Result<()> {
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    Ok(())
}

/// Heights of every element of the module, computed by marking all
/// p^s-multiples rather than by coordinate valuations.
pub struct HeightTable {
    map: HashMap<Vec<u64>, u32>,
}

impl HeightTable {
    pub fn new(shape: &ModuleShape) -> HeightTable {
        let mut map: HashMap<Vec<u64>, u32> = HashMap::new();
        for s in 0..=shape.top_exponent() {
            for y in shape.elements() {
                let multiple = y.mul_p_pow(s);
                let entry = map.entry(multiple.coords().to_vec()).or_insert(0);
                *entry = (*entry).max(s);
            }
        }
        HeightTable { map }
    }

    pub fn height(&self, x: &Element) -> ExtNat {
        if x.is_zero() {
            return ExtNat::Infinity;
        }
        ExtNat::Finite(self.map[x.coords()])
    }
}

/// Smallest k with p^k x = 0, by repeated multiplication.
pub fn oracle_exponent(x: &Element) -> u32 {
    let mut k = 0;
    let mut current = x.clone();
    while !current.is_zero() {
        current = current.mul_p_pow(1);
        k += 1;
    }
    k
}

/// Regularity by the definition, checking every step of the height chain.
pub fn oracle_is_regular(table: &HeightTable, x: &Element) -> bool {
    if x.is_zero() {
        return true;
    }
    let base = table.height(x);
    (1..oracle_exponent(x)).all(|j| table.height(&x.mul_p_pow(j)) == base + j)
}

/// The set identity p^n W ∩ p^(n+r) M = p^n (W ∩ p^r M), checked by
/// materializing both sides for every pair in the truncation box.
pub fn oracle_check_k(w: &Submodule, cap: u64) -> Result<RegularityReport> {
    let shape = w.shape();
    check_cap(shape.order(), cap)?;
    let e1 = shape.top_exponent();
    let whole: Vec<Element> = shape.elements().collect();
    // p^t M as an element set, for every power in the box.
    let scaled_module: Vec<BTreeSet<Element>> = (0..=e1)
        .map(|t| whole.iter().map(|y| y.mul_p_pow(t)).collect())
        .collect();
    let w_set = element_closure(w);
    for n in 0..=e1 {
        for r in 0..=(e1 - n) {
            let lhs: BTreeSet<Element> = w_set
                .iter()
                .map(|u| u.mul_p_pow(n))
                .filter(|x| scaled_module[(n + r) as usize].contains(x))
                .collect();
            let rhs: BTreeSet<Element> = w_set
                .iter()
                .filter(|u| scaled_module[r as usize].contains(u))
                .map(|u| u.mul_p_pow(n))
                .collect();
            if lhs != rhs {
                let witness = w_set
                    .iter()
                    .find(|u| {
                        let image = u.mul_p_pow(n);
                        lhs.contains(&image) && !rhs.contains(&image)
                    })
                    .expect("some element maps into the difference")
                    .clone();
                return Ok(RegularityReport {
                    verdict: false,
                    certificate: Some(Certificate::K { n, r, witness }),
                });
            }
        }
    }
    Ok(RegularityReport {
        verdict: true,
        certificate: None,
    })
}

/// The layer identity of the third regularity condition, checked on
/// materialized element sets.
pub fn oracle_check_fpp(w: &Submodule, cap: u64) -> Result<RegularityReport> {
    let shape = w.shape();
    check_cap(shape.order(), cap)?;
    let e1 = shape.top_exponent();
    let whole: Vec<Element> = shape.elements().collect();
    let layer = |s: u32, k: u32| -> Vec<Element> {
        whole
            .iter()
            .filter(|x| x.mul_p_pow(k).is_zero())
            .filter(|x| whole.iter().any(|y| &y.mul_p_pow(s) == *x))
            .cloned()
            .collect()
    };
    let w_set: BTreeSet<Element> = element_closure(w).into_iter().collect();
    for s in 0..=e1 {
        for k in 1..=e1 {
            let upper = layer(s + 1, k);
            let lower = layer(s, k - 1);
            let mut left: BTreeSet<Element> = BTreeSet::new();
            for a in upper.iter().filter(|a| w_set.contains(a)) {
                for b in lower.iter().filter(|b| w_set.contains(b)) {
                    left.insert(a + b);
                }
            }
            let mut layer_sum: BTreeSet<Element> = BTreeSet::new();
            for a in &upper {
                for b in &lower {
                    layer_sum.insert(a + b);
                }
            }
            let right: BTreeSet<Element> = w_set
                .iter()
                .filter(|x| layer_sum.contains(x))
                .cloned()
                .collect();
            if left != right {
                let witness = right
                    .iter()
                    .find(|x| !left.contains(x))
                    .expect("left is a proper subset")
                    .clone();
                return Ok(RegularityReport {
                    verdict: false,
                    certificate: Some(Certificate::Fpp { s, k, witness }),
                });
            }
        }
    }
    Ok(RegularityReport {
        verdict: true,
        certificate: None,
    })
}

/// Exhaustive search for a decomposition of x into regular elements of W
/// with strictly decreasing exponents and heights. Candidates are tried by
/// decreasing g-value, then lexicographically.
pub fn oracle_decompose(w: &Submodule, x: &Element, cap: u64) -> Result<Option<BaerDecomposition>> {
    check_cap(w.order(), cap)?;
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    let shape = w.shape();
    let table = HeightTable::new(shape);
    if !oracle_contains(w, x) {
        return Err(Error::NotInSubmodule);
    }
    let mut regulars: Vec<Element> = element_closure(w)
        .into_iter()
        .filter(|y| !y.is_zero() && oracle_is_regular(&table, y))
        .collect();
    regulars.sort_by(|a, b| {
        let ga = table.height(a) + oracle_exponent(a);
        let gb = table.height(b) + oracle_exponent(b);
        gb.cmp(&ga).then_with(|| a.cmp(b))
    });

    fn search(
        table: &HeightTable,
        regulars: &[Element],
        remaining: &Element,
        exponent_bound: u32,
        height_bound: ExtNat,
    ) -> Option<Vec<BaerPart>> {
        let need_exponent = oracle_exponent(remaining);
        let floor = table.height(remaining);
        for y in regulars {
            let e = oracle_exponent(y);
            if e != need_exponent || e >= exponent_bound {
                continue;
            }
            let h = table.height(y);
            if h >= height_bound || h < floor {
                continue;
            }
            let part = BaerPart {
                element: y.clone(),
                exponent: e,
                height: h.finite().expect("regular candidates are nonzero"),
            };
            let rest = remaining - y;
            if rest.is_zero() {
                return Some(vec![part]);
            }
            if let Some(tail) = search(table, regulars, &rest, e, h) {
                let mut parts = vec![part];
                parts.extend(tail);
                return Some(parts);
            }
        }
        None
    }

    let found = search(
        &table,
        &regulars,
        x,
        shape.top_exponent() + 1,
        ExtNat::Infinity,
    );
    Ok(found.map(BaerDecomposition::from_parts))
}

/// Decomposability of every nonzero element, exhaustively.
pub fn oracle_check_b(w: &Submodule, cap: u64) -> Result<RegularityReport> {
    for x in element_closure(w) {
        if x.is_zero() {
            continue;
        }
        if oracle_decompose(w, &x, cap)?.is_none() {
            return Ok(RegularityReport {
                verdict: false,
                certificate: Some(Certificate::B { witness: x }),
            });
        }
    }
    Ok(RegularityReport {
        verdict: true,
        certificate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::{baer_signature, check_fpp, check_k};

    fn el(shape: &ModuleShape, coords: &[i64]) -> Element {
        shape.element(coords).unwrap()
    }

    #[test]
    fn closure_matches_fast_enumeration() {
        let s = ModuleShape::new(2, &[3, 1]).unwrap();
        for w in Submodule::enumerate_all(&s, 1 << 10).unwrap() {
            assert_eq!(element_closure(&w), w.enumerate_elements(1 << 10).unwrap());
        }
    }

    #[test]
    fn height_table_matches_coordinate_heights() {
        for shape in [
            ModuleShape::new(2, &[3, 1]).unwrap(),
            ModuleShape::new(3, &[2, 1]).unwrap(),
        ] {
            let table = HeightTable::new(&shape);
            for x in shape.elements() {
                assert_eq!(table.height(&x), x.height(), "at {x}");
                assert_eq!(oracle_exponent(&x), x.exponent(), "at {x}");
                assert_eq!(oracle_is_regular(&table, &x), x.is_regular(), "at {x}");
            }
        }
    }

    #[test]
    fn oracle_agrees_on_canonical_counterexample() {
        let s = ModuleShape::new(2, &[3, 1]).unwrap();
        let w = Submodule::span(&s, &[el(&s, &[2, 1])]);
        let k = oracle_check_k(&w, 1 << 10).unwrap();
        assert_eq!(
            k.certificate,
            Some(Certificate::K {
                n: 1,
                r: 1,
                witness: el(&s, &[2, 1])
            })
        );
        let f = oracle_check_fpp(&w, 1 << 10).unwrap();
        assert_eq!(
            f.certificate,
            Some(Certificate::Fpp {
                s: 0,
                k: 2,
                witness: el(&s, &[2, 1])
            })
        );
        assert!(oracle_check_k(&Submodule::full(&s), 1 << 10).unwrap().verdict);
        assert!(oracle_check_k(&Submodule::zero(&s), 1 << 10).unwrap().verdict);
    }

    #[test]
    fn oracle_decompose_examples() {
        let s = ModuleShape::new(2, &[3, 1]).unwrap();
        let full = Submodule::full(&s);
        let x = el(&s, &[2, 1]);
        let d = oracle_decompose(&full, &x, 1 << 10).unwrap().unwrap();
        assert!(d.is_valid_in(&full));
        assert_eq!(d.sum(), x);
        assert_eq!(d.pairs(), baer_signature(&x).unwrap().pairs);

        let w = Submodule::span(&s, std::slice::from_ref(&x));
        assert_eq!(oracle_decompose(&w, &x, 1 << 10).unwrap(), None);

        let regular = el(&s, &[2, 0]);
        let d = oracle_decompose(&full, &regular, 1 << 10).unwrap().unwrap();
        assert_eq!(d.parts().len(), 1);
    }

    #[test]
    fn verdicts_match_fast_paths_on_a_shape() {
        let s = ModuleShape::new(3, &[2, 1]).unwrap();
        for w in Submodule::enumerate_all(&s, 1 << 10).unwrap() {
            assert_eq!(
                oracle_check_k(&w, 1 << 10).unwrap().verdict,
                check_k(&w).verdict,
                "K on {w:?}"
            );
            assert_eq!(
                oracle_check_fpp(&w, 1 << 10).unwrap().verdict,
                check_fpp(&w).verdict,
                "FPP on {w:?}"
            );
        }
    }

    #[test]
    fn set_operations_match_fast_paths() {
        let s = ModuleShape::new(2, &[2, 1]).unwrap();
        let subs = Submodule::enumerate_all(&s, 1 << 10).unwrap();
        for a in &subs {
            for b in &subs {
                assert_eq!(
                    oracle_sum(a, b, 1 << 12).unwrap(),
                    a.sum(b).enumerate_elements(1 << 10).unwrap()
                );
                assert_eq!(
                    oracle_intersect(a, b, 1 << 12).unwrap(),
                    a.intersect(b).enumerate_elements(1 << 10).unwrap()
                );
            }
        }
    }

    #[test]
    fn caps_are_respected() {
        let s = ModuleShape::new(2, &[3, 1]).unwrap();
        let w = Submodule::full(&s);
        assert!(matches!(
            oracle_check_k(&w, 4),
            Err(Error::CapExceeded { .. })
        ));
    }
}
