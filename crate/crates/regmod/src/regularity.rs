//! Decision procedures for the three equivalent regularity conditions on a
//! submodule, with re-verifiable counterexample certificates.
//!
//! A submodule W is regular when p^n W ∩ p^(n+r) M = p^n (W ∩ p^r M) for
//! all n, r ≥ 0. Three checkers decide this independently:
//!
//! * [`check_k`] works element by element: whenever p^n w has height n + r
//!   there must be a representative of the same p^n-image in W of height r.
//! * [`check_b`] asks every element of W to split into a sum of regular
//!   elements of W with strictly decreasing exponents and heights.
//! * [`check_fpp`] tests a lattice distributivity identity of W against the
//!   layers M^s_k = p^s M ∩ M[p^k].
//!
//! Agreement of the three verdicts on every submodule is the crate's
//! central invariant; the acceptance suite sweeps it exhaustively.

use crate::error::{Error, Result};
use crate::module::{Element, ModuleShape};
use crate::oracle;
use crate::submodule::{CosetQuery, Submodule};
use crate::valuation::ExtNat;

/// One regular summand of a decomposition: the element together with its
/// exponent and height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaerPart {
    pub element: Element,
    pub exponent: u32,
    pub height: u32,
}

impl BaerPart {
    fn of(element: Element) -> BaerPart {
        let exponent = element.exponent();
        let height = element
            .height()
            .finite()
            .expect("decomposition parts are nonzero");
        BaerPart {
            element,
            exponent,
            height,
        }
    }
}

/// A decomposition x = y₁ + … + yₘ into regular elements with strictly
/// decreasing exponents and strictly decreasing heights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaerDecomposition {
    parts: Vec<BaerPart>,
}

impl BaerDecomposition {
    pub fn parts(&self) -> &[BaerPart] {
        &self.parts
    }

    /// The decomposed element, the sum of the parts.
    pub fn sum(&self) -> Element {
        let mut acc = self.parts[0].element.clone();
        for part in &self.parts[1..] {
            acc = &acc + &part.element;
        }
        acc
    }

    /// The (exponent, height) pairs in list order.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        self.parts.iter().map(|p| (p.exponent, p.height)).collect()
    }

    /// Checks every structural invariant: nonempty, parts regular with the
    /// recorded exponent and height, both sequences strictly decreasing,
    /// and the leading exponent and trailing height matching the sum.
    pub fn is_valid(&self) -> bool {
        if self.parts.is_empty() {
            return false;
        }
        for part in &self.parts {
            if part.element.is_zero()
                || !part.element.is_regular()
                || part.element.exponent() != part.exponent
                || part.element.height() != ExtNat::Finite(part.height)
            {
                return false;
            }
        }
        let strictly_decreasing = |values: Vec<u32>| values.windows(2).all(|w| w[0] > w[1]);
        if !strictly_decreasing(self.parts.iter().map(|p| p.exponent).collect())
            || !strictly_decreasing(self.parts.iter().map(|p| p.height).collect())
        {
            return false;
        }
        let total = self.sum();
        self.parts[0].exponent == total.exponent()
            && ExtNat::Finite(self.parts.last().unwrap().height) == total.height()
    }

    /// [`is_valid`](Self::is_valid) plus membership of every part in `w`.
    pub fn is_valid_in(&self, w: &Submodule) -> bool {
        self.is_valid() && self.parts.iter().all(|p| w.contains(&p.element))
    }

    pub(crate) fn from_parts(parts: Vec<BaerPart>) -> BaerDecomposition {
        BaerDecomposition { parts }
    }
}

/// The (exponent, height) pairs any decomposition of a fixed element must
/// carry, read off from the jumps of g along x, px, p²x, …
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaerSignature {
    pub pairs: Vec<(u32, u32)>,
}

/// A concrete, independently checkable witness that a regularity condition
/// fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// p^n · witness has height n + r but no element of W with the same
    /// p^n-image has height r.
    K { n: u32, r: u32, witness: Element },
    /// witness lies in W ∩ (M^(s+1)_k + M^s_(k−1)) but not in
    /// (W ∩ M^(s+1)_k) + (W ∩ M^s_(k−1)).
    Fpp { s: u32, k: u32, witness: Element },
    /// witness admits no decomposition into regular elements of W.
    B { witness: Element },
}

/// Verdict of a regularity checker, with a certificate exactly on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityReport {
    pub verdict: bool,
    pub certificate: Option<Certificate>,
}

impl RegularityReport {
    fn pass() -> RegularityReport {
        RegularityReport {
            verdict: true,
            certificate: None,
        }
    }

    fn fail(certificate: Certificate) -> RegularityReport {
        RegularityReport {
            verdict: false,
            certificate: Some(certificate),
        }
    }
}

/// Decides regularity element-wise: for every w ∈ W and every n below the
/// exponent of w, writing h(p^n w) = n + r, some x̃ ∈ W must satisfy
/// p^n x̃ = p^n w with height exactly r. The reported failure is the
/// lexicographically smallest (n, r), with the smallest witness.
///
/// Powers n ≥ e1 need no checking: p^n W = 0 and all the set equalities
/// degenerate.
pub fn check_k(w: &Submodule) -> RegularityReport {
    let shape = w.shape();
    let e1 = shape.top_exponent();
    let elements = w.elements_unchecked();
    for n in 0..e1 {
        // Solutions of p^n x̃ = p^n w form the coset w + (W ∩ M[p^n]);
        // the kernel is shared by every w at this power.
        let kernel = w
            .intersect(&Submodule::torsion_layer(shape, n))
            .elements_unchecked();
        let mut failure: Option<(u32, Element)> = None;
        for x in &elements {
            if x.exponent() <= n {
                continue;
            }
            let image_height = x
                .mul_p_pow(n)
                .height()
                .finite()
                .expect("p^n x is nonzero below the exponent");
            let r = image_height - n;
            let best = kernel
                .iter()
                .map(|k| (x + k).height())
                .max()
                .expect("kernel contains zero");
            if best < ExtNat::Finite(r) {
                let smaller = match &failure {
                    None => true,
                    Some((fr, _)) => r < *fr,
                };
                if smaller {
                    failure = Some((r, x.clone()));
                }
            }
        }
        if let Some((r, witness)) = failure {
            return RegularityReport::fail(Certificate::K { n, r, witness });
        }
    }
    RegularityReport::pass()
}

/// Decides regularity through the layer identity
/// (W ∩ M^(s+1)_k) + (W ∩ M^s_(k−1)) = W ∩ (M^(s+1)_k + M^s_(k−1))
/// over the box 0 ≤ s ≤ e1, 1 ≤ k ≤ e1; outside it every layer has
/// stabilized at 0 or M and the identity is an instance of one inside.
pub fn check_fpp(w: &Submodule) -> RegularityReport {
    let shape = w.shape();
    let e1 = shape.top_exponent();
    for s in 0..=e1 {
        for k in 1..=e1 {
            let upper = Submodule::layer(shape, s + 1, k);
            let lower = Submodule::layer(shape, s, k - 1);
            let left = w.intersect(&upper).sum(&w.intersect(&lower));
            let right = w.intersect(&upper.sum(&lower));
            if left != right {
                let witness = right
                    .elements_unchecked()
                    .into_iter()
                    .find(|x| !left.contains(x))
                    .expect("left is a proper subset of right");
                return RegularityReport::fail(Certificate::Fpp { s, k, witness });
            }
        }
    }
    RegularityReport::pass()
}

/// Splits x ∈ W into a regular part of maximal height and a remainder of
/// smaller exponent, both inside W.
///
/// A regular x splits trivially as (x, 0). Otherwise, with profile
/// (s, k; s1), the split looks for y ∈ W with p^(k−1) y = p^(k−1) x of
/// height s1; then z = x − y automatically has height s and exponent < k.
/// Returns `None` when no such y exists, which is exactly a failure of the
/// splitting condition at x.
pub fn height_split(w: &Submodule, x: &Element) -> Result<Option<(Element, Element)>> {
    if !w.contains(x) {
        return Err(Error::NotInSubmodule);
    }
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    if x.is_regular() {
        return Ok(Some((x.clone(), x.shape().zero())));
    }
    let profile = x.profile()?;
    let found = w.solve_coset(&CosetQuery {
        target: x.clone(),
        power: profile.k - 1,
        min_height: profile.s1,
    })?;
    Ok(found.map(|y| {
        debug_assert_eq!(y.height(), ExtNat::Finite(profile.s1));
        debug_assert_eq!(y.exponent(), profile.k);
        let z = x - &y;
        debug_assert_eq!(z.height(), ExtNat::Finite(profile.s));
        debug_assert!(z.exponent() < profile.k);
        (y, z)
    }))
}

/// Decomposes x ∈ W into regular elements of W with strictly decreasing
/// exponents and heights, or reports that none exists.
///
/// The construction is inductive: split off a maximal-height regular part
/// y, decompose the remainder, and when the remainder's leading heights
/// reach h(y) absorb that prefix into y — the merged element is again
/// regular of the same height and exponent, and the strict descent is
/// restored.
pub fn baer_decompose(w: &Submodule, x: &Element) -> Result<Option<BaerDecomposition>> {
    if !w.contains(x) {
        return Err(Error::NotInSubmodule);
    }
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    fn recurse(w: &Submodule, x: &Element) -> Result<Option<Vec<BaerPart>>> {
        if x.is_regular() {
            return Ok(Some(vec![BaerPart::of(x.clone())]));
        }
        let Some((y, z)) = height_split(w, x)? else {
            return Ok(None);
        };
        let Some(tail) = recurse(w, &z)? else {
            return Ok(None);
        };
        let s1 = y
            .height()
            .finite()
            .expect("regular part of a nonzero element is nonzero");
        let absorb = tail.iter().take_while(|part| part.height >= s1).count();
        if absorb == 0 {
            let mut parts = vec![BaerPart::of(y)];
            parts.extend(tail);
            return Ok(Some(parts));
        }
        let mut merged = y;
        for part in &tail[..absorb] {
            merged = &merged + &part.element;
        }
        assert!(merged.is_regular(), "merged leading part must be regular");
        debug_assert_eq!(merged.height(), ExtNat::Finite(s1));
        debug_assert_eq!(merged.exponent(), x.exponent());
        let mut parts = vec![BaerPart::of(merged)];
        parts.extend_from_slice(&tail[absorb..]);
        Ok(Some(parts))
    }
    let decomposition = recurse(w, x)?.map(BaerDecomposition::from_parts);
    if let Some(d) = &decomposition {
        debug_assert!(d.is_valid_in(w));
        debug_assert_eq!(d.sum(), *x);
    }
    Ok(decomposition)
}

/// Runs [`baer_decompose`] over every nonzero element of W in lexicographic
/// order; the first element with no decomposition is the certificate.
pub fn check_b(w: &Submodule, cap: u64) -> Result<RegularityReport> {
    for x in w.enumerate_elements(cap)? {
        if x.is_zero() {
            continue;
        }
        if baer_decompose(w, &x)?.is_none() {
            return Ok(RegularityReport::fail(Certificate::B { witness: x }));
        }
    }
    Ok(RegularityReport::pass())
}

/// The (exponent, height) pairs forced on any decomposition of x: the
/// exponents are e(x) together with the j where g jumps along x, px, …, and
/// each height is read from h(p^(k−1) x).
pub fn baer_signature(x: &Element) -> Result<BaerSignature> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    let k = x.exponent();
    let mut exponents = vec![k];
    for j in (1..k).rev() {
        if x.mul_p_pow(j).g_value() > x.mul_p_pow(j - 1).g_value() {
            exponents.push(j);
        }
    }
    let pairs = exponents
        .into_iter()
        .map(|kj| {
            let h = x
                .mul_p_pow(kj - 1)
                .height()
                .finite()
                .expect("p^(k−1) x nonzero for k ≤ e(x)");
            (kj, h - (kj - 1))
        })
        .collect();
    Ok(BaerSignature { pairs })
}

/// True exactly when x sits on the frontier of the layer M^s_k: inside it
/// but outside M^(s+1)_k + M^s_(k−1) — equivalently, x is regular with
/// height s and exponent k. Both routes are computed and must agree.
pub fn frontier_test(shape: &ModuleShape, x: &Element, s: u32, k: u32) -> bool {
    assert!(k >= 1, "frontier layers need k >= 1");
    let by_sets = Submodule::layer(shape, s, k).contains(x)
        && !Submodule::layer(shape, s + 1, k)
            .sum(&Submodule::layer(shape, s, k - 1))
            .contains(x);
    let by_invariants = !x.is_zero()
        && x.is_regular()
        && x.height() == ExtNat::Finite(s)
        && x.exponent() == k;
    assert_eq!(
        by_sets, by_invariants,
        "frontier routes disagree at {x}, s={s}, k={k}"
    );
    by_sets
}

/// Confirms a failure certificate by brute force, without going through the
/// code path that produced it.
pub fn verify_certificate(w: &Submodule, certificate: &Certificate) -> bool {
    let members = w.elements_unchecked();
    match certificate {
        Certificate::K { n, r, witness } => {
            members.contains(witness)
                && witness.mul_p_pow(*n).height() >= ExtNat::Finite(n + r)
                && !members.iter().any(|u| {
                    u.mul_p_pow(*n) == witness.mul_p_pow(*n)
                        && u.height() >= ExtNat::Finite(*r)
                })
        }
        Certificate::Fpp { s, k, witness } => {
            let shape = w.shape();
            let upper = Submodule::layer(shape, s + 1, *k).elements_unchecked();
            let lower = Submodule::layer(shape, *s, k - 1).elements_unchecked();
            let in_layer_sum = upper
                .iter()
                .any(|a| lower.iter().any(|b| &(a + b) == witness));
            let member_set: std::collections::HashSet<&Element> = members.iter().collect();
            let in_split_sum = upper
                .iter()
                .filter(|a| member_set.contains(a))
                .any(|a| {
                    let rest = witness - a;
                    member_set.contains(&rest) && lower.contains(&rest)
                });
            members.contains(witness) && in_layer_sum && !in_split_sum
        }
        Certificate::B { witness } => {
            members.contains(witness)
                && oracle::oracle_decompose(w, witness, w.order())
                    .map(|d| d.is_none())
                    .unwrap_or(false)
        }
    }
}
