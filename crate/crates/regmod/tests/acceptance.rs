//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the size of the sweep it ran (visible with `--nocapture`).

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regmod::oracle::{
    element_closure, oracle_check_fpp, oracle_check_k, oracle_decompose, oracle_intersect,
    oracle_sum,
};
use regmod::{
    baer_decompose, baer_signature, check_b, check_fpp, check_k, find_simultaneous_basis,
    frontier_test, verify_certificate, verify_simultaneous_basis, Certificate, Element,
    ExtNat, ModuleShape, Submodule,
};

const CAP: u64 = 1 << 16;

/// The shape pool of the equivalence sweep: each listed shape at p = 2 and
/// p = 3, plus (3, 2, 1) at p = 2 only.
fn sweep_pool() -> Vec<ModuleShape> {
    let mut shapes = Vec::new();
    for p in [2u64, 3] {
        for exps in [
            vec![1u32],
            vec![2],
            vec![1, 1],
            vec![2, 1],
            vec![3, 1],
            vec![2, 2],
            vec![2, 1, 1],
        ] {
            shapes.push(ModuleShape::new(p, &exps).unwrap());
        }
    }
    shapes.push(ModuleShape::new(2, &[3, 2, 1]).unwrap());
    shapes
}

fn el(shape: &ModuleShape, coords: &[i64]) -> Element {
    shape.element(coords).unwrap()
}

#[test]
fn criterion_1_three_way_equivalence_sweep() {
    let mut submodules = 0u64;
    let pool = sweep_pool();
    for shape in &pool {
        for w in Submodule::enumerate_all(shape, CAP).unwrap() {
            let k = check_k(&w);
            let b = check_b(&w, CAP).unwrap();
            let f = check_fpp(&w);
            assert_eq!(k.verdict, b.verdict, "K vs B at {w:?}");
            assert_eq!(k.verdict, f.verdict, "K vs FPP at {w:?}");
            for report in [&k, &b, &f] {
                if let Some(cert) = &report.certificate {
                    assert!(verify_certificate(&w, cert), "certificate at {w:?}");
                }
            }
            submodules += 1;
        }
    }
    println!(
        "criterion 1 (three-way equivalence): PASS — {submodules} submodules across {} shapes, 100% agreement",
        pool.len()
    );
}

#[test]
fn criterion_2_canonical_counterexample_certificates() {
    let shape = ModuleShape::new(2, &[3, 1]).unwrap();
    let w = Submodule::span(&shape, &[el(&shape, &[2, 1])]);
    let witness = el(&shape, &[2, 1]);

    let k = check_k(&w);
    assert!(!k.verdict);
    assert_eq!(
        k.certificate,
        Some(Certificate::K {
            n: 1,
            r: 1,
            witness: witness.clone()
        })
    );

    let f = check_fpp(&w);
    assert!(!f.verdict);
    assert_eq!(
        f.certificate,
        Some(Certificate::Fpp {
            s: 0,
            k: 2,
            witness: witness.clone()
        })
    );

    let b = check_b(&w, CAP).unwrap();
    assert!(!b.verdict);
    assert_eq!(b.certificate, Some(Certificate::B { witness }));

    println!(
        "criterion 2 (canonical counterexample): PASS — K at (1, 1), FPP at (0, 2), B rejects"
    );
}

#[test]
fn criterion_3_whole_module_decomposes() {
    let mut elements = 0u64;
    for shape in sweep_pool() {
        let full = Submodule::full(&shape);
        for x in shape.elements().filter(|x| !x.is_zero()) {
            let expected = baer_signature(&x).unwrap().pairs;
            let fast = baer_decompose(&full, &x)
                .unwrap()
                .unwrap_or_else(|| panic!("no decomposition of {x} in the full module"));
            assert!(fast.is_valid_in(&full), "invalid decomposition at {x}");
            assert_eq!(fast.sum(), x);
            assert_eq!(fast.pairs(), expected, "signature mismatch at {x}");
            let slow = oracle_decompose(&full, &x, CAP)
                .unwrap()
                .unwrap_or_else(|| panic!("oracle found no decomposition of {x}"));
            assert!(slow.is_valid_in(&full));
            assert_eq!(slow.pairs(), expected, "oracle signature mismatch at {x}");
            elements += 1;
        }
    }
    println!(
        "criterion 3 (decompositions in W = M, fast and oracle, signatures match): PASS — {elements} elements"
    );
}

#[test]
fn criterion_4_regular_elements_span_regular_cyclics() {
    let mut elements = 0u64;
    for shape in sweep_pool() {
        for x in shape.elements().filter(|x| !x.is_zero()) {
            let cyclic = Submodule::span(&shape, std::slice::from_ref(&x));
            assert_eq!(
                x.is_regular(),
                check_k(&cyclic).verdict,
                "element vs cyclic submodule at {x}"
            );
            elements += 1;
        }
    }
    println!(
        "criterion 4 (regular element iff regular cyclic submodule): PASS — {elements} elements"
    );
}

#[test]
fn criterion_5_frontier_routes_agree() {
    let mut cases = 0u64;
    for shape in [
        ModuleShape::new(2, &[3, 1]).unwrap(),
        ModuleShape::new(2, &[2, 2]).unwrap(),
    ] {
        let e1 = shape.top_exponent();
        for x in shape.elements() {
            for s in 0..=e1 {
                for k in 1..=e1 {
                    // frontier_test also asserts the two routes against
                    // each other internally.
                    let got = frontier_test(&shape, &x, s, k);
                    let expected = !x.is_zero()
                        && x.is_regular()
                        && x.height() == ExtNat::Finite(s)
                        && x.exponent() == k;
                    assert_eq!(got, expected, "at {x}, s={s}, k={k}");
                    cases += 1;
                }
            }
        }
    }
    println!("criterion 5 (frontier characterization, both routes): PASS — {cases} cases");
}

#[test]
fn criterion_6_split_bounds_randomized() {
    let pool = sweep_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let mut done = 0u64;
    while done < 10_000 {
        let shape = &pool[rng.gen_range(0..pool.len())];
        let all: Vec<Element> = shape.elements().collect();
        let x = &all[rng.gen_range(1..all.len())];
        if x.is_zero() {
            continue;
        }
        let profile = x.profile().unwrap();
        let layer = Submodule::layer(shape, profile.s, profile.k - 1)
            .enumerate_elements(CAP)
            .unwrap();
        let z = &layer[rng.gen_range(0..layer.len())];
        let y = x - z;
        assert!(!y.is_zero());
        assert_eq!(y.exponent(), profile.k, "splitting {x} by {z}");
        let h = y.height().finite().unwrap();
        assert!(
            profile.s <= h && h <= profile.s1,
            "height bound violated splitting {x} by {z}"
        );
        assert_eq!(y.is_regular(), h == profile.s1, "splitting {x} by {z}");
        if x.is_regular() {
            assert_eq!(h, profile.s, "regular case splitting {x} by {z}");
        }
        done += 1;
    }
    println!("criterion 6 (split bounds): PASS — {done} randomized splits, zero violations");
}

/// All shapes (any prime) whose module order stays within the bound.
fn shapes_with_order_up_to(bound: u64) -> Vec<ModuleShape> {
    fn partitions(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let top = max_part.min(remaining);
        for part in (1..=top).rev() {
            current.push(part);
            out.push(current.clone());
            partitions(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut shapes = Vec::new();
    for p in (2..=bound).filter(|&p| regmod::valuation::is_prime(p)) {
        let mut max_total = 0u32;
        let mut power = 1u64;
        while power <= bound / p {
            power *= p;
            max_total += 1;
        }
        if max_total == 0 {
            continue;
        }
        let mut exps = Vec::new();
        partitions(max_total, max_total, &mut Vec::new(), &mut exps);
        for e in exps {
            shapes.push(ModuleShape::new(p, &e).unwrap());
        }
    }
    shapes
}

#[test]
fn criterion_7_simultaneous_basis_iff_regular() {
    let shapes = shapes_with_order_up_to(64);
    let mut submodules = 0u64;
    let mut bases = 0u64;
    for shape in &shapes {
        for w in Submodule::enumerate_all(shape, CAP).unwrap() {
            let regular = check_k(&w).verdict;
            match find_simultaneous_basis(&w, CAP).unwrap() {
                Some(basis) => {
                    assert!(regular, "basis found for irregular {w:?}");
                    assert!(
                        verify_simultaneous_basis(&w, &basis),
                        "verifier rejected basis for {w:?}"
                    );
                    bases += 1;
                }
                None => assert!(!regular, "no basis for regular {w:?}"),
            }
            submodules += 1;
        }
    }
    println!(
        "criterion 7 (simultaneous basis iff regular): PASS — {submodules} submodules across {} shapes, {bases} bases verified",
        shapes.len()
    );
}

#[test]
fn basis_search_handles_deeper_shapes() {
    // Beyond the order-64 sweep: a hand-picked set of deeper shapes where
    // peeling, lifting and slot filling all have real work to do.
    let shapes = [
        ModuleShape::new(2, &[4, 3]).unwrap(),
        ModuleShape::new(2, &[3, 2, 2]).unwrap(),
        ModuleShape::new(2, &[4, 2, 1]).unwrap(),
        ModuleShape::new(2, &[3, 3, 1]).unwrap(),
        ModuleShape::new(2, &[2, 2, 2, 1]).unwrap(),
        ModuleShape::new(3, &[3, 2]).unwrap(),
        ModuleShape::new(3, &[2, 2, 1]).unwrap(),
        ModuleShape::new(5, &[2, 1]).unwrap(),
    ];
    let mut submodules = 0u64;
    for shape in &shapes {
        for w in Submodule::enumerate_all(shape, CAP).unwrap() {
            let regular = check_k(&w).verdict;
            match find_simultaneous_basis(&w, CAP).unwrap() {
                Some(basis) => {
                    assert!(regular, "basis found for irregular {w:?}");
                    assert!(verify_simultaneous_basis(&w, &basis));
                }
                None => assert!(!regular, "no basis for regular {w:?}"),
            }
            submodules += 1;
        }
    }
    println!("extended basis sweep: PASS — {submodules} submodules across {} shapes", shapes.len());
}

#[test]
fn criterion_8_oracle_equivalence() {
    let mut checked = 0u64;
    let mut pairs = 0u64;
    for shape in sweep_pool() {
        let subs = Submodule::enumerate_all(&shape, CAP).unwrap();
        let all: Vec<Element> = shape.elements().collect();
        for w in &subs {
            assert_eq!(
                check_k(w).verdict,
                oracle_check_k(w, CAP).unwrap().verdict,
                "K verdict at {w:?}"
            );
            assert_eq!(
                check_fpp(w).verdict,
                oracle_check_fpp(w, CAP).unwrap().verdict,
                "FPP verdict at {w:?}"
            );
            let closure = element_closure(w);
            checked += 1;
            for x in &all {
                assert_eq!(
                    w.contains(x),
                    closure.binary_search(x).is_ok(),
                    "contains at {w:?}, {x}"
                );
            }
        }
        for a in &subs {
            for b in &subs {
                assert_eq!(
                    oracle_sum(a, b, CAP * CAP).unwrap(),
                    a.sum(b).enumerate_elements(CAP).unwrap(),
                    "sum at {a:?} + {b:?}"
                );
                assert_eq!(
                    oracle_intersect(a, b, CAP).unwrap(),
                    a.intersect(b).enumerate_elements(CAP).unwrap(),
                    "intersect at {a:?} ∩ {b:?}"
                );
                pairs += 1;
            }
        }
    }
    println!(
        "criterion 8 (oracle equivalence): PASS — {checked} submodules, {pairs} pairs, 100% agreement"
    );
}

#[test]
fn criterion_9_enumerate_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let json = dir.path().join(format!("report-{run}.json"));
        let output = Command::new(env!("CARGO_BIN_EXE_regmod"))
            .args([
                "enumerate",
                "--p",
                "2",
                "--shape",
                "3,1",
                "--json",
                json.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success());
        let report = std::fs::read(&json).unwrap();
        outputs.push((output.stdout, report));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "stdout differs between runs");
    assert_eq!(outputs[0].1, outputs[1].1, "JSON report differs between runs");
    println!("criterion 9 (byte-identical enumerate reports): PASS — stdout and JSON agree across runs");
}
