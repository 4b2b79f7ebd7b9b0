//! Exact arithmetic for finite p-primary modules over a discrete valuation
//! domain, centered on deciding whether a submodule is *regular*.
//!
//! A submodule W of M is regular when p^n W ∩ p^(n+r) M = p^n (W ∩ p^r M)
//! for all n, r ≥ 0 — equivalently, when W and M admit a simultaneous
//! basis, when every element of W decomposes into regular elements of W,
//! and when W distributes over the layers p^s M ∩ M[p^k]. This crate
//! implements all of these as separate decision procedures that produce
//! re-verifiable certificates on failure, plus a brute-force oracle layer
//! and a CLI for exploring submodule lattices exhaustively.
//!
//! ```
//! use regmod::{ModuleShape, Submodule, check_k, check_b, check_fpp};
//!
//! // M = Z/8 ⊕ Z/2 and W generated by (2, 1).
//! let shape = ModuleShape::new(2, &[3, 1]).unwrap();
//! let w = Submodule::span(&shape, &[shape.element(&[2, 1]).unwrap()]);
//!
//! // All three conditions agree: W is not regular.
//! assert!(!check_k(&w).verdict);
//! assert!(!check_b(&w, 1 << 16).unwrap().verdict);
//! assert!(!check_fpp(&w).verdict);
//! ```
//!
//! The `book/` directory of the repository is an mdBook walking through the
//! concepts; its code snippets are compiled and run as doc-tests below.

pub mod basis;
pub mod cli;
pub mod error;
pub mod module;
pub mod oracle;
pub mod regularity;
pub mod submodule;
pub mod valuation;

mod howell;

pub use basis::{find_simultaneous_basis, verify_simultaneous_basis, SimultaneousBasis};
pub use error::{Error, Result};
pub use module::{Element, ElementProfile, ModuleShape, MAX_MODULE_ORDER};
pub use regularity::{
    baer_decompose, baer_signature, check_b, check_fpp, check_k, frontier_test, height_split,
    verify_certificate, BaerDecomposition, BaerPart, BaerSignature, Certificate, RegularityReport,
};
pub use submodule::{CosetQuery, Submodule, SubmoduleLayer, DEFAULT_ORDER_CAP};
pub use valuation::{is_unit, valuation, ExtNat, ScalarValuation};

// The book's code samples double as tests: each chapter is included here so
// `cargo test --doc` compiles and runs every fenced Rust block. The modules
// are empty; only their docs matter.
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/modules-and-elements.md")]
    pub mod modules_and_elements {}
    #[doc = include_str!("../../../book/src/submodules.md")]
    pub mod submodules {}
    #[doc = include_str!("../../../book/src/regularity.md")]
    pub mod regularity {}
    #[doc = include_str!("../../../book/src/decompositions.md")]
    pub mod decompositions {}
    #[doc = include_str!("../../../book/src/simultaneous-bases.md")]
    pub mod simultaneous_bases {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
