//! Shared fixtures for the benchmarks.

use perkh_core::diagram::words::TangleWord;
use perkh_core::periodicity::LaurentPoly2;
use perkh_core::{kh, AnnularDiagram, Field};

/// The `p`-periodic closure of the 2-strand braid `σ₁^k`.
pub fn torus_closure(k: usize, p: usize) -> AnnularDiagram {
    TangleWord::braid(2, &vec![1; k]).unwrap().periodic_closure(p).unwrap()
}

/// The 3-periodic trefoil.
pub fn trefoil() -> AnnularDiagram {
    torus_closure(1, 3)
}

/// Closure of a 3-strand braid word, repeated `p` times.
pub fn braid3(word: &[i32], p: usize) -> AnnularDiagram {
    TangleWord::braid(3, word).unwrap().periodic_closure(p).unwrap()
}

pub fn khp(d: &AnnularDiagram) -> LaurentPoly2 {
    LaurentPoly2::from_poincare(&kh(d, Field::Prime(2)).unwrap())
}
