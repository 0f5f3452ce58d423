//! Ground-truth engines used for testing the symbolic machinery: the concrete
//! atom-value lattice, an exact X-propagation evaluator built on exhaustive
//! concretization, a two-valued simulator for counterexample replay, and the
//! exhaustive template soundness checker.

mod concrete;
mod replay;
mod soundness;
mod ternary;

pub use concrete::{simulate_concrete, simulate_ternary, ConcreteInit, StimulusFrame, TernaryTrace};
pub use replay::{replay_fail, ReplayReport};
pub use soundness::{check_array_soundness, check_template_soundness, OpUnderTest, SoundnessReport, Violation};
pub use ternary::{eval_exact, OracleError, TernaryOp, TernaryWord, X_BUDGET_DEFAULT};

use num_bigint::BigUint;
use num_traits::One;

/// A concrete element of the value lattice of an m-bit atom: a defined
/// constant, the all-unknown X, or the over-constrained top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeValue {
    X,
    Defined(u64),
    Top,
}

impl LatticeValue {
    /// Information order: X below everything, Top above everything, distinct
    /// defined values incomparable.
    pub fn le(&self, other: &LatticeValue) -> bool {
        match (self, other) {
            (LatticeValue::X, _) => true,
            (_, LatticeValue::Top) => true,
            (LatticeValue::Defined(a), LatticeValue::Defined(b)) => a == b,
            _ => false,
        }
    }
}

/// Least upper bound in the atom-value lattice.
pub fn join(a: &LatticeValue, b: &LatticeValue) -> LatticeValue {
    match (a, b) {
        (LatticeValue::Top, _) | (_, LatticeValue::Top) => LatticeValue::Top,
        (LatticeValue::X, v) => v.clone(),
        (v, LatticeValue::X) => v.clone(),
        (LatticeValue::Defined(x), LatticeValue::Defined(y)) => {
            if x == y {
                LatticeValue::Defined(*x)
            } else {
                LatticeValue::Top
            }
        }
    }
}

/// Closed-form statistics of the product lattice of a word split into atoms
/// of the given widths, with all tuples containing a per-atom top collapsed
/// into a single top element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeStats {
    /// Length (in edges) of the longest chain from bottom to top: r + 1.
    pub height: u32,
    /// Total number of elements.
    pub size: BigUint,
    /// Elements at each level from the bottom, levels `0 ..= r+1`. The level
    /// of a non-top element is its number of non-X atoms.
    pub levels: Vec<BigUint>,
}

pub fn lattice_stats(widths: &[u32]) -> LatticeStats {
    assert!(!widths.is_empty(), "need at least one atom");
    let r = widths.len();
    let mut size = BigUint::one();
    for &m in widths {
        size *= (BigUint::one() << m) + BigUint::one();
    }
    size += BigUint::one();
    // level i: choose which i atoms are defined, times their value counts
    let mut levels = vec![BigUint::ZERO; r + 2];
    for subset in 0u64..(1 << r) {
        let i = subset.count_ones() as usize;
        let mut prod = BigUint::one();
        for (j, &m) in widths.iter().enumerate() {
            if subset >> j & 1 == 1 {
                prod *= BigUint::one() << m;
            }
        }
        levels[i] += prod;
    }
    levels[r + 1] = BigUint::one(); // top
    LatticeStats { height: r as u32 + 1, size, levels }
}

/// Explicit enumeration of the same lattice, for cross-checking the closed
/// forms. Elements are per-atom values (`None` = X) plus a single top.
pub fn enumerate_lattice(widths: &[u32]) -> Vec<Option<Vec<Option<u64>>>> {
    let mut elems: Vec<Vec<Option<u64>>> = vec![Vec::new()];
    for &m in widths {
        let mut next = Vec::new();
        for e in &elems {
            for v in std::iter::once(None).chain((0..(1u64 << m)).map(Some)) {
                let mut e2 = e.clone();
                e2.push(v);
                next.push(e2);
            }
        }
        elems = next;
    }
    let mut out: Vec<Option<Vec<Option<u64>>>> = elems.into_iter().map(Some).collect();
    out.push(None); // top
    out
}

/// Pointwise order on enumerated elements (`None` outer = top).
pub fn enum_le(a: &Option<Vec<Option<u64>>>, b: &Option<Vec<Option<u64>>>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x.iter().zip(y).all(|(xa, ya)| match (xa, ya) {
            (None, _) => true,
            (Some(u), Some(v)) => u == v,
            (Some(_), None) => false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_examples() {
        assert_eq!(join(&LatticeValue::X, &LatticeValue::Defined(5)), LatticeValue::Defined(5));
        assert_eq!(
            join(&LatticeValue::Defined(3), &LatticeValue::Defined(7)),
            LatticeValue::Top
        );
        assert_eq!(join(&LatticeValue::Top, &LatticeValue::X), LatticeValue::Top);
    }

    #[test]
    fn join_is_a_semilattice_at_width_2() {
        let elems: Vec<LatticeValue> = std::iter::once(LatticeValue::X)
            .chain((0..4).map(LatticeValue::Defined))
            .chain(std::iter::once(LatticeValue::Top))
            .collect();
        for a in &elems {
            for b in &elems {
                assert_eq!(join(a, b), join(b, a));
                assert_eq!(join(a, a), a.clone());
                for c in &elems {
                    let ab_c = join(&join(a, b), c);
                    let a_bc = join(a, &join(b, c));
                    assert_eq!(ab_c, a_bc);
                }
                // join is the least upper bound
                let j = join(a, b);
                assert!(a.le(&j) && b.le(&j));
                for u in &elems {
                    if a.le(u) && b.le(u) {
                        assert!(j.le(u));
                    }
                }
            }
        }
    }

    #[test]
    fn three_bit_atom_has_ten_elements() {
        let s = lattice_stats(&[3]);
        assert_eq!(s.size, BigUint::from(10u32));
        assert_eq!(s.height, 2);
        assert_eq!(
            s.levels,
            vec![BigUint::from(1u32), BigUint::from(8u32), BigUint::from(1u32)]
        );
    }

    #[test]
    fn stats_match_enumeration_up_to_total_width_6() {
        // all compositions of total width 1..=6
        fn compositions(n: u32) -> Vec<Vec<u32>> {
            if n == 0 {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for first in 1..=n {
                for mut rest in compositions(n - first) {
                    rest.insert(0, first);
                    out.push(rest);
                }
            }
            out
        }
        for total in 1..=6u32 {
            for widths in compositions(total) {
                let stats = lattice_stats(&widths);
                let elems = enumerate_lattice(&widths);
                assert_eq!(stats.size, BigUint::from(elems.len()), "widths {widths:?}");
                // level of a non-top element = number of defined atoms
                let r = widths.len();
                let mut levels = vec![0u64; r + 2];
                for e in &elems {
                    match e {
                        None => levels[r + 1] += 1,
                        Some(t) => levels[t.iter().filter(|x| x.is_some()).count()] += 1,
                    }
                }
                let levels: Vec<BigUint> = levels.into_iter().map(BigUint::from).collect();
                assert_eq!(stats.levels, levels, "widths {widths:?}");
                // height: longest chain bottom -> ... -> top has r+1 edges
                assert_eq!(stats.height as usize, r + 1);
            }
        }
    }

    #[test]
    fn bit_blasted_special_case() {
        // r = m with all unit widths gives the bit-blasted lattice
        let s = lattice_stats(&[1, 1, 1]);
        assert_eq!(s.size, BigUint::from(28u32)); // 3^3 + 1
        assert_eq!(s.height, 4);
    }
}
