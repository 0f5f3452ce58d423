//! Word atomization: split every word into the coarsest slices ("atoms")
//! such that no statement in the design or property file reads or writes an
//! atom partially.
//!
//! An atomization of an m-bit word is represented by its set of cut
//! positions, a subset of `1..=m-1`; the atom containing bit i extends from
//! the cut at-or-below i up to the next cut above. A slice access `w[q:p]`
//! induces cuts at `p` (if `p > 0`) and `q+1` (if `q+1 < m`); the coarsest
//! refinement of two atomizations is the union of their cut sets. Arrays and
//! variable-distance shifts contribute no cuts.

use crate::ir::{Elaborated, LValue, RtlExpr, RtlExprKind};
use indexmap::IndexMap;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum AtomizeError {
    #[error("slice [{q}:{p}] out of range for width {width}")]
    OutOfRange { q: u32, p: u32, width: u32 },
    #[error("cannot refine atomizations of widths {0} and {1}")]
    WidthMismatch(u32, u32),
}

/// Per-word atomization: a sorted cut set over a fixed width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atomization {
    width: u32,
    cuts: BTreeSet<u32>,
}

impl Atomization {
    /// The trivial atomization `{w[m-1:0]}`.
    pub fn trivial(width: u32) -> Self {
        assert!(width >= 1);
        Self { width, cuts: BTreeSet::new() }
    }

    /// Atomization induced by a single access `w[q:p]`.
    pub fn induce(width: u32, q: u32, p: u32) -> Result<Self, AtomizeError> {
        if p > q || q >= width {
            return Err(AtomizeError::OutOfRange { q, p, width });
        }
        let mut cuts = BTreeSet::new();
        if p > 0 {
            cuts.insert(p);
        }
        if q + 1 < width {
            cuts.insert(q + 1);
        }
        Ok(Self { width, cuts })
    }

    /// Coarsest refinement: bits share an atom iff they share an atom in
    /// both inputs, i.e. the union of the cut sets.
    pub fn refine(&self, other: &Self) -> Result<Self, AtomizeError> {
        if self.width != other.width {
            return Err(AtomizeError::WidthMismatch(self.width, other.width));
        }
        let cuts = self.cuts.union(&other.cuts).copied().collect();
        Ok(Self { width: self.width, cuts })
    }

    /// Record one more access in place.
    pub fn add_access(&mut self, q: u32, p: u32) -> Result<(), AtomizeError> {
        let ind = Self::induce(self.width, q, p)?;
        self.cuts.extend(ind.cuts);
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn cuts(&self) -> impl Iterator<Item = u32> + '_ {
        self.cuts.iter().copied()
    }

    /// Atoms as `(hi, lo)` ranges, msb-first.
    pub fn atoms(&self) -> Vec<(u32, u32)> {
        let mut bounds: Vec<u32> = self.cuts.iter().copied().collect();
        bounds.push(self.width);
        let mut out = Vec::with_capacity(bounds.len());
        let mut lo = 0;
        for hi in bounds {
            out.push((hi - 1, lo));
            lo = hi;
        }
        out.reverse();
        out
    }

    pub fn atom_count(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Is `[q:p]` a union of whole atoms?
    pub fn is_aligned(&self, q: u32, p: u32) -> bool {
        (p == 0 || self.cuts.contains(&p)) && (q + 1 == self.width || self.cuts.contains(&(q + 1)))
    }

    /// Atoms overlapping `[q:p]`, msb-first. For an aligned access these tile
    /// the slice exactly.
    pub fn atoms_in(&self, q: u32, p: u32) -> Vec<(u32, u32)> {
        self.atoms().into_iter().filter(|&(hi, lo)| lo <= q && hi >= p).collect()
    }

    /// The atom containing bit position `bit`.
    pub fn atom_of(&self, bit: u32) -> (u32, u32) {
        let lo = self.cuts.range(..=bit).next_back().copied().unwrap_or(0);
        let hi = self.cuts.range(bit + 1..).next().copied().unwrap_or(self.width) - 1;
        (hi, lo)
    }
}

/// Word name -> atomization for a whole design.
pub type AtomMap = IndexMap<String, Atomization>;

/// A recorded slice access, for diagnostics and order-independence tests.
pub type Access = (String, u32, u32);

/// Collect every slice access the design's statements make (lvalues and
/// reads). Whole-word references are recorded as full-range accesses; array
/// reads/updates and shift operators contribute only what their index or
/// operand sub-expressions contain.
pub fn design_accesses(el: &Elaborated) -> Vec<Access> {
    let mut out = Vec::new();
    let tr = el.transition();
    for a in tr.comb.iter().chain(tr.seq.iter()) {
        match &a.lhs {
            LValue::Word(n) => out.push((n.clone(), el.width_of(n) - 1, 0)),
            LValue::Slice { word, hi, lo } => out.push((word.clone(), *hi, *lo)),
            LValue::ArrayElem { indices, .. } => {
                for i in indices {
                    expr_accesses(i, el, &mut out);
                }
            }
        }
        expr_accesses(&a.rhs, el, &mut out);
    }
    out
}

fn expr_accesses(e: &RtlExpr, el: &Elaborated, out: &mut Vec<Access>) {
    match &e.kind {
        RtlExprKind::Word(n) => out.push((n.clone(), el.width_of(n) - 1, 0)),
        RtlExprKind::Slice { word, hi, lo } => out.push((word.clone(), *hi, *lo)),
        RtlExprKind::ArrayRead { indices, .. } => {
            for i in indices {
                expr_accesses(i, el, out);
            }
        }
        RtlExprKind::Not(x) => expr_accesses(x, el, out),
        RtlExprKind::Binary { lhs, rhs, .. } => {
            expr_accesses(lhs, el, out);
            expr_accesses(rhs, el, out);
        }
        RtlExprKind::Cond { cond, then, els } => {
            expr_accesses(cond, el, out);
            expr_accesses(then, el, out);
            expr_accesses(els, el, out);
        }
        RtlExprKind::Concat(parts) => {
            for p in parts {
                expr_accesses(p, el, out);
            }
        }
        RtlExprKind::Literal { .. } => {}
    }
}

/// Fold a list of accesses into an atom map covering every word of the
/// design. `extra` carries the property file's atom references so antecedent
/// and consequent slices always land on atom boundaries.
pub fn atomize_design(el: &Elaborated, extra: &[Access]) -> Result<AtomMap, AtomizeError> {
    let mut map: AtomMap = el
        .words
        .iter()
        .map(|(n, info)| (n.clone(), Atomization::trivial(info.width)))
        .collect();
    let mut all = design_accesses(el);
    all.extend_from_slice(extra);
    fold_accesses(&mut map, &all)?;
    Ok(map)
}

/// Apply accesses to an existing map (separated out so tests can replay the
/// same accesses in permuted orders).
pub fn fold_accesses(map: &mut AtomMap, accesses: &[Access]) -> Result<(), AtomizeError> {
    for (name, q, p) in accesses {
        let a = map
            .get_mut(name)
            .unwrap_or_else(|| panic!("access to unknown word '{name}'"));
        a.add_access(*q, *p)?;
    }
    Ok(())
}

/// The "Atom Size (largest)" statistic.
pub fn largest_atom(map: &AtomMap) -> u32 {
    map.values()
        .flat_map(|a| a.atoms().into_iter().map(|(hi, lo)| hi - lo + 1))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{elaborate, parse};

    fn atoms_str(a: &Atomization) -> Vec<String> {
        a.atoms().iter().map(|(h, l)| format!("{h}:{l}")).collect()
    }

    #[test]
    fn induce_table_all_four_rows() {
        // q < m-1 and p > 0
        let a = Atomization::induce(16, 10, 7).unwrap();
        assert_eq!(atoms_str(&a), ["15:11", "10:7", "6:0"]);
        // q = m-1 and p = 0
        let a = Atomization::induce(16, 15, 0).unwrap();
        assert_eq!(atoms_str(&a), ["15:0"]);
        // q = m-1 and p > 0
        let a = Atomization::induce(8, 7, 4).unwrap();
        assert_eq!(atoms_str(&a), ["7:4", "3:0"]);
        // q < m-1 and p = 0
        let a = Atomization::induce(8, 3, 0).unwrap();
        assert_eq!(atoms_str(&a), ["7:4", "3:0"]);
    }

    #[test]
    fn induce_rejects_bad_ranges() {
        assert!(Atomization::induce(8, 8, 0).is_err());
        assert!(Atomization::induce(8, 2, 5).is_err());
    }

    #[test]
    fn refine_with_trivial_and_idempotence() {
        let t = Atomization::trivial(8);
        let a = Atomization::induce(8, 7, 4).unwrap();
        assert_eq!(t.refine(&a).unwrap(), a);
        assert_eq!(a.refine(&a).unwrap(), a);
    }

    #[test]
    fn refine_overlapping_accesses() {
        // accesses w[7:4] and w[5:2] on an 8-bit word
        let mut a = Atomization::trivial(8);
        a.add_access(7, 4).unwrap();
        a.add_access(5, 2).unwrap();
        assert_eq!(atoms_str(&a), ["7:6", "5:4", "3:2", "1:0"]);

        // cross-check against brute-force equivalence classes of bit
        // positions: bits share an atom iff no access boundary separates them
        let accesses = [(7u32, 4u32), (5, 2)];
        for b1 in 0..8u32 {
            for b2 in 0..8u32 {
                let same_engine = a.atom_of(b1) == a.atom_of(b2);
                let same_brute = accesses.iter().all(|&(q, p)| {
                    let in1 = b1 >= p && b1 <= q;
                    let in2 = b2 >= p && b2 <= q;
                    in1 == in2
                });
                assert_eq!(same_engine, same_brute, "bits {b1},{b2}");
            }
        }
    }

    #[test]
    fn refine_width_mismatch() {
        let a = Atomization::trivial(8);
        let b = Atomization::trivial(4);
        assert!(matches!(a.refine(&b), Err(AtomizeError::WidthMismatch(8, 4))));
    }

    #[test]
    fn sliced_add_fragment_cut_sets() {
        let el = elaborate(
            &parse("input a:16; input b:8; wire c:8; c[4:1] = a[10:7] + b[5:2];").unwrap(),
        )
        .unwrap();
        let map = atomize_design(&el, &[]).unwrap();
        assert_eq!(map["a"].cuts().collect::<Vec<_>>(), [7, 11]);
        assert_eq!(map["b"].cuts().collect::<Vec<_>>(), [2, 6]);
        assert_eq!(map["c"].cuts().collect::<Vec<_>>(), [1, 5]);
        assert_eq!(atoms_str(&map["a"]), ["15:11", "10:7", "6:0"]);
    }

    #[test]
    fn no_slices_means_single_atoms() {
        let el =
            elaborate(&parse("input a:8; input b:8; reg s:8; s <= a + b;").unwrap()).unwrap();
        let map = atomize_design(&el, &[]).unwrap();
        for a in map.values() {
            assert_eq!(a.atom_count(), 1);
        }
    }

    #[test]
    fn arrays_and_variable_shifts_contribute_nothing() {
        let el = elaborate(
            &parse(
                "input i:2; input d:8; input x:8; array m:[2]8; reg r:8; reg y:8; \
                 m[i] <= x; r <= m[i]; y <= x << d;",
            )
            .unwrap(),
        )
        .unwrap();
        let map = atomize_design(&el, &[]).unwrap();
        // x is read whole through the array element and the shift: one atom
        assert_eq!(map["x"].atom_count(), 1);
        assert_eq!(map["d"].atom_count(), 1);
        assert!(!map.contains_key("m"));
    }

    #[test]
    fn alignment_after_atomization() {
        let el = elaborate(
            &parse("input a:16; input b:8; wire c:8; c[4:1] = a[10:7] + b[5:2];").unwrap(),
        )
        .unwrap();
        let map = atomize_design(&el, &[]).unwrap();
        for (name, q, p) in design_accesses(&el) {
            assert!(map[&name].is_aligned(q, p), "{name}[{q}:{p}] not aligned");
        }
        assert_eq!(map["a"].atoms_in(10, 7), vec![(10, 7)]);
    }
}
