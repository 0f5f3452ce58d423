//! Invalid-bit approximation templates, one per word-level operator.
//!
//! Each template computes `inv(res[q:p])` for a slice of an operator result
//! from its operands' value expressions and slice-wise invalid bits. The
//! formulas never report a slice valid if any of its bits could be X in a
//! bit-blasted evaluation; the exhaustive checker in `oracle::soundness`
//! verifies exactly that, operator by operator.
//!
//! Operands are presented through [`Operand`], which supplies the full-width
//! value term, a slice-wise invalid-bit callback (recursing into nested
//! operator applications), and a granule decomposition used when a slice
//! bound is itself symbolic (the division templates).

use super::{Granule, ShiftMode, SimCtx};
use crate::expr::{ExprId, ExprPool};
use num_bigint::BigUint;
use num_traits::One;

/// An operand of a word-level operator, as seen by the templates.
pub struct Operand<'c> {
    pub width: u32,
    pub val: ExprId,
    inv: Box<dyn FnMut(&mut SimCtx<'_>, u32, u32) -> ExprId + 'c>,
    grans: Box<dyn FnMut(&mut SimCtx<'_>) -> Vec<Granule> + 'c>,
}

impl<'c> Operand<'c> {
    pub fn new(
        width: u32,
        val: ExprId,
        inv: impl FnMut(&mut SimCtx<'_>, u32, u32) -> ExprId + 'c,
        grans: impl FnMut(&mut SimCtx<'_>) -> Vec<Granule> + 'c,
    ) -> Self {
        Self { width, val, inv: Box::new(inv), grans: Box::new(grans) }
    }

    /// A whole atom: any sub-slice has the atom's single invalid bit.
    pub fn atom(width: u32, val: ExprId, inv: ExprId) -> Self {
        Self {
            width,
            val,
            inv: Box::new(move |_, _, _| inv),
            grans: Box::new(move |_| vec![Granule { hi: width - 1, lo: 0, inv }]),
        }
    }

    pub fn inv_slice(&mut self, cx: &mut SimCtx<'_>, q: u32, p: u32) -> ExprId {
        debug_assert!(p <= q && q < self.width);
        (self.inv)(cx, q, p)
    }

    pub fn inv_whole(&mut self, cx: &mut SimCtx<'_>) -> ExprId {
        let w = self.width;
        self.inv_slice(cx, w - 1, 0)
    }

    pub fn granules(&mut self, cx: &mut SimCtx<'_>) -> Vec<Granule> {
        (self.grans)(cx)
    }

    pub fn val_slice(&self, pool: &mut ExprPool, q: u32, p: u32) -> ExprId {
        pool.extract(q, p, self.val)
    }
}

fn or3(pool: &mut ExprPool, a: ExprId, b: ExprId, c: ExprId) -> ExprId {
    let ab = pool.or(a, b);
    pool.or(ab, c)
}

fn and3(pool: &mut ExprPool, a: ExprId, b: ExprId, c: ExprId) -> ExprId {
    let ab = pool.and(a, b);
    pool.and(ab, c)
}

/// Carry-in of the (possibly rewritten) addition: subtraction runs the adder
/// as `a + ~b + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarryIn {
    Zero,
    One,
}

/// `inv(carry_r)` of `a + b + cin`, `0 <= r <= m`.
///
/// The carry out of the low `r` bits is unknown only if (1) some low operand
/// bit is unknown, and (2) neither operand's low slice pins the carry on its
/// own. With carry-in 0 a known all-zero low slice pins the carry to 0; with
/// carry-in 1 (subtraction: the second addend is `~b`) a known all-one low
/// slice of `a`, or all-zero low slice of `b`, pins it to 1.
pub fn inv_carry(
    cx: &mut SimCtx<'_>,
    a: &mut Operand<'_>,
    b: &mut Operand<'_>,
    r: u32,
    cin: CarryIn,
) -> ExprId {
    if r == 0 {
        return cx.pool.fls();
    }
    let ia = a.inv_slice(cx, r - 1, 0);
    let ib = b.inv_slice(cx, r - 1, 0);
    let va = a.val_slice(cx.pool, r - 1, 0);
    let vb = b.val_slice(cx.pool, r - 1, 0);
    let (pin_a, pin_b) = match cin {
        // a-slice all zeros, or b-slice all zeros
        CarryIn::Zero => (BigUint::ZERO, BigUint::ZERO),
        // a-slice all ones, or b-slice all zeros (its complement all ones)
        CarryIn::One => ((BigUint::one() << r) - BigUint::one(), BigUint::ZERO),
    };
    let pa = cx.pool.bv_const(r, pin_a);
    let pb = cx.pool.bv_const(r, pin_b);
    let na = cx.pool.neq(va, pa);
    let nb = cx.pool.neq(vb, pb);
    let any = cx.pool.or(ia, ib);
    let ca = cx.pool.or(ia, na);
    let cb = cx.pool.or(ib, nb);
    and3(cx.pool, any, ca, cb)
}

/// `inv(sum[q:p])` for `sum = a + b`: the slice depends only on the operand
/// slices and the incoming carry.
pub fn inv_add(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>, q: u32, p: u32) -> ExprId {
    let ia = a.inv_slice(cx, q, p);
    let ib = b.inv_slice(cx, q, p);
    let ic = inv_carry(cx, a, b, p, CarryIn::Zero);
    or3(cx.pool, ia, ib, ic)
}

/// `inv(diff[q:p])` for `diff = a - b`, rewritten as `a + ~b + 1`. Negation
/// passes invalid bits through, so the operand slices are consulted directly.
pub fn inv_sub(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>, q: u32, p: u32) -> ExprId {
    let ia = a.inv_slice(cx, q, p);
    let ib = b.inv_slice(cx, q, p);
    let ic = inv_carry(cx, a, b, p, CarryIn::One);
    or3(cx.pool, ia, ib, ic)
}

/// Whole-result multiplication template: a known zero operand absorbs any
/// uncertainty in the other.
pub fn inv_mul(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>) -> ExprId {
    let ia = a.inv_whole(cx);
    let ib = b.inv_whole(cx);
    let za = cx.pool.zero(a.width);
    let zb = cx.pool.zero(b.width);
    let na = cx.pool.neq(a.val, za);
    let nb = cx.pool.neq(b.val, zb);
    let any = cx.pool.or(ia, ib);
    let ca = cx.pool.or(ia, na);
    let cb = cx.pool.or(ib, nb);
    and3(cx.pool, any, ca, cb)
}

/// Comparisons (`==`, `<`, `<=`): unknown if either side is.
pub fn inv_cmp(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>) -> ExprId {
    let ia = a.inv_whole(cx);
    let ib = b.inv_whole(cx);
    cx.pool.or(ia, ib)
}

/// Bit-wise conjunction: a known zero slice forces the result slice to zero.
pub fn inv_and(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>, q: u32, p: u32) -> ExprId {
    let ia = a.inv_slice(cx, q, p);
    let ib = b.inv_slice(cx, q, p);
    let va = a.val_slice(cx.pool, q, p);
    let vb = b.val_slice(cx.pool, q, p);
    and_shape(cx.pool, ia, ib, va, vb, Absorb::Zero, Absorb::Zero)
}

/// Bit-wise disjunction via `~(~a & ~b)`: an all-ones slice absorbs.
pub fn inv_or(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>, q: u32, p: u32) -> ExprId {
    let ia = a.inv_slice(cx, q, p);
    let ib = b.inv_slice(cx, q, p);
    let va = a.val_slice(cx.pool, q, p);
    let vb = b.val_slice(cx.pool, q, p);
    and_shape(cx.pool, ia, ib, va, vb, Absorb::Ones, Absorb::Ones)
}

/// Bit-wise xor via `(a & ~b) | (~a & b)`, composing the conjunction and
/// disjunction templates with Lemma-1 values at each step.
pub fn inv_xor(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, b: &mut Operand<'_>, q: u32, p: u32) -> ExprId {
    let ia = a.inv_slice(cx, q, p);
    let ib = b.inv_slice(cx, q, p);
    let va = a.val_slice(cx.pool, q, p);
    let vb = b.val_slice(cx.pool, q, p);
    // u = a & ~b, v = ~a & b
    let iu = and_shape(cx.pool, ia, ib, va, vb, Absorb::Zero, Absorb::Ones);
    let iv = and_shape(cx.pool, ia, ib, va, vb, Absorb::Ones, Absorb::Zero);
    let nvb = cx.pool.bvnot(vb);
    let nva = cx.pool.bvnot(va);
    let vu = cx.pool.bvand(va, nvb);
    let vv = cx.pool.bvand(nva, vb);
    // or-template over (u, v)
    let any = cx.pool.or(iu, iv);
    let w = q - p + 1;
    let ones = cx.pool.ones(w);
    let nu = cx.pool.neq(vu, ones);
    let nv = cx.pool.neq(vv, ones);
    let cu = cx.pool.or(iu, nu);
    let cv = cx.pool.or(iv, nv);
    and3(cx.pool, any, cu, cv)
}

#[derive(Clone, Copy)]
enum Absorb {
    Zero,
    Ones,
}

// Shared shape of the conjunction-family templates: unknown only if some
// operand is unknown and neither operand slice sits at its absorbing value.
fn and_shape(
    pool: &mut ExprPool,
    ia: ExprId,
    ib: ExprId,
    va: ExprId,
    vb: ExprId,
    aa: Absorb,
    ab: Absorb,
) -> ExprId {
    let w = pool.width(va);
    let cst = |pool: &mut ExprPool, a: Absorb| match a {
        Absorb::Zero => pool.zero(w),
        Absorb::Ones => pool.ones(w),
    };
    let ka = cst(pool, aa);
    let kb = cst(pool, ab);
    let na = pool.neq(va, ka);
    let nb = pool.neq(vb, kb);
    let any = pool.or(ia, ib);
    let ca = pool.or(ia, na);
    let cb = pool.or(ib, nb);
    and3(pool, any, ca, cb)
}

/// Conditional assignment: with an unknown selector the result is still known
/// when both branches are known and agree on the slice.
pub fn inv_ite(
    cx: &mut SimCtx<'_>,
    sel: &mut Operand<'_>,
    t: &mut Operand<'_>,
    e: &mut Operand<'_>,
    q: u32,
    p: u32,
) -> ExprId {
    debug_assert_eq!(sel.width, 1);
    let isel = sel.inv_slice(cx, 0, 0);
    let one = cx.pool.bv_const(1, 1u32);
    let vsel = cx.pool.eq(sel.val, one);
    let it = t.inv_slice(cx, q, p);
    let ie = e.inv_slice(cx, q, p);
    let vt = t.val_slice(cx.pool, q, p);
    let ve = e.val_slice(cx.pool, q, p);
    let differ = cx.pool.neq(vt, ve);
    let both = or3(cx.pool, it, ie, differ);
    let chosen = cx.pool.bool_ite(vsel, it, ie);
    cx.pool.bool_ite(isel, both, chosen)
}

/// Left shift by a constant: the slice maps back into the operand, or into
/// zero padding.
pub fn inv_shl_const(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, k: u32, q: u32, p: u32) -> ExprId {
    if p >= k {
        a.inv_slice(cx, q - k, p - k)
    } else if q >= k {
        a.inv_slice(cx, q - k, 0)
    } else {
        cx.pool.fls()
    }
}

/// Logical right shift by a constant, mirror of the left case over the high
/// end of the operand.
pub fn inv_lshr_const(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, k: u32, q: u32, p: u32) -> ExprId {
    let m = a.width;
    if q + k <= m - 1 {
        a.inv_slice(cx, q + k, p + k)
    } else if p + k <= m - 1 {
        a.inv_slice(cx, m - 1, p + k)
    } else {
        cx.pool.fls()
    }
}

/// Variable left shift `a << d`. Candidate source bits for `res[q:p]` are
/// `a[q:0]`.
///
/// In the default strict mode an unknown distance keeps the slice known only
/// when the whole candidate range is known to be zero (every distance then
/// yields zero). The paper-faithful mode instead keeps the slice "known"
/// whenever `a[q:0]` is known, which misjudges known-nonzero sources shifted
/// by an unknown distance; `oracle::soundness` demonstrates the difference.
pub fn inv_shl_var(
    cx: &mut SimCtx<'_>,
    a: &mut Operand<'_>,
    d: &mut Operand<'_>,
    q: u32,
    p: u32,
) -> ExprId {
    let _ = p;
    let ia = a.inv_slice(cx, q, 0);
    let id = d.inv_whole(cx);
    let in_reach = cmp_le_const(cx.pool, d.val, q);
    match cx.mode {
        ShiftMode::PaperFaithful => {
            let cond = cx.pool.or(id, in_reach);
            cx.pool.and(ia, cond)
        }
        ShiftMode::StrictSound => {
            let va = a.val_slice(cx.pool, q, 0);
            let z = cx.pool.zero(q + 1);
            let nz = cx.pool.neq(va, z);
            let unknown_d = cx.pool.or(ia, nz);
            let known_d = cx.pool.and(ia, in_reach);
            cx.pool.bool_ite(id, unknown_d, known_d)
        }
    }
}

/// Variable right shift `a >> d`; candidate source bits for `res[q:p]` are
/// `a[m-1:p]`.
pub fn inv_lshr_var(
    cx: &mut SimCtx<'_>,
    a: &mut Operand<'_>,
    d: &mut Operand<'_>,
    q: u32,
    p: u32,
) -> ExprId {
    let _ = q;
    let m = a.width;
    let ia = a.inv_slice(cx, m - 1, p);
    let id = d.inv_whole(cx);
    let in_reach = cmp_le_const(cx.pool, d.val, m - 1 - p);
    match cx.mode {
        ShiftMode::PaperFaithful => {
            let cond = cx.pool.or(id, in_reach);
            cx.pool.and(ia, cond)
        }
        ShiftMode::StrictSound => {
            let va = a.val_slice(cx.pool, m - 1, p);
            let z = cx.pool.zero(m - p);
            let nz = cx.pool.neq(va, z);
            let unknown_d = cx.pool.or(ia, nz);
            let known_d = cx.pool.and(ia, in_reach);
            cx.pool.bool_ite(id, unknown_d, known_d)
        }
    }
}

/// `val(d) <= c` with the constant rendered at the distance's width; true
/// outright when the constant exceeds the width's range.
fn cmp_le_const(pool: &mut ExprPool, d_val: ExprId, c: u32) -> ExprId {
    let w = pool.width(d_val);
    if w < 32 && u64::from(c) >= (1u64 << w) {
        return pool.tru();
    }
    let cc = pool.bv_const(w, c);
    pool.ule(d_val, cc)
}

/// Slice of a concatenation: result bits map into the parts, msb-first.
pub fn inv_concat(cx: &mut SimCtx<'_>, parts: &mut [Operand<'_>], q: u32, p: u32) -> ExprId {
    let total: u32 = parts.iter().map(|x| x.width).sum();
    let mut acc = cx.pool.fls();
    let mut top = total;
    for part in parts.iter_mut() {
        let (phi, plo) = (top - 1, top - part.width);
        top -= part.width;
        if plo > q || phi < p {
            continue;
        }
        let shi = q.min(phi) - plo;
        let slo = p.max(plo) - plo;
        let iv = part.inv_slice(cx, shi, slo);
        acc = cx.pool.or(acc, iv);
    }
    acc
}

/// Slice of a slice: passthrough at rebased coordinates.
pub fn inv_extract(cx: &mut SimCtx<'_>, a: &mut Operand<'_>, hi: u32, lo: u32, q: u32, p: u32) -> ExprId {
    debug_assert!(lo + q <= hi);
    a.inv_slice(cx, lo + q, lo + p)
}

/// Allocate the fresh witness `i` for one division instance with the side
/// constraints `2^i <= val(b) < 2^(i+1)` and `i < m` (evaluated without
/// overflow by widening one bit), plus the no-division-by-zero assumption.
/// The bound on `val(b)` binds the don't-care payload as well, which keeps
/// the Lemma-1 value of the quotient meaningful under an unknown divisor.
pub fn div_witness(cx: &mut SimCtx<'_>, b: &mut Operand<'_>) -> ExprId {
    let m = b.width;
    let name = cx.side.sc.fresh_name("i");
    let i = cx.pool.bv_var(&name, m);
    let bz = cx.pool.zext(b.val, 1);
    let iz = cx.pool.zext(i, 1);
    let one_w = cx.pool.bv_const(m + 1, 1u32);
    let p2i = cx.pool.shl(one_w, iz);
    let ip1 = cx.pool.add(iz, one_w);
    let p2i1 = cx.pool.shl(one_w, ip1);
    let lo_ok = cx.pool.ule(p2i, bz);
    let hi_ok = cx.pool.ult(bz, p2i1);
    let mc = cx.pool.bv_const(m, m);
    let in_range = cx.pool.ult(i, mc);
    cx.side.sc.push(lo_ok);
    cx.side.sc.push(hi_ok);
    cx.side.sc.push(in_range);
    // record the reachability condition for the optional divide-by-zero check
    let ib = b.inv_whole(cx);
    let nib = cx.pool.not(ib);
    let zb = cx.pool.zero(m);
    let is_zero = cx.pool.eq(b.val, zb);
    let cond = cx.pool.and(nib, is_zero);
    cx.side.div_zero.push(cond);
    i
}

/// `inv(quot[q:p])` for `quot = a / b` with witness `i` satisfying
/// `2^i <= val(b) < 2^(i+1)`.
pub fn inv_udiv(
    cx: &mut SimCtx<'_>,
    a: &mut Operand<'_>,
    b: &mut Operand<'_>,
    i: ExprId,
    q: u32,
    p: u32,
) -> ExprId {
    let m = a.width;
    let ib = b.inv_whole(cx);
    // temp1: an unknown divisor still cannot make the quotient exceed the
    // dividend, so a known dividend with zero high part pins the slice to 0
    let ia_whole = a.inv_whole(cx);
    let va_hi = a.val_slice(cx.pool, m - 1, p);
    let zhi = cx.pool.zero(m - p);
    let hi_nz = cx.pool.neq(va_hi, zhi);
    let temp1 = cx.pool.or(ia_whole, hi_nz);
    // temp3: b = 2^i shifts a right by i
    let pc = cx.pool.bv_const(m, p);
    let qc = cx.pool.bv_const(m, q);
    let m1c = cx.pool.bv_const(m, m - 1);
    let pi = cx.pool.add(i, pc);
    let qi = cx.pool.add(i, qc);
    let in_word = cx.pool.ule(pi, m1c);
    let qi_le = cx.pool.ule(qi, m1c);
    let hi_dyn = cx.pool.ite(qi_le, qi, m1c);
    let grans = a.granules(cx);
    let dyn_inv = dyn_slice_inv(cx.pool, &grans, hi_dyn, pi, m);
    let temp3 = cx.pool.and(in_word, dyn_inv);
    // temp2
    let one = cx.pool.bv_const(m, 1u32);
    let p2i = cx.pool.shl(one, i);
    let pow2 = cx.pool.eq(b.val, p2i);
    let ia_hi = a.inv_slice(cx, m - 1, p);
    let i_lt_p = if p == 0 { cx.pool.fls() } else { cx.pool.ult(i, pc) };
    let coarse = cx.pool.or(i_lt_p, ia_hi);
    let temp2 = cx.pool.bool_ite(pow2, temp3, coarse);
    cx.pool.bool_ite(ib, temp1, temp2)
}

/// `inv(rem[q:p])` for `rem = a % b` with the same witness.
pub fn inv_urem(
    cx: &mut SimCtx<'_>,
    a: &mut Operand<'_>,
    b: &mut Operand<'_>,
    i: ExprId,
    q: u32,
    p: u32,
) -> ExprId {
    let m = a.width;
    let ib = b.inv_whole(cx);
    let pc = cx.pool.bv_const(m, p);
    let qc = cx.pool.bv_const(m, q);
    let one = cx.pool.bv_const(m, 1u32);
    let p2i = cx.pool.shl(one, i);
    let pow2 = cx.pool.eq(b.val, p2i);
    // b = 2^i: rem is the low i bits of a; guarded so i-1 never wraps into
    // the dynamic bound when i = 0
    let i_gt_p = cx.pool.ult(pc, i);
    let im1 = cx.pool.sub(i, one);
    let le_q = cx.pool.ule(im1, qc);
    let hi_dyn = cx.pool.ite(le_q, im1, qc);
    let grans = a.granules(cx);
    let dyn_inv = dyn_slice_inv(cx.pool, &grans, hi_dyn, pc, m);
    let pow2_case = cx.pool.and(i_gt_p, dyn_inv);
    // otherwise rem < 2^(i+1) <= 2^p when i < p, else give up
    let i_ge_p = cx.pool.ule(pc, i);
    let other = cx.pool.bool_ite(pow2, pow2_case, i_ge_p);
    cx.pool.or(ib, other)
}

/// Invalid bit of `a[hi:lo]` where the bounds are m-bit terms: a granule
/// contributes its invalid bit when its constant range overlaps `[lo..hi]`.
pub fn dyn_slice_inv(
    pool: &mut ExprPool,
    granules: &[Granule],
    hi: ExprId,
    lo: ExprId,
    cmp_width: u32,
) -> ExprId {
    let mut acc = pool.fls();
    for g in granules {
        let ghi = pool.bv_const(cmp_width, g.hi);
        let glo = pool.bv_const(cmp_width, g.lo);
        let c1 = pool.ule(lo, ghi);
        let c2 = pool.ule(glo, hi);
        let both = pool.and(c1, c2);
        let hit = pool.and(g.inv, both);
        acc = pool.or(acc, hit);
    }
    acc
}
