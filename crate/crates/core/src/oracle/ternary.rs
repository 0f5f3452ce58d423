//! Bit-precise ternary words and the exact X-propagation evaluator.
//!
//! The evaluator is exponential by design: it concretizes every X bit both
//! ways and reports a result bit as X exactly when two concretizations
//! disagree on it. It exists to test the invalid-bit templates, not to scale;
//! the X budget keeps accidental blow-ups in check.

use thiserror::Error;

pub const X_BUDGET_DEFAULT: u32 = 12;

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("{0} X bits exceed the exact-oracle budget of {1}")]
    BudgetExceeded(u32, u32),
}

/// A word whose bits are 0, 1 or X. `bits` holds the known values (zero under
/// the mask), `xmask` marks the unknown positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TernaryWord {
    pub width: u32,
    pub bits: u64,
    pub xmask: u64,
}

impl TernaryWord {
    pub fn defined(width: u32, value: u64) -> Self {
        assert!(width <= 64);
        Self { width, bits: value & lowmask(width), xmask: 0 }
    }

    pub fn all_x(width: u32) -> Self {
        Self { width, bits: 0, xmask: lowmask(width) }
    }

    pub fn new(width: u32, bits: u64, xmask: u64) -> Self {
        let m = lowmask(width);
        Self { width, bits: bits & m & !xmask, xmask: xmask & m }
    }

    pub fn is_fully_defined(&self) -> bool {
        self.xmask == 0
    }

    pub fn x_count(&self) -> u32 {
        self.xmask.count_ones()
    }

    /// Bit at position i: Some(b) if defined, None if X.
    pub fn bit(&self, i: u32) -> Option<bool> {
        if self.xmask >> i & 1 == 1 {
            None
        } else {
            Some(self.bits >> i & 1 == 1)
        }
    }

    pub fn slice(&self, hi: u32, lo: u32) -> TernaryWord {
        let w = hi - lo + 1;
        TernaryWord::new(w, self.bits >> lo, self.xmask >> lo)
    }

    /// Render msb-first with `x` for unknown bits.
    pub fn display(&self) -> String {
        (0..self.width)
            .rev()
            .map(|i| match self.bit(i) {
                None => 'x',
                Some(true) => '1',
                Some(false) => '0',
            })
            .collect()
    }
}

fn lowmask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Operators the exact oracle understands, mirroring the word-level operator
/// set at widths small enough for exhaustive work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TernaryOp {
    Add,
    Sub,
    Mul,
    Udiv,
    Urem,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Not,
    Concat,
    /// operand 0 is the 1-bit selector
    Ite,
    Eq,
    Ult,
    Ule,
    ShlConst(u32),
    LshrConst(u32),
    /// operand 1 is the shift distance
    Shl,
    Lshr,
}

impl TernaryOp {
    pub fn result_width(self, operands: &[TernaryWord]) -> u32 {
        match self {
            TernaryOp::Concat => operands.iter().map(|o| o.width).sum(),
            TernaryOp::Eq | TernaryOp::Ult | TernaryOp::Ule => 1,
            TernaryOp::Ite => operands[1].width,
            _ => operands[0].width,
        }
    }
}

/// Concrete semantics on u64 payloads (all operands fully defined).
pub fn apply_concrete(op: TernaryOp, vals: &[(u32, u64)]) -> (u32, u64) {
    let (w0, a) = vals[0];
    let m = lowmask(w0);
    match op {
        TernaryOp::Add => (w0, a.wrapping_add(vals[1].1) & m),
        TernaryOp::Sub => (w0, a.wrapping_sub(vals[1].1) & m),
        TernaryOp::Mul => (w0, a.wrapping_mul(vals[1].1) & m),
        TernaryOp::Udiv => {
            let b = vals[1].1;
            (w0, if b == 0 { m } else { a / b })
        }
        TernaryOp::Urem => {
            let b = vals[1].1;
            (w0, if b == 0 { a } else { a % b })
        }
        TernaryOp::And => (w0, a & vals[1].1),
        TernaryOp::Or => (w0, a | vals[1].1),
        TernaryOp::Xor => (w0, a ^ vals[1].1),
        TernaryOp::Nand => (w0, !(a & vals[1].1) & m),
        TernaryOp::Nor => (w0, !(a | vals[1].1) & m),
        TernaryOp::Xnor => (w0, !(a ^ vals[1].1) & m),
        TernaryOp::Not => (w0, !a & m),
        TernaryOp::Concat => {
            let mut acc = 0u64;
            let mut w = 0u32;
            for &(vw, v) in vals {
                acc = (acc << vw) | v;
                w += vw;
            }
            (w, acc)
        }
        TernaryOp::Ite => {
            if a & 1 == 1 {
                vals[1]
            } else {
                vals[2]
            }
        }
        TernaryOp::Eq => (1, u64::from(a == vals[1].1)),
        TernaryOp::Ult => (1, u64::from(a < vals[1].1)),
        TernaryOp::Ule => (1, u64::from(a <= vals[1].1)),
        TernaryOp::ShlConst(k) => (w0, if k >= w0 { 0 } else { (a << k) & m }),
        TernaryOp::LshrConst(k) => (w0, if k >= w0 { 0 } else { a >> k }),
        TernaryOp::Shl => {
            let d = vals[1].1;
            (w0, if d >= u64::from(w0) { 0 } else { (a << d) & m })
        }
        TernaryOp::Lshr => {
            let d = vals[1].1;
            (w0, if d >= u64::from(w0) { 0 } else { a >> d })
        }
    }
}

/// Exact X propagation for one operator application: a result bit of
/// `res[q:p]` is X iff two concretizations of the operands' X bits disagree
/// on it.
pub fn eval_exact(
    op: TernaryOp,
    operands: &[TernaryWord],
    q: u32,
    p: u32,
    budget: u32,
) -> Result<TernaryWord, OracleError> {
    let total_x: u32 = operands.iter().map(|o| o.x_count()).sum();
    if total_x > budget {
        return Err(OracleError::BudgetExceeded(total_x, budget));
    }
    // positions of X bits as (operand index, bit index)
    let mut xpos = Vec::new();
    for (oi, o) in operands.iter().enumerate() {
        for b in 0..o.width {
            if o.bit(b).is_none() {
                xpos.push((oi, b));
            }
        }
    }
    let mut first: Option<u64> = None;
    let mut diff: u64 = 0;
    for assignment in 0u64..(1 << xpos.len()) {
        let mut vals: Vec<(u32, u64)> = operands.iter().map(|o| (o.width, o.bits)).collect();
        for (k, &(oi, b)) in xpos.iter().enumerate() {
            if assignment >> k & 1 == 1 {
                vals[oi].1 |= 1 << b;
            }
        }
        let (_, r) = apply_concrete(op, &vals);
        let sl = (r >> p) & lowmask(q - p + 1);
        match first {
            None => first = Some(sl),
            Some(f) => diff |= f ^ sl,
        }
    }
    let f = first.expect("at least one concretization");
    Ok(TernaryWord::new(q - p + 1, f, diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_with_zero_absorbs() {
        let a = TernaryWord::all_x(2);
        let b = TernaryWord::defined(2, 0);
        let r = eval_exact(TernaryOp::And, &[a, b], 1, 0, X_BUDGET_DEFAULT).unwrap();
        assert_eq!(r, TernaryWord::defined(2, 0));
    }

    #[test]
    fn add_with_low_x_poisons_bit() {
        // 0X + 01: concretizations {00,01} + 01 = {01,10}, bit 0 differs
        let a = TernaryWord::new(2, 0b00, 0b01);
        let b = TernaryWord::defined(2, 0b01);
        let r = eval_exact(TernaryOp::Add, &[a, b], 0, 0, X_BUDGET_DEFAULT).unwrap();
        assert_eq!(r.bit(0), None);
        // ... and bit 1 too (carry uncertainty)
        let r1 = eval_exact(TernaryOp::Add, &[a, b], 1, 1, X_BUDGET_DEFAULT).unwrap();
        assert_eq!(r1.bit(0), None);
    }

    #[test]
    fn division_without_x_is_plain() {
        let a = TernaryWord::defined(4, 13);
        let b = TernaryWord::defined(4, 4);
        let r = eval_exact(TernaryOp::Udiv, &[a, b], 3, 0, X_BUDGET_DEFAULT).unwrap();
        assert_eq!(r, TernaryWord::defined(4, 3));
        let rem = eval_exact(TernaryOp::Urem, &[a, b], 3, 0, X_BUDGET_DEFAULT).unwrap();
        assert_eq!(rem, TernaryWord::defined(4, 1));
    }

    #[test]
    fn budget_is_enforced() {
        let a = TernaryWord::all_x(8);
        let b = TernaryWord::all_x(8);
        assert!(matches!(
            eval_exact(TernaryOp::Add, &[a, b], 7, 0, 12),
            Err(OracleError::BudgetExceeded(16, 12))
        ));
    }

    #[test]
    fn monotone_in_information_order() {
        // refining an X bit never turns a defined result bit into X
        for bits in 0..16u64 {
            for xm in 0..16u64 {
                let a = TernaryWord::new(4, bits, xm);
                let b = TernaryWord::defined(4, 9);
                let r_abs = eval_exact(TernaryOp::Add, &[a, b], 3, 0, 16).unwrap();
                // refine one X bit of a both ways
                for xb in 0..4 {
                    if a.bit(xb).is_none() {
                        for v in [0u64, 1] {
                            let refined = TernaryWord::new(
                                4,
                                a.bits | (v << xb),
                                a.xmask & !(1 << xb),
                            );
                            let r = eval_exact(TernaryOp::Add, &[refined, b], 3, 0, 16).unwrap();
                            for bit in 0..4 {
                                if r_abs.bit(bit).is_some() {
                                    assert_eq!(r.bit(bit), r_abs.bit(bit));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
