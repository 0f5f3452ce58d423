//! Bundled benchmark designs, properties and seeded mutants.
//!
//! Two parameterized designs exercise the full operator and control
//! repertoire at desk scale:
//!
//! * `sad_pipeline`: a three-stage pipelined sum-of-absolute-differences
//!   datapath with enable-gated stages, a pipelined reset, and a valid-bit
//!   pipe (14 registers), with properties P1-P6.
//! * `serial_mult`: a serial multiplier reading two operands from one input
//!   port under `first`/`second` handshake flags, free to wait indefinitely
//!   between beats, plus a running input checksum; properties P1-P3.
//!
//! Each design ships with seeded mutants that break a designated property
//! with a value-level counterexample, so failing runs can be confirmed by
//! concrete replay.

/// The sum-of-absolute-differences pipeline at the given datapath width.
pub fn design1(width: u32) -> String {
    design1_text(width, None)
}

/// Seeded mutants: 1 drops one partial sum from the accumulator, 2 flips an
/// absolute-difference comparison, 3 drops the accumulator's enable gate.
pub fn design1_mutant(width: u32, mutant: u32) -> String {
    design1_text(width, Some(mutant))
}

/// The property a mutant is expected to break.
pub fn design1_mutant_target(mutant: u32) -> u32 {
    match mutant {
        1 | 2 => 1,
        3 => 3,
        _ => panic!("design 1 has mutants 1..=3"),
    }
}

fn design1_text(width: u32, mutant: Option<u32>) -> String {
    let k = width;
    let k1 = k + 1;
    let k3 = k + 3;
    let abs = |a: &str, b: &str| format!("{a} < {b} ? {b} - {a} : {a} - {b}");
    let w0 = match mutant {
        Some(2) => "a0 < b0 ? a0 - b0 : b0 - a0".to_string(),
        _ => abs("a0", "b0"),
    };
    let acc_sum = match mutant {
        Some(1) => format!("acc + {{2'd0, s2a}}"),
        _ => format!("acc + {{2'd0, s2a}} + {{2'd0, s2b}}"),
    };
    let acc_update = format!("acc <= rst2 ? {k3}'d0 : {acc_sum};");
    let acc_stage = match mutant {
        Some(3) => acc_update.clone(),
        _ => format!("if (en2) {{ {acc_update} }}"),
    };
    format!(
        "design sad_pipeline;\n\
         input a0:{k}; input b0:{k};\n\
         input a1:{k}; input b1:{k};\n\
         input a2:{k}; input b2:{k};\n\
         input a3:{k}; input b3:{k};\n\
         input en:1; input reset:1; input vin:1;\n\
         wire w0:{k}; wire w1:{k}; wire w2:{k}; wire w3:{k};\n\
         reg d0:{k}; reg d1:{k}; reg d2:{k}; reg d3:{k};\n\
         reg s2a:{k1}; reg s2b:{k1};\n\
         reg acc:{k3};\n\
         reg en1:1; reg en2:1; reg rst1:1; reg rst2:1;\n\
         reg vld1:1; reg vld2:1; reg vld3:1;\n\
         output acc; output vld3;\n\
         w0 = {w0};\n\
         w1 = {w1};\n\
         w2 = {w2};\n\
         w3 = {w3};\n\
         if (en) {{ d0 <= w0; d1 <= w1; d2 <= w2; d3 <= w3; }}\n\
         en1 <= en; rst1 <= reset; vld1 <= vin;\n\
         if (en1) {{ s2a <= {{1'd0, d0}} + {{1'd0, d1}}; s2b <= {{1'd0, d2}} + {{1'd0, d3}}; }}\n\
         en2 <= en1; rst2 <= rst1; vld2 <= vld1;\n\
         {acc_stage}\n\
         vld3 <= vld2;\n",
        w1 = abs("a1", "b1"),
        w2 = abs("a2", "b2"),
        w3 = abs("a3", "b3"),
    )
}

/// Properties P1-P6 of the pipeline.
///
/// P1 checks one accumulation beat against a mirrored recomputation, P2 the
/// reset path under all-X data, P3 the enable stall with pinned stage state,
/// P4 the valid pipe under a guard, P5 a constraint-dependent datapath
/// identity, and P6 a two-beat accumulation against a re-associated sum.
pub fn design1_spec(width: u32, prop: u32) -> String {
    let k = width;
    let k1 = k + 1;
    let k3 = k + 3;
    // |a - b| with the comparison mirrored relative to the design
    let mabs = |a: &str, b: &str| format!("({b} <= {a} ? {a} - {b} : {b} - {a})");
    match prop {
        1 => {
            let pair = |hi: &str, lo: &str| format!("{{1'd0, {hi}}} + {{1'd0, {lo}}}");
            let s01 = pair(&mabs("A0", "B0"), &mabs("A1", "B1"));
            let s23 = pair(&mabs("A2", "B2"), &mabs("A3", "B3"));
            format!(
                "var A0:{k}; var B0:{k}; var A1:{k}; var B1:{k};\n\
                 var A2:{k}; var B2:{k}; var A3:{k}; var B3:{k};\n\
                 var S:{k3};\n\
                 ant (true) en = 1'd1 @ [0,1);\n\
                 ant (true) reset = 1'd0 @ [0,1);\n\
                 ant (true) a0 = A0 @ [0,1); ant (true) b0 = B0 @ [0,1);\n\
                 ant (true) a1 = A1 @ [0,1); ant (true) b1 = B1 @ [0,1);\n\
                 ant (true) a2 = A2 @ [0,1); ant (true) b2 = B2 @ [0,1);\n\
                 ant (true) a3 = A3 @ [0,1); ant (true) b3 = B3 @ [0,1);\n\
                 ant (true) acc = S @ [2,3);\n\
                 cons (true) acc = S + {{2'd0, {s01}}} + {{2'd0, {s23}}} @ [3,4);\n"
            )
        }
        2 => format!(
            "ant (true) en = 1'd1 @ [0,1);\n\
             ant (true) reset = 1'd1 @ [0,1);\n\
             cons (true) acc = {k3}'d0 @ [3,4);\n"
        ),
        3 => format!(
            "var S:{k3}; var U:{k1}; var V:{k1};\n\
             ant (true) en = 1'd0 @ [0,1);\n\
             ant (true) reset = 1'd0 @ [0,1);\n\
             ant (true) acc = S @ [2,3);\n\
             ant (true) s2a = U @ [2,3); ant (true) s2b = V @ [2,3);\n\
             cons (true) acc = S @ [3,4);\n"
        ),
        4 => format!(
            "var M:1;\n\
             ant (M == 1'd1) vin = 1'd1 @ [0,1);\n\
             cons (M == 1'd1) vld3 = 1'd1 @ [3,4);\n"
        ),
        5 => format!(
            "var M:1; var A:{k}; var B:{k}; var S:{k3};\n\
             constr (A < B) | (M == 1'd0);\n\
             ant (M == 1'd1) en = 1'd1 @ [0,1);\n\
             ant (M == 1'd1) reset = 1'd0 @ [0,1);\n\
             ant (M == 1'd1) a0 = A @ [0,1); ant (M == 1'd1) b0 = B @ [0,1);\n\
             ant (M == 1'd1) a1 = {k}'d0 @ [0,1); ant (M == 1'd1) b1 = {k}'d0 @ [0,1);\n\
             ant (M == 1'd1) a2 = {k}'d0 @ [0,1); ant (M == 1'd1) b2 = {k}'d0 @ [0,1);\n\
             ant (M == 1'd1) a3 = {k}'d0 @ [0,1); ant (M == 1'd1) b3 = {k}'d0 @ [0,1);\n\
             ant (M == 1'd1) acc = S @ [2,3);\n\
             cons (M == 1'd1) acc = S + {{2'd0, {{1'd0, B - A}}}} @ [3,4);\n"
        ),
        6 => format!(
            "var A:{k}; var S:{k3};\n\
             ant (true) en = 1'd1 @ [0,2);\n\
             ant (true) reset = 1'd0 @ [0,2);\n\
             ant (true) a0 = A @ [0,2); ant (true) b0 = {k}'d0 @ [0,2);\n\
             ant (true) a1 = {k}'d0 @ [0,2); ant (true) b1 = {k}'d0 @ [0,2);\n\
             ant (true) a2 = {k}'d0 @ [0,2); ant (true) b2 = {k}'d0 @ [0,2);\n\
             ant (true) a3 = {k}'d0 @ [0,2); ant (true) b3 = {k}'d0 @ [0,2);\n\
             ant (true) acc = S @ [2,3);\n\
             cons (true) acc = S + ({{2'd0, {{1'd0, A}}}} + {{2'd0, {{1'd0, A}}}}) @ [4,5);\n"
        ),
        _ => panic!("design 1 has properties 1..=6"),
    }
}

/// The serial multiplier at the given operand width (product is twice as
/// wide).
pub fn design2(width: u32) -> String {
    design2_text(width, None)
}

/// Seeded mutants: 1 ignores the `second` flag while waiting, 2 multiplies
/// the first operand by itself.
pub fn design2_mutant(width: u32, mutant: u32) -> String {
    design2_text(width, Some(mutant))
}

pub fn design2_mutant_target(mutant: u32) -> u32 {
    match mutant {
        1 => 2,
        2 => 1,
        _ => panic!("design 2 has mutants 1..=2"),
    }
}

fn design2_text(width: u32, mutant: Option<u32>) -> String {
    let k = width;
    let k2 = 2 * k;
    let take2 = match mutant {
        Some(1) => "st",
        _ => "second & st",
    };
    let prod_rhs = match mutant {
        Some(2) => format!("{{{k}'d0, opa}} * {{{k}'d0, opa}}"),
        _ => format!("{{{k}'d0, opa}} * {{{k}'d0, din}}"),
    };
    format!(
        "design serial_mult;\n\
         input din:{k}; input first:1; input second:1;\n\
         wire take1:1; wire take2:1; wire obs:{k};\n\
         reg opa:{k};\n\
         reg st:1 = 0;\n\
         reg prod:{k2};\n\
         reg done:1 = 0;\n\
         reg chk:{k} = 0;\n\
         output prod; output done; output obs;\n\
         take1 = first & ~st;\n\
         take2 = {take2};\n\
         obs = din ^ chk;\n\
         if (take1) {{ opa <= din; st <= 1'd1; }}\n\
         if (take2) {{ prod <= {prod_rhs}; st <= 1'd0; }}\n\
         done <= take2;\n\
         chk <= chk ^ din;\n"
    )
}

/// Properties of the multiplier: P1 a back-to-back transaction, P2 a
/// transaction with a wait cycle between the beats, P3 a 12-frame
/// conditionally-driven stream checked through the input checksum.
pub fn design2_spec(width: u32, prop: u32) -> String {
    let k = width;
    let k2 = 2 * k;
    match prop {
        1 => format!(
            "var A:{k}; var B:{k};\n\
             ant (true) din = A @ [0,1); ant (true) first = 1'd1 @ [0,1); \
             ant (true) second = 1'd0 @ [0,1);\n\
             ant (true) din = B @ [1,2); ant (true) first = 1'd0 @ [1,2); \
             ant (true) second = 1'd1 @ [1,2);\n\
             cons (true) prod = {{{k}'d0, A}} * {{{k}'d0, B}} @ [2,3);\n\
             cons (true) done = 1'd1 @ [2,3);\n"
        ),
        2 => format!(
            "var A:{k}; var B:{k}; var D:{k};\n\
             ant (true) din = A @ [0,1); ant (true) first = 1'd1 @ [0,1); \
             ant (true) second = 1'd0 @ [0,1);\n\
             ant (true) din = D @ [1,2); ant (true) first = 1'd0 @ [1,2); \
             ant (true) second = 1'd0 @ [1,2);\n\
             ant (true) din = B @ [2,3); ant (true) first = 1'd0 @ [2,3); \
             ant (true) second = 1'd1 @ [2,3);\n\
             cons (true) done = 1'd0 @ [2,3);\n\
             cons (true) prod = {{{k}'d0, A}} * {{{k}'d0, B}} @ [3,4);\n\
             cons (true) done = 1'd1 @ [3,4);\n"
        ),
        3 => format!(
            "var C:1; var A:{k};\n\
             ant (C == 1'd1) din = A @ [0,12);\n\
             ant (true) first = 1'd1 @ [0,1);\n\
             ant (true) first = 1'd0 @ [1,12);\n\
             ant (true) second = 1'd0 @ [0,12);\n\
             cons (C == 1'd1) obs = {k}'d0 @ [11,12);\n"
        ),
        _ => panic!("design 2 has properties 1..=3 (product width {k2})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{elaborate, parse};

    #[test]
    fn design1_has_fourteen_registers() {
        for w in [8, 16, 32, 64] {
            let el = elaborate(&parse(&design1(w)).unwrap()).unwrap();
            assert_eq!(
                el.words.values().filter(|i| i.kind == crate::ir::WordKind::Reg).count(),
                14
            );
        }
    }

    #[test]
    fn all_bundled_sources_elaborate() {
        for w in [8, 16, 32, 64] {
            elaborate(&parse(&design1(w)).unwrap()).unwrap();
            elaborate(&parse(&design2(w)).unwrap()).unwrap();
            for m in 1..=3 {
                elaborate(&parse(&design1_mutant(w, m)).unwrap()).unwrap();
            }
            for m in 1..=2 {
                elaborate(&parse(&design2_mutant(w, m)).unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn specs_parse_against_their_designs() {
        let mut pool = crate::expr::ExprPool::new();
        let el1 = elaborate(&parse(&design1(8)).unwrap()).unwrap();
        for p in 1..=6 {
            crate::ste::parse_spec(&design1_spec(8, p), &el1, &mut pool).unwrap();
        }
        let el2 = elaborate(&parse(&design2(8)).unwrap()).unwrap();
        for p in 1..=3 {
            crate::ste::parse_spec(&design2_spec(8, p), &el2, &mut pool).unwrap();
        }
    }

    #[test]
    fn concrete_sad_trace_matches_hand_computation() {
        use crate::oracle::{simulate_concrete, ConcreteInit};
        use num_bigint::BigUint;
        let el = elaborate(&parse(&design1(8)).unwrap()).unwrap();
        // drive one beat: |9-4| + |1-7| + |5-5| + |0-2| = 5+6+0+2 = 13
        let frame0: crate::oracle::StimulusFrame = [
            ("a0", 9u64),
            ("b0", 4),
            ("a1", 1),
            ("b1", 7),
            ("a2", 5),
            ("b2", 5),
            ("a3", 0),
            ("b3", 2),
            ("en", 1),
            ("reset", 0),
            ("vin", 1),
        ]
        .iter()
        .map(|(n, v)| (n.to_string(), Some(BigUint::from(*v))))
        .collect();
        let idle: crate::oracle::StimulusFrame = [
            ("en", 1u64),
            ("reset", 0),
        ]
        .iter()
        .map(|(n, v)| (n.to_string(), Some(BigUint::from(*v))))
        .collect();
        let stim = vec![frame0, idle.clone(), idle.clone(), idle];
        let tr = simulate_concrete(&el, &stim, 4, &ConcreteInit::default());
        assert_eq!(tr[1]["d0"], BigUint::from(5u32));
        assert_eq!(tr[2]["s2a"], BigUint::from(11u32));
        assert_eq!(tr[2]["s2b"], BigUint::from(2u32));
        // acc was uninitialized (zero in replay), accumulates 13 at frame 3
        assert_eq!(tr[3]["acc"], BigUint::from(13u32));
        assert_eq!(tr[3]["vld3"], BigUint::from(1u32));
    }
}
