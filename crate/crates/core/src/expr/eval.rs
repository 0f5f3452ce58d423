//! Concrete evaluation of expression DAGs under an environment.
//!
//! Division and remainder by zero follow the SMT-LIB convention (`bvudiv`
//! yields all-ones, `bvurem` yields the dividend) so the evaluator, the
//! emitted constraints and the solver agree bit-exactly.

use super::{mask, ExprId, ExprPool, Node, Op, Sort};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Concrete array value: explicit stores over a default element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayValue {
    pub index_width: u32,
    pub elem_width: u32,
    pub default: BigUint,
    pub store: BTreeMap<BigUint, BigUint>,
}

impl ArrayValue {
    pub fn filled(index_width: u32, elem_width: u32, default: BigUint) -> Self {
        Self { index_width, elem_width, default, store: BTreeMap::new() }
    }

    pub fn get(&self, idx: &BigUint) -> BigUint {
        self.store.get(idx).cloned().unwrap_or_else(|| self.default.clone())
    }

    pub fn set(&mut self, idx: BigUint, val: BigUint) {
        self.store.insert(idx, val);
    }
}

/// A concrete value of any sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bits { width: u32, value: BigUint },
    Bool(bool),
    Array(ArrayValue),
}

impl Value {
    pub fn bits(width: u32, value: impl Into<BigUint>) -> Self {
        Value::Bits { width, value: value.into() & mask(width) }
    }

    pub fn as_bits(&self) -> &BigUint {
        match self {
            Value::Bits { value, .. } => value,
            _ => panic!("value is not a bit-vector"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            _ => panic!("value is not boolean"),
        }
    }
}

/// Variable assignment for evaluation.
pub type Env = HashMap<String, Value>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("variable '{0}' missing from environment")]
    MissingVar(String),
    #[error("variable '{name}' has value of wrong sort (expected {expected})")]
    SortMismatch { name: String, expected: Sort },
}

impl ExprPool {
    /// Evaluate `e` under `env`. Standard unsigned bit-vector semantics.
    pub fn eval(&self, e: ExprId, env: &Env) -> Result<Value, EvalError> {
        let mut memo: HashMap<ExprId, Value> = HashMap::new();
        self.eval_memo(e, env, &mut memo)
    }

    /// Evaluate with a caller-provided memo table, letting many evaluations
    /// over the same environment share work.
    pub fn eval_memo(
        &self,
        root: ExprId,
        env: &Env,
        memo: &mut HashMap<ExprId, Value>,
    ) -> Result<Value, EvalError> {
        // Explicit stack: visit children first, then fold.
        enum Task {
            Visit(ExprId),
            Apply(ExprId),
        }
        let mut stack = vec![Task::Visit(root)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Visit(e) => {
                    if memo.contains_key(&e) {
                        continue;
                    }
                    match self.node(e) {
                        Node::BvConst { width, value } => {
                            memo.insert(e, Value::Bits { width: *width, value: value.clone() });
                        }
                        Node::BoolConst(b) => {
                            memo.insert(e, Value::Bool(*b));
                        }
                        Node::Var { name, sort } => {
                            let v = env
                                .get(name)
                                .ok_or_else(|| EvalError::MissingVar(name.clone()))?;
                            let ok = match (sort, v) {
                                (Sort::BitVec(w), Value::Bits { width, .. }) => w == width,
                                (Sort::Bool, Value::Bool(_)) => true,
                                (Sort::Array { index_width, elem_width }, Value::Array(a)) => {
                                    a.index_width == *index_width && a.elem_width == *elem_width
                                }
                                _ => false,
                            };
                            if !ok {
                                return Err(EvalError::SortMismatch {
                                    name: name.clone(),
                                    expected: *sort,
                                });
                            }
                            memo.insert(e, v.clone());
                        }
                        Node::App { args, .. } => {
                            stack.push(Task::Apply(e));
                            for &a in args {
                                stack.push(Task::Visit(a));
                            }
                        }
                    }
                }
                Task::Apply(e) => {
                    let Node::App { op, args } = self.node(e) else { unreachable!() };
                    let vals: Vec<Value> =
                        args.iter().map(|a| memo[a].clone()).collect();
                    memo.insert(e, apply_op(*op, &vals)?);
                }
            }
        }
        Ok(memo[&root].clone())
    }
}

/// Concrete semantics of a single operator application.
pub fn apply_op(op: Op, vals: &[Value]) -> Result<Value, EvalError> {
    let bits = |i: usize| vals[i].as_bits();
    let w = |i: usize| match &vals[i] {
        Value::Bits { width, .. } => *width,
        _ => panic!("operand {i} of {} is not a bit-vector", op.name()),
    };
    Ok(match op {
        Op::Add => Value::bits(w(0), bits(0) + bits(1)),
        Op::Sub => {
            let m = BigUint::one() << w(0);
            Value::bits(w(0), (m + bits(0)) - bits(1))
        }
        Op::Mul => Value::bits(w(0), bits(0) * bits(1)),
        Op::Udiv => {
            if bits(1).is_zero() {
                Value::bits(w(0), mask(w(0)))
            } else {
                Value::bits(w(0), bits(0) / bits(1))
            }
        }
        Op::Urem => {
            if bits(1).is_zero() {
                Value::bits(w(0), bits(0).clone())
            } else {
                Value::bits(w(0), bits(0) % bits(1))
            }
        }
        Op::And => Value::bits(w(0), bits(0) & bits(1)),
        Op::Or => Value::bits(w(0), bits(0) | bits(1)),
        Op::Xor => Value::bits(w(0), bits(0) ^ bits(1)),
        Op::Not => Value::bits(w(0), mask(w(0)) ^ bits(0)),
        Op::Concat => {
            let mut acc = BigUint::zero();
            let mut width = 0;
            for v in vals {
                let Value::Bits { width: vw, value } = v else {
                    panic!("concat operand is not a bit-vector")
                };
                acc = (acc << *vw) | value.clone();
                width += *vw;
            }
            Value::Bits { width, value: acc }
        }
        Op::Extract { hi, lo } => Value::bits(hi - lo + 1, bits(0) >> lo),
        Op::ShlConst(k) => {
            if k >= w(0) {
                Value::bits(w(0), 0u32)
            } else {
                Value::bits(w(0), bits(0) << k)
            }
        }
        Op::LshrConst(k) => {
            if k >= w(0) {
                Value::bits(w(0), 0u32)
            } else {
                Value::bits(w(0), bits(0) >> k)
            }
        }
        Op::Shl | Op::Lshr => {
            let width = w(0);
            let amt = bits(1);
            let shifted = if amt >= &BigUint::from(width) {
                BigUint::zero()
            } else {
                let k = amt.to_u32().expect("shift amount fits u32");
                if op == Op::Shl {
                    bits(0) << k
                } else {
                    bits(0) >> k
                }
            };
            Value::bits(width, shifted)
        }
        Op::Eq => Value::Bool(bits(0) == bits(1)),
        Op::Ult => Value::Bool(bits(0) < bits(1)),
        Op::Ule => Value::Bool(bits(0) <= bits(1)),
        Op::Ite | Op::BoolIte => {
            if vals[0].as_bool() {
                vals[1].clone()
            } else {
                vals[2].clone()
            }
        }
        Op::BoolNot => Value::Bool(!vals[0].as_bool()),
        Op::BoolAnd => Value::Bool(vals[0].as_bool() && vals[1].as_bool()),
        Op::BoolOr => Value::Bool(vals[0].as_bool() || vals[1].as_bool()),
        Op::ArrayRead => {
            let Value::Array(a) = &vals[0] else { panic!("read of non-array") };
            Value::Bits { width: a.elem_width, value: a.get(bits(1)) }
        }
        Op::ArrayUpdate => {
            let Value::Array(a) = &vals[0] else { panic!("update of non-array") };
            let mut a = a.clone();
            a.set(bits(1).clone(), bits(2).clone());
            Value::Array(a)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_addition() {
        // 9 + 9 wraps to 2 at width 4
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 4);
        let e = p.add(a, a);
        let mut env = Env::new();
        env.insert("a".into(), Value::bits(4, 9u32));
        assert_eq!(p.eval(e, &env).unwrap(), Value::bits(4, 2u32));
    }

    #[test]
    fn comparison() {
        let mut p = ExprPool::new();
        let a = p.bv_const(4, 3u32);
        let b = p.bv_const(4, 5u32);
        let e = p.mk(Op::Ult, &[a, b]);
        assert_eq!(p.as_bool_const(e), Some(true));
    }

    #[test]
    fn udiv_by_zero_is_all_ones() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 4);
        let z = p.bv_var("z", 4);
        let e = p.udiv(a, z);
        let r = p.urem(a, z);
        let mut env = Env::new();
        env.insert("a".into(), Value::bits(4, 5u32));
        env.insert("z".into(), Value::bits(4, 0u32));
        assert_eq!(p.eval(e, &env).unwrap(), Value::bits(4, 15u32));
        assert_eq!(p.eval(r, &env).unwrap(), Value::bits(4, 5u32));
    }

    #[test]
    fn missing_variable_is_an_error() {
        let mut p = ExprPool::new();
        let v = p.bv_var("ghost", 8);
        assert!(matches!(p.eval(v, &Env::new()), Err(EvalError::MissingVar(_))));
    }

    #[test]
    fn array_read_update() {
        let mut p = ExprPool::new();
        let a = p.array_var("m", 2, 8);
        let i = p.bv_const(2, 1u32);
        let j = p.bv_const(2, 2u32);
        let x = p.bv_const(8, 0xabu32);
        let upd = p.array_update(a, i, x);
        let r_hit = p.array_read(upd, i);
        let r_miss = p.array_read(upd, j);
        // read-over-write with equal index resolves structurally
        assert_eq!(r_hit, x);
        let mut env = Env::new();
        env.insert(
            "m".into(),
            Value::Array(ArrayValue::filled(2, 8, BigUint::from(7u32))),
        );
        assert_eq!(p.eval(r_miss, &env).unwrap(), Value::bits(8, 7u32));
    }
}
