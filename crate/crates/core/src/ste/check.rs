//! Discharging obligations through the external solver: query sequencing,
//! verdict construction, counterexample reconstruction and vacuity probing.

use super::{AntFailPolicy, AntFailRef, CheckRef, Obligation, Query};
use crate::expr::{ExprPool, Value};
use crate::solver::{self, SatStatus, SolverAnswer, SolverConfig, SolverError};
use std::collections::BTreeMap;
use std::time::Duration;

/// A satisfying assignment mapped back to engine names.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub values: BTreeMap<String, Value>,
    /// Symbols the solver's model omitted; they default to zero.
    pub defaulted: Vec<String>,
}

impl Assignment {
    /// Spec-variable slice of the assignment.
    pub fn guard_values<'a>(
        &'a self,
        guard_vars: &'a [(String, u32)],
    ) -> impl Iterator<Item = (&'a str, &'a Value)> {
        guard_vars.iter().filter_map(|(n, _)| self.values.get(n).map(|v| (n.as_str(), v)))
    }

    /// Division witnesses present in the model.
    pub fn witnesses(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.values
            .iter()
            .filter(|(n, _)| n.starts_with("i!"))
            .map(|(n, v)| (n.as_str(), v))
    }
}

#[derive(Debug, Clone)]
pub enum VerifResult {
    Pass { vacuous: bool },
    Fail { assignment: Assignment, violated: Vec<CheckRef> },
    AntecedentFailure { assignment: Assignment, conflicts: Vec<AntFailRef> },
    Unknown { reason: String },
}

impl VerifResult {
    pub fn verdict_str(&self) -> &'static str {
        match self {
            VerifResult::Pass { .. } => "PASS",
            VerifResult::Fail { .. } => "FAIL",
            VerifResult::AntecedentFailure { .. } => "ANTECEDENT-FAILURE",
            VerifResult::Unknown { .. } => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QueryStat {
    pub query: Query,
    pub status: SatStatus,
    pub wall: Duration,
    pub validated: Option<bool>,
}

#[derive(Debug)]
pub struct CheckReport {
    pub verdict: VerifResult,
    pub queries: Vec<QueryStat>,
    pub warnings: Vec<String>,
}

fn run_query(
    pool: &mut ExprPool,
    ob: &Obligation,
    query: Query,
    cfg: &SolverConfig,
    stats: &mut Vec<QueryStat>,
) -> Result<(SolverAnswer, solver::SmtScript), SolverError> {
    let script = emit_query(pool, ob, query);
    let answer = solver::solve(pool, &script, cfg)?;
    stats.push(QueryStat {
        query,
        status: answer.status,
        wall: answer.wall,
        validated: answer.validated,
    });
    Ok((answer, script))
}

/// Serialize one query of an obligation (also the `--dump-smt` surface).
pub fn emit_query(pool: &mut ExprPool, ob: &Obligation, query: Query) -> solver::SmtScript {
    solver::emit(pool, ob, query)
}

fn assignment_of(script: &solver::SmtScript, answer: &SolverAnswer) -> Assignment {
    let env = solver::model_env(script, answer);
    Assignment { values: env.into_iter().collect(), defaulted: answer.defaulted.clone() }
}

/// Sequence the obligation's queries and produce a verdict.
///
/// Under the report policy an antecedent-failure query runs first; then the
/// negated-consequent query. A pass earned with an unsatisfiable constraint
/// or antecedent set is flagged as vacuous via a follow-up probe.
pub fn check(pool: &mut ExprPool, ob: &Obligation, cfg: &SolverConfig) -> CheckReport {
    let mut stats = Vec::new();
    let mut warnings = ob.warnings.clone();
    let unknown = |reason: String, stats: Vec<QueryStat>, warnings: Vec<String>| CheckReport {
        verdict: VerifResult::Unknown { reason },
        queries: stats,
        warnings,
    };

    if ob.policy == AntFailPolicy::Report && !ob.ant_fail.is_empty() {
        let conds: Vec<_> = ob.ant_fail.iter().map(|a| a.cond).collect();
        let any = pool.or_all(&conds);
        if !pool.is_false(any) {
            match run_query(pool, ob, Query::AntFail, cfg, &mut stats) {
                Err(e) => return unknown(e.to_string(), stats, warnings),
                Ok((answer, script)) => match answer.status {
                    SatStatus::Sat => {
                        if answer.validated == Some(false) {
                            return unknown(
                                "solver model failed engine-side validation".into(),
                                stats,
                                warnings,
                            );
                        }
                        let assignment = assignment_of(&script, &answer);
                        let env = solver::model_env(&script, &answer);
                        let conflicts: Vec<AntFailRef> = ob
                            .ant_fail
                            .iter()
                            .filter(|a| {
                                matches!(pool.eval(a.cond, &env), Ok(Value::Bool(true)))
                            })
                            .cloned()
                            .collect();
                        return CheckReport {
                            verdict: VerifResult::AntecedentFailure { assignment, conflicts },
                            queries: stats,
                            warnings,
                        };
                    }
                    SatStatus::Unsat => {}
                    SatStatus::Unknown => {
                        let reason = if answer.timed_out {
                            "solver timeout on the antecedent-failure query".to_string()
                        } else {
                            format!(
                                "solver returned unknown on the antecedent-failure query: {}",
                                first_line(&answer.raw_output)
                            )
                        };
                        return unknown(reason, stats, warnings);
                    }
                },
            }
        }
    }

    // consequent query; a constant-true OK needs no solver
    if pool.is_true(ob.ok) {
        return CheckReport {
            verdict: VerifResult::Pass { vacuous: false },
            queries: stats,
            warnings,
        };
    }
    match run_query(pool, ob, Query::NegOk, cfg, &mut stats) {
        Err(e) => unknown(e.to_string(), stats, warnings),
        Ok((answer, script)) => match answer.status {
            SatStatus::Sat => {
                if answer.validated == Some(false) {
                    return unknown(
                        "solver model failed engine-side validation".into(),
                        stats,
                        warnings,
                    );
                }
                let assignment = assignment_of(&script, &answer);
                let env = solver::model_env(&script, &answer);
                let violated: Vec<CheckRef> = ob
                    .per_check
                    .iter()
                    .filter(|c| matches!(pool.eval(c.ok, &env), Ok(Value::Bool(false))))
                    .cloned()
                    .collect();
                CheckReport {
                    verdict: VerifResult::Fail { assignment, violated },
                    queries: stats,
                    warnings,
                }
            }
            SatStatus::Unsat => {
                // distinguish a real pass from an empty assignment space
                let mut vacuous = false;
                match run_query(pool, ob, Query::Vacuity, cfg, &mut stats) {
                    Ok((probe, _)) => match probe.status {
                        SatStatus::Unsat => {
                            vacuous = true;
                            warnings.push(
                                "vacuous pass: no assignment satisfies the constraint and \
                                 side conditions"
                                    .into(),
                            );
                        }
                        SatStatus::Sat => {}
                        SatStatus::Unknown => {
                            warnings.push("vacuity probe inconclusive".into());
                        }
                    },
                    Err(e) => warnings.push(format!("vacuity probe failed: {e}")),
                }
                CheckReport {
                    verdict: VerifResult::Pass { vacuous },
                    queries: stats,
                    warnings,
                }
            }
            SatStatus::Unknown => {
                let reason = if answer.timed_out {
                    "solver timeout on the consequent query".to_string()
                } else {
                    format!(
                        "solver returned unknown on the consequent query: {}",
                        first_line(&answer.raw_output)
                    )
                };
                unknown(reason, stats, warnings)
            }
        },
    }
}

/// Optional reachability query for a zero divisor; `None` when the design
/// divides nowhere.
pub fn check_div_zero(
    pool: &mut ExprPool,
    ob: &Obligation,
    cfg: &SolverConfig,
) -> Option<Result<(SatStatus, Option<Assignment>), SolverError>> {
    if ob.div_zero_conds.is_empty() {
        return None;
    }
    let cond = pool.or_all(&ob.div_zero_conds);
    if pool.is_false(cond) {
        return Some(Ok((SatStatus::Unsat, None)));
    }
    let script = emit_query(pool, ob, Query::DivZero);
    Some(match solver::solve(pool, &script, cfg) {
        Err(e) => Err(e),
        Ok(answer) => {
            let asg = (answer.status == SatStatus::Sat)
                .then(|| assignment_of(&script, &answer));
            Ok((answer.status, asg))
        }
    })
}

fn first_line(s: &str) -> &str {
    s.lines().next().unwrap_or("")
}
