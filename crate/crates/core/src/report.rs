//! Task execution over a problem file and the serializable reports the CLI
//! prints. Reports are deterministic: identical inputs produce identical
//! serialized output.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::continuation::{canonical_current, laurent_coeffs, principal_value};
use crate::corpus::{battery, CheckOutcome, FuzzInstance};
use crate::error::EngineError;
use crate::exact::{rational_string, ExactValue};
use crate::form::{ConjForm, PoledForm};
use crate::lambda::LaurentWindow;
use crate::oracle::{build_f, pole_audit, pole_bound, PoleAuditEntry};
use crate::pole::{bump_factor, QMIntegrand, Section, Stratification};
use crate::problem::{ProblemFile, Task};
use crate::residues::{
    check_aeppli_crossings, check_metric_dependence, check_residue_pairing, res_aeppli_iter,
    IdentityReport, MetricReport, ResidueRepresentative,
};

/// Result of one task.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum TaskReport {
    Laurent {
        kappa: usize,
        o_s: u64,
        continuation: Vec<(i64, ExactValue)>,
        oracle: LaurentWindow,
        agreement: bool,
    },
    Canonical {
        value: ExactValue,
        kappa: usize,
        stratification: Stratification,
    },
    Pv {
        value: ExactValue,
    },
    Aeppli {
        representative: ResidueRepresentative,
        identity: IdentityReport,
    },
    Dolbeault {
        identity: IdentityReport,
    },
    PoleAudit {
        bound: Option<String>,
        entries: Vec<PoleAuditEntry>,
        pass: bool,
    },
    MetricDependence {
        report: MetricReport,
    },
    VerifyAll {
        checks: Vec<CheckOutcome>,
        pass: bool,
    },
}

impl TaskReport {
    /// Pass flag for tasks that verify something; pure computations are None.
    pub fn verification_pass(&self) -> Option<bool> {
        match self {
            TaskReport::Laurent { agreement, .. } => Some(*agreement),
            TaskReport::Canonical { .. } | TaskReport::Pv { .. } => None,
            TaskReport::Aeppli { identity, .. } => Some(identity.pass),
            TaskReport::Dolbeault { identity } => Some(identity.pass),
            TaskReport::PoleAudit { pass, .. } => Some(*pass),
            TaskReport::MetricDependence { report } => Some(report.pass),
            TaskReport::VerifyAll { pass, .. } => Some(*pass),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tasks: Vec<TaskReport>,
    pub pass: bool,
}

/// Executes the problem's tasks in declaration order. `truncation` extends
/// the oracle's exponential truncation beyond the default κ.
pub fn execute(problem: &ProblemFile, truncation: Option<u32>) -> Result<RunReport, EngineError> {
    let (qm, section) = problem.instantiate()?;
    let mut tasks = Vec::with_capacity(problem.tasks.len());
    for task in &problem.tasks {
        tasks.push(run_task(problem, &qm, &section, *task, truncation)?);
    }
    let pass = tasks.iter().all(|t| t.verification_pass().unwrap_or(true));
    Ok(RunReport { tasks, pass })
}

fn run_task(
    problem: &ProblemFile,
    qm: &QMIntegrand,
    section: &Section,
    task: Task,
    truncation: Option<u32>,
) -> Result<TaskReport, EngineError> {
    let kappa = qm.kappa();
    match task {
        Task::Laurent => {
            let cont = laurent_coeffs(qm, section)?;
            let trunc = truncation.unwrap_or(kappa as u32).max(kappa as u32);
            let oracle = build_f(qm, section, trunc)?;
            let window = oracle.laurent_window();
            let bare = oracle.bare_window();
            let agreement =
                (0..=kappa).all(|r| cont.coefficient(r) == bare.coefficient(-(r as i64)));
            Ok(TaskReport::Laurent {
                kappa,
                o_s: cont.o_s,
                continuation: cont
                    .coefficients
                    .iter()
                    .map(|(r, v)| (-(*r as i64), v.clone()))
                    .collect(),
                oracle: window,
                agreement,
            })
        }
        Task::Canonical => Ok(TaskReport::Canonical {
            value: canonical_current(qm),
            kappa,
            stratification: qm.pole().stratification(),
        }),
        Task::Pv => Ok(TaskReport::Pv {
            value: principal_value(qm, section)?,
        }),
        Task::Aeppli => {
            let stratum: BTreeSet<usize> = qm.pole().two_sided_support().into_iter().collect();
            let representative = res_aeppli_iter(qm, &stratum);
            let identity = check_aeppli_crossings(qm)?;
            Ok(TaskReport::Aeppli {
                representative,
                identity,
            })
        }
        Task::Dolbeault => {
            let dim = qm.dim();
            if !qm.pole().is_semi_meromorphic() || qm.pole().polar_support().iter().any(|&j| j != 0)
            {
                return Err(EngineError::Invalid(
                    "dolbeault task needs a purely holomorphic pole in variable 1".into(),
                ));
            }
            let order = qm.pole().holo()[0];
            if problem.bump_exponents[0] < order + 1 {
                return Err(EngineError::BumpTooSmall {
                    var: 1,
                    got: problem.bump_exponents[0],
                    need: order + 1,
                });
            }
            // α = (P/z_1^m)·dz against the bump test form of bidegree (0, d-1)
            let alpha = PoledForm::new(
                ConjForm::from_term(dim, (0..dim).collect(), vec![], problem.base_numerator()?),
                0,
                order,
            );
            let mut bumps = crate::poly::ConjPolynomial::one(dim);
            for j in 0..dim {
                bumps = bumps.mul(&bump_factor(dim, j).pow(problem.bump_exponents[j]));
            }
            let xi = ConjForm::from_term(dim, vec![], (1..dim).collect(), bumps);
            let identity = check_residue_pairing(&alpha, &xi)?;
            Ok(TaskReport::Dolbeault { identity })
        }
        Task::PoleAudit => {
            let trunc = truncation.unwrap_or(kappa as u32).max(kappa as u32);
            let oracle = build_f(qm, section, trunc)?;
            let entries = pole_audit(&oracle, qm.pole(), section);
            let pass = entries.iter().all(|e| e.bound_satisfied);
            Ok(TaskReport::PoleAudit {
                bound: pole_bound(qm.pole(), section).map(|b| rational_string(&b)),
                entries,
                pass,
            })
        }
        Task::MetricDependence => Ok(TaskReport::MetricDependence {
            report: check_metric_dependence(qm, section)?,
        }),
        Task::VerifyAll => {
            let instance = FuzzInstance {
                problem: problem.clone(),
                qm: qm.clone(),
                section: section.clone(),
                residue_pair: None,
                poincare_pair: None,
            };
            let checks = battery(&instance, true);
            let pass = checks.iter().all(|c| c.pass);
            Ok(TaskReport::VerifyAll { checks, pass })
        }
    }
}

/// Human-readable rendering of a run report.
pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    for task in &report.tasks {
        match task {
            TaskReport::Laurent {
                kappa,
                o_s,
                continuation,
                oracle,
                agreement,
            } => {
                out.push_str(&format!("laurent (kappa = {kappa}, o(s) = {o_s})\n"));
                for (order, value) in continuation {
                    out.push_str(&format!("  continuation C[{order}] = {value}\n"));
                }
                out.push_str(&format!("  oracle window = {oracle}\n"));
                out.push_str(&format!(
                    "  pathway agreement: {}\n",
                    if *agreement { "exact" } else { "MISMATCH" }
                ));
            }
            TaskReport::Canonical { value, kappa, .. } => {
                out.push_str(&format!("canonical (kappa = {kappa})\n  value = {value}\n"));
            }
            TaskReport::Pv { value } => {
                out.push_str(&format!("pv\n  value = {value}\n"));
            }
            TaskReport::Aeppli { identity, .. } => {
                out.push_str(&format!(
                    "aeppli\n  lhs = {}\n  rhs = {}\n  difference = {} [{}]\n",
                    identity.lhs,
                    identity.rhs,
                    identity.difference,
                    if identity.pass { "pass" } else { "FAIL" }
                ));
            }
            TaskReport::Dolbeault { identity } => {
                out.push_str(&format!(
                    "dolbeault\n  lhs = {}\n  rhs = {}\n  difference = {} [{}]\n",
                    identity.lhs,
                    identity.rhs,
                    identity.difference,
                    if identity.pass { "pass" } else { "FAIL" }
                ));
            }
            TaskReport::PoleAudit {
                bound,
                entries,
                pass,
            } => {
                out.push_str(&format!(
                    "pole-audit (bound = {})\n",
                    bound.as_deref().unwrap_or("none")
                ));
                for e in entries {
                    out.push_str(&format!(
                        "  pole at {} (order {}, slice {}): {}\n",
                        rational_string(&e.location),
                        e.order,
                        e.slice,
                        if e.bound_satisfied {
                            "within bound"
                        } else {
                            "VIOLATION"
                        }
                    ));
                }
                out.push_str(&format!("  [{}]\n", if *pass { "pass" } else { "FAIL" }));
            }
            TaskReport::MetricDependence { report } => {
                out.push_str(&format!("metric-dependence (kappa = {})\n", report.kappa));
                for e in &report.entries {
                    out.push_str(&format!(
                        "  r = {}: polynomial degree bound {}, top coefficient {} [{}]\n",
                        e.r,
                        if e.finite_difference_zero {
                            "holds"
                        } else {
                            "FAILS"
                        },
                        e.top_coefficient,
                        if e.matches {
                            "matches residue formula"
                        } else {
                            "MISMATCH"
                        }
                    ));
                }
            }
            TaskReport::VerifyAll { checks, pass } => {
                out.push_str("verify-all\n");
                for c in checks {
                    out.push_str(&format!(
                        "  {:<34} {}{}\n",
                        c.name,
                        if c.pass { "pass" } else { "FAIL" },
                        if c.detail.is_empty() || c.pass {
                            String::new()
                        } else {
                            format!(" ({})", c.detail)
                        }
                    ));
                }
                out.push_str(&format!("  [{}]\n", if *pass { "pass" } else { "FAIL" }));
            }
        }
    }
    out.push_str(&format!(
        "overall: {}\n",
        if report.pass { "pass" } else { "FAIL" }
    ));
    out
}
