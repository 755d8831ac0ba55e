use serde::Serialize;

use super::{
    analysis, divergence_premise, guard_premise, CertVerdict, Certificate, CertifyError, Check, GuardRoute, SCHEMA,
};
use crate::equations::check_guardedness;
use crate::equiv::{decide, Verdict};
use crate::model::Model;

/// Outcome of re-executing one recorded premise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayItem {
    pub premise: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub items: Vec<ReplayItem>,
}

impl ReplayReport {
    pub fn all_ok(&self) -> bool {
        self.items.iter().all(|i| i.ok)
    }

    fn push(&mut self, premise: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.items.push(ReplayItem { premise: premise.into(), ok, detail: detail.into() });
    }
}

/// Re-executes every premise and cross-check recorded in `cert` against
/// `model`, and checks that the verdict follows from them.
pub fn replay(model: &Model, cert: &Certificate) -> Result<ReplayReport, CertifyError> {
    let mut out = ReplayReport { items: Vec::new() };
    out.push("schema", cert.schema == SCHEMA, cert.schema.clone());
    let s = model.system(&cert.system).ok_or_else(|| CertifyError::UnknownSystem(cert.system.clone()))?;
    out.push("equations", super::show_equations(s) == cert.equations, cert.equations.join("; "));

    let report = check_guardedness(s, cert.guard.max_unfold);
    let a = analysis(s, report.depth.unwrap_or(0), &model.env)?;
    let mut guard = guard_premise(s, &report, &a.system);
    if cert.guard.route == Some(GuardRoute::MilnerSequential) && guard.milner_applicable {
        guard.route = Some(GuardRoute::MilnerSequential);
    }
    out.push("guardedness", guard == cert.guard, format!("route {:?}", guard.route));

    if let Some(recorded) = &cert.divergence {
        let d = divergence_premise(&a, &cert.config)?;
        out.push("divergence", d == *recorded, format!("class {:?}, route {:?}", d.class, d.route));
    }

    // Terms may mention the analysed system's solution constants.
    let mut scoped = model.clone();
    scoped.env = a.env.clone();
    let rerun = |c: &Check| -> Result<(bool, String), CertifyError> {
        let parse = |t: &str| scoped.parse_term(t).map_err(|e| format!("cannot parse `{t}`: {e}"));
        let (lhs, rhs) = match (parse(&c.lhs), parse(&c.rhs)) {
            (Ok(l), Ok(r)) => (l, r),
            (Err(e), _) | (_, Err(e)) => return Ok((false, e)),
        };
        let r = decide(c.relation, &lhs, &rhs, &scoped.env, cert.config.max_states)?;
        let again = Check::new(&lhs, &rhs, &r);
        Ok((again == *c, format!("{} {} {}: {:?}", c.lhs, c.relation, c.rhs, r.verdict)))
    };
    for sc in &cert.solution_checks {
        let (ok, detail) = rerun(&sc.check)?;
        out.push(format!("solution {} for equation {}", sc.candidates, sc.equation), ok, detail);
    }
    for c in &cert.cross_checks {
        let (ok, detail) = rerun(c)?;
        out.push("cross-check", ok && c.verdict == Verdict::Holds, detail);
    }

    if cert.verdict.is_certified() {
        let guard_ok = cert.guard.route.is_some();
        let milner = cert.guard.route == Some(GuardRoute::MilnerSequential);
        let needs_divergence = !milner && cert.direction != Some(super::Direction::Min);
        let divergence_ok = !needs_divergence || cert.divergence.as_ref().is_some_and(|d| d.route.is_some());
        let checks_ok =
            !cert.solution_checks.is_empty() && cert.solution_checks.iter().all(|c| c.check.verdict == Verdict::Holds);
        let shape_ok = match cert.verdict {
            CertVerdict::CertifiedEqual => cert.direction.is_none(),
            CertVerdict::CertifiedBelowSyntacticSolution => cert.direction == Some(super::Direction::Max),
            _ => cert.direction == Some(super::Direction::Min),
        };
        out.push(
            "verdict",
            guard_ok && divergence_ok && checks_ok && shape_ok,
            format!(
                "{}: guard {guard_ok}, divergence {divergence_ok}, solutions {checks_ok}, direction {shape_ok}",
                cert.verdict.name()
            ),
        );
    } else {
        out.push("verdict", true, cert.verdict.name());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_unique_solution, CertifyConfig};
    use crate::equiv::Relation;

    const SRC: &str = "
        system S { X = a.X; }
        const K = tau.a.a.K;
        const H = a.H;
        candidates CK for S = (K);
        candidates CH for S = (H);
    ";

    #[test]
    fn a_fresh_certificate_replays() {
        let m = Model::from_source(SRC).unwrap();
        let c =
            certify_unique_solution(&m, "S", &["CK", "CH"], Relation::WeakBisim, &CertifyConfig::default()).unwrap();
        let r = replay(&m, &c).unwrap();
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn a_tampered_check_does_not_replay() {
        let m = Model::from_source(SRC).unwrap();
        let mut c =
            certify_unique_solution(&m, "S", &["CK", "CH"], Relation::WeakBisim, &CertifyConfig::default()).unwrap();
        c.solution_checks[0].check.rhs = "b.K".into();
        let r = replay(&m, &c).unwrap();
        assert!(!r.all_ok());
    }
}
