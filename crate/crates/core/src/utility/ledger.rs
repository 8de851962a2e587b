use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use super::features::Lottery;
use super::function::UtilityFunction;
use crate::error::{Error, Result};
use crate::observer::DisclosureMode;
use crate::tolerance;

/// Which past utility functions must approve a modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardMode {
    /// Every modification is accepted.
    None,
    /// Only the current utility function is consulted.
    CurrentOnly,
    /// The current utility function and every earlier one are consulted.
    #[default]
    FullChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonRole {
    /// Must strictly improve.
    Current,
    /// Must not be made worse.
    Earlier,
}

/// Expected utility under one history entry, with and without the candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardComparison {
    /// Position in the ledger history (0 is the original utility function).
    pub index: usize,
    pub role: ComparisonRole,
    pub status_quo: f64,
    pub adopted: f64,
    pub passed: bool,
}

impl GuardComparison {
    pub fn gain(&self) -> f64 {
        self.adopted - self.status_quo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardReport {
    pub mode: GuardMode,
    pub candidate: UtilityFunction,
    pub comparisons: Vec<GuardComparison>,
    pub accepted: bool,
}

impl GuardReport {
    /// First comparison that failed, if any.
    pub fn first_failure(&self) -> Option<&GuardComparison> {
        self.comparisons.iter().find(|c| !c.passed)
    }

    pub fn current(&self) -> Option<&GuardComparison> {
        self.comparisons
            .iter()
            .find(|c| c.role == ComparisonRole::Current)
    }
}

/// What was known when a transition was accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    /// History length before the transition.
    pub step: usize,
    pub status_quo: Lottery,
    pub adopted: Lottery,
    pub current_gain: f64,
    /// Smallest gain over earlier entries that the guard consulted.
    pub worst_earlier_gain: Option<f64>,
}

/// Ordered history of an agent's utility functions.
///
/// Serializes as an ordered JSON array of utility functions, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModificationLedger {
    history: Vec<UtilityFunction>,
    guard_mode: GuardMode,
    audits: Vec<AuditRecord>,
}

impl Serialize for ModificationLedger {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.history.len()))?;
        for u in &self.history {
            seq.serialize_element(u)?;
        }
        seq.end()
    }
}

impl ModificationLedger {
    pub fn new(initial: UtilityFunction, guard_mode: GuardMode) -> Self {
        ModificationLedger {
            history: vec![initial],
            guard_mode,
            audits: Vec::new(),
        }
    }

    pub fn from_history(history: Vec<UtilityFunction>, guard_mode: GuardMode) -> Result<Self> {
        if history.is_empty() {
            return Err(Error::InvalidLedger("history is empty".into()));
        }
        Ok(ModificationLedger {
            history,
            guard_mode,
            audits: Vec::new(),
        })
    }

    /// Parses the JSON array form produced by serialization.
    pub fn from_json(json: &str, guard_mode: GuardMode) -> Result<Self> {
        let history: Vec<UtilityFunction> =
            serde_json::from_str(json).map_err(|e| Error::InvalidLedger(e.to_string()))?;
        Self::from_history(history, guard_mode)
    }

    pub fn current(&self) -> &UtilityFunction {
        self.history.last().expect("ledger history is never empty")
    }

    pub fn original(&self) -> &UtilityFunction {
        &self.history[0]
    }

    pub fn history(&self) -> &[UtilityFunction] {
        &self.history
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn guard_mode(&self) -> GuardMode {
        self.guard_mode
    }

    pub fn audits(&self) -> &[AuditRecord] {
        &self.audits
    }

    /// Replays every audit: for each transition `j` and each earlier entry
    /// `i < j`, the adopted lottery must not be worse under entry `i`.
    pub fn verify_chain(&self) -> bool {
        self.audits.iter().all(|a| {
            self.history[..a.step].iter().all(|u| {
                u.expected(&a.adopted) >= u.expected(&a.status_quo) - tolerance::GUARD_SLACK
            })
        })
    }

    fn push(&mut self, candidate: UtilityFunction, audit: AuditRecord) {
        self.history.push(candidate);
        self.audits.push(audit);
    }
}

/// Compares keeping the current utility function against adopting `candidate`.
///
/// The current entry must gain more than [`tolerance::GUARD_STRICT`]; in
/// full-chain mode every earlier entry must lose no more than
/// [`tolerance::GUARD_SLACK`].
pub fn guard_check(
    ledger: &ModificationLedger,
    candidate: &UtilityFunction,
    status_quo: &Lottery,
    adopted: &Lottery,
) -> Result<GuardReport> {
    let k = ledger.history.len();
    if k == 0 {
        return Err(Error::InvalidLedger("history is empty".into()));
    }
    let required: Vec<usize> = match ledger.guard_mode {
        GuardMode::None => Vec::new(),
        GuardMode::CurrentOnly => vec![k - 1],
        GuardMode::FullChain => (0..k).collect(),
    };
    let comparisons: Vec<GuardComparison> = required
        .into_iter()
        .map(|index| {
            let u = &ledger.history[index];
            let sq = u.expected(status_quo);
            let ad = u.expected(adopted);
            let (role, passed) = if index == k - 1 {
                (ComparisonRole::Current, ad - sq > tolerance::GUARD_STRICT)
            } else {
                (ComparisonRole::Earlier, ad - sq >= -tolerance::GUARD_SLACK)
            };
            GuardComparison {
                index,
                role,
                status_quo: sq,
                adopted: ad,
                passed,
            }
        })
        .collect();
    let accepted = comparisons.iter().all(|c| c.passed);
    Ok(GuardReport {
        mode: ledger.guard_mode,
        candidate: candidate.clone(),
        comparisons,
        accepted,
    })
}

/// An agent: identity, utility history and how much of it others can see.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    pub id: u64,
    pub ledger: ModificationLedger,
    pub disclosure: DisclosureMode,
}

impl Agent {
    pub fn new(id: u64, initial: UtilityFunction, guard_mode: GuardMode) -> Self {
        Agent {
            id,
            ledger: ModificationLedger::new(initial, guard_mode),
            disclosure: DisclosureMode::Full,
        }
    }

    pub fn with_disclosure(mut self, disclosure: DisclosureMode) -> Self {
        self.disclosure = disclosure;
        self
    }

    pub fn utility(&self) -> &UtilityFunction {
        self.ledger.current()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModificationOutcome {
    /// The agent after the attempt; unchanged when the guard rejected.
    pub agent: Agent,
    pub report: GuardReport,
}

impl ModificationOutcome {
    pub fn accepted(&self) -> bool {
        self.report.accepted
    }
}

/// Appends `candidate` to the agent's ledger iff the guard accepts it.
pub fn apply_modification(
    agent: &Agent,
    candidate: &UtilityFunction,
    status_quo: &Lottery,
    adopted: &Lottery,
) -> Result<ModificationOutcome> {
    let report = guard_check(&agent.ledger, candidate, status_quo, adopted)?;
    let mut next = agent.clone();
    if report.accepted {
        let current_gain = report.current().map(|c| c.gain()).unwrap_or(0.0);
        let worst_earlier_gain = report
            .comparisons
            .iter()
            .filter(|c| c.role == ComparisonRole::Earlier)
            .map(|c| c.gain())
            .reduce(f64::min);
        next.ledger.push(
            candidate.clone(),
            AuditRecord {
                step: agent.ledger.len(),
                status_quo: status_quo.clone(),
                adopted: adopted.clone(),
                current_gain,
                worst_earlier_gain,
            },
        );
    }
    Ok(ModificationOutcome {
        agent: next,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::FeatureVector;

    fn clips(n: f64) -> Lottery {
        Lottery::certain(FeatureVector::new().with("paperclips", n))
    }

    fn mix(pc: f64, tt: f64) -> Lottery {
        Lottery::certain(
            FeatureVector::new()
                .with("paperclips", pc)
                .with("thumbtacks", tt),
        )
    }

    #[test]
    fn current_only_accepts_alliance_gain() {
        let ledger = ModificationLedger::new(
            UtilityFunction::single("paperclips", 1.0),
            GuardMode::CurrentOnly,
        );
        let candidate = UtilityFunction::new([("paperclips", 0.5), ("thumbtacks", 0.5)]).unwrap();
        let r = guard_check(&ledger, &candidate, &clips(4.0), &clips(7.0)).unwrap();
        assert!(r.accepted);
        assert_eq!(r.comparisons.len(), 1);
        assert_eq!(r.comparisons[0].status_quo, 4.0);
        assert_eq!(r.comparisons[0].adopted, 7.0);
    }

    #[test]
    fn full_chain_rejects_hating_the_original_goal() {
        let ledger = ModificationLedger::from_history(
            vec![
                UtilityFunction::single("paperclips", 1.0),
                UtilityFunction::new([("paperclips", 0.5), ("thumbtacks", 0.5)]).unwrap(),
            ],
            GuardMode::FullChain,
        )
        .unwrap();
        let candidate = UtilityFunction::new([("thumbtacks", 0.5), ("paperclips", -0.5)]).unwrap();
        let war = mix(3.0, 3.0);
        let capitulate = mix(0.0, 20.0);
        let r = guard_check(&ledger, &candidate, &war, &capitulate).unwrap();
        assert!(!r.accepted);
        let fail = r.first_failure().unwrap();
        assert_eq!(fail.index, 0);
        assert_eq!(fail.role, ComparisonRole::Earlier);
        // The current entry alone would have approved.
        assert!(r.current().unwrap().passed);
    }

    #[test]
    fn identity_modification_is_rejected() {
        let u = UtilityFunction::single("paperclips", 1.0);
        let ledger = ModificationLedger::new(u.clone(), GuardMode::FullChain);
        let r = guard_check(&ledger, &u, &clips(5.0), &clips(5.0)).unwrap();
        assert!(!r.accepted);
    }

    #[test]
    fn empty_history_is_invalid() {
        assert!(matches!(
            ModificationLedger::from_history(Vec::new(), GuardMode::None),
            Err(Error::InvalidLedger(_))
        ));
    }

    #[test]
    fn apply_modification_appends_or_keeps() {
        let agent = Agent::new(
            1,
            UtilityFunction::single("paperclips", 1.0),
            GuardMode::FullChain,
        );
        let candidate = UtilityFunction::new([("paperclips", 0.5), ("thumbtacks", 0.5)]).unwrap();
        let accepted = apply_modification(&agent, &candidate, &clips(4.0), &clips(7.0)).unwrap();
        assert!(accepted.accepted());
        assert_eq!(accepted.agent.ledger.len(), 2);
        assert_eq!(accepted.agent.utility(), &candidate);

        let rejected = apply_modification(&agent, &candidate, &clips(7.0), &clips(4.0)).unwrap();
        assert!(!rejected.accepted());
        assert_eq!(rejected.agent, agent);
    }

    #[test]
    fn two_accepted_steps_are_audited_against_the_original() {
        let agent = Agent::new(
            1,
            UtilityFunction::single("paperclips", 1.0),
            GuardMode::FullChain,
        );
        let u2 = UtilityFunction::new([("paperclips", 0.5), ("thumbtacks", 0.5)]).unwrap();
        let u3 = UtilityFunction::new([("paperclips", 0.4), ("thumbtacks", 0.6)]).unwrap();
        let a = apply_modification(&agent, &u2, &clips(4.0), &mix(7.0, 7.0)).unwrap();
        let b = apply_modification(&a.agent, &u3, &mix(7.0, 7.0), &mix(7.0, 12.0)).unwrap();
        assert!(b.accepted());
        let ledger = &b.agent.ledger;
        assert_eq!(ledger.audits().len(), 2);
        for audit in ledger.audits() {
            let u1 = ledger.original();
            assert!(u1.expected(&audit.adopted) - u1.expected(&audit.status_quo) >= 0.0);
        }
        assert!(ledger.verify_chain());
    }

    #[test]
    fn ledger_serializes_as_array() {
        let ledger = ModificationLedger::from_history(
            vec![
                UtilityFunction::single("a", 1.0),
                UtilityFunction::normalized([("a", 1.0), ("b", 1.0)]).unwrap(),
            ],
            GuardMode::FullChain,
        )
        .unwrap();
        let json = serde_json::to_string(&ledger).unwrap();
        assert!(json.starts_with('['));
        let back = ModificationLedger::from_json(&json, GuardMode::FullChain).unwrap();
        assert_eq!(back.history(), ledger.history());
    }
}
