use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::AnalysisError;
use crate::model::{AgentId, Instance};
use crate::online::{run_online, TieBreak};
use crate::scalar::Scalar;

/// Agents with at most this many available days get every subset tried.
pub const EXHAUSTIVE_DAY_LIMIT: usize = 20;
const SAMPLED_DEVIATIONS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationReport {
    pub agent: AgentId,
    /// Matched day under truthful reporting.
    pub truthful_day: Option<usize>,
    pub deviations_checked: usize,
    pub exhaustive: bool,
    /// Reported availability vectors that got a strictly earlier day, with
    /// that day.
    pub improving: Vec<(Vec<bool>, usize)>,
}

impl DeviationReport {
    pub fn is_truthful_best(&self) -> bool {
        self.improving.is_empty()
    }
}

fn earlier(candidate: Option<usize>, truthful: Option<usize>) -> bool {
    match (candidate, truthful) {
        (Some(c), Some(t)) => c < t,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

/// Reruns the online algorithm with `agent` reporting proper subsets of its
/// true availability and collects the reports that pay off.
///
/// All subsets are tried when the agent has at most
/// [`EXHAUSTIVE_DAY_LIMIT`] available days; otherwise a fixed seeded sample.
pub fn test_strategyproofness<S: Scalar>(
    instance: &Instance<S>,
    agent: AgentId,
    model2: bool,
    tie_break: &TieBreak,
) -> Result<DeviationReport, AnalysisError> {
    let truthful_day = run_online(instance, model2, tie_break)?.get(agent).day();
    let truth = &instance.agent(agent).availability;
    let days: Vec<usize> = (0..truth.len()).filter(|&j| truth[j]).collect();
    let exhaustive = days.len() <= EXHAUSTIVE_DAY_LIMIT;
    let keeps: Vec<Vec<bool>> = if exhaustive {
        // every proper subset of the available days
        (0..(1u64 << days.len()) - 1)
            .map(|mask| (0..days.len()).map(|bit| mask & (1 << bit) != 0).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(agent.0 as u64);
        (0..SAMPLED_DEVIATIONS)
            .map(|_| {
                let mut keep: Vec<bool> = (0..days.len()).map(|_| rng.gen()).collect();
                keep[rng.gen_range(0..days.len())] = false;
                keep
            })
            .collect()
    };

    // (report, day it earned) for every improving deviation
    type Outcome = Result<Option<(Vec<bool>, usize)>, AnalysisError>;
    let outcomes: Vec<Outcome> = keeps
        .par_iter()
        .map(|keep| {
            let mut report = vec![false; truth.len()];
            for (&j, &kept) in days.iter().zip(keep) {
                report[j] = kept;
            }
            let mut deviated = instance.clone();
            deviated.agents[agent.0].availability = report.clone();
            let day = run_online(&deviated, model2, tie_break)?.get(agent).day();
            Ok(earlier(day, truthful_day).then(|| (report, day.expect("earlier implies matched"))))
        })
        .collect();
    let mut improving = Vec::new();
    for outcome in outcomes {
        if let Some(hit) = outcome? {
            improving.push(hit);
        }
    }
    Ok(DeviationReport {
        agent,
        truthful_day,
        deviations_checked: keeps.len(),
        exhaustive,
        improving,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::tight_model1;
    use crate::scalar::{parse_rational, Rational};

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn single_day_agent_only_loses_by_hiding() {
        let inst = tight_model1(r("0.5"), r("0.95"));
        let rep = test_strategyproofness(&inst, AgentId(1), false, &TieBreak::InputOrder).unwrap();
        assert_eq!(rep.deviations_checked, 1);
        assert!(rep.exhaustive);
        assert!(rep.is_truthful_best());
    }

    #[test]
    fn tight_model1_no_agent_gains() {
        let inst = tight_model1(r("0.5"), r("0.95"));
        for k in 0..2 {
            let rep = test_strategyproofness(&inst, AgentId(k), false, &TieBreak::InputOrder).unwrap();
            assert!(rep.is_truthful_best(), "{rep:?}");
        }
    }

    #[test]
    fn earlier_ordering() {
        assert!(earlier(Some(1), Some(2)));
        assert!(earlier(Some(3), None));
        assert!(!earlier(None, Some(1)));
        assert!(!earlier(Some(2), Some(2)));
    }
}
