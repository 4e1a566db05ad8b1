use std::collections::BTreeSet;

use num_traits::Zero;

use super::AnalysisError;
use crate::model::{Allocation, Instance};
use crate::scalar::{Rational, Scalar};

/// Group label of the row aggregating every agent.
pub const ALL_GROUP: &str = "all";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsRow {
    pub day: usize,
    pub group: String,
    /// Agents that could have been served on some day up to `day`.
    pub gamma: usize,
    /// Agents served on or before `day`.
    pub eta: usize,
    pub matched_today: usize,
    pub cumulative_utility: Rational,
}

impl MetricsRow {
    /// `1 − η/γ`, or 0 when nobody was reachable yet.
    pub fn fraction_unvaccinated(&self) -> Rational {
        if self.gamma == 0 {
            Rational::zero()
        } else {
            Rational::from_integer(((self.gamma - self.eta) as i64).into())
                / Rational::from_integer((self.gamma as i64).into())
        }
    }
}

/// Rows ordered by day, then group name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricsSeries {
    pub rows: Vec<MetricsRow>,
}

impl MetricsSeries {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of one group, by day.
    pub fn group(&self, name: &str) -> Vec<&MetricsRow> {
        self.rows.iter().filter(|r| r.group == name).collect()
    }

    pub fn groups(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.group.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }
}

/// Daily reachability and coverage, per group and overall.
///
/// An agent is reachable on day `j` if it is available, the day has supply,
/// and one of its categories has capacity that day. Under Model 2 the
/// capacity is capped by the overall quota still left in `alloc`.
pub fn compute_metrics<S: Scalar>(
    instance: &Instance<S>,
    alloc: &Allocation,
    model2: bool,
) -> Result<MetricsSeries, AnalysisError> {
    let exact = instance.to_exact().ok_or(AnalysisError::NonFinite)?;
    let days = exact.num_days();
    let ncat = exact.categories.len();

    let mut used = vec![vec![0u32; days + 1]; ncat];
    for (_, c, day) in alloc.matched() {
        if day <= days && c.0 < ncat {
            used[c.0][day] += 1;
        }
    }
    let open: Vec<Vec<bool>> = (0..ncat)
        .map(|i| {
            let cat = &exact.categories[i];
            let mut spent = 0u32;
            let mut row = vec![false; days + 1];
            for day in 1..=days {
                let mut cap = cat.quota_on(day);
                if let (true, Some(overall)) = (model2, cat.overall_quota) {
                    cap = cap.min(overall.saturating_sub(spent));
                }
                row[day] = cap > 0 && exact.supply_on(day) > 0;
                spent += used[i][day];
            }
            row
        })
        .collect();

    let first_reachable: Vec<Option<usize>> = exact
        .agents
        .iter()
        .map(|a| (1..=days).find(|&d| a.is_available(d) && a.eligible.iter().any(|c| open[c.0][d])))
        .collect();

    let mut labels: BTreeSet<&str> = exact.agents.iter().filter_map(|a| a.group.as_deref()).collect();
    labels.insert(ALL_GROUP);

    let mut rows = Vec::with_capacity(days * labels.len());
    for day in 1..=days {
        for &label in &labels {
            let members = exact
                .agent_ids()
                .filter(|&id| label == ALL_GROUP || exact.agent(id).group.as_deref() == Some(label));
            let mut row = MetricsRow {
                day,
                group: label.to_string(),
                gamma: 0,
                eta: 0,
                matched_today: 0,
                cumulative_utility: Rational::zero(),
            };
            for id in members {
                if first_reachable[id.0].is_some_and(|d| d <= day) {
                    row.gamma += 1;
                }
                if let Some(d) = alloc.get(id).day() {
                    if d <= day {
                        row.eta += 1;
                        row.cumulative_utility += exact.utility(id, d);
                    }
                    if d == day {
                        row.matched_today += 1;
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(MetricsSeries { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Agent, AgentId, Category, CategoryId};
    use crate::scalar::parse_rational;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn instance(avail: &[&[u8]], quota: &[u32]) -> Instance<Rational> {
        Instance {
            agents: avail
                .iter()
                .enumerate()
                .map(|(k, row)| Agent {
                    name: format!("a{k}"),
                    priority: r("0.5"),
                    availability: row.iter().map(|&b| b == 1).collect(),
                    eligible: vec![CategoryId(0)],
                    group: Some(if k % 2 == 0 { "even" } else { "odd" }.to_string()),
                })
                .collect(),
            categories: vec![Category {
                name: "c".into(),
                daily_quota: quota.to_vec(),
                overall_quota: None,
            }],
            daily_supply: quota.to_vec(),
            discount: r("0.9"),
        }
    }

    #[test]
    fn three_of_four_reachable_matched() {
        let inst = instance(&[&[1, 0], &[0, 1], &[1, 1], &[0, 1]], &[2, 1]);
        let mut alloc = Allocation::unmatched(4);
        alloc.assign(AgentId(0), CategoryId(0), 1);
        alloc.assign(AgentId(2), CategoryId(0), 1);
        alloc.assign(AgentId(1), CategoryId(0), 2);
        let m = compute_metrics(&inst, &alloc, false).unwrap();
        assert_eq!(m.groups(), vec!["all", "even", "odd"]);
        let all = m.group(ALL_GROUP);
        assert_eq!((all[0].gamma, all[0].eta), (2, 2));
        assert_eq!((all[1].gamma, all[1].eta), (4, 3));
        assert_eq!(all[1].fraction_unvaccinated(), r("0.25"));
        assert_eq!(all[1].matched_today, 1);
        assert_eq!(all[1].cumulative_utility, r("1.45"));
    }

    #[test]
    fn nobody_reachable() {
        let inst = instance(&[&[1, 1]], &[0, 0]);
        let m = compute_metrics(&inst, &Allocation::unmatched(1), false).unwrap();
        assert!(m.rows.iter().all(|row| row.gamma == 0 && row.fraction_unvaccinated().is_zero()));
    }

    #[test]
    fn everyone_served_on_day_one() {
        let inst = instance(&[&[1, 1], &[1, 0]], &[2, 2]);
        let mut alloc = Allocation::unmatched(2);
        alloc.assign(AgentId(0), CategoryId(0), 1);
        alloc.assign(AgentId(1), CategoryId(0), 1);
        let m = compute_metrics(&inst, &alloc, false).unwrap();
        assert!(m.rows.iter().all(|row| row.fraction_unvaccinated().is_zero()));
        assert_eq!(m.rows.len(), 6);
    }

    #[test]
    fn exhausted_overall_quota_blocks_reachability() {
        let mut inst = instance(&[&[1, 0], &[0, 1]], &[1, 1]);
        inst.categories[0].overall_quota = Some(1);
        let mut alloc = Allocation::unmatched(2);
        alloc.assign(AgentId(0), CategoryId(0), 1);
        let m2 = compute_metrics(&inst, &alloc, true).unwrap();
        assert_eq!(m2.group(ALL_GROUP)[1].gamma, 1);
        let m1 = compute_metrics(&inst, &alloc, false).unwrap();
        assert_eq!(m1.group(ALL_GROUP)[1].gamma, 2);
    }
}
