//! Problem domain: instances, allocations, feasibility and utility.

use std::collections::HashSet;
use std::fmt;

use crate::scalar::{powi, Rational, Scalar};

/// Stable index of an agent inside its [`Instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub usize);

/// Stable index of a category inside its [`Instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent#{}", self.0)
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "category#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent<S> {
    pub name: String,
    /// Priority factor, strictly between 0 and 1.
    pub priority: S,
    /// One flag per day, day 1 first.
    pub availability: Vec<bool>,
    /// Sorted, duplicate-free.
    pub eligible: Vec<CategoryId>,
    /// Opaque tag used only for grouping metrics.
    pub group: Option<String>,
}

impl<S> Agent<S> {
    /// `day` is 1-based.
    pub fn is_available(&self, day: usize) -> bool {
        day >= 1 && self.availability.get(day - 1).copied().unwrap_or(false)
    }

    pub fn is_eligible(&self, category: CategoryId) -> bool {
        self.eligible.binary_search(&category).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    /// Daily quota per day, day 1 first.
    pub daily_quota: Vec<u32>,
    /// Overall quota across all days. Only enforced under Model 2 semantics.
    pub overall_quota: Option<u32>,
}

impl Category {
    /// `day` is 1-based.
    pub fn quota_on(&self, day: usize) -> u32 {
        self.daily_quota.get(day - 1).copied().unwrap_or(0)
    }
}

/// A full problem statement.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub agents: Vec<Agent<S>>,
    pub categories: Vec<Category>,
    /// Daily supply, one entry per day; its length is the horizon.
    pub daily_supply: Vec<u32>,
    /// Discount factor in (0, 1).
    pub discount: S,
}

impl<S: Scalar> Instance<S> {
    pub fn num_days(&self) -> usize {
        self.daily_supply.len()
    }

    pub fn agent(&self, id: AgentId) -> &Agent<S> {
        &self.agents[id.0]
    }

    pub fn category(&self, id: CategoryId) -> &Category {
        &self.categories[id.0]
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn supply_on(&self, day: usize) -> u32 {
        self.daily_supply.get(day - 1).copied().unwrap_or(0)
    }

    /// True when every category carries an overall quota.
    pub fn has_overall_quotas(&self) -> bool {
        self.categories.iter().all(|c| c.overall_quota.is_some())
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a.name == name).map(AgentId)
    }

    pub fn category_by_name(&self, name: &str) -> Option<CategoryId> {
        self.categories
            .iter()
            .position(|c| c.name == name)
            .map(CategoryId)
    }

    /// Utility of matching `agent` on 1-based `day`.
    pub fn utility(&self, agent: AgentId, day: usize) -> S {
        utility_of(&self.agent(agent).priority, day, &self.discount)
    }

    /// Exact copy with every scalar converted to a rational; `None` if any
    /// value is not finite.
    pub fn to_exact(&self) -> Option<Instance<Rational>> {
        let agents = self
            .agents
            .iter()
            .map(|a| {
                Some(Agent {
                    name: a.name.clone(),
                    priority: a.priority.to_exact()?,
                    availability: a.availability.clone(),
                    eligible: a.eligible.clone(),
                    group: a.group.clone(),
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Instance {
            agents,
            categories: self.categories.clone(),
            daily_supply: self.daily_supply.clone(),
            discount: self.discount.to_exact()?,
        })
    }

    /// Same instance with every priority mapped through `f`.
    pub fn map_priorities<F>(&self, mut f: F) -> Instance<S>
    where
        F: FnMut(AgentId, &S) -> S,
    {
        let mut out = self.clone();
        for (k, agent) in out.agents.iter_mut().enumerate() {
            agent.priority = f(AgentId(k), &agent.priority);
        }
        out
    }
}

/// `priority · discount^(day-1)` with 1-based `day`.
///
/// # Panics
///
/// If `day == 0`.
pub fn utility_of<S: Scalar>(priority: &S, day: usize, discount: &S) -> S {
    assert!(day >= 1, "day index is 1-based");
    priority.clone() * powi(discount, day - 1)
}

/// Where an agent ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assignment {
    Matched { category: CategoryId, day: usize },
    Unmatched,
}

impl Assignment {
    pub fn day(&self) -> Option<usize> {
        match self {
            Assignment::Matched { day, .. } => Some(*day),
            Assignment::Unmatched => None,
        }
    }

    pub fn category(&self) -> Option<CategoryId> {
        match self {
            Assignment::Matched { category, .. } => Some(*category),
            Assignment::Unmatched => None,
        }
    }
}

/// One entry per agent of the instance it belongs to; days are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    assignment: Vec<Assignment>,
}

impl Allocation {
    pub fn unmatched(num_agents: usize) -> Self {
        Allocation {
            assignment: vec![Assignment::Unmatched; num_agents],
        }
    }

    pub fn from_assignments(assignment: Vec<Assignment>) -> Self {
        Allocation { assignment }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, agent: AgentId) -> Assignment {
        self.assignment
            .get(agent.0)
            .copied()
            .unwrap_or(Assignment::Unmatched)
    }

    pub fn assign(&mut self, agent: AgentId, category: CategoryId, day: usize) {
        self.assignment[agent.0] = Assignment::Matched { category, day };
    }

    pub fn unassign(&mut self, agent: AgentId) {
        self.assignment[agent.0] = Assignment::Unmatched;
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignment
    }

    /// `(agent, category, day)` for every matched agent, in agent order.
    pub fn matched(&self) -> impl Iterator<Item = (AgentId, CategoryId, usize)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(k, a)| match a {
                Assignment::Matched { category, day } => Some((AgentId(k), *category, *day)),
                Assignment::Unmatched => None,
            })
    }

    pub fn matched_count(&self) -> usize {
        self.matched().count()
    }

    /// The day's matching as `(agent, category)` edges.
    pub fn day_edges(&self, day: usize) -> Vec<(AgentId, CategoryId)> {
        self.matched()
            .filter(|&(_, _, d)| d == day)
            .map(|(a, c, _)| (a, c))
            .collect()
    }

    /// Number of agents matched on each day `1..=num_days` (index 0 is day 1).
    pub fn per_day_counts(&self, num_days: usize) -> Vec<usize> {
        let mut counts = vec![0; num_days];
        for (_, _, day) in self.matched() {
            if (1..=num_days).contains(&day) {
                counts[day - 1] += 1;
            }
        }
        counts
    }
}

/// Sum of utilities over matched agents.
pub fn total_utility<S: Scalar>(instance: &Instance<S>, alloc: &Allocation) -> S {
    alloc
        .matched()
        .fold(S::zero(), |acc, (agent, _, day)| acc + instance.utility(agent, day))
}

/// A single broken constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoDays,
    DiscountOutOfRange,
    PriorityOutOfRange { agent: AgentId },
    AvailabilityLength { agent: AgentId, expected: usize, found: usize },
    UnknownCategory { agent: AgentId, category: CategoryId },
    DuplicateEligibility { agent: AgentId, category: CategoryId },
    QuotaLength { category: CategoryId, expected: usize, found: usize },
    DuplicateName { name: String },
    AllocationLength { expected: usize, found: usize },
    DayOutOfRange { agent: AgentId, day: usize },
    NotAvailable { agent: AgentId, day: usize },
    NotEligible { agent: AgentId, category: CategoryId },
    SupplyExceeded { day: usize, used: u32, supply: u32 },
    DailyQuotaExceeded { category: CategoryId, day: usize, used: u32, quota: u32 },
    OverallQuotaExceeded { category: CategoryId, used: u32, quota: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoDays => write!(f, "instance has no days"),
            DiscountOutOfRange => write!(f, "discount must lie strictly between 0 and 1"),
            PriorityOutOfRange { agent } => {
                write!(f, "{agent}: priority must lie strictly between 0 and 1")
            }
            AvailabilityLength { agent, expected, found } => write!(
                f,
                "{agent}: availability has {found} entries, expected {expected}"
            ),
            UnknownCategory { agent, category } => {
                write!(f, "{agent}: eligible for undeclared {category}")
            }
            DuplicateEligibility { agent, category } => {
                write!(f, "{agent}: {category} listed twice or out of order")
            }
            QuotaLength { category, expected, found } => write!(
                f,
                "{category}: daily quota has {found} entries, expected {expected}"
            ),
            DuplicateName { name } => write!(f, "name `{name}` is used more than once"),
            AllocationLength { expected, found } => write!(
                f,
                "allocation covers {found} agents, instance has {expected}"
            ),
            DayOutOfRange { agent, day } => write!(f, "{agent}: day {day} outside horizon"),
            NotAvailable { agent, day } => write!(f, "{agent}: not available on day {day}"),
            NotEligible { agent, category } => write!(f, "{agent}: not eligible for {category}"),
            SupplyExceeded { day, used, supply } => {
                write!(f, "day {day}: {used} allocations exceed supply {supply}")
            }
            DailyQuotaExceeded { category, day, used, quota } => write!(
                f,
                "{category} day {day}: {used} allocations exceed daily quota {quota}"
            ),
            OverallQuotaExceeded { category, used, quota } => write!(
                f,
                "{category}: {used} allocations exceed overall quota {quota}"
            ),
        }
    }
}

/// All violations found by a check. Empty means well-formed / feasible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn in_open_unit<S: Scalar>(x: &S) -> bool {
    *x > S::zero() && *x < S::one()
}

/// Structural checks of every instance invariant.
pub fn validate_instance<S: Scalar>(instance: &Instance<S>) -> ValidationReport {
    let mut violations = Vec::new();
    let days = instance.num_days();
    if days == 0 {
        violations.push(Violation::NoDays);
    }
    if !in_open_unit(&instance.discount) {
        violations.push(Violation::DiscountOutOfRange);
    }
    for (i, cat) in instance.categories.iter().enumerate() {
        if cat.daily_quota.len() != days {
            violations.push(Violation::QuotaLength {
                category: CategoryId(i),
                expected: days,
                found: cat.daily_quota.len(),
            });
        }
    }
    for (k, agent) in instance.agents.iter().enumerate() {
        let id = AgentId(k);
        if !in_open_unit(&agent.priority) {
            violations.push(Violation::PriorityOutOfRange { agent: id });
        }
        if agent.availability.len() != days {
            violations.push(Violation::AvailabilityLength {
                agent: id,
                expected: days,
                found: agent.availability.len(),
            });
        }
        for (pos, &c) in agent.eligible.iter().enumerate() {
            if c.0 >= instance.categories.len() {
                violations.push(Violation::UnknownCategory { agent: id, category: c });
            }
            if pos > 0 && agent.eligible[pos - 1] >= c {
                violations.push(Violation::DuplicateEligibility { agent: id, category: c });
            }
        }
    }
    let mut seen = HashSet::new();
    for name in instance
        .agents
        .iter()
        .map(|a| &a.name)
        .chain(instance.categories.iter().map(|c| &c.name))
    {
        if !seen.insert(name) {
            violations.push(Violation::DuplicateName { name: name.clone() });
        }
    }
    ValidationReport { violations }
}

/// Feasibility of `alloc` for `instance`. Overall quotas are checked only
/// when `model2` is set.
pub fn check_allocation<S: Scalar>(
    instance: &Instance<S>,
    alloc: &Allocation,
    model2: bool,
) -> ValidationReport {
    let mut violations = Vec::new();
    let days = instance.num_days();
    let ncat = instance.categories.len();
    if alloc.len() != instance.agents.len() {
        violations.push(Violation::AllocationLength {
            expected: instance.agents.len(),
            found: alloc.len(),
        });
    }
    let mut per_day = vec![0u32; days];
    let mut per_cat_day = vec![vec![0u32; days]; ncat];
    let mut per_cat = vec![0u32; ncat];
    for (agent, category, day) in alloc.matched() {
        if agent.0 >= instance.agents.len() {
            continue;
        }
        if day == 0 || day > days {
            violations.push(Violation::DayOutOfRange { agent, day });
            continue;
        }
        let a = instance.agent(agent);
        if category.0 >= ncat || !a.is_eligible(category) {
            violations.push(Violation::NotEligible { agent, category });
        }
        if !a.is_available(day) {
            violations.push(Violation::NotAvailable { agent, day });
        }
        per_day[day - 1] += 1;
        if category.0 < ncat {
            per_cat_day[category.0][day - 1] += 1;
            per_cat[category.0] += 1;
        }
    }
    for (j, &used) in per_day.iter().enumerate() {
        let supply = instance.daily_supply[j];
        if used > supply {
            violations.push(Violation::SupplyExceeded { day: j + 1, used, supply });
        }
    }
    for (i, row) in per_cat_day.iter().enumerate() {
        let cat = &instance.categories[i];
        for (j, &used) in row.iter().enumerate() {
            let quota = cat.quota_on(j + 1);
            if used > quota {
                violations.push(Violation::DailyQuotaExceeded {
                    category: CategoryId(i),
                    day: j + 1,
                    used,
                    quota,
                });
            }
        }
        if model2 {
            if let Some(quota) = cat.overall_quota {
                if per_cat[i] > quota {
                    violations.push(Violation::OverallQuotaExceeded {
                        category: CategoryId(i),
                        used: per_cat[i],
                        quota,
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}
