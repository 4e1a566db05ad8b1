//! Day-by-day greedy allocation.
//!
//! Each day the unmatched agents available that day form a bipartite graph
//! with the categories. The algorithm commits a maximum-weight b-matching of
//! that graph whose size is capped by the day's supply; category capacities
//! are the daily quotas, shrunk to the remaining overall quota under Model 2.
//!
//! The day loop only ever sees the current day's availability column, so no
//! decision can depend on future reports.

use num::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::flow::{solve_with_narrowest, FlowError, FlowLimit, FlowNetwork};
use crate::model::{validate_instance, AgentId, Allocation, Category, CategoryId, Instance, ValidationReport};
use crate::offline::{TieBreakError, TieBreakOrder};
use crate::scalar::{common_denominator, powi, scale_to_integer, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OnlineError {
    #[error("instance is malformed:\n{0}")]
    InvalidInstance(ValidationReport),
    #[error("Model 2 run requested but category `{0}` has no overall quota")]
    MissingOverallQuota(String),
    #[error("priority is not a finite number")]
    NonFinite,
    #[error(transparent)]
    TieBreak(#[from] TieBreakError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// How equal-weight daily matchings are resolved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Earlier agents and categories in the instance win.
    #[default]
    InputOrder,
    /// Agents ranked by an explicit order; categories by input order.
    Order(TieBreakOrder),
    /// Worst-case precedence for the greedy run, computed once from the whole
    /// instance: agents with the most available days win, categories with the
    /// smallest overall quota win. This reads the full availability matrix and
    /// is meant for stress-testing the competitive bounds, not for deployment.
    Adversarial,
}

/// Resolved precedence; lower rank is preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precedence {
    pub agent_rank: Vec<usize>,
    pub category_rank: Vec<usize>,
}

impl Precedence {
    pub fn resolve<S: Scalar>(instance: &Instance<S>, tie_break: &TieBreak) -> Result<Self, TieBreakError> {
        let nag = instance.agents.len();
        let ncat = instance.categories.len();
        let identity_cats: Vec<usize> = (0..ncat).collect();
        match tie_break {
            TieBreak::InputOrder => Ok(Precedence {
                agent_rank: (0..nag).collect(),
                category_rank: identity_cats,
            }),
            TieBreak::Order(order) => {
                if order.len() != nag {
                    return Err(TieBreakError::WrongLength {
                        expected: nag,
                        found: order.len(),
                    });
                }
                Ok(Precedence {
                    agent_rank: (0..nag).map(|k| order.rank(AgentId(k)) - 1).collect(),
                    category_rank: identity_cats,
                })
            }
            TieBreak::Adversarial => {
                let mut agents: Vec<usize> = (0..nag).collect();
                agents.sort_by_key(|&k| {
                    let days = instance.agents[k].availability.iter().filter(|&&b| b).count();
                    (std::cmp::Reverse(days), k)
                });
                let mut cats: Vec<usize> = (0..ncat).collect();
                cats.sort_by_key(|&i| (instance.categories[i].overall_quota.unwrap_or(u32::MAX), i));
                Ok(Precedence {
                    agent_rank: invert(&agents),
                    category_rank: invert(&cats),
                })
            }
        }
    }
}

fn invert(sequence: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; sequence.len()];
    for (pos, &x) in sequence.iter().enumerate() {
        rank[x] = pos;
    }
    rank
}

/// Everything the online algorithm may know up front: priorities,
/// eligibility, quotas and supplies, but no availability.
#[derive(Debug, Clone)]
pub struct Roster<'a, S> {
    priorities: Vec<&'a S>,
    eligible: Vec<&'a [CategoryId]>,
    categories: &'a [Category],
    daily_supply: &'a [u32],
    discount: &'a S,
}

impl<'a, S: Scalar> Roster<'a, S> {
    pub fn new(instance: &'a Instance<S>) -> Self {
        Roster {
            priorities: instance.agents.iter().map(|a| &a.priority).collect(),
            eligible: instance.agents.iter().map(|a| a.eligible.as_slice()).collect(),
            categories: &instance.categories,
            daily_supply: &instance.daily_supply,
            discount: &instance.discount,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.priorities.len()
    }

    pub fn num_days(&self) -> usize {
        self.daily_supply.len()
    }
}

/// Evolving state of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailyMatchState {
    /// Next day to be processed (1-based).
    pub day: usize,
    matched: Vec<bool>,
    /// Remaining overall quota per category; `None` when not tracked.
    pub remaining_overall: Vec<Option<u32>>,
    pub allocation: Allocation,
}

impl DailyMatchState {
    pub fn new<S: Scalar>(instance: &Instance<S>, model2: bool) -> Self {
        DailyMatchState {
            day: 1,
            matched: vec![false; instance.agents.len()],
            remaining_overall: instance
                .categories
                .iter()
                .map(|c| if model2 { c.overall_quota } else { None })
                .collect(),
            allocation: Allocation::unmatched(instance.agents.len()),
        }
    }

    pub fn is_matched(&self, agent: AgentId) -> bool {
        self.matched[agent.0]
    }

    pub fn unmatched_pool(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.matched
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(k, _)| AgentId(k))
    }

    /// Records the current day's matching and advances to the next day.
    pub fn commit(&mut self, matching: &[(AgentId, CategoryId)]) {
        for &(agent, category) in matching {
            assert!(!self.matched[agent.0], "{agent} matched twice");
            self.matched[agent.0] = true;
            self.allocation.assign(agent, category, self.day);
            if let Some(left) = self.remaining_overall[category.0].as_mut() {
                *left = left.checked_sub(1).expect("overall quota overdrawn");
            }
        }
        self.day += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayAgent<S> {
    pub id: AgentId,
    pub priority: S,
    /// `priority · δ^(day−1)`.
    pub weight: S,
    pub precedence: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayCategory {
    pub id: CategoryId,
    pub capacity: u32,
    pub precedence: usize,
}

/// The bipartite graph of one day. Categories with zero capacity are left out.
#[derive(Debug, Clone, PartialEq)]
pub struct DayGraph<S> {
    pub day: usize,
    pub agents: Vec<DayAgent<S>>,
    pub categories: Vec<DayCategory>,
    /// `(agent index, category index)` into `agents` / `categories`.
    pub edges: Vec<(usize, usize)>,
    pub size_cap: u32,
}

impl<S: Scalar> DayGraph<S> {
    /// Capacity `b'` of `category` on this day (0 if dropped).
    pub fn capacity_of(&self, category: CategoryId) -> u32 {
        self.categories
            .iter()
            .find(|c| c.id == category)
            .map_or(0, |c| c.capacity)
    }

    pub fn agent_ids(&self) -> Vec<AgentId> {
        self.agents.iter().map(|a| a.id).collect()
    }

    /// Edges as `(agent, category)` ids.
    pub fn edge_ids(&self) -> Vec<(AgentId, CategoryId)> {
        self.edges
            .iter()
            .map(|&(a, c)| (self.agents[a].id, self.categories[c].id))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

/// Builds the graph for `state.day` from that day's availability column.
pub fn build_day_graph<S: Scalar>(
    state: &DailyMatchState,
    roster: &Roster<'_, S>,
    available_today: &[bool],
    precedence: &Precedence,
    model2: bool,
) -> DayGraph<S> {
    let day = state.day;
    let discount_factor = powi(roster.discount, day - 1);
    let mut categories = Vec::new();
    let mut cat_index = vec![None; roster.categories.len()];
    for (i, cat) in roster.categories.iter().enumerate() {
        let mut capacity = cat.quota_on(day);
        if model2 {
            if let Some(left) = state.remaining_overall[i] {
                capacity = capacity.min(left);
            }
        }
        if capacity > 0 {
            cat_index[i] = Some(categories.len());
            categories.push(DayCategory {
                id: CategoryId(i),
                capacity,
                precedence: precedence.category_rank[i],
            });
        }
    }
    let mut agents = Vec::new();
    let mut edges = Vec::new();
    for (k, &available) in available_today.iter().enumerate() {
        let id = AgentId(k);
        if !available || state.is_matched(id) {
            continue;
        }
        let priority = roster.priorities[k].clone();
        let idx = agents.len();
        agents.push(DayAgent {
            id,
            weight: priority.clone() * discount_factor.clone(),
            priority,
            precedence: precedence.agent_rank[k],
        });
        for c in roster.eligible[k] {
            if let Some(ci) = cat_index.get(c.0).copied().flatten() {
                edges.push((idx, ci));
            }
        }
    }
    DayGraph {
        day,
        agents,
        categories,
        edges,
        size_cap: roster.daily_supply.get(day - 1).copied().unwrap_or(0),
    }
}

/// Convenience wrapper that slices the current day out of a full instance.
pub fn build_day_graph_for<S: Scalar>(
    state: &DailyMatchState,
    instance: &Instance<S>,
    precedence: &Precedence,
    model2: bool,
) -> DayGraph<S> {
    let column: Vec<bool> = instance
        .agents
        .iter()
        .map(|a| a.is_available(state.day))
        .collect();
    build_day_graph(state, &Roster::new(instance), &column, precedence, model2)
}

/// Agent priorities of one day scaled to a common integer denominator.
fn scaled_priorities<S: Scalar>(graph: &DayGraph<S>) -> Result<Vec<BigInt>, OnlineError> {
    let exact: Vec<Rational> = graph
        .agents
        .iter()
        .map(|a| a.priority.to_exact().ok_or(OnlineError::NonFinite))
        .collect::<Result<_, _>>()?;
    let scale = common_denominator(exact.iter());
    Ok(exact.iter().map(|p| scale_to_integer(p, &scale)).collect())
}

/// source → gate (cap = size cap) → agents (cap 1) → categories → sink (cap b').
fn day_network(graph: &DayGraph<impl Scalar>, edge_cost: &[BigInt]) -> Result<FlowNetwork<BigInt>, FlowError> {
    let n = graph.agents.len();
    let m = graph.categories.len();
    let sink = 2 + n + m;
    let mut net = FlowNetwork::new(sink + 1, 0, sink)?;
    net.add_arc(0, 1, u64::from(graph.size_cap), BigInt::zero())?;
    for a in 0..n {
        net.add_arc(1, 2 + a, 1, BigInt::zero())?;
    }
    for (&(a, c), cost) in graph.edges.iter().zip(edge_cost) {
        net.add_arc(2 + a, 2 + n + c, 1, -cost.clone())?;
    }
    for (c, cat) in graph.categories.iter().enumerate() {
        net.add_arc(2 + n + c, sink, u64::from(cat.capacity), BigInt::zero())?;
    }
    Ok(net)
}

fn matched_edges<S: Scalar>(graph: &DayGraph<S>, arc_flows: &[u64]) -> Vec<(AgentId, CategoryId)> {
    let first_edge_arc = 1 + graph.agents.len();
    let mut out: Vec<_> = graph
        .edges
        .iter()
        .enumerate()
        .filter(|(e, _)| arc_flows[first_edge_arc + e] > 0)
        .map(|(_, &(a, c))| (graph.agents[a].id, graph.categories[c].id))
        .collect();
    out.sort();
    out
}

/// Maximum-weight b-matching of size at most `graph.size_cap`.
///
/// Within a day every edge of an agent carries the same weight, so the
/// matchable agent sets form a matroid and any strictly order-preserving
/// weighting selects the same optimum. The edge cost is the lexicographic
/// composite (priority, agent precedence, category precedence), all exact
/// integers; the common factor `δ^(day−1)` is dropped.
pub fn max_weight_capped_bmatching<S: Scalar>(
    graph: &DayGraph<S>,
) -> Result<Vec<(AgentId, CategoryId)>, OnlineError> {
    if graph.agents.is_empty() || graph.categories.is_empty() || graph.size_cap == 0 {
        return Ok(Vec::new());
    }
    let n = graph.agents.len();
    let m = graph.categories.len();
    let priorities = scaled_priorities(graph)?;

    let mut by_agent: Vec<usize> = (0..n).collect();
    by_agent.sort_by_key(|&a| (graph.agents[a].precedence, a));
    let agent_pos = invert(&by_agent);
    let mut by_cat: Vec<usize> = (0..m).collect();
    by_cat.sort_by_key(|&c| (graph.categories[c].precedence, c));
    let cat_pos = invert(&by_cat);

    let agent_span = BigInt::from(n + 1);
    let tertiary_span = BigInt::from((graph.size_cap as usize).min(n) * (m - 1) + 1);
    let agent_key: Vec<BigInt> = (0..n)
        .map(|a| &priorities[a] * &agent_span + BigInt::from(n - agent_pos[a]))
        .collect();
    let costs: Vec<BigInt> = graph
        .edges
        .iter()
        .map(|&(a, c)| &agent_key[a] * &tertiary_span + BigInt::from(m - 1 - cat_pos[c]))
        .collect();

    let net = day_network(graph, &costs)?;
    let result = solve_with_narrowest(&net, FlowLimit::Unbounded)?;
    Ok(matched_edges(graph, &result.arc_flows))
}

/// Largest total priority over capped b-matchings of `graph`, with no
/// tie-breaking terms.
pub fn max_priority_weight<S: Scalar>(graph: &DayGraph<S>) -> Result<Rational, OnlineError> {
    if graph.agents.is_empty() || graph.categories.is_empty() {
        return Ok(Rational::zero());
    }
    let exact: Vec<Rational> = graph
        .agents
        .iter()
        .map(|a| a.priority.to_exact().ok_or(OnlineError::NonFinite))
        .collect::<Result<_, _>>()?;
    let scale = common_denominator(exact.iter());
    let costs: Vec<BigInt> = graph
        .edges
        .iter()
        .map(|&(a, _)| scale_to_integer(&exact[a], &scale))
        .collect();
    let net = day_network(graph, &costs)?;
    let result = solve_with_narrowest(&net, FlowLimit::Unbounded)?;
    Ok(Rational::new(-result.total_cost, scale))
}

/// One processed day of a traced run.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord<S> {
    pub graph: DayGraph<S>,
    pub matching: Vec<(AgentId, CategoryId)>,
    /// Remaining overall quotas before the day was processed.
    pub remaining_before: Vec<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineTrace<S> {
    pub allocation: Allocation,
    pub days: Vec<DayRecord<S>>,
}

fn prepare<S: Scalar>(
    instance: &Instance<S>,
    model2: bool,
    tie_break: &TieBreak,
) -> Result<Precedence, OnlineError> {
    let report = validate_instance(instance);
    if !report.is_ok() {
        return Err(OnlineError::InvalidInstance(report));
    }
    if model2 {
        if let Some(cat) = instance.categories.iter().find(|c| c.overall_quota.is_none()) {
            return Err(OnlineError::MissingOverallQuota(cat.name.clone()));
        }
    }
    Ok(Precedence::resolve(instance, tie_break)?)
}

/// Runs the greedy algorithm and keeps every day's graph and matching.
pub fn run_online_traced<S: Scalar>(
    instance: &Instance<S>,
    model2: bool,
    tie_break: &TieBreak,
) -> Result<OnlineTrace<S>, OnlineError> {
    let precedence = prepare(instance, model2, tie_break)?;
    let roster = Roster::new(instance);
    let mut state = DailyMatchState::new(instance, model2);
    let mut days = Vec::with_capacity(instance.num_days());
    for day in 1..=roster.num_days() {
        let column: Vec<bool> = instance.agents.iter().map(|a| a.is_available(day)).collect();
        let graph = build_day_graph(&state, &roster, &column, &precedence, model2);
        let matching = max_weight_capped_bmatching(&graph)?;
        let remaining_before = state.remaining_overall.clone();
        log::debug!("day {day}: {} candidates, {} matched", graph.agents.len(), matching.len());
        state.commit(&matching);
        days.push(DayRecord {
            graph,
            matching,
            remaining_before,
        });
    }
    Ok(OnlineTrace {
        allocation: state.allocation,
        days,
    })
}

/// Greedy online allocation (Model 1, or Model 2 when `model2` is set).
pub fn run_online<S: Scalar>(
    instance: &Instance<S>,
    model2: bool,
    tie_break: &TieBreak,
) -> Result<Allocation, OnlineError> {
    let precedence = prepare(instance, model2, tie_break)?;
    let roster = Roster::new(instance);
    let mut state = DailyMatchState::new(instance, model2);
    for day in 1..=roster.num_days() {
        let column: Vec<bool> = instance.agents.iter().map(|a| a.is_available(day)).collect();
        let graph = build_day_graph(&state, &roster, &column, &precedence, model2);
        let matching = max_weight_capped_bmatching(&graph)?;
        log::debug!("day {day}: {} candidates, {} matched", graph.agents.len(), matching.len());
        state.commit(&matching);
    }
    Ok(state.allocation)
}
