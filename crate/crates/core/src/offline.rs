//! Offline solvers.
//!
//! * [`solve_offline_model1`]: optimal Model 1 allocation through a
//!   source → day → (category, day) → agent → sink flow network.
//! * [`solve_offline_tiebroken`]: same optimum, ties broken towards agents
//!   ranked earlier by a [`TieBreakOrder`].
//! * [`solve_exact_oracle`]: depth-first branch and bound over agent
//!   assignments; exact for both models but only usable on small instances.

use std::collections::HashMap;

use num::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::flow::{solve_with_narrowest, FlowError, FlowLimit, FlowNetwork, NodeId};
use crate::model::{validate_instance, AgentId, Allocation, CategoryId, Instance, ValidationReport};
use crate::scalar::{common_denominator, scale_to_integer, Rational, Scalar};

/// Default number of search nodes the exact oracle may visit.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OfflineError {
    #[error("instance is malformed:\n{0}")]
    InvalidInstance(ValidationReport),
    #[error("priority or discount is not a finite number")]
    NonFinite,
    #[error("exact search exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: u64 },
    #[error(transparent)]
    TieBreak(#[from] TieBreakError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TieBreakError {
    #[error("order has {found} entries, instance has {expected} agents")]
    WrongLength { expected: usize, found: usize },
    #[error("{0} appears more than once or is out of range")]
    NotAPermutation(AgentId),
}

/// Precedence over agents; rank 1 is the most preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreakOrder {
    sequence: Vec<AgentId>,
    rank: Vec<usize>,
}

impl TieBreakOrder {
    /// Input order: agent 0 first.
    pub fn identity(num_agents: usize) -> Self {
        TieBreakOrder {
            sequence: (0..num_agents).map(AgentId).collect(),
            rank: (1..=num_agents).collect(),
        }
    }

    /// Agents listed from most to least preferred.
    pub fn from_sequence(sequence: Vec<AgentId>, num_agents: usize) -> Result<Self, TieBreakError> {
        if sequence.len() != num_agents {
            return Err(TieBreakError::WrongLength {
                expected: num_agents,
                found: sequence.len(),
            });
        }
        let mut rank = vec![0usize; num_agents];
        for (pos, &a) in sequence.iter().enumerate() {
            if a.0 >= num_agents || rank[a.0] != 0 {
                return Err(TieBreakError::NotAPermutation(a));
            }
            rank[a.0] = pos + 1;
        }
        Ok(TieBreakOrder { sequence, rank })
    }

    /// 1-based rank of `agent`.
    pub fn rank(&self, agent: AgentId) -> usize {
        self.rank[agent.0]
    }

    pub fn sequence(&self) -> &[AgentId] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Integer-scaled utilities `α_k · δ^(j-1) · scale` for every agent and day.
#[derive(Debug, Clone)]
pub struct ScaledUtilities {
    pub scale: BigInt,
    /// `values[k][j - 1]` for agent `k` on day `j`.
    pub values: Vec<Vec<BigInt>>,
}

impl ScaledUtilities {
    pub fn new<S: Scalar>(instance: &Instance<S>) -> Result<Self, OfflineError> {
        let delta = instance.discount.to_exact().ok_or(OfflineError::NonFinite)?;
        let days = instance.num_days();
        let mut powers = Vec::with_capacity(days);
        let mut p = Rational::one();
        for _ in 0..days {
            powers.push(p.clone());
            p *= &delta;
        }
        let exact: Vec<Vec<Rational>> = instance
            .agents
            .iter()
            .map(|a| {
                let alpha = a.priority.to_exact().ok_or(OfflineError::NonFinite)?;
                Ok(powers.iter().map(|pw| &alpha * pw).collect())
            })
            .collect::<Result<_, OfflineError>>()?;
        let scale = common_denominator(exact.iter().flatten());
        let values = exact
            .iter()
            .map(|row| row.iter().map(|u| scale_to_integer(u, &scale)).collect())
            .collect();
        Ok(ScaledUtilities { scale, values })
    }

    /// `value / scale` as an exact rational.
    pub fn unscale(&self, value: &BigInt) -> Rational {
        Rational::new(value.clone(), self.scale.clone())
    }
}

/// Semantic role of an arc in the Model 1 network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcRole {
    /// source → day node, capacity = daily supply.
    Supply { day: usize },
    /// day node → (category, day) node, capacity = daily quota.
    Quota { category: CategoryId, day: usize },
    /// (category, day) node → agent node, unit capacity, cost = −utility.
    Assign { agent: AgentId, category: CategoryId, day: usize },
    /// agent node → sink, unit capacity.
    AgentSink { agent: AgentId },
}

/// Correspondence between arcs of the Model 1 network and the instance.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    num_days: usize,
    num_categories: usize,
    roles: Vec<ArcRole>,
    assign_arcs: HashMap<(AgentId, CategoryId, usize), usize>,
}

impl ReductionMap {
    pub fn role(&self, arc: usize) -> ArcRole {
        self.roles[arc]
    }

    pub fn roles(&self) -> &[ArcRole] {
        &self.roles
    }

    pub fn assignment_arc(&self, agent: AgentId, category: CategoryId, day: usize) -> Option<usize> {
        self.assign_arcs.get(&(agent, category, day)).copied()
    }

    pub fn source(&self) -> NodeId {
        0
    }

    pub fn day_node(&self, day: usize) -> NodeId {
        day
    }

    pub fn category_day_node(&self, category: CategoryId, day: usize) -> NodeId {
        1 + self.num_days + category.0 * self.num_days + (day - 1)
    }

    pub fn agent_node(&self, agent: AgentId) -> NodeId {
        1 + self.num_days + self.num_categories * self.num_days + agent.0
    }

    /// Allocation encoded by an integral flow on this network.
    pub fn extract(&self, arc_flows: &[u64], num_agents: usize) -> Allocation {
        let mut alloc = Allocation::unmatched(num_agents);
        for (arc, &f) in arc_flows.iter().enumerate() {
            if f == 0 {
                continue;
            }
            if let ArcRole::Assign { agent, category, day } = self.roles[arc] {
                alloc.assign(agent, category, day);
            }
        }
        alloc
    }
}

/// Builds the network with a caller-supplied assignment-arc cost.
fn build_network_with<S, F>(
    instance: &Instance<S>,
    mut assign_cost: F,
) -> Result<(FlowNetwork<BigInt>, ReductionMap), OfflineError>
where
    S: Scalar,
    F: FnMut(AgentId, usize) -> BigInt,
{
    let days = instance.num_days();
    let ncat = instance.categories.len();
    let nag = instance.agents.len();
    let num_nodes = 1 + days + ncat * days + nag + 1;
    let sink = num_nodes - 1;
    let mut net = FlowNetwork::new(num_nodes, 0, sink)?;
    let mut map = ReductionMap {
        num_days: days,
        num_categories: ncat,
        roles: Vec::new(),
        assign_arcs: HashMap::new(),
    };

    for day in 1..=days {
        net.add_arc(0, map.day_node(day), u64::from(instance.supply_on(day)), BigInt::zero())?;
        map.roles.push(ArcRole::Supply { day });
    }
    for (i, cat) in instance.categories.iter().enumerate() {
        let category = CategoryId(i);
        for day in 1..=days {
            net.add_arc(
                map.day_node(day),
                map.category_day_node(category, day),
                u64::from(cat.quota_on(day)),
                BigInt::zero(),
            )?;
            map.roles.push(ArcRole::Quota { category, day });
        }
    }
    for (k, agent) in instance.agents.iter().enumerate() {
        let id = AgentId(k);
        for day in 1..=days {
            if !agent.is_available(day) {
                continue;
            }
            let cost = assign_cost(id, day);
            for &category in &agent.eligible {
                let arc = net.add_arc(
                    map.category_day_node(category, day),
                    map.agent_node(id),
                    1,
                    -cost.clone(),
                )?;
                map.roles.push(ArcRole::Assign { agent: id, category, day });
                map.assign_arcs.insert((id, category, day), arc);
            }
        }
    }
    for k in 0..nag {
        let agent = AgentId(k);
        net.add_arc(map.agent_node(agent), sink, 1, BigInt::zero())?;
        map.roles.push(ArcRole::AgentSink { agent });
    }
    Ok((net, map))
}

fn ensure_valid<S: Scalar>(instance: &Instance<S>) -> Result<(), OfflineError> {
    let report = validate_instance(instance);
    if report.is_ok() {
        Ok(())
    } else {
        Err(OfflineError::InvalidInstance(report))
    }
}

/// Model 1 network with assignment costs `−α_k·δ^(j−1)` scaled to integers.
pub fn build_model1_network<S: Scalar>(
    instance: &Instance<S>,
) -> Result<(FlowNetwork<BigInt>, ReductionMap, ScaledUtilities), OfflineError> {
    ensure_valid(instance)?;
    let utils = ScaledUtilities::new(instance)?;
    let (net, map) = build_network_with(instance, |a, d| utils.values[a.0][d - 1].clone())?;
    Ok((net, map, utils))
}

/// Maximum-utility Model 1 allocation. Overall quotas, if present, are ignored.
///
/// Among several optima an arbitrary one is returned; use
/// [`solve_offline_tiebroken`] for a deterministic choice.
pub fn solve_offline_model1<S: Scalar>(instance: &Instance<S>) -> Result<Allocation, OfflineError> {
    let (net, map, _) = build_model1_network(instance)?;
    log::debug!("offline network: {} nodes, {} arcs", net.num_nodes(), net.arcs().len());
    let result = solve_with_narrowest(&net, FlowLimit::Unbounded)?;
    Ok(map.extract(&result.arc_flows, instance.agents.len()))
}

/// Maximum-utility Model 1 allocation maximising `Σ 2^(−rank)` over matched
/// agents among all maximum-utility allocations.
///
/// Lexicographic objective in one solve: every assignment arc costs
/// `−(U·B + 2^(n − rank))` with `B = 2^(n+1)`, which exceeds any possible
/// difference in the tie-break term.
pub fn solve_offline_tiebroken<S: Scalar>(
    instance: &Instance<S>,
    order: &TieBreakOrder,
) -> Result<Allocation, OfflineError> {
    ensure_valid(instance)?;
    let n = instance.agents.len();
    if order.len() != n {
        return Err(TieBreakError::WrongLength {
            expected: n,
            found: order.len(),
        }
        .into());
    }
    let utils = ScaledUtilities::new(instance)?;
    let big = BigInt::one() << (n + 1);
    let (net, map) = build_network_with(instance, |a, d| {
        &utils.values[a.0][d - 1] * &big + (BigInt::one() << (n - order.rank(a)))
    })?;
    let result = solve_with_narrowest(&net, FlowLimit::Unbounded)?;
    Ok(map.extract(&result.arc_flows, n))
}

/// Exact maximum-utility allocation by branch and bound.
///
/// Honors overall quotas when `model2` is set. Refuses with
/// [`OfflineError::BudgetExceeded`] once more than `budget` search nodes have
/// been expanded.
pub fn solve_exact_oracle<S: Scalar>(
    instance: &Instance<S>,
    model2: bool,
    budget: u64,
) -> Result<Allocation, OfflineError> {
    ensure_valid(instance)?;
    let utils = ScaledUtilities::new(instance)?;
    let days = instance.num_days();
    let nag = instance.agents.len();

    // options per agent: (utility, category, day), best first
    let mut options: Vec<Vec<(BigInt, CategoryId, usize)>> = Vec::with_capacity(nag);
    for (k, agent) in instance.agents.iter().enumerate() {
        let mut opts = Vec::new();
        for day in 1..=days {
            if !agent.is_available(day) || instance.supply_on(day) == 0 {
                continue;
            }
            for &c in &agent.eligible {
                let cat = instance.category(c);
                if cat.quota_on(day) == 0 {
                    continue;
                }
                if model2 && cat.overall_quota == Some(0) {
                    continue;
                }
                opts.push((utils.values[k][day - 1].clone(), c, day));
            }
        }
        opts.sort_by(|a, b| b.0.cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
        options.push(opts);
    }

    let mut order: Vec<usize> = (0..nag).filter(|&k| !options[k].is_empty()).collect();
    order.sort_by(|&x, &y| options[y][0].0.cmp(&options[x][0].0).then(x.cmp(&y)));

    // suffix[i] = Σ best utility of order[i..]
    let mut suffix = vec![BigInt::zero(); order.len() + 1];
    for i in (0..order.len()).rev() {
        suffix[i] = &suffix[i + 1] + &options[order[i]][0].0;
    }

    let mut search = OracleSearch {
        model2,
        options: &options,
        order: &order,
        suffix: &suffix,
        supply_left: instance.daily_supply.clone(),
        quota_left: instance.categories.iter().map(|c| c.daily_quota.clone()).collect(),
        overall_left: instance
            .categories
            .iter()
            .map(|c| if model2 { c.overall_quota } else { None })
            .collect(),
        current: Vec::new(),
        best: None,
        nodes: 0,
        budget,
    };
    search.dfs(0, BigInt::zero())?;
    log::debug!("oracle expanded {} nodes", search.nodes);

    let mut alloc = Allocation::unmatched(nag);
    if let Some((_, picks)) = search.best {
        for (agent, category, day) in picks {
            alloc.assign(agent, category, day);
        }
    }
    Ok(alloc)
}

type Pick = (AgentId, CategoryId, usize);

struct OracleSearch<'a> {
    model2: bool,
    options: &'a [Vec<(BigInt, CategoryId, usize)>],
    order: &'a [usize],
    suffix: &'a [BigInt],
    supply_left: Vec<u32>,
    quota_left: Vec<Vec<u32>>,
    overall_left: Vec<Option<u32>>,
    current: Vec<Pick>,
    best: Option<(BigInt, Vec<Pick>)>,
    nodes: u64,
    budget: u64,
}

impl OracleSearch<'_> {
    fn dfs(&mut self, idx: usize, value: BigInt) -> Result<(), OfflineError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OfflineError::BudgetExceeded { budget: self.budget });
        }
        if let Some((best, _)) = &self.best {
            if &value + &self.suffix[idx] <= *best {
                return Ok(());
            }
        }
        if idx == self.order.len() {
            self.best = Some((value, self.current.clone()));
            return Ok(());
        }
        let k = self.order[idx];
        let options = self.options;
        for (u, c, day) in &options[k] {
            let (c, day) = (*c, *day);
            if self.supply_left[day - 1] == 0 || self.quota_left[c.0][day - 1] == 0 {
                continue;
            }
            if self.model2 && self.overall_left[c.0] == Some(0) {
                continue;
            }
            self.take(c, day, -1);
            self.current.push((AgentId(k), c, day));
            let r = self.dfs(idx + 1, &value + u);
            self.current.pop();
            self.take(c, day, 1);
            r?;
        }
        self.dfs(idx + 1, value)
    }

    fn take(&mut self, c: CategoryId, day: usize, delta: i64) {
        let bump = |v: &mut u32| *v = (i64::from(*v) + delta) as u32;
        bump(&mut self.supply_left[day - 1]);
        bump(&mut self.quota_left[c.0][day - 1]);
        if self.model2 {
            if let Some(left) = self.overall_left[c.0].as_mut() {
                bump(left);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{tight_general, tight_model1, two_agent_half_discount};
    use crate::model::{check_allocation, total_utility, Agent, Category};
    use crate::scalar::parse_rational;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn symmetric(n: usize, slots: u32) -> Instance<Rational> {
        Instance {
            agents: (0..n)
                .map(|k| Agent {
                    name: format!("a{}", k + 1),
                    priority: r("0.5"),
                    availability: vec![true],
                    eligible: vec![CategoryId(0)],
                    group: None,
                })
                .collect(),
            categories: vec![Category {
                name: "c1".into(),
                daily_quota: vec![slots],
                overall_quota: None,
            }],
            daily_supply: vec![slots],
            discount: r("0.9"),
        }
    }

    #[test]
    fn network_shape_two_days_three_categories_three_agents() {
        let mut inst = tight_model1(r("0.5"), r("0.95"));
        inst.categories.push(Category {
            name: "c3".into(),
            daily_quota: vec![1, 1],
            overall_quota: None,
        });
        inst.agents.push(Agent {
            name: "a3".into(),
            priority: r("0.3"),
            availability: vec![false, true],
            eligible: vec![CategoryId(2)],
            group: None,
        });
        let (net, _, _) = build_model1_network(&inst).unwrap();
        assert_eq!(net.num_nodes(), 13);
    }

    #[test]
    fn unavailable_agent_has_no_incoming_arcs() {
        let mut inst = tight_model1(r("0.5"), r("0.95"));
        inst.agents[1].availability = vec![false, false];
        let (net, map, _) = build_model1_network(&inst).unwrap();
        let node = map.agent_node(AgentId(1));
        assert!(net.arcs().iter().all(|a| a.to != node));
    }

    #[test]
    fn single_cell_network_is_a_four_arc_chain() {
        let mut inst = symmetric(1, 1);
        inst.discount = r("0.5");
        let (net, map, _) = build_model1_network(&inst).unwrap();
        assert_eq!(net.arcs().len(), 4);
        let roles: Vec<_> = map.roles().to_vec();
        assert!(matches!(roles[0], ArcRole::Supply { day: 1 }));
        assert!(matches!(roles[1], ArcRole::Quota { .. }));
        assert!(matches!(roles[2], ArcRole::Assign { .. }));
        assert!(matches!(roles[3], ArcRole::AgentSink { .. }));
    }

    #[test]
    fn tight_model1_offline_optimum() {
        let inst = tight_model1(r("0.5"), r("0.95"));
        let alloc = solve_offline_model1(&inst).unwrap();
        assert!(check_allocation(&inst, &alloc, false).is_ok());
        assert_eq!(total_utility(&inst, &alloc), r("0.975"));
    }

    #[test]
    fn nobody_available_gives_empty_allocation() {
        let mut inst = tight_model1(r("0.5"), r("0.95"));
        for a in &mut inst.agents {
            a.availability = vec![false, false];
        }
        let alloc = solve_offline_model1(&inst).unwrap();
        assert_eq!(alloc.matched_count(), 0);
        assert_eq!(total_utility(&inst, &alloc), r("0"));
    }

    #[test]
    fn two_agent_instance_reaches_enumerated_optimum() {
        let inst = two_agent_half_discount::<Rational>();
        let alloc = solve_offline_model1(&inst).unwrap();
        assert_eq!(total_utility(&inst, &alloc), r("1.15"));
    }

    #[test]
    fn flow_cost_equals_negated_scaled_utility() {
        let inst = tight_model1(r("0.5"), r("0.95"));
        let (net, map, utils) = build_model1_network(&inst).unwrap();
        let res = solve_with_narrowest(&net, FlowLimit::Unbounded).unwrap();
        let alloc = map.extract(&res.arc_flows, 2);
        assert_eq!(utils.unscale(&-res.total_cost), total_utility(&inst, &alloc));
    }

    #[test]
    fn tie_break_follows_order() {
        let inst = symmetric(2, 1);
        let first = TieBreakOrder::from_sequence(vec![AgentId(0), AgentId(1)], 2).unwrap();
        let second = TieBreakOrder::from_sequence(vec![AgentId(1), AgentId(0)], 2).unwrap();
        let a = solve_offline_tiebroken(&inst, &first).unwrap();
        let b = solve_offline_tiebroken(&inst, &second).unwrap();
        assert_eq!(a.day_edges(1), vec![(AgentId(0), CategoryId(0))]);
        assert_eq!(b.day_edges(1), vec![(AgentId(1), CategoryId(0))]);
    }

    #[test]
    fn tie_break_three_agents_two_slots() {
        let inst = symmetric(3, 2);
        let order =
            TieBreakOrder::from_sequence(vec![AgentId(2), AgentId(0), AgentId(1)], 3).unwrap();
        let alloc = solve_offline_tiebroken(&inst, &order).unwrap();
        let matched: Vec<_> = alloc.matched().map(|(a, _, _)| a).collect();
        assert_eq!(matched, vec![AgentId(0), AgentId(2)]);
    }

    #[test]
    fn tie_break_is_inert_with_unique_optimum() {
        let inst = two_agent_half_discount::<Rational>();
        let plain = solve_offline_model1(&inst).unwrap();
        let order = TieBreakOrder::from_sequence(vec![AgentId(0), AgentId(1)], 2).unwrap();
        assert_eq!(solve_offline_tiebroken(&inst, &order).unwrap(), plain);
    }

    #[test]
    fn tie_break_order_validation() {
        assert!(TieBreakOrder::from_sequence(vec![AgentId(0)], 2).is_err());
        assert!(TieBreakOrder::from_sequence(vec![AgentId(0), AgentId(0)], 2).is_err());
        assert!(TieBreakOrder::from_sequence(vec![AgentId(0), AgentId(5)], 2).is_err());
    }

    #[test]
    fn oracle_agrees_on_tight_model1() {
        let inst = tight_model1(r("0.5"), r("0.95"));
        let alloc = solve_exact_oracle(&inst, false, DEFAULT_ORACLE_BUDGET).unwrap();
        assert_eq!(total_utility(&inst, &alloc), r("0.975"));
    }

    #[test]
    fn oracle_on_tight_general_model2() {
        let (a1, a2, a3, d) = (r("0.2"), r("0.4"), r("0.2"), r("0.5"));
        let inst = tight_general(a1.clone(), a2.clone(), a3.clone(), d.clone());
        let alloc = solve_exact_oracle(&inst, true, DEFAULT_ORACLE_BUDGET).unwrap();
        assert!(check_allocation(&inst, &alloc, true).is_ok());
        assert_eq!(total_utility(&inst, &alloc), a3 + &a1 * &d + &a2 * &d);
    }

    #[test]
    fn oracle_on_empty_instance() {
        let mut inst = symmetric(0, 1);
        inst.agents.clear();
        let alloc = solve_exact_oracle(&inst, false, DEFAULT_ORACLE_BUDGET).unwrap();
        assert!(alloc.is_empty());
    }

    #[test]
    fn oracle_refuses_past_budget() {
        let inst = symmetric(6, 3);
        assert_eq!(
            solve_exact_oracle(&inst, false, 3),
            Err(OfflineError::BudgetExceeded { budget: 3 })
        );
    }

    #[test]
    fn malformed_instance_is_rejected() {
        let mut inst = symmetric(2, 1);
        inst.discount = r("1");
        assert!(matches!(
            solve_offline_model1(&inst),
            Err(OfflineError::InvalidInstance(_))
        ));
    }
}
