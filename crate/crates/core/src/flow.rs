//! Integer min-cost flow.
//!
//! The solver is a primal-dual successive-shortest-path method: an initial
//! label-correcting pass produces node potentials that absorb negative arc
//! costs, then every phase runs Dijkstra on reduced costs and pushes a
//! blocking flow along all shortest augmenting paths at once. Augmentation
//! stops as soon as the shortest path is no longer strictly profitable or the
//! flow limit is reached, which yields a minimum-cost flow among all flows of
//! value at most the limit.
//!
//! Costs are generic: `i64`, `i128` and [`num::BigInt`] all work through
//! [`FlowCost`].

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Debug;

use num::BigInt;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use thiserror::Error;

/// Integer cost domain accepted by the solver.
pub trait FlowCost: Signed + Ord + Clone + Debug + FromPrimitive + Send + Sync {}

impl<T> FlowCost for T where T: Signed + Ord + Clone + Debug + FromPrimitive + Send + Sync {}

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc<C> {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: u64,
    pub cost: C,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("node {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("arc leaves the sink")]
    ArcFromSink,
    #[error("arc enters the source")]
    ArcIntoSource,
    #[error("source and sink must differ")]
    SourceIsSink,
    #[error("negative-cost cycle reachable from the source")]
    NegativeCycle,
}

/// Directed network with integer capacities and costs.
#[derive(Debug, Clone)]
pub struct FlowNetwork<C> {
    num_nodes: usize,
    source: NodeId,
    sink: NodeId,
    arcs: Vec<Arc<C>>,
}

impl<C: FlowCost> FlowNetwork<C> {
    pub fn new(num_nodes: usize, source: NodeId, sink: NodeId) -> Result<Self, FlowError> {
        for n in [source, sink] {
            if n >= num_nodes {
                return Err(FlowError::NodeOutOfRange(n));
            }
        }
        if source == sink {
            return Err(FlowError::SourceIsSink);
        }
        Ok(FlowNetwork {
            num_nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    pub fn add_arc(
        &mut self,
        from: NodeId,
        to: NodeId,
        capacity: u64,
        cost: C,
    ) -> Result<ArcId, FlowError> {
        for n in [from, to] {
            if n >= self.num_nodes {
                return Err(FlowError::NodeOutOfRange(n));
            }
        }
        if from == to {
            return Err(FlowError::SelfLoop(from));
        }
        if from == self.sink {
            return Err(FlowError::ArcFromSink);
        }
        if to == self.source {
            return Err(FlowError::ArcIntoSource);
        }
        self.arcs.push(Arc { from, to, capacity, cost });
        Ok(self.arcs.len() - 1)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc<C>] {
        &self.arcs
    }

    /// Same topology with costs converted by `f`; `None` if any cost fails.
    pub fn try_map_costs<D, F>(&self, mut f: F) -> Option<FlowNetwork<D>>
    where
        D: FlowCost,
        F: FnMut(&C) -> Option<D>,
    {
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                f(&a.cost).map(|cost| Arc {
                    from: a.from,
                    to: a.to,
                    capacity: a.capacity,
                    cost,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(FlowNetwork {
            num_nodes: self.num_nodes,
            source: self.source,
            sink: self.sink,
            arcs,
        })
    }

    /// Total cost of an arbitrary per-arc flow vector.
    pub fn cost_of(&self, arc_flows: &[u64]) -> C {
        self.arcs
            .iter()
            .zip(arc_flows)
            .fold(C::zero(), |acc, (a, &f)| acc + a.cost.clone() * from_u64::<C>(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowLimit {
    Bounded(u64),
    Unbounded,
}

impl FlowLimit {
    fn as_u64(self) -> u64 {
        match self {
            FlowLimit::Bounded(v) => v,
            FlowLimit::Unbounded => u64::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult<C> {
    pub arc_flows: Vec<u64>,
    pub total_flow: u64,
    pub total_cost: C,
}

fn from_u64<C: FlowCost>(v: u64) -> C {
    C::from_u64(v).expect("flow amount representable in cost type")
}

struct Residual<C> {
    head: Vec<NodeId>,
    cap: Vec<u64>,
    cost: Vec<C>,
    adj: Vec<Vec<usize>>,
}

impl<C: FlowCost> Residual<C> {
    fn build(net: &FlowNetwork<C>) -> Self {
        let m = net.arcs.len();
        let mut head = Vec::with_capacity(2 * m);
        let mut cap = Vec::with_capacity(2 * m);
        let mut cost = Vec::with_capacity(2 * m);
        let mut adj = vec![Vec::new(); net.num_nodes];
        for (i, a) in net.arcs.iter().enumerate() {
            head.push(a.to);
            cap.push(a.capacity);
            cost.push(a.cost.clone());
            head.push(a.from);
            cap.push(0);
            cost.push(-a.cost.clone());
            adj[a.from].push(2 * i);
            adj[a.to].push(2 * i + 1);
        }
        Residual { head, cap, cost, adj }
    }

    fn tail(&self, e: usize) -> NodeId {
        self.head[e ^ 1]
    }
}

/// Minimum-cost flow among all flows of value at most `limit`.
///
/// Negative arc costs are allowed; a negative cycle reachable from the
/// source is reported as [`FlowError::NegativeCycle`].
pub fn solve_profitable_flow<C: FlowCost>(
    net: &FlowNetwork<C>,
    limit: FlowLimit,
) -> Result<FlowResult<C>, FlowError> {
    let n = net.num_nodes;
    let (s, t) = (net.source, net.sink);
    let mut res = Residual::build(net);
    let cap_limit = limit.as_u64();

    let mut potential = initial_potentials(&res, n, s)?;
    let mut total_flow = 0u64;

    while total_flow < cap_limit {
        let dist = dijkstra(&res, &potential, s);
        if dist[t].is_none() {
            break;
        }
        for v in 0..n {
            if let Some(d) = &dist[v] {
                potential[v] = potential[v].clone() + d.clone();
            }
        }
        // true shortest path cost is potential[t] - potential[s], and potential[s] stays 0
        if !potential[t].is_negative() {
            break;
        }
        let pushed = blocking_flow(&mut res, &potential, s, t, cap_limit - total_flow);
        if pushed == 0 {
            break;
        }
        total_flow += pushed;
    }

    let arc_flows: Vec<u64> = (0..net.arcs.len()).map(|i| res.cap[2 * i + 1]).collect();
    let total_cost = net.cost_of(&arc_flows);
    Ok(FlowResult {
        arc_flows,
        total_flow,
        total_cost,
    })
}

/// Solves with the narrowest machine integer that cannot overflow, falling
/// back to big integers.
pub fn solve_with_narrowest(
    net: &FlowNetwork<BigInt>,
    limit: FlowLimit,
) -> Result<FlowResult<BigInt>, FlowError> {
    let magnitude: BigInt = net
        .arcs()
        .iter()
        .map(|a| a.cost.abs() * BigInt::from(a.capacity.max(1)))
        .sum();
    if magnitude < BigInt::from(i64::MAX / 4) {
        let narrow = net
            .try_map_costs(|c| c.to_i64())
            .expect("costs bounded by magnitude");
        let r = solve_profitable_flow(&narrow, limit)?;
        return Ok(FlowResult {
            arc_flows: r.arc_flows,
            total_flow: r.total_flow,
            total_cost: BigInt::from(r.total_cost),
        });
    }
    if magnitude < BigInt::from(i128::MAX / 4) {
        let narrow = net
            .try_map_costs(|c| c.to_i128())
            .expect("costs bounded by magnitude");
        let r = solve_profitable_flow(&narrow, limit)?;
        return Ok(FlowResult {
            arc_flows: r.arc_flows,
            total_flow: r.total_flow,
            total_cost: BigInt::from(r.total_cost),
        });
    }
    solve_profitable_flow(net, limit)
}

/// Label-correcting shortest distances from `s`; unreachable nodes get 0.
fn initial_potentials<C: FlowCost>(
    res: &Residual<C>,
    n: usize,
    s: NodeId,
) -> Result<Vec<C>, FlowError> {
    let mut dist: Vec<Option<C>> = vec![None; n];
    let mut in_queue = vec![false; n];
    let mut relax_count = vec![0usize; n];
    let mut queue = VecDeque::new();
    dist[s] = Some(C::zero());
    queue.push_back(s);
    in_queue[s] = true;
    while let Some(u) = queue.pop_front() {
        in_queue[u] = false;
        let du = dist[u].clone().expect("queued nodes are labelled");
        for &e in &res.adj[u] {
            if res.cap[e] == 0 {
                continue;
            }
            let v = res.head[e];
            let cand = du.clone() + res.cost[e].clone();
            if dist[v].as_ref().is_none_or(|dv| cand < *dv) {
                dist[v] = Some(cand);
                relax_count[v] += 1;
                if relax_count[v] > n {
                    return Err(FlowError::NegativeCycle);
                }
                if !in_queue[v] {
                    in_queue[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(dist.into_iter().map(|d| d.unwrap_or_else(C::zero)).collect())
}

fn reduced<C: FlowCost>(res: &Residual<C>, pot: &[C], e: usize) -> C {
    res.cost[e].clone() + pot[res.tail(e)].clone() - pot[res.head[e]].clone()
}

/// Reduced-cost distances from `s`; `None` entries are unreachable.
fn dijkstra<C: FlowCost>(res: &Residual<C>, pot: &[C], s: NodeId) -> Vec<Option<C>> {
    let n = pot.len();
    let mut dist: Vec<Option<C>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = Some(C::zero());
    heap.push(Reverse((C::zero(), s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &e in &res.adj[u] {
            if res.cap[e] == 0 {
                continue;
            }
            let v = res.head[e];
            if done[v] {
                continue;
            }
            let rc = reduced(res, pot, e);
            debug_assert!(!rc.is_negative(), "potentials must keep reduced costs non-negative");
            let cand = d.clone() + rc;
            if dist[v].as_ref().is_none_or(|dv| cand < *dv) {
                dist[v] = Some(cand.clone());
                heap.push(Reverse((cand, v)));
            }
        }
    }
    dist
}

/// Dinic-style blocking flow restricted to zero-reduced-cost residual arcs.
fn blocking_flow<C: FlowCost>(
    res: &mut Residual<C>,
    pot: &[C],
    s: NodeId,
    t: NodeId,
    mut budget: u64,
) -> u64 {
    let n = pot.len();
    let mut pushed = 0u64;
    while budget > 0 {
        let mut level = vec![usize::MAX; n];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &res.adj[u] {
                let v = res.head[e];
                if res.cap[e] > 0 && level[v] == usize::MAX && reduced(res, pot, e).is_zero() {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[t] == usize::MAX {
            break;
        }
        let mut next = vec![0usize; n];
        loop {
            let f = augment(res, pot, &level, &mut next, s, t, budget);
            if f == 0 {
                break;
            }
            pushed += f;
            budget -= f;
            if budget == 0 {
                break;
            }
        }
    }
    pushed
}

/// One augmenting path in the level graph, iterative to avoid deep recursion.
fn augment<C: FlowCost>(
    res: &mut Residual<C>,
    pot: &[C],
    level: &[usize],
    next: &mut [usize],
    s: NodeId,
    t: NodeId,
    budget: u64,
) -> u64 {
    let mut path: Vec<usize> = Vec::new();
    let mut u = s;
    loop {
        if u == t {
            let f = path.iter().map(|&e| res.cap[e]).min().unwrap_or(0).min(budget);
            for &e in &path {
                res.cap[e] -= f;
                res.cap[e ^ 1] += f;
            }
            return f;
        }
        let mut advanced = false;
        while next[u] < res.adj[u].len() {
            let e = res.adj[u][next[u]];
            let v = res.head[e];
            if res.cap[e] > 0 && level[v] == level[u] + 1 && reduced(res, pot, e).is_zero() {
                path.push(e);
                u = v;
                advanced = true;
                break;
            }
            next[u] += 1;
        }
        if !advanced {
            // dead end: retreat and skip the arc that led here
            match path.pop() {
                Some(e) => {
                    u = res.tail(e);
                    next[u] += 1;
                }
                None => return 0,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;
    use proptest::prelude::*;

    fn twin_arc_network() -> FlowNetwork<i64> {
        // s=0, v=1, t=2
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 2, 0).unwrap();
        net.add_arc(1, 2, 1, -3).unwrap();
        net.add_arc(1, 2, 1, -1).unwrap();
        net
    }

    #[test]
    fn twin_arcs_unbounded() {
        let r = solve_profitable_flow(&twin_arc_network(), FlowLimit::Unbounded).unwrap();
        assert_eq!((r.total_flow, r.total_cost), (2, -4));
        assert_eq!(r.arc_flows, vec![2, 1, 1]);
    }

    #[test]
    fn twin_arcs_capped_at_one() {
        let r = solve_profitable_flow(&twin_arc_network(), FlowLimit::Bounded(1)).unwrap();
        assert_eq!((r.total_flow, r.total_cost), (1, -3));
        assert_eq!(r.arc_flows, vec![1, 1, 0]);
    }

    #[test]
    fn zero_limit_gives_zero_flow() {
        let r = solve_profitable_flow(&twin_arc_network(), FlowLimit::Bounded(0)).unwrap();
        assert_eq!((r.total_flow, r.total_cost), (0, 0));
    }

    #[test]
    fn unprofitable_paths_are_not_used() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 5, 2).unwrap();
        net.add_arc(1, 2, 5, -2).unwrap();
        let r = solve_profitable_flow(&net, FlowLimit::Unbounded).unwrap();
        assert_eq!(r.total_flow, 0);
    }

    #[test]
    fn construction_errors() {
        let mut net: FlowNetwork<i64> = FlowNetwork::new(3, 0, 2).unwrap();
        assert_eq!(net.add_arc(1, 1, 1, 0), Err(FlowError::SelfLoop(1)));
        assert_eq!(net.add_arc(2, 1, 1, 0), Err(FlowError::ArcFromSink));
        assert_eq!(net.add_arc(1, 0, 1, 0), Err(FlowError::ArcIntoSource));
        assert_eq!(net.add_arc(1, 7, 1, 0), Err(FlowError::NodeOutOfRange(7)));
        assert!(FlowNetwork::<i64>::new(2, 1, 1).is_err());
    }

    #[test]
    fn negative_cycle_is_detected() {
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        net.add_arc(0, 1, 1, 0).unwrap();
        net.add_arc(1, 2, 1, -1).unwrap();
        net.add_arc(2, 1, 1, -1).unwrap();
        net.add_arc(2, 3, 1, 0).unwrap();
        assert_eq!(
            solve_profitable_flow(&net, FlowLimit::Unbounded),
            Err(FlowError::NegativeCycle)
        );
    }

    #[test]
    fn rerouting_through_reverse_arcs() {
        // greedy s-a-d-t would block; optimum uses both a-e and b-d
        let mut net = FlowNetwork::new(6, 0, 5).unwrap();
        net.add_arc(0, 1, 1, 0).unwrap(); // s-a
        net.add_arc(0, 2, 1, 0).unwrap(); // s-b
        net.add_arc(1, 3, 1, -10).unwrap(); // a-d
        net.add_arc(1, 4, 1, -9).unwrap(); // a-e
        net.add_arc(2, 3, 1, -8).unwrap(); // b-d
        net.add_arc(3, 5, 1, 0).unwrap();
        net.add_arc(4, 5, 1, 0).unwrap();
        let r = solve_profitable_flow(&net, FlowLimit::Unbounded).unwrap();
        assert_eq!((r.total_flow, r.total_cost), (2, -17));
    }

    #[test]
    fn big_integer_costs_match_machine_integers() {
        let net = twin_arc_network();
        let big = net.try_map_costs(|c| Some(BigInt::from(*c))).unwrap();
        let r = solve_profitable_flow(&big, FlowLimit::Unbounded).unwrap();
        assert_eq!(r.total_cost, BigInt::from(-4));
    }

    /// Exhaustive oracle: every integral arc-flow vector within capacities.
    fn brute_force_min_cost(net: &FlowNetwork<i64>, limit: u64) -> i64 {
        let arcs = net.arcs();
        let mut best = 0i64;
        let mut flows = vec![0u64; arcs.len()];
        fn rec(
            i: usize,
            net: &FlowNetwork<i64>,
            flows: &mut Vec<u64>,
            limit: u64,
            best: &mut i64,
        ) {
            let arcs = net.arcs();
            if i == arcs.len() {
                let mut balance = vec![0i64; net.num_nodes()];
                for (a, &f) in arcs.iter().zip(flows.iter()) {
                    balance[a.from] -= f as i64;
                    balance[a.to] += f as i64;
                }
                let ok = (0..net.num_nodes())
                    .filter(|&v| v != net.source() && v != net.sink())
                    .all(|v| balance[v] == 0);
                let value = balance[net.sink()];
                if ok && value >= 0 && value as u64 <= limit {
                    *best = (*best).min(net.cost_of(flows));
                }
                return;
            }
            for f in 0..=arcs[i].capacity {
                flows[i] = f;
                rec(i + 1, net, flows, limit, best);
            }
            flows[i] = 0;
        }
        rec(0, net, &mut flows, limit, &mut best);
        best
    }

    fn check_invariants(net: &FlowNetwork<i64>, r: &FlowResult<i64>) {
        let mut balance = vec![0i64; net.num_nodes()];
        for (a, &f) in net.arcs().iter().zip(&r.arc_flows) {
            assert!(f <= a.capacity);
            balance[a.from] -= f as i64;
            balance[a.to] += f as i64;
        }
        for v in 0..net.num_nodes() {
            if v != net.source() && v != net.sink() {
                assert_eq!(balance[v], 0, "conservation at {v}");
            }
        }
        assert_eq!(balance[net.sink()], r.total_flow as i64);
        assert_eq!(net.cost_of(&r.arc_flows), r.total_cost);
    }

    /// Random DAG-ish networks (arcs only go from lower to higher node id,
    /// so no negative cycles) with at most 8 nodes and capacities <= 2.
    fn network_strategy() -> impl Strategy<Value = FlowNetwork<i64>> {
        (3usize..=6).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .collect();
            let m = pairs.len();
            proptest::collection::vec((any::<bool>(), 0u64..=2, -5i64..=3), m).prop_map(
                move |spec| {
                    let mut net = FlowNetwork::new(n, 0, n - 1).unwrap();
                    let mut used = 0;
                    for (&(u, v), &(on, cap, cost)) in pairs.iter().zip(&spec) {
                        if on && used < 8 {
                            net.add_arc(u, v, cap, cost).unwrap();
                            used += 1;
                        }
                    }
                    net
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn matches_exhaustive_enumeration(net in network_strategy(), limit in 0u64..4) {
            let r = solve_profitable_flow(&net, FlowLimit::Bounded(limit)).unwrap();
            check_invariants(&net, &r);
            prop_assert!(r.total_flow <= limit);
            prop_assert_eq!(r.total_cost, brute_force_min_cost(&net, limit));
        }

        #[test]
        fn relaxing_the_limit_never_costs_more(net in network_strategy(), limit in 0u64..4) {
            let tight = solve_profitable_flow(&net, FlowLimit::Bounded(limit)).unwrap();
            let loose = solve_profitable_flow(&net, FlowLimit::Bounded(limit + 1)).unwrap();
            let free = solve_profitable_flow(&net, FlowLimit::Unbounded).unwrap();
            prop_assert!(loose.total_cost <= tight.total_cost);
            prop_assert!(free.total_cost <= loose.total_cost);
        }
    }
}
