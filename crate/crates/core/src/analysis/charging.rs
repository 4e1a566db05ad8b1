use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use super::decompose::{decompose_symmetric_difference, ComponentShape, EdgeSource, Node};
use super::AnalysisError;
use crate::model::{check_allocation, AgentId, Allocation, Assignment, CategoryId, Instance};
use crate::scalar::{format_fixed, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChargeKind {
    /// Matched online on an earlier day than offline; charges itself.
    Delayed,
    /// Has both an online and an offline edge that day; charges itself.
    Itself,
    /// Offline end of an even agent-to-agent path; charges the online end.
    EvenPath,
    /// Offline start of an odd path into a category with spare capacity;
    /// charges an online agent of the day nobody else charged.
    Spare,
    /// Offline start of an odd path into a saturated category; takes the slot
    /// of the last agent on the path.
    Shifted,
    /// Last agent before a saturated category; charges an agent matched
    /// online to that category on an earlier day.
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Charge {
    pub charger: AgentId,
    pub target: AgentId,
    /// Day the charger is matched offline.
    pub day: usize,
    pub kind: ChargeKind,
    /// Charger's offline utility over the target's online utility.
    pub factor: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateFailure {
    pub day: Option<usize>,
    pub agent: Option<AgentId>,
    pub reason: String,
}

impl fmt::Display for CertificateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(day) = self.day {
            write!(f, "day {day}: ")?;
        }
        if let Some(agent) = self.agent {
            write!(f, "{agent}: ")?;
        }
        f.write_str(&self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargingReport {
    pub type1_agents: Vec<AgentId>,
    pub charges: Vec<Charge>,
    pub per_target_load: BTreeMap<AgentId, Vec<Rational>>,
    /// Per-slot bounds, largest first.
    pub bounds: Vec<Rational>,
    /// `(offline agents charging within the day, online agents of the day)`.
    pub day_sizes: Vec<(usize, usize)>,
    pub bound_certified: bool,
    pub failures: Vec<CertificateFailure>,
}

impl ChargingReport {
    /// First failure, if any.
    pub fn witness(&self) -> Option<&CertificateFailure> {
        self.failures.first()
    }

    /// Σ factor · (target's online utility), which equals the offline utility
    /// when every offline agent charges exactly once.
    pub fn charged_total<S: Scalar>(&self, instance: &Instance<S>, online: &Allocation) -> Option<Rational> {
        let exact = instance.to_exact()?;
        let mut sum = Rational::zero();
        for ch in &self.charges {
            let day = online.get(ch.target).day()?;
            sum += &ch.factor * exact.utility(ch.target, day);
        }
        Some(sum)
    }
}

impl fmt::Display for ChargingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bounds: Vec<String> = self.bounds.iter().map(|b| format_fixed(b, 6)).collect();
        writeln!(
            f,
            "charges: {}, targets: {}, slot bounds: [{}], certified: {}",
            self.charges.len(),
            self.per_target_load.len(),
            bounds.join(", "),
            self.bound_certified
        )?;
        for failure in &self.failures {
            writeln!(f, "  {failure}")?;
        }
        Ok(())
    }
}

struct Builder<'a> {
    instance: &'a Instance<Rational>,
    online: &'a Allocation,
    offline: &'a Allocation,
    charges: Vec<Charge>,
    failures: Vec<CertificateFailure>,
}

impl Builder<'_> {
    fn charge(&mut self, charger: AgentId, target: AgentId, kind: ChargeKind) {
        let day = self.offline.get(charger).day().expect("charger matched offline");
        let Some(target_day) = self.online.get(target).day() else {
            self.fail(Some(day), Some(target), "charged agent is not matched online");
            return;
        };
        let factor = self.instance.utility(charger, day) / self.instance.utility(target, target_day);
        self.charges.push(Charge { charger, target, day, kind, factor });
    }

    fn fail(&mut self, day: Option<usize>, agent: Option<AgentId>, reason: impl Into<String>) {
        self.failures.push(CertificateFailure { day, agent, reason: reason.into() });
    }
}

/// Reconstructs a charging assignment of offline agents onto online agents
/// and checks every target's load against the per-slot bounds.
///
/// Slot bounds are `{1, δ}` for Model 1 and `{1, δ, (α_max/α_min)·δ}` for
/// Model 2. The certificate works for any feasible offline allocation, not
/// only an optimal one.
pub fn build_charging_report<S: Scalar>(
    instance: &Instance<S>,
    online: &Allocation,
    offline: &Allocation,
    model2: bool,
) -> Result<ChargingReport, AnalysisError> {
    let exact = instance.to_exact().ok_or(AnalysisError::NonFinite)?;
    for (which, alloc) in [("online", online), ("offline", offline)] {
        let report = check_allocation(&exact, alloc, model2);
        if !report.is_ok() {
            return Err(AnalysisError::InfeasibleAllocation { which, report });
        }
    }
    let days = exact.num_days();
    let ncat = exact.categories.len();
    let delta = exact.discount.clone();
    let mut bounds = vec![Rational::one(), delta.clone()];
    if model2 {
        let hi = exact.agents.iter().map(|a| &a.priority).max();
        let lo = exact.agents.iter().map(|a| &a.priority).min();
        let spread = match (hi, lo) {
            (Some(hi), Some(lo)) => hi / lo,
            _ => Rational::one(),
        };
        bounds.push(spread * &delta);
    }
    bounds.sort_by(|x, y| y.cmp(x));

    let mut b = Builder {
        instance: &exact,
        online,
        offline,
        charges: Vec::new(),
        failures: Vec::new(),
    };

    let mut type1 = Vec::new();
    let mut type2 = vec![false; exact.agents.len()];
    for (agent, _, n_day) in offline.matched() {
        match online.get(agent) {
            Assignment::Matched { day: m_day, .. } if m_day < n_day => {
                type1.push(agent);
                b.charge(agent, agent, ChargeKind::Delayed);
            }
            _ => type2[agent.0] = true,
        }
    }

    // online usage per category and day, for the Model 2 capacities
    let mut used = vec![vec![0u32; days + 1]; ncat];
    for (_, c, day) in online.matched() {
        used[c.0][day] += 1;
    }
    let capacity = |c: CategoryId, day: usize| -> u32 {
        let cat = exact.category(c);
        let quota = cat.quota_on(day);
        match (model2, cat.overall_quota) {
            (true, Some(overall)) => {
                let spent: u32 = used[c.0][1..day].iter().sum();
                quota.min(overall.saturating_sub(spent))
            }
            _ => quota,
        }
    };

    let mut overflow_requests: Vec<(usize, AgentId, CategoryId)> = Vec::new();
    let mut day_sizes = Vec::with_capacity(days);
    for day in 1..=days {
        let m_day = online.day_edges(day);
        let n_day: Vec<_> = offline
            .day_edges(day)
            .into_iter()
            .filter(|(a, _)| type2[a.0])
            .collect();
        let y: Vec<AgentId> = m_day.iter().map(|e| e.0).collect();
        day_sizes.push((n_day.len(), y.len()));
        let m_set: BTreeSet<_> = m_day.iter().copied().collect();
        let mut m_count = vec![0u32; ncat];
        for &(_, c) in &m_day {
            m_count[c.0] += 1;
        }

        let mut same_day: Vec<(AgentId, AgentId, ChargeKind)> = Vec::new();
        let mut spare = Vec::new();
        for &edge in &n_day {
            if m_set.contains(&edge) {
                same_day.push((edge.0, edge.0, ChargeKind::Itself));
            }
        }
        for comp in decompose_symmetric_difference(&m_day, &n_day).components {
            let mut nodes = comp.nodes.clone();
            let mut edges = comp.edges.clone();
            if comp.shape == ComponentShape::Path && matches!(comp.last(), Node::Agent(_)) && matches!(comp.first(), Node::Category(_)) {
                nodes.reverse();
                edges.reverse();
            }
            let internal: Vec<AgentId> = match comp.shape {
                ComponentShape::Cycle => nodes.iter().filter_map(agent_of).collect(),
                ComponentShape::Path => nodes[1..nodes.len() - 1].iter().filter_map(agent_of).collect(),
            };
            let mut skip = None;
            if comp.shape == ComponentShape::Path {
                let first = nodes[0];
                let last = nodes[nodes.len() - 1];
                let first_src = edges[0].source;
                let last_src = edges[edges.len() - 1].source;
                match (first, last) {
                    (Node::Agent(a1), Node::Agent(ak)) => {
                        let (charger, target) = if first_src == EdgeSource::Offline { (a1, ak) } else { (ak, a1) };
                        debug_assert_ne!(first_src, last_src);
                        same_day.push((charger, target, ChargeKind::EvenPath));
                    }
                    (Node::Agent(a1), Node::Category(ck)) if first_src == EdgeSource::Offline => {
                        if m_count[ck.0] < capacity(ck, day) {
                            spare.push(a1);
                        } else if edges.len() == 1 {
                            overflow_requests.push((day, a1, ck));
                        } else {
                            let ak = agent_of(&nodes[nodes.len() - 2]).expect("agent precedes category");
                            skip = Some(ak);
                            same_day.push((a1, ak, ChargeKind::Shifted));
                            overflow_requests.push((day, ak, ck));
                        }
                    }
                    _ => {}
                }
            }
            for agent in internal {
                if Some(agent) != skip {
                    same_day.push((agent, agent, ChargeKind::Itself));
                }
            }
        }

        let mut taken = BTreeSet::new();
        for &(charger, target, kind) in &same_day {
            if !taken.insert(target) {
                b.fail(Some(day), Some(target), "charged twice within the day");
            }
            b.charge(charger, target, kind);
        }
        spare.sort();
        for charger in spare {
            match y.iter().find(|t| !taken.contains(*t)) {
                Some(&target) => {
                    taken.insert(target);
                    b.charge(charger, target, ChargeKind::Spare);
                }
                None => b.fail(Some(day), Some(charger), "no uncharged online agent left for an odd path"),
            }
        }
    }

    overflow_requests.sort();
    let mut pools: BTreeMap<CategoryId, Vec<(usize, AgentId, bool)>> = BTreeMap::new();
    for (agent, c, day) in online.matched() {
        pools.entry(c).or_default().push((day, agent, false));
    }
    for pool in pools.values_mut() {
        pool.sort();
    }
    for (day, charger, c) in overflow_requests {
        let slot = pools
            .get_mut(&c)
            .and_then(|pool| pool.iter_mut().find(|(d, _, used)| !*used && *d < day));
        match slot {
            Some(entry) => {
                entry.2 = true;
                let target = entry.1;
                b.charge(charger, target, ChargeKind::Overflow);
            }
            None => b.fail(
                Some(day),
                Some(charger),
                format!("no earlier online agent of category {c} left to absorb the overflow"),
            ),
        }
    }

    let mut per_charger: BTreeMap<AgentId, usize> = BTreeMap::new();
    let mut per_target_load: BTreeMap<AgentId, Vec<Rational>> = BTreeMap::new();
    for ch in &b.charges {
        *per_charger.entry(ch.charger).or_default() += 1;
        per_target_load.entry(ch.target).or_default().push(ch.factor.clone());
    }
    for (agent, _, day) in offline.matched() {
        let times = per_charger.get(&agent).copied().unwrap_or(0);
        if times != 1 {
            b.fail(Some(day), Some(agent), format!("charges {times} times"));
        }
    }
    for (target, load) in per_target_load.iter_mut() {
        load.sort_by(|x, y| y.cmp(x));
        let day = online.get(*target).day();
        if load.len() > bounds.len() {
            b.fail(day, Some(*target), format!("charged by {} agents", load.len()));
        } else if load.iter().zip(&bounds).any(|(f, bound)| f > bound) {
            let shown: Vec<String> = load.iter().map(|f| format_fixed(f, 6)).collect();
            b.fail(day, Some(*target), format!("load [{}] exceeds the slot bounds", shown.join(", ")));
        }
    }

    Ok(ChargingReport {
        type1_agents: type1,
        charges: b.charges,
        per_target_load,
        bounds,
        day_sizes,
        bound_certified: b.failures.is_empty(),
        failures: b.failures,
    })
}

fn agent_of(node: &Node) -> Option<AgentId> {
    match node {
        Node::Agent(a) => Some(*a),
        Node::Category(_) => None,
    }
}
