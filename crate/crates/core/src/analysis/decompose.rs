use std::collections::{BTreeMap, BTreeSet};

use crate::model::{AgentId, CategoryId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeSource {
    Online,
    Offline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledEdge {
    pub agent: AgentId,
    pub category: CategoryId,
    pub source: EdgeSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Agent(AgentId),
    Category(CategoryId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentShape {
    Path,
    Cycle,
}

/// An alternating path or cycle. For a path, `nodes` has one more entry than
/// `edges`; for a cycle the closing node is not repeated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub shape: ComponentShape,
    pub nodes: Vec<Node>,
    pub edges: Vec<LabeledEdge>,
}

impl Component {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn first(&self) -> Node {
        self.nodes[0]
    }

    pub fn last(&self) -> Node {
        *self.nodes.last().expect("component has nodes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub components: Vec<Component>,
}

impl Decomposition {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Every edge of every component, sorted.
    pub fn edges(&self) -> Vec<LabeledEdge> {
        let mut all: Vec<_> = self.components.iter().flat_map(|c| c.edges.iter().copied()).collect();
        all.sort();
        all
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Agent,
    Category,
}

struct Links {
    edges: Vec<LabeledEdge>,
    at_agent: Vec<Option<usize>>,
    at_category: Vec<Option<usize>>,
}

impl Links {
    fn next(&self, e: usize, side: Side) -> Option<usize> {
        match side {
            Side::Agent => self.at_agent[e],
            Side::Category => self.at_category[e],
        }
    }

    fn node(&self, e: usize, side: Side) -> Node {
        match side {
            Side::Agent => Node::Agent(self.edges[e].agent),
            Side::Category => Node::Category(self.edges[e].category),
        }
    }
}

fn flip(side: Side) -> Side {
    match side {
        Side::Agent => Side::Category,
        Side::Category => Side::Agent,
    }
}

/// Splits `M ⊕ N` of one day into edge-disjoint alternating paths and cycles.
///
/// At each category, online and offline edges are paired in agent order;
/// unpaired edges become path ends. Paths are walked from agent ends first.
///
/// # Panics
///
/// If either side matches an agent twice.
pub fn decompose_symmetric_difference(
    day_m: &[(AgentId, CategoryId)],
    day_n: &[(AgentId, CategoryId)],
) -> Decomposition {
    let m: BTreeSet<_> = day_m.iter().copied().collect();
    let n: BTreeSet<_> = day_n.iter().copied().collect();
    for (side, name) in [(day_m, "online"), (day_n, "offline")] {
        let agents: BTreeSet<_> = side.iter().map(|e| e.0).collect();
        assert_eq!(agents.len(), side.len(), "{name} day matching uses an agent twice");
    }
    let mut edges: Vec<LabeledEdge> = m
        .difference(&n)
        .map(|&(agent, category)| LabeledEdge { agent, category, source: EdgeSource::Online })
        .chain(n.difference(&m).map(|&(agent, category)| LabeledEdge {
            agent,
            category,
            source: EdgeSource::Offline,
        }))
        .collect();
    edges.sort();

    let count = edges.len();
    let mut at_agent = vec![None; count];
    let mut at_category = vec![None; count];
    let mut by_agent: BTreeMap<AgentId, Vec<usize>> = BTreeMap::new();
    let mut by_cat: BTreeMap<CategoryId, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (e, edge) in edges.iter().enumerate() {
        by_agent.entry(edge.agent).or_default().push(e);
        let slot = by_cat.entry(edge.category).or_default();
        match edge.source {
            EdgeSource::Online => slot.0.push(e),
            EdgeSource::Offline => slot.1.push(e),
        }
    }
    for list in by_agent.values() {
        if let [x, y] = list[..] {
            at_agent[x] = Some(y);
            at_agent[y] = Some(x);
        }
    }
    for (online, offline) in by_cat.values() {
        for (&x, &y) in online.iter().zip(offline) {
            at_category[x] = Some(y);
            at_category[y] = Some(x);
        }
    }
    let links = Links { edges, at_agent, at_category };

    let mut visited = vec![false; count];
    let mut components = Vec::new();
    // agent ends, then category-category paths, then cycles
    for pass in 0..3 {
        for e in 0..count {
            if visited[e] {
                continue;
            }
            let start_side = match pass {
                0 if links.at_agent[e].is_none() => Side::Agent,
                1 if links.at_category[e].is_none() => Side::Category,
                2 => Side::Agent,
                _ => continue,
            };
            components.push(walk(&links, e, start_side, pass == 2, &mut visited));
        }
    }
    Decomposition { components }
}

fn walk(links: &Links, start: usize, start_side: Side, cycle: bool, visited: &mut [bool]) -> Component {
    let mut nodes = vec![links.node(start, start_side)];
    let mut edges = Vec::new();
    let mut e = start;
    let mut entered = start_side;
    loop {
        visited[e] = true;
        edges.push(links.edges[e]);
        let exit = flip(entered);
        match links.next(e, exit) {
            Some(next) if next == start => break,
            Some(next) => {
                nodes.push(links.node(e, exit));
                e = next;
                entered = exit;
            }
            None => {
                nodes.push(links.node(e, exit));
                break;
            }
        }
    }
    Component {
        shape: if cycle { ComponentShape::Cycle } else { ComponentShape::Path },
        nodes,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(k: usize) -> AgentId {
        AgentId(k)
    }
    fn c(k: usize) -> CategoryId {
        CategoryId(k)
    }

    #[test]
    fn identical_matchings() {
        let m = vec![(a(0), c(0)), (a(1), c(1))];
        assert!(decompose_symmetric_difference(&m, &m).is_empty());
    }

    #[test]
    fn one_agent_two_labels() {
        let d = decompose_symmetric_difference(&[(a(0), c(0))], &[(a(0), c(1))]);
        assert_eq!(d.components.len(), 1);
        let comp = &d.components[0];
        assert_eq!(comp.shape, ComponentShape::Path);
        assert_eq!(
            comp.nodes,
            vec![Node::Category(c(0)), Node::Agent(a(0)), Node::Category(c(1))]
        );
    }

    #[test]
    fn four_cycle() {
        let m = vec![(a(0), c(0)), (a(1), c(1))];
        let n = vec![(a(0), c(1)), (a(1), c(0))];
        let d = decompose_symmetric_difference(&m, &n);
        assert_eq!(d.components.len(), 1);
        let comp = &d.components[0];
        assert_eq!(comp.shape, ComponentShape::Cycle);
        assert_eq!(comp.len(), 4);
        assert_eq!(comp.nodes.len(), 4);
    }

    #[test]
    fn even_agent_path() {
        // a0 -M- c0 -N- a1
        let d = decompose_symmetric_difference(&[(a(0), c(0))], &[(a(1), c(0))]);
        let comp = &d.components[0];
        assert_eq!(comp.first(), Node::Agent(a(0)));
        assert_eq!(comp.last(), Node::Agent(a(1)));
        assert_eq!(comp.len(), 2);
    }

    fn matching(max_agents: usize, max_cats: usize) -> impl Strategy<Value = Vec<(AgentId, CategoryId)>> {
        proptest::collection::vec(proptest::option::of(0..max_cats), max_agents).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .filter_map(|(k, cat)| cat.map(|x| (AgentId(k), CategoryId(x))))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn reassembles_symmetric_difference(m in matching(7, 3), n in matching(7, 3)) {
            let d = decompose_symmetric_difference(&m, &n);
            let ms: BTreeSet<_> = m.iter().copied().collect();
            let ns: BTreeSet<_> = n.iter().copied().collect();
            let mut expected: Vec<LabeledEdge> = ms
                .symmetric_difference(&ns)
                .map(|&(agent, category)| LabeledEdge {
                    agent,
                    category,
                    source: if ms.contains(&(agent, category)) { EdgeSource::Online } else { EdgeSource::Offline },
                })
                .collect();
            expected.sort();
            prop_assert_eq!(d.edges(), expected);
            for comp in &d.components {
                for pair in comp.edges.windows(2) {
                    prop_assert_ne!(pair[0].source, pair[1].source);
                }
                match comp.shape {
                    ComponentShape::Cycle => {
                        prop_assert_eq!(comp.len() % 2, 0);
                        prop_assert_eq!(comp.nodes.len(), comp.len());
                        prop_assert_ne!(comp.edges[0].source, comp.edges[comp.len() - 1].source);
                    }
                    ComponentShape::Path => prop_assert_eq!(comp.nodes.len(), comp.len() + 1),
                }
                // consecutive edges share the node between them
                for (i, pair) in comp.edges.windows(2).enumerate() {
                    let shared = comp.nodes[i + 1];
                    let touches = |e: &LabeledEdge| match shared {
                        Node::Agent(x) => e.agent == x,
                        Node::Category(x) => e.category == x,
                    };
                    prop_assert!(touches(&pair[0]) && touches(&pair[1]));
                }
            }
        }
    }
}
