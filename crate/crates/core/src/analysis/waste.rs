use std::collections::VecDeque;

use crate::online::{DayGraph, OnlineTrace};
use crate::scalar::Scalar;

/// Largest capped b-matching of `graph`, ignoring weights.
///
/// Plain BFS augmenting paths on a dense residual matrix; deliberately shares
/// no code with the flow solver so it can serve as a cross-check.
pub fn max_capped_bmatching_size<S: Scalar>(graph: &DayGraph<S>) -> usize {
    let n = graph.agents.len();
    let m = graph.categories.len();
    let (source, gate, sink) = (0, 1, 2 + n + m);
    let size = sink + 1;
    let mut cap = vec![vec![0i64; size]; size];
    cap[source][gate] = i64::from(graph.size_cap);
    for a in 0..n {
        cap[gate][2 + a] = 1;
    }
    for &(a, c) in &graph.edges {
        cap[2 + a][2 + n + c] = 1;
    }
    for (c, cat) in graph.categories.iter().enumerate() {
        cap[2 + n + c][sink] = i64::from(cat.capacity);
    }

    let mut flow = 0;
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return flow;
        }
        // every augmenting path here carries exactly one unit
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= 1;
            cap[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
}

/// First day whose committed matching is smaller than the largest possible.
pub fn check_non_wasteful<S: Scalar>(trace: &OnlineTrace<S>) -> Result<(), usize> {
    for record in &trace.days {
        if record.matching.len() != max_capped_bmatching_size(&record.graph) {
            return Err(record.graph.day);
        }
    }
    Ok(())
}
