//! Integral max-flow and min-cost-flow on directed networks, plus path
//! decomposition. Capacities and costs are integers throughout so every
//! comparison is exact; the connectivity gadgets scale rational edge costs to
//! a common denominator before building a network.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId};
use std::collections::VecDeque;

pub type NodeId = usize;

/// Back-reference from an arc to the graph element it models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcTag {
    Edge(EdgeId),
    SplitVertex(VertexId),
}

#[derive(Clone, Debug)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: u64,
    pub cost: i64,
    pub tag: Option<ArcTag>,
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        FlowNetwork { node_count, arcs: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn add_arc(&mut self, tail: NodeId, head: NodeId, capacity: u64, cost: i64, tag: Option<ArcTag>) -> Result<usize> {
        if tail >= self.node_count || head >= self.node_count {
            return Err(Error::MalformedNetwork(format!(
                "arc ({tail},{head}) references a node beyond {}",
                self.node_count
            )));
        }
        if tail == head {
            return Err(Error::MalformedNetwork(format!("self-arc at node {tail}")));
        }
        if cost < 0 {
            return Err(Error::MalformedNetwork(format!("negative cost {cost}")));
        }
        self.arcs.push(Arc { tail, head, capacity, cost, tag });
        Ok(self.arcs.len() - 1)
    }

    fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (i, a) in self.arcs.iter().enumerate() {
            adj[a.tail].push(i);
        }
        adj
    }

    fn residual_adjacency(&self) -> Vec<Vec<(usize, bool)>> {
        // (arc index, forward?) pairs per node.
        let mut adj = vec![Vec::new(); self.node_count];
        for (i, a) in self.arcs.iter().enumerate() {
            adj[a.tail].push((i, true));
            adj[a.head].push((i, false));
        }
        adj
    }
}

/// Per-arc integral flow with its value and (scaled integer) cost.
#[derive(Clone, Debug)]
pub struct FlowAssignment {
    pub flow: Vec<u64>,
    pub value: u64,
    pub cost: i128,
}

impl FlowAssignment {
    /// Checks capacity and conservation constraints for an s-t flow.
    pub fn validate(&self, net: &FlowNetwork, s: NodeId, t: NodeId) -> Result<()> {
        if self.flow.len() != net.arcs.len() {
            return Err(Error::InconsistentFlow("arc count mismatch".into()));
        }
        let mut excess = vec![0i128; net.node_count];
        for (i, a) in net.arcs.iter().enumerate() {
            if self.flow[i] > a.capacity {
                return Err(Error::InconsistentFlow(format!("arc {i} over capacity")));
            }
            excess[a.tail] -= self.flow[i] as i128;
            excess[a.head] += self.flow[i] as i128;
        }
        for (v, &x) in excess.iter().enumerate() {
            if v == s || v == t {
                continue;
            }
            if x != 0 {
                return Err(Error::InconsistentFlow(format!("conservation fails at node {v}")));
            }
        }
        if excess[t] != self.value as i128 || excess[s] != -(self.value as i128) {
            return Err(Error::InconsistentFlow("value does not match net excess".into()));
        }
        Ok(())
    }
}

pub struct MaxFlowResult {
    pub assignment: FlowAssignment,
    /// Nodes reachable from the source in the residual network; the arcs
    /// leaving this set form a minimum cut.
    pub source_side: Vec<bool>,
}

/// Edmonds-Karp maximum flow.
pub fn max_flow(net: &FlowNetwork, s: NodeId, t: NodeId) -> Result<MaxFlowResult> {
    if s >= net.node_count || t >= net.node_count {
        return Err(Error::MalformedNetwork("source or sink absent".into()));
    }
    if s == t {
        return Err(Error::MalformedNetwork("source equals sink".into()));
    }
    let adj = net.residual_adjacency();
    let mut flow = vec![0u64; net.arcs.len()];
    let mut value = 0u64;
    loop {
        // BFS for a shortest augmenting path.
        let mut parent: Vec<Option<(usize, bool)>> = vec![None; net.node_count];
        let mut seen = vec![false; net.node_count];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &(i, forward) in &adj[u] {
                let (next, residual) = if forward {
                    (net.arcs[i].head, net.arcs[i].capacity - flow[i])
                } else {
                    (net.arcs[i].tail, flow[i])
                };
                if residual == 0 || seen[next] {
                    continue;
                }
                seen[next] = true;
                parent[next] = Some((i, forward));
                if next == t {
                    break 'bfs;
                }
                queue.push_back(next);
            }
        }
        if !seen[t] {
            let mut cost: i128 = 0;
            for (i, a) in net.arcs.iter().enumerate() {
                cost += a.cost as i128 * flow[i] as i128;
            }
            return Ok(MaxFlowResult {
                assignment: FlowAssignment { flow, value, cost },
                source_side: seen,
            });
        }
        // Find bottleneck and augment.
        let mut bottleneck = u64::MAX;
        let mut v = t;
        while v != s {
            let (i, forward) = parent[v].unwrap();
            let residual = if forward { net.arcs[i].capacity - flow[i] } else { flow[i] };
            bottleneck = bottleneck.min(residual);
            v = if forward { net.arcs[i].tail } else { net.arcs[i].head };
        }
        let mut v = t;
        while v != s {
            let (i, forward) = parent[v].unwrap();
            if forward {
                flow[i] += bottleneck;
                v = net.arcs[i].tail;
            } else {
                flow[i] -= bottleneck;
                v = net.arcs[i].head;
            }
        }
        value += bottleneck;
    }
}

/// Minimum-cost integral flow of exactly `value` units, or `None` when the
/// maximum flow is smaller. Successive shortest paths with potentials;
/// non-negative arc costs let Dijkstra run from the start.
pub fn min_cost_flow_of_value(
    net: &FlowNetwork,
    s: NodeId,
    t: NodeId,
    value: u64,
) -> Result<Option<FlowAssignment>> {
    if s >= net.node_count || t >= net.node_count {
        return Err(Error::MalformedNetwork("source or sink absent".into()));
    }
    if s == t {
        return Err(Error::MalformedNetwork("source equals sink".into()));
    }
    let adj = net.residual_adjacency();
    let mut flow = vec![0u64; net.arcs.len()];
    let mut potential = vec![0i128; net.node_count];
    let mut shipped = 0u64;
    let mut cost: i128 = 0;

    while shipped < value {
        // Dijkstra over reduced costs.
        const UNREACHED: i128 = i128::MAX;
        let mut dist = vec![UNREACHED; net.node_count];
        let mut parent: Vec<Option<(usize, bool)>> = vec![None; net.node_count];
        dist[s] = 0;
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(std::cmp::Reverse((0i128, s)));
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(i, forward) in &adj[u] {
                let (next, residual, arc_cost) = if forward {
                    (net.arcs[i].head, net.arcs[i].capacity - flow[i], net.arcs[i].cost as i128)
                } else {
                    (net.arcs[i].tail, flow[i], -(net.arcs[i].cost as i128))
                };
                if residual == 0 {
                    continue;
                }
                let reduced = d + arc_cost + potential[u] - potential[next];
                debug_assert!(arc_cost + potential[u] - potential[next] >= 0);
                if reduced < dist[next] {
                    dist[next] = reduced;
                    parent[next] = Some((i, forward));
                    heap.push(std::cmp::Reverse((reduced, next)));
                }
            }
        }
        if dist[t] == UNREACHED {
            return Ok(None);
        }
        for v in 0..net.node_count {
            if dist[v] != UNREACHED {
                potential[v] += dist[v];
            }
        }
        let mut bottleneck = value - shipped;
        let mut v = t;
        while v != s {
            let (i, forward) = parent[v].unwrap();
            let residual = if forward { net.arcs[i].capacity - flow[i] } else { flow[i] };
            bottleneck = bottleneck.min(residual);
            v = if forward { net.arcs[i].tail } else { net.arcs[i].head };
        }
        let mut v = t;
        while v != s {
            let (i, forward) = parent[v].unwrap();
            if forward {
                flow[i] += bottleneck;
                cost += net.arcs[i].cost as i128 * bottleneck as i128;
                v = net.arcs[i].tail;
            } else {
                flow[i] -= bottleneck;
                cost -= net.arcs[i].cost as i128 * bottleneck as i128;
                v = net.arcs[i].head;
            }
        }
        shipped += bottleneck;
    }
    Ok(Some(FlowAssignment { flow, value, cost }))
}

/// Decomposes a valid s-t flow into `value` arc-disjoint paths (lists of arc
/// indices). Cycles in the flow support carry no s-t value and are discarded.
pub fn decompose_into_paths(
    net: &FlowNetwork,
    assignment: &FlowAssignment,
    s: NodeId,
    t: NodeId,
) -> Result<Vec<Vec<usize>>> {
    assignment.validate(net, s, t)?;
    let adj = net.out_adjacency();
    let mut remaining = assignment.flow.clone();
    let mut paths = Vec::with_capacity(assignment.value as usize);
    for _ in 0..assignment.value {
        // DFS with backtracking over positive-flow arcs; conservation
        // guarantees an s-t path exists while value remains.
        let mut path: Vec<usize> = Vec::new();
        let mut visited = vec![false; net.node_count];
        if !dfs_path(&adj, &mut remaining, &net.arcs, s, t, &mut visited, &mut path) {
            return Err(Error::InconsistentFlow(
                "flow value not realizable as s-t paths".into(),
            ));
        }
        for &i in &path {
            remaining[i] -= 1;
        }
        paths.push(path);
    }
    Ok(paths)
}

fn dfs_path(
    adj: &[Vec<usize>],
    remaining: &mut [u64],
    arcs: &[Arc],
    u: NodeId,
    t: NodeId,
    visited: &mut [bool],
    path: &mut Vec<usize>,
) -> bool {
    if u == t {
        return true;
    }
    visited[u] = true;
    for &i in &adj[u] {
        if remaining[i] == 0 || visited[arcs[i].head] {
            continue;
        }
        path.push(i);
        if dfs_path(adj, remaining, arcs, arcs[i].head, t, visited, path) {
            return true;
        }
        path.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc_max_flow() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 5, 0, None).unwrap();
        let r = max_flow(&net, 0, 1).unwrap();
        assert_eq!(r.assignment.value, 5);
        assert!(r.source_side[0] && !r.source_side[1]);
    }

    #[test]
    fn two_disjoint_unit_paths() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 1, 0, None).unwrap();
        net.add_arc(1, 3, 1, 0, None).unwrap();
        net.add_arc(0, 2, 1, 0, None).unwrap();
        net.add_arc(2, 3, 1, 0, None).unwrap();
        let r = max_flow(&net, 0, 3).unwrap();
        assert_eq!(r.assignment.value, 2);
    }

    #[test]
    fn min_cost_value_zero_is_empty() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 3, 7, None).unwrap();
        let f = min_cost_flow_of_value(&net, 0, 1, 0).unwrap().unwrap();
        assert_eq!(f.value, 0);
        assert_eq!(f.cost, 0);
        assert!(f.flow.iter().all(|&x| x == 0));
    }

    #[test]
    fn min_cost_prefers_cheap_parallel_arc() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 1, 1, None).unwrap();
        net.add_arc(0, 1, 1, 3, None).unwrap();
        let f = min_cost_flow_of_value(&net, 0, 1, 1).unwrap().unwrap();
        assert_eq!(f.cost, 1);
        assert_eq!(f.flow, vec![1, 0]);
    }

    #[test]
    fn min_cost_infeasible_when_above_max_flow() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 2, 1, None).unwrap();
        assert!(min_cost_flow_of_value(&net, 0, 1, 3).unwrap().is_none());
    }

    /// Exhaustive oracle: minimum total cost over all pairs of arc-disjoint
    /// s-t paths, by enumerating simple arc paths.
    fn brute_min_cost_two_paths(net: &FlowNetwork, s: NodeId, t: NodeId) -> Option<i128> {
        fn all_paths(
            net: &FlowNetwork,
            u: NodeId,
            t: NodeId,
            used: &mut Vec<usize>,
            visited: &mut Vec<bool>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if u == t {
                out.push(used.clone());
                return;
            }
            visited[u] = true;
            for (i, a) in net.arcs().iter().enumerate() {
                if a.tail == u && a.capacity > 0 && !visited[a.head] {
                    used.push(i);
                    all_paths(net, a.head, t, used, visited, out);
                    used.pop();
                }
            }
            visited[u] = false;
        }
        let mut paths = Vec::new();
        all_paths(net, s, t, &mut Vec::new(), &mut vec![false; net.node_count()], &mut paths);
        let cost_of = |p: &Vec<usize>| -> i128 {
            p.iter().map(|&i| net.arcs()[i].cost as i128).sum()
        };
        let mut best = None;
        for (i, p) in paths.iter().enumerate() {
            for q in paths.iter().skip(i + 1) {
                if p.iter().any(|a| q.contains(a)) {
                    continue;
                }
                let c = cost_of(p) + cost_of(q);
                best = Some(best.map_or(c, |b: i128| b.min(c)));
            }
        }
        best
    }

    #[test]
    fn min_cost_grid_matches_path_pair_oracle() {
        // 6-node grid-like network, all capacities 1.
        let mut net = FlowNetwork::new(6);
        let arcs = [
            (0, 1, 2),
            (0, 2, 1),
            (1, 3, 1),
            (2, 3, 4),
            (1, 4, 3),
            (2, 4, 1),
            (3, 5, 1),
            (4, 5, 2),
            (1, 2, 1),
        ];
        for (u, v, c) in arcs {
            net.add_arc(u, v, 1, c, None).unwrap();
        }
        let expected = brute_min_cost_two_paths(&net, 0, 5).unwrap();
        let f = min_cost_flow_of_value(&net, 0, 5, 2).unwrap().unwrap();
        assert_eq!(f.cost, expected);
    }

    #[test]
    fn min_cost_monotone_in_value() {
        let mut net = FlowNetwork::new(5);
        let arcs = [(0, 1, 1, 2), (0, 2, 2, 1), (1, 3, 2, 1), (2, 3, 1, 3), (3, 4, 3, 1), (2, 4, 1, 9)];
        for (u, v, cap, c) in arcs {
            net.add_arc(u, v, cap, c, None).unwrap();
        }
        let mut last = 0i128;
        for value in 0..=3 {
            let f = min_cost_flow_of_value(&net, 0, 4, value).unwrap().unwrap();
            assert!(f.cost >= last);
            last = f.cost;
        }
    }

    #[test]
    fn decompose_single_path() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, 1, 0, None).unwrap();
        net.add_arc(1, 2, 1, 0, None).unwrap();
        let r = max_flow(&net, 0, 2).unwrap();
        let paths = decompose_into_paths(&net, &r.assignment, 0, 2).unwrap();
        assert_eq!(paths, vec![vec![0, 1]]);
    }

    #[test]
    fn decompose_two_disjoint_paths() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 1, 0, None).unwrap();
        net.add_arc(1, 3, 1, 0, None).unwrap();
        net.add_arc(0, 2, 1, 0, None).unwrap();
        net.add_arc(2, 3, 1, 0, None).unwrap();
        let r = max_flow(&net, 0, 3).unwrap();
        let paths = decompose_into_paths(&net, &r.assignment, 0, 3).unwrap();
        assert_eq!(paths.len(), 2);
        let mut seen = std::collections::BTreeSet::new();
        for p in &paths {
            for &i in p {
                assert!(seen.insert(i), "arc {i} reused");
            }
        }
    }

    #[test]
    fn decompose_drops_injected_cycle() {
        // Three disjoint s-t paths plus a 3-cycle carrying circulating flow.
        let mut net = FlowNetwork::new(8);
        let mut support = Vec::new();
        for mid in [1, 2, 3] {
            let a = net.add_arc(0, mid, 1, 0, None).unwrap();
            let b = net.add_arc(mid, 4, 1, 0, None).unwrap();
            support.push((a, 1u64));
            support.push((b, 1u64));
        }
        let c1 = net.add_arc(5, 6, 1, 0, None).unwrap();
        let c2 = net.add_arc(6, 7, 1, 0, None).unwrap();
        let c3 = net.add_arc(7, 5, 1, 0, None).unwrap();
        let mut flow = vec![0u64; net.arcs().len()];
        for (i, f) in support {
            flow[i] = f;
        }
        flow[c1] = 1;
        flow[c2] = 1;
        flow[c3] = 1;
        let assignment = FlowAssignment { flow, value: 3, cost: 0 };
        let paths = decompose_into_paths(&net, &assignment, 0, 4).unwrap();
        assert_eq!(paths.len(), 3);
        for p in &paths {
            assert!(!p.contains(&c1) && !p.contains(&c2) && !p.contains(&c3));
        }
    }

    /// Brute-force min cut: minimum capacity over all node bipartitions.
    fn brute_min_cut(net: &FlowNetwork, s: NodeId, t: NodeId) -> u64 {
        let n = net.node_count();
        let mut best = u64::MAX;
        for mask in 0..(1u32 << n) {
            if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
                continue;
            }
            let cap: u64 = net
                .arcs()
                .iter()
                .filter(|a| mask & (1 << a.tail) != 0 && mask & (1 << a.head) == 0)
                .map(|a| a.capacity)
                .sum();
            best = best.min(cap);
        }
        best
    }

    #[test]
    fn max_flow_equals_brute_min_cut_on_random_networks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.random_range(4..=9);
            let mut net = FlowNetwork::new(n);
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.random_bool(0.35) {
                        net.add_arc(u, v, rng.random_range(1..=4), 0, None).unwrap();
                    }
                }
            }
            let r = max_flow(&net, 0, n - 1).unwrap();
            assert_eq!(r.assignment.value, brute_min_cut(&net, 0, n - 1));
        }
    }
}
