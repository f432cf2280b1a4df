//! Element-, vertex-, and edge-style connectivity queries built on the flow
//! engine through splitting gadgets, plus small white-vertex separators.
//!
//! The element gadget subdivides black-black edges, splits each white vertex
//! into an in/out pair of capacity 1, and leaves black vertices whole. After
//! subdivision, white-disjointness implies edge-disjointness, so max-flow
//! between two blacks equals their element-connectivity and a minimum cut can
//! always be read off the split arcs.

use crate::error::{Error, Result};
use crate::exec;
use crate::flow::{self, ArcTag, FlowNetwork, NodeId};
use crate::graph::{ColoredMultigraph, EdgeId, TraceRecord, VertexId};
use std::collections::{BTreeMap, BTreeSet};

/// Capacity for arcs that must never bind; total flow is bounded by the
/// unit-capacity split arcs.
const UNBOUNDED: u64 = 1 << 40;

/// A vertex path together with the specific edge copies it uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPath {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
pub struct ElementCutResult {
    pub value: u32,
    /// `value` pairwise element-disjoint paths between the query pair.
    pub witness_paths: Vec<VertexPath>,
    /// White vertices of the input graph forming a minimum separator.
    pub witness_cut: BTreeSet<VertexId>,
    /// Black-black edges of the input whose interposed subdivision vertex was
    /// cut; empty whenever the input has no black-black edges.
    /// |witness_cut| + |witness_cut_edges| = value.
    pub witness_cut_edges: BTreeSet<EdgeId>,
}

struct ElementGadget {
    net: FlowNetwork,
    /// node id of each black vertex
    black_node: BTreeMap<VertexId, NodeId>,
    node_vertex: Vec<VertexId>,
    /// subdivision midpoints back to the original black-black edge
    mid_edge: BTreeMap<VertexId, EdgeId>,
}

fn build_element_gadget(g: &ColoredMultigraph) -> ElementGadget {
    let (sub, trace) = g.subdivide_terminal_edges();
    let mut mid_edge = BTreeMap::new();
    for rec in trace.records() {
        if let TraceRecord::SubdivideEdge { edge, mid, .. } = rec {
            mid_edge.insert(*mid, *edge);
        }
    }
    let mut black_node = BTreeMap::new();
    let mut white_nodes = BTreeMap::new();
    let mut node_vertex = Vec::new();
    let mut next = 0usize;
    for v in sub.vertices() {
        if sub.is_black(v) {
            black_node.insert(v, next);
            node_vertex.push(v);
            next += 1;
        } else {
            white_nodes.insert(v, (next, next + 1));
            node_vertex.push(v);
            node_vertex.push(v);
            next += 2;
        }
    }
    let mut net = FlowNetwork::new(next);
    for (w, (win, wout)) in &white_nodes {
        net.add_arc(*win, *wout, 1, 0, Some(ArcTag::SplitVertex(*w)))
            .expect("valid split arc");
    }
    let enter = |v: VertexId| -> NodeId {
        black_node.get(&v).copied().unwrap_or_else(|| white_nodes[&v].0)
    };
    let leave = |v: VertexId| -> NodeId {
        black_node.get(&v).copied().unwrap_or_else(|| white_nodes[&v].1)
    };
    for (e, u, v) in sub.edges() {
        net.add_arc(leave(u), enter(v), UNBOUNDED, 0, Some(ArcTag::Edge(e)))
            .expect("valid edge arc");
        net.add_arc(leave(v), enter(u), UNBOUNDED, 0, Some(ArcTag::Edge(e)))
            .expect("valid edge arc");
    }
    ElementGadget { net, black_node, node_vertex, mid_edge }
}

impl ElementGadget {
    fn query(&self, u: VertexId, v: VertexId, want_witnesses: bool) -> Result<ElementCutResult> {
        let s = *self.black_node.get(&u).ok_or(Error::NotBlack(u))?;
        let t = *self.black_node.get(&v).ok_or(Error::NotBlack(v))?;
        let result = flow::max_flow(&self.net, s, t)?;
        let value = result.assignment.value as u32;

        let mut witness_paths = Vec::new();
        if want_witnesses {
            let arc_paths = flow::decompose_into_paths(&self.net, &result.assignment, s, t)?;
            for arcs in arc_paths {
                witness_paths.push(self.arc_path_to_vertex_path(u, &arcs));
            }
        }

        let mut witness_cut = BTreeSet::new();
        let mut witness_cut_edges = BTreeSet::new();
        for (i, arc) in self.net.arcs().iter().enumerate() {
            if let Some(ArcTag::SplitVertex(w)) = arc.tag {
                if result.source_side[arc.tail] && !result.source_side[arc.head] {
                    debug_assert_eq!(result.assignment.flow[i], 1);
                    match self.mid_edge.get(&w) {
                        Some(e) => {
                            witness_cut_edges.insert(*e);
                        }
                        None => {
                            witness_cut.insert(w);
                        }
                    }
                }
            }
        }
        debug_assert_eq!(witness_cut.len() + witness_cut_edges.len(), value as usize);
        Ok(ElementCutResult { value, witness_paths, witness_cut, witness_cut_edges })
    }

    /// Converts an arc path in the gadget to a vertex path in the input
    /// graph, splicing subdivision midpoints back into direct edges.
    fn arc_path_to_vertex_path(&self, start: VertexId, arcs: &[usize]) -> VertexPath {
        let mut vertices = vec![start];
        let mut edges = Vec::new();
        for &i in arcs {
            let arc = &self.net.arcs()[i];
            match arc.tag {
                Some(ArcTag::Edge(e)) => {
                    let to = self.node_vertex[arc.head];
                    vertices.push(to);
                    edges.push(e);
                }
                Some(ArcTag::SplitVertex(_)) | None => {}
            }
        }
        // Splice out subdivision midpoints: the two flanking half-edges
        // collapse back to the original edge.
        let mut out_vertices = Vec::with_capacity(vertices.len());
        let mut out_edges: Vec<EdgeId> = Vec::with_capacity(edges.len());
        out_vertices.push(vertices[0]);
        let mut idx = 0;
        while idx < edges.len() {
            let next = vertices[idx + 1];
            if let Some(original) = self.mid_edge.get(&next) {
                out_vertices.push(vertices[idx + 2]);
                out_edges.push(*original);
                idx += 2;
            } else {
                out_vertices.push(next);
                out_edges.push(edges[idx]);
                idx += 1;
            }
        }
        VertexPath { vertices: out_vertices, edges: out_edges }
    }
}

fn check_black_pair(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Result<()> {
    if !g.has_vertex(u) {
        return Err(Error::UnknownVertex(u));
    }
    if !g.has_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    if !g.is_black(u) {
        return Err(Error::NotBlack(u));
    }
    if !g.is_black(v) {
        return Err(Error::NotBlack(v));
    }
    if u == v {
        return Err(Error::InvalidQuery(format!("query pair must be distinct, got {u} twice")));
    }
    Ok(())
}

/// κ′(u,v): the maximum number of u-v paths pairwise disjoint in edges and
/// white vertices, with witness paths and a minimum white cut.
pub fn element_connectivity(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Result<ElementCutResult> {
    check_black_pair(g, u, v)?;
    build_element_gadget(g).query(u, v, true)
}

/// κ′ value only; skips witness extraction.
pub fn element_connectivity_value(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Result<u32> {
    check_black_pair(g, u, v)?;
    Ok(build_element_gadget(g).query(u, v, false)?.value)
}

fn normalize_pair(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

/// Exact κ′ table for the given black pairs; pair queries run on one shared
/// gadget and may execute concurrently.
pub fn all_pairs_element_connectivity(
    g: &ColoredMultigraph,
    pairs: &[(VertexId, VertexId)],
) -> Result<BTreeMap<(VertexId, VertexId), u32>> {
    for (u, v) in pairs {
        check_black_pair(g, *u, *v)?;
    }
    let gadget = build_element_gadget(g);
    let values = exec::map_collect(pairs, |(u, v)| {
        gadget.query(*u, *v, false).map(|r| r.value)
    });
    let mut table = BTreeMap::new();
    for ((u, v), value) in pairs.iter().zip(values) {
        table.insert(normalize_pair(*u, *v), value?);
    }
    Ok(table)
}

/// All unordered black pairs of the graph.
pub fn black_pairs(g: &ColoredMultigraph) -> Vec<(VertexId, VertexId)> {
    let blacks = g.black_vertices();
    let mut pairs = Vec::new();
    for (i, u) in blacks.iter().enumerate() {
        for v in blacks.iter().skip(i + 1) {
            pairs.push((*u, *v));
        }
    }
    pairs
}

/// Full κ′ table over every black pair.
pub fn full_table(g: &ColoredMultigraph) -> Result<BTreeMap<(VertexId, VertexId), u32>> {
    all_pairs_element_connectivity(g, &black_pairs(g))
}

#[derive(Clone, Debug)]
pub struct WhiteSeparator {
    pub cut: BTreeSet<VertexId>,
    /// Components of g - cut, ascending by smallest vertex.
    pub sides: Vec<BTreeSet<VertexId>>,
}

/// Finds an inclusion-minimal white set of size < `threshold` separating some
/// two of the given terminals, scanning pairs in sorted order, or `None` if
/// every pair is at least `threshold`-element-connected. A disconnected pair
/// yields the empty cut.
pub fn min_white_separator_below(
    g: &ColoredMultigraph,
    terminals: &BTreeSet<VertexId>,
    threshold: u32,
) -> Result<Option<WhiteSeparator>> {
    if threshold == 0 || terminals.len() < 2 {
        return Ok(None);
    }
    let terms: Vec<VertexId> = terminals.iter().copied().collect();
    let gadget = build_element_gadget(g);
    for (i, u) in terms.iter().enumerate() {
        for v in terms.iter().skip(i + 1) {
            check_black_pair(g, *u, *v)?;
            let r = gadget.query(*u, *v, false)?;
            if r.value >= threshold {
                continue;
            }
            if !r.witness_cut_edges.is_empty() {
                return Err(Error::InternalConsistency(
                    "white separator requested on a graph with black-black edges".into(),
                ));
            }
            let mut cut = r.witness_cut;
            // Discard removable vertices in ascending order; a minimum cut is
            // already inclusion-minimal, so this is a safety net for unions.
            let candidates: Vec<VertexId> = cut.iter().copied().collect();
            for w in candidates {
                let mut smaller = cut.clone();
                smaller.remove(&w);
                if !pair_connected_avoiding(g, *u, *v, &smaller) {
                    cut = smaller;
                }
            }
            let remaining = g.without_vertices(&cut);
            let sides = remaining.components();
            return Ok(Some(WhiteSeparator { cut, sides }));
        }
    }
    Ok(None)
}

/// BFS reachability between two vertices after removing a vertex set.
pub(crate) fn pair_connected_avoiding(
    g: &ColoredMultigraph,
    u: VertexId,
    v: VertexId,
    removed: &BTreeSet<VertexId>,
) -> bool {
    let h = g.without_vertices(removed);
    if !h.has_vertex(u) || !h.has_vertex(v) {
        return false;
    }
    h.connects(&BTreeSet::from([u, v]))
}

/// κ(u,v): maximum number of internally vertex-disjoint u-v paths, counting
/// parallel direct edges separately. Colors are ignored.
pub fn vertex_connectivity(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Result<u32> {
    if !g.has_vertex(u) {
        return Err(Error::UnknownVertex(u));
    }
    if !g.has_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    if u == v {
        return Err(Error::InvalidQuery("vertex connectivity needs distinct endpoints".into()));
    }
    let mut node_in: BTreeMap<VertexId, NodeId> = BTreeMap::new();
    let mut node_out: BTreeMap<VertexId, NodeId> = BTreeMap::new();
    let mut next = 0usize;
    for w in g.vertices() {
        if w == u || w == v {
            node_in.insert(w, next);
            node_out.insert(w, next);
            next += 1;
        } else {
            node_in.insert(w, next);
            node_out.insert(w, next + 1);
            next += 2;
        }
    }
    let mut net = FlowNetwork::new(next);
    for w in g.vertices() {
        if w != u && w != v {
            net.add_arc(node_in[&w], node_out[&w], 1, 0, Some(ArcTag::SplitVertex(w)))?;
        }
    }
    for (e, a, b) in g.edges() {
        net.add_arc(node_out[&a], node_in[&b], 1, 0, Some(ArcTag::Edge(e)))?;
        net.add_arc(node_out[&b], node_in[&a], 1, 0, Some(ArcTag::Edge(e)))?;
    }
    Ok(flow::max_flow(&net, node_out[&u], node_in[&v])?.assignment.value as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Color;
    use crate::oracle;

    fn bwb_path() -> (ColoredMultigraph, VertexId, VertexId) {
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::Black);
        let w = g.add_vertex(Color::White);
        let b = g.add_vertex(Color::Black);
        g.add_edge(a, w).unwrap();
        g.add_edge(w, b).unwrap();
        (g, a, b)
    }

    #[test]
    fn path_through_single_white_has_kappa_one() {
        let (g, a, b) = bwb_path();
        let r = element_connectivity(&g, a, b).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.witness_paths.len(), 1);
        assert_eq!(r.witness_cut.len(), 1);
        assert!(r.witness_cut_edges.is_empty());
    }

    #[test]
    fn hk_gadget_is_k_connected() {
        for k in [2u32, 4, 7] {
            let inst = gen::hk(k);
            let (x, y) = (inst.terminals[0], inst.terminals[1]);
            let r = element_connectivity(&inst.graph, x, y).unwrap();
            assert_eq!(r.value, k);
            assert_eq!(r.witness_paths.len(), k as usize);
            assert_eq!(r.witness_cut.len(), k as usize);
        }
    }

    #[test]
    fn gk_instance_source_sink_k_connected() {
        for k in [2u32, 3] {
            let inst = gen::gk(k);
            let (s, t) = (inst.groups[0][0], inst.groups[0][1]);
            assert_eq!(element_connectivity_value(&inst.graph, s, t).unwrap(), k);
        }
    }

    #[test]
    fn witness_paths_are_element_disjoint_and_meet_cut() {
        let inst = gen::hk(5);
        let (x, y) = (inst.terminals[0], inst.terminals[1]);
        let r = element_connectivity(&inst.graph, x, y).unwrap();
        let mut whites_seen = BTreeSet::new();
        let mut edges_seen = BTreeSet::new();
        for p in &r.witness_paths {
            assert_eq!(p.vertices.first(), Some(&x));
            assert_eq!(p.vertices.last(), Some(&y));
            let mut on_cut = 0;
            for v in &p.vertices {
                if inst.graph.is_white(*v) {
                    assert!(whites_seen.insert(*v), "white {v} shared");
                    if r.witness_cut.contains(v) {
                        on_cut += 1;
                    }
                }
            }
            assert_eq!(on_cut, 1, "each path crosses the cut exactly once");
            for e in &p.edges {
                assert!(edges_seen.insert(*e), "edge {e} shared");
            }
        }
    }

    #[test]
    fn witness_paths_lift_through_direct_terminal_edges() {
        // Two blacks joined by 3 parallel edges: subdivision is internal, the
        // reported paths must be the direct edges.
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::Black);
        let b = g.add_vertex(Color::Black);
        for _ in 0..3 {
            g.add_edge(a, b).unwrap();
        }
        let r = element_connectivity(&g, a, b).unwrap();
        assert_eq!(r.value, 3);
        assert!(r.witness_cut.is_empty());
        assert_eq!(r.witness_cut_edges.len(), 3);
        for p in &r.witness_paths {
            assert_eq!(p.vertices, vec![a, b]);
            assert_eq!(p.edges.len(), 1);
        }
    }

    #[test]
    fn k3k_all_pairs_equal_k() {
        let inst = gen::k3k(6);
        let table = full_table(&inst.graph).unwrap();
        assert_eq!(table.len(), 3);
        assert!(table.values().all(|&v| v == 6));
    }

    #[test]
    fn single_pair_table_matches_direct_query() {
        let (g, a, b) = bwb_path();
        let table = all_pairs_element_connectivity(&g, &[(a, b)]).unwrap();
        assert_eq!(table[&(a.min(b), a.max(b))], 1);
    }

    #[test]
    fn random_graphs_match_brute_oracle() {
        for seed in 0..12 {
            let inst = gen::random_instance(10, 0.4, 4, seed);
            let table = full_table(&inst.graph).unwrap();
            for ((u, v), val) in table {
                let brute = oracle::brute_element_connectivity(&inst.graph, u, v).unwrap();
                assert_eq!(val, brute, "mismatch at ({u},{v}) seed {seed}");
            }
        }
    }

    #[test]
    fn triangle_inequality_over_black_triples() {
        for seed in 0..6 {
            let inst = gen::random_instance(9, 0.45, 4, 100 + seed);
            let blacks = inst.graph.black_vertices();
            let table = full_table(&inst.graph).unwrap();
            let get = |a: VertexId, b: VertexId| table[&(a.min(b), a.max(b))];
            for &u in &blacks {
                for &v in &blacks {
                    for &w in &blacks {
                        if u != v && v != w && u != w {
                            assert!(get(u, w) >= get(u, v).min(get(v, w)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn separator_none_when_threshold_met() {
        let (g, a, b) = bwb_path();
        let r = min_white_separator_below(&g, &BTreeSet::from([a, b]), 1).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn separator_finds_single_white() {
        let (g, a, b) = bwb_path();
        let w = g.white_vertices()[0];
        let r = min_white_separator_below(&g, &BTreeSet::from([a, b]), 2)
            .unwrap()
            .unwrap();
        assert_eq!(r.cut, BTreeSet::from([w]));
        assert_eq!(r.sides.len(), 2);
    }

    #[test]
    fn separator_zero_threshold_is_none() {
        let (g, a, b) = bwb_path();
        assert!(min_white_separator_below(&g, &BTreeSet::from([a, b]), 0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn separator_on_gk_has_exactly_k_whites() {
        let k = 3;
        let inst = gen::gk(k);
        let (s, t) = (inst.groups[0][0], inst.groups[0][1]);
        let r = min_white_separator_below(&inst.graph, &BTreeSet::from([s, t]), k + 1)
            .unwrap()
            .unwrap();
        assert_eq!(r.cut.len(), k as usize);
    }

    #[test]
    fn disconnected_pair_yields_empty_cut() {
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::Black);
        let b = g.add_vertex(Color::Black);
        let r = min_white_separator_below(&g, &BTreeSet::from([a, b]), 3)
            .unwrap()
            .unwrap();
        assert!(r.cut.is_empty());
        assert_eq!(r.sides.len(), 2);
    }

    #[test]
    fn vertex_connectivity_counts_direct_edge() {
        let mut g = ColoredMultigraph::new();
        let u = g.add_vertex(Color::Black);
        let v = g.add_vertex(Color::Black);
        let w = g.add_vertex(Color::White);
        g.add_edge(u, v).unwrap();
        g.add_edge(u, w).unwrap();
        g.add_edge(w, v).unwrap();
        assert_eq!(vertex_connectivity(&g, u, v).unwrap(), 2);
    }

    #[test]
    fn vertex_connectivity_of_k5_is_four() {
        let mut g = ColoredMultigraph::new();
        let vs: Vec<VertexId> = (0..5).map(|_| g.add_vertex(Color::Black)).collect();
        for i in 0..5 {
            for j in (i + 1)..5 {
                g.add_edge(vs[i], vs[j]).unwrap();
            }
        }
        assert_eq!(vertex_connectivity(&g, vs[0], vs[3]).unwrap(), 4);
    }

    #[test]
    fn vertex_connectivity_matches_brute_oracle() {
        for seed in 0..8 {
            let inst = gen::random_instance(9, 0.4, 2, 300 + seed);
            let g = &inst.graph;
            let vs: Vec<VertexId> = g.vertices().collect();
            let (u, v) = (vs[0], vs[vs.len() - 1]);
            let brute = oracle::brute_vertex_connectivity(g, u, v).unwrap();
            assert_eq!(vertex_connectivity(g, u, v).unwrap(), brute, "seed {seed}");
        }
    }
}
