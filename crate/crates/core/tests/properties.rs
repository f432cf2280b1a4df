//! Property tests for the cross-cutting invariants: trace replay soundness,
//! subdivision idempotence, flow/brute connectivity agreement, and path
//! decomposition shape.

use elemconn::connectivity;
use elemconn::flow::{self, FlowNetwork};
use elemconn::graph::{Color, ColoredMultigraph, MinorTrace, TraceRecord, VertexId};
use elemconn::oracle;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn arb_graph(max_n: usize) -> impl Strategy<Value = ColoredMultigraph> {
    (2..=max_n, proptest::collection::vec((0..max_n, 0..max_n), 0..=2 * max_n), any::<u64>())
        .prop_map(|(n, raw_edges, colorbits)| {
            let mut g = ColoredMultigraph::new();
            let vs: Vec<VertexId> = (0..n)
                .map(|i| {
                    g.add_vertex(if colorbits >> (i % 64) & 1 == 1 {
                        Color::Black
                    } else {
                        Color::White
                    })
                })
                .collect();
            for (a, b) in raw_edges {
                let (u, v) = (vs[a % n], vs[b % n]);
                if u != v {
                    g.add_edge(u, v).unwrap();
                }
            }
            g
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Replaying the accumulated trace on the original graph reproduces the
    /// derived graph exactly, for any sequence of minor operations.
    #[test]
    fn replay_soundness(g in arb_graph(8), ops in proptest::collection::vec((0u8..3, any::<u16>()), 0..10)) {
        let mut current = g.clone();
        let mut trace = MinorTrace::new();
        for (kind, pick) in ops {
            match kind {
                0 => {
                    let edges: Vec<_> = current.edges().map(|(e, _, _)| e).collect();
                    if edges.is_empty() { continue; }
                    let e = edges[pick as usize % edges.len()];
                    current = current.delete_edge(e).unwrap();
                    trace.push(TraceRecord::DeleteEdge { edge: e });
                }
                1 => {
                    let edges: Vec<_> = current.edges().map(|(e, _, _)| e).collect();
                    if edges.is_empty() { continue; }
                    let e = edges[pick as usize % edges.len()];
                    let (next, rec) = current.contract_edge(e).unwrap();
                    current = next;
                    trace.push(rec);
                }
                _ => {
                    let (next, sub_trace) = current.subdivide_terminal_edges();
                    current = next;
                    trace.extend(sub_trace);
                }
            }
        }
        let (replayed, _) = trace.replay(&g).unwrap();
        prop_assert_eq!(replayed, current);
    }

    /// Subdividing terminal edges twice changes nothing the second time.
    #[test]
    fn subdivision_is_idempotent(g in arb_graph(8)) {
        let (once, _) = g.subdivide_terminal_edges();
        let (twice, second_trace) = once.subdivide_terminal_edges();
        prop_assert!(second_trace.is_empty());
        prop_assert_eq!(once, twice);
    }

    /// The flow gadget and the exhaustive white-cut enumeration agree on
    /// κ′ for every black pair.
    #[test]
    fn flow_kappa_matches_brute(g in arb_graph(8)) {
        let blacks = g.black_vertices();
        for (i, u) in blacks.iter().enumerate() {
            for v in blacks.iter().skip(i + 1) {
                let flow_k = connectivity::element_connectivity_value(&g, *u, *v).unwrap();
                let brute_k = oracle::brute_element_connectivity(&g, *u, *v).unwrap();
                prop_assert_eq!(flow_k, brute_k, "pair ({}, {})", u, v);
            }
        }
    }

    /// Decomposition returns exactly `value` arc-disjoint s-t paths on
    /// unit-capacity networks.
    #[test]
    fn decomposition_shape(arcs in proptest::collection::vec((0usize..7, 0usize..7), 1..20)) {
        let mut net = FlowNetwork::new(8);
        for (u, v) in arcs {
            if u != v {
                net.add_arc(u, v, 1, 0, None).unwrap();
            }
        }
        let r = flow::max_flow(&net, 0, 7).unwrap();
        let paths = flow::decompose_into_paths(&net, &r.assignment, 0, 7).unwrap();
        prop_assert_eq!(paths.len() as u64, r.assignment.value);
        let mut used: BTreeSet<usize> = BTreeSet::new();
        for p in &paths {
            prop_assert!(!p.is_empty());
            prop_assert_eq!(net.arcs()[p[0]].tail, 0);
            prop_assert_eq!(net.arcs()[*p.last().unwrap()].head, 7);
            for w in p.windows(2) {
                prop_assert_eq!(net.arcs()[w[0]].head, net.arcs()[w[1]].tail);
            }
            for &i in p {
                prop_assert!(used.insert(i), "arc {} reused", i);
            }
        }
    }

    /// κ′ obeys the triangle inequality over black triples.
    #[test]
    fn kappa_triangle_inequality(g in arb_graph(7)) {
        let blacks = g.black_vertices();
        if blacks.len() >= 3 {
            let table = connectivity::full_table(&g).unwrap();
            let get = |a: VertexId, b: VertexId| table[&(a.min(b), a.max(b))];
            for &u in &blacks {
                for &v in &blacks {
                    for &w in &blacks {
                        if u != v && v != w && u != w {
                            prop_assert!(get(u, w) >= get(u, v).min(get(v, w)));
                        }
                    }
                }
            }
        }
    }
}
