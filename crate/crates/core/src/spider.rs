//! Constructive spider decomposition: reduce to a bipartite graph, mark white
//! neighbors, build the trivial star decomposition there, then lift spiders
//! back through the contractions in reverse. Also extracts the per-terminal
//! element-disjoint path sets that drive the cost argument.

use crate::connectivity::VertexPath;
use crate::error::{Error, Result};
use crate::graph::{Color, ColoredMultigraph, EdgeId, TraceRecord, VertexId};
use crate::reduction;
use std::collections::{BTreeMap, BTreeSet};

/// A tree with at most one vertex (the head) of degree ≥ 3; legs run from the
/// head to the feet. `legs[i]` ends at `feet[i]`.
#[derive(Clone, Debug)]
pub struct Spider {
    pub head: VertexId,
    pub legs: Vec<VertexPath>,
    pub feet: Vec<VertexId>,
}

#[derive(Clone, Debug, Default)]
pub struct SpiderDecomposition {
    pub spiders: Vec<Spider>,
}

impl SpiderDecomposition {
    /// Number of spiders each black vertex is a foot of.
    pub fn foot_count(&self) -> BTreeMap<VertexId, u32> {
        let mut out: BTreeMap<VertexId, u32> = BTreeMap::new();
        for s in &self.spiders {
            for f in &s.feet {
                *out.entry(*f).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn edges(&self) -> BTreeSet<EdgeId> {
        self.spiders
            .iter()
            .flat_map(|s| s.legs.iter().flat_map(|l| l.edges.iter().copied()))
            .collect()
    }
}

fn lowest_edge_between(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Option<EdgeId> {
    g.edges_between(u, v).into_iter().min()
}

/// Decomposes a host with pairwise k-element-connected black vertices into
/// spiders satisfying: feet are distinct blacks with white intermediates,
/// every black is a foot of exactly k spiders, every white is in at most one
/// spider, and white heads have at least two feet. The input must have no
/// black-black edges (subdivide first).
pub fn spider_decompose(
    g: &ColoredMultigraph,
    blacks: &BTreeSet<VertexId>,
    k: u32,
) -> Result<SpiderDecomposition> {
    let mut host = g.clone();
    for v in g.vertices() {
        host.set_color(v, if blacks.contains(&v) { Color::Black } else { Color::White })?;
    }
    if let Some(e) = host.black_black_edges().first() {
        return Err(Error::BlackBlackEdge(*e));
    }
    if k == 0 {
        return Ok(SpiderDecomposition::default());
    }

    let result = reduction::reduce_to_bipartite(&host, false)?;
    let bipartite = &result.reduced;

    // Mark phase: every black marks its k smallest usable white neighbors
    // (usable = the white can reach a second black, so it can carry a leg).
    let adj = bipartite.adjacency();
    let distinct_black_neighbors = |w: VertexId| -> BTreeSet<VertexId> {
        adj[&w].iter().map(|(_, b)| *b).filter(|b| bipartite.is_black(*b)).collect()
    };
    let mut marks: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for b in bipartite.black_vertices() {
        let mut nbrs: BTreeSet<VertexId> = adj[&b].iter().map(|(_, w)| *w).collect();
        nbrs.retain(|w| distinct_black_neighbors(*w).len() >= 2);
        if (nbrs.len() as u32) < k {
            return Err(Error::InvalidQuery(format!(
                "black {b} has only {} usable white neighbors, need {k}; terminals are not k-element-connected",
                nbrs.len()
            )));
        }
        for w in nbrs.into_iter().take(k as usize) {
            marks.entry(w).or_default().push(b);
        }
    }

    let mut spiders = Vec::new();
    for (w, markers) in marks {
        if markers.len() >= 2 {
            let mut feet = markers;
            feet.sort();
            let legs = feet
                .iter()
                .map(|b| {
                    let e = lowest_edge_between(bipartite, w, *b).expect("marked neighbor");
                    VertexPath { vertices: vec![w, *b], edges: vec![e] }
                })
                .collect();
            spiders.push(Spider { head: w, legs, feet });
        } else {
            let b = markers[0];
            let b2 = *distinct_black_neighbors(w)
                .iter()
                .find(|x| **x != b)
                .expect("usable white has a second black neighbor");
            let e_head = lowest_edge_between(bipartite, b2, w).expect("neighbor");
            let e_foot = lowest_edge_between(bipartite, w, b).expect("marked neighbor");
            spiders.push(Spider {
                head: b2,
                legs: vec![VertexPath { vertices: vec![b2, w, b], edges: vec![e_head, e_foot] }],
                feet: vec![b],
            });
        }
    }

    // Lift through the reduction decisions in reverse. Deletions need no
    // work (the spiders avoid deleted edges); each contraction record is
    // undone by the head/internal case analysis.
    let mut states = Vec::new();
    let mut current = host.clone();
    for rec in result.trace.records() {
        states.push(current.clone());
        current = match rec {
            TraceRecord::DeleteEdge { edge } => current.delete_edge(*edge)?,
            TraceRecord::ContractEdge { edge, survivor, .. } => {
                current.contract_edge_into(*edge, *survivor)?.0
            }
            other => {
                return Err(Error::InternalConsistency(format!(
                    "unexpected trace record {other:?} in spider reduction"
                )))
            }
        };
    }
    for (rec, before) in result.trace.records().iter().zip(states.iter()).rev() {
        if let TraceRecord::ContractEdge { edge, survivor, absorbed } = rec {
            spiders = uncontract_spiders(spiders, before, *edge, *survivor, *absorbed)?;
        }
    }
    Ok(SpiderDecomposition { spiders })
}

/// Undoes one white-white contraction inside the affected spider, if any.
/// `before` is the graph state before the contraction, where `edge` joins
/// `survivor` to `absorbed`.
fn uncontract_spiders(
    spiders: Vec<Spider>,
    before: &ColoredMultigraph,
    edge: EdgeId,
    survivor: VertexId,
    absorbed: VertexId,
) -> Result<Vec<Spider>> {
    // Which endpoint an edge touched before the contraction.
    let side_of = |e: EdgeId| -> Result<Option<VertexId>> {
        let (a, b) = before.endpoints(e)?;
        if a == survivor || b == survivor {
            Ok(Some(survivor))
        } else if a == absorbed || b == absorbed {
            Ok(Some(absorbed))
        } else {
            Ok(None)
        }
    };
    let mut out = Vec::with_capacity(spiders.len() + 1);
    for spider in spiders {
        let touches = spider.head == survivor
            || spider
                .legs
                .iter()
                .any(|l| l.vertices.contains(&survivor));
        if !touches {
            out.push(spider);
            continue;
        }
        if spider.head == survivor {
            // Head case: partition legs by which endpoint their first edge
            // touched.
            let mut p_legs = Vec::new();
            let mut q_legs = Vec::new();
            for (leg, foot) in spider.legs.into_iter().zip(spider.feet) {
                match side_of(leg.edges[0])? {
                    Some(v) if v == survivor => p_legs.push((leg, foot)),
                    Some(v) if v == absorbed => q_legs.push((leg, foot)),
                    _ => {
                        return Err(Error::InternalConsistency(
                            "head leg does not attach to either contraction side".into(),
                        ))
                    }
                }
            }
            let relabel = |(mut leg, foot): (VertexPath, VertexId), head: VertexId| {
                leg.vertices[0] = head;
                (leg, foot)
            };
            let build = |legs: Vec<(VertexPath, VertexId)>, head: VertexId| -> Spider {
                let (legs, feet) = legs.into_iter().unzip();
                Spider { head, legs, feet }
            };
            match (p_legs.len(), q_legs.len()) {
                (_, 0) => {
                    let legs = p_legs.into_iter().map(|l| relabel(l, survivor)).collect();
                    out.push(build(legs, survivor));
                }
                (0, _) => {
                    let legs = q_legs.into_iter().map(|l| relabel(l, absorbed)).collect();
                    out.push(build(legs, absorbed));
                }
                (p, q) if p >= 2 && q >= 2 => {
                    let legs_p = p_legs.into_iter().map(|l| relabel(l, survivor)).collect();
                    let legs_q = q_legs.into_iter().map(|l| relabel(l, absorbed)).collect();
                    out.push(build(legs_p, survivor));
                    out.push(build(legs_q, absorbed));
                }
                (1, _) => {
                    // Lone leg on the survivor side: head moves to the other
                    // endpoint and the lone leg gains it.
                    let (mut lone, lone_foot) = p_legs.into_iter().next().unwrap();
                    lone.vertices[0] = survivor;
                    lone.vertices.insert(0, absorbed);
                    lone.edges.insert(0, edge);
                    let mut legs: Vec<(VertexPath, VertexId)> =
                        q_legs.into_iter().map(|l| relabel(l, absorbed)).collect();
                    legs.push((lone, lone_foot));
                    out.push(build(legs, absorbed));
                }
                (_, 1) => {
                    let (mut lone, lone_foot) = q_legs.into_iter().next().unwrap();
                    lone.vertices[0] = absorbed;
                    lone.vertices.insert(0, survivor);
                    lone.edges.insert(0, edge);
                    let mut legs: Vec<(VertexPath, VertexId)> =
                        p_legs.into_iter().map(|l| relabel(l, survivor)).collect();
                    legs.push((lone, lone_foot));
                    out.push(build(legs, survivor));
                }
                _ => unreachable!("all head partitions covered"),
            }
        } else {
            // Internal case: splice the merged vertex inside the one leg
            // that contains it.
            let mut legs = Vec::with_capacity(spider.legs.len());
            for mut leg in spider.legs {
                let Some(pos) = leg.vertices.iter().position(|v| *v == survivor) else {
                    legs.push(leg);
                    continue;
                };
                debug_assert!(pos > 0 && pos + 1 < leg.vertices.len());
                let before_side = side_of(leg.edges[pos - 1])?;
                let after_side = side_of(leg.edges[pos])?;
                match (before_side, after_side) {
                    (Some(a), Some(b)) if a == b => {
                        leg.vertices[pos] = a;
                    }
                    (Some(a), Some(b)) => {
                        leg.vertices[pos] = a;
                        leg.vertices.insert(pos + 1, b);
                        leg.edges.insert(pos, edge);
                    }
                    _ => {
                        return Err(Error::InternalConsistency(
                            "leg edges around merged vertex touch neither side".into(),
                        ))
                    }
                }
                legs.push(leg);
            }
            out.push(Spider { head: spider.head, legs, feet: spider.feet });
        }
    }
    Ok(out)
}

/// For each black vertex, k element-disjoint paths to other blacks, each
/// contained in one spider. Black-headed spiders contribute their legs;
/// white-headed spiders pair consecutive feet cyclically, so every spider
/// edge ends up in at most two paths.
pub fn extract_element_paths(sd: &SpiderDecomposition, g: &ColoredMultigraph) -> Result<BTreeMap<VertexId, Vec<VertexPath>>> {
    let mut out: BTreeMap<VertexId, Vec<VertexPath>> = BTreeMap::new();
    for spider in &sd.spiders {
        if spider.legs.len() != spider.feet.len() {
            return Err(Error::InternalConsistency("spider leg/feet mismatch".into()));
        }
        if g.is_black(spider.head) {
            for (leg, foot) in spider.legs.iter().zip(&spider.feet) {
                let mut path = leg.clone();
                path.vertices.reverse();
                path.edges.reverse();
                out.entry(*foot).or_default().push(path);
            }
        } else {
            if spider.feet.len() < 2 {
                return Err(Error::InternalConsistency("white head with fewer than two feet".into()));
            }
            let n = spider.feet.len();
            for i in 0..n {
                let j = (i + 1) % n;
                let mut vertices: Vec<VertexId> =
                    spider.legs[i].vertices.iter().rev().copied().collect();
                let mut edges: Vec<EdgeId> = spider.legs[i].edges.iter().rev().copied().collect();
                vertices.extend(spider.legs[j].vertices.iter().skip(1));
                edges.extend(spider.legs[j].edges.iter());
                out.entry(spider.feet[i]).or_default().push(VertexPath { vertices, edges });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::oracle;
    use num_rational::Rational64;
    use num_traits::Zero;

    #[test]
    fn star_decomposes_into_one_white_headed_spider() {
        let mut g = ColoredMultigraph::new();
        let w = g.add_vertex(Color::White);
        let blacks: Vec<VertexId> = (0..3).map(|_| g.add_vertex(Color::Black)).collect();
        for b in &blacks {
            g.add_edge(w, *b).unwrap();
        }
        let blackset: BTreeSet<VertexId> = blacks.iter().copied().collect();
        let sd = spider_decompose(&g, &blackset, 1).unwrap();
        assert_eq!(sd.spiders.len(), 1);
        assert_eq!(sd.spiders[0].head, w);
        assert_eq!(sd.spiders[0].feet.len(), 3);
        assert!(oracle::validate_spider_decomposition(&g, &blackset, 1, &sd).pass());
    }

    #[test]
    fn k3k_every_white_heads_three_feet() {
        let k = 5;
        let inst = gen::k3k(k);
        let blacks: BTreeSet<VertexId> = inst.terminals.iter().copied().collect();
        let sd = spider_decompose(&inst.graph, &blacks, k).unwrap();
        assert_eq!(sd.spiders.len(), k as usize);
        for s in &sd.spiders {
            assert!(inst.graph.is_white(s.head));
            assert_eq!(s.feet.len(), 3);
        }
        let report = oracle::validate_spider_decomposition(&inst.graph, &blacks, k, &sd);
        assert!(report.pass(), "{report}");
        let counts = sd.foot_count();
        assert!(blacks.iter().all(|b| counts[b] == k));
    }

    #[test]
    fn gk_host_decomposes_after_lifting() {
        let inst = gen::gk(3);
        let blacks: BTreeSet<VertexId> = inst.terminals.iter().copied().collect();
        // The weakest pair in this host sets the usable k.
        let table = crate::connectivity::full_table(&inst.graph).unwrap();
        let k = *table.values().min().unwrap();
        assert!(k >= 1);
        let sd = spider_decompose(&inst.graph, &blacks, k).unwrap();
        let report = oracle::validate_spider_decomposition(&inst.graph, &blacks, k, &sd);
        assert!(report.pass(), "{report}");
    }

    #[test]
    fn lifting_exercises_contractions() {
        // A host with white-white edges forces contraction records: chain of
        // white pairs between blacks.
        let mut g = ColoredMultigraph::new();
        let blacks: Vec<VertexId> = (0..4).map(|_| g.add_vertex(Color::Black)).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                for _ in 0..2 {
                    let w1 = g.add_vertex(Color::White);
                    let w2 = g.add_vertex(Color::White);
                    g.add_edge(blacks[i], w1).unwrap();
                    g.add_edge(w1, w2).unwrap();
                    g.add_edge(w2, blacks[j]).unwrap();
                }
            }
        }
        let blackset: BTreeSet<VertexId> = blacks.iter().copied().collect();
        let k = 2;
        let sd = spider_decompose(&g, &blackset, k).unwrap();
        let report = oracle::validate_spider_decomposition(&g, &blackset, k, &sd);
        assert!(report.pass(), "{report}");
    }

    #[test]
    fn decompose_rejects_black_black_edges() {
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::Black);
        let b = g.add_vertex(Color::Black);
        g.add_edge(a, b).unwrap();
        let blacks = BTreeSet::from([a, b]);
        assert!(matches!(spider_decompose(&g, &blacks, 1), Err(Error::BlackBlackEdge(_))));
    }

    #[test]
    fn extract_single_black_headed_leg() {
        let mut g = ColoredMultigraph::new();
        let head = g.add_vertex(Color::Black);
        let w = g.add_vertex(Color::White);
        let foot = g.add_vertex(Color::Black);
        let e1 = g.add_edge(head, w).unwrap();
        let e2 = g.add_edge(w, foot).unwrap();
        let sd = SpiderDecomposition {
            spiders: vec![Spider {
                head,
                legs: vec![VertexPath { vertices: vec![head, w, foot], edges: vec![e1, e2] }],
                feet: vec![foot],
            }],
        };
        let paths = extract_element_paths(&sd, &g).unwrap();
        assert_eq!(paths[&foot].len(), 1);
        assert_eq!(paths[&foot][0].vertices, vec![foot, w, head]);
    }

    #[test]
    fn extract_white_head_two_feet_uses_each_edge_twice() {
        let mut g = ColoredMultigraph::new();
        let w = g.add_vertex(Color::White);
        let a = g.add_vertex(Color::Black);
        let b = g.add_vertex(Color::Black);
        let ea = g.add_edge(w, a).unwrap();
        let eb = g.add_edge(w, b).unwrap();
        let sd = SpiderDecomposition {
            spiders: vec![Spider {
                head: w,
                legs: vec![
                    VertexPath { vertices: vec![w, a], edges: vec![ea] },
                    VertexPath { vertices: vec![w, b], edges: vec![eb] },
                ],
                feet: vec![a, b],
            }],
        };
        let paths = extract_element_paths(&sd, &g).unwrap();
        assert_eq!(paths[&a].len(), 1);
        assert_eq!(paths[&b].len(), 1);
        let mut usage: BTreeMap<EdgeId, u32> = BTreeMap::new();
        for p in paths.values().flatten() {
            for e in &p.edges {
                *usage.entry(*e).or_insert(0) += 1;
            }
        }
        assert!(usage.values().all(|&c| c == 2));
    }

    #[test]
    fn k34_paths_per_black_and_edge_usage_bound() {
        let k = 4;
        let inst = gen::k3k(k);
        let blacks: BTreeSet<VertexId> = inst.terminals.iter().copied().collect();
        let sd = spider_decompose(&inst.graph, &blacks, k).unwrap();
        let paths = extract_element_paths(&sd, &inst.graph).unwrap();
        let mut usage: BTreeMap<EdgeId, u32> = BTreeMap::new();
        for b in &blacks {
            assert_eq!(paths[b].len(), k as usize);
            for p in &paths[b] {
                assert_eq!(p.vertices.first(), Some(b));
                assert!(inst.graph.is_black(*p.vertices.last().unwrap()));
                for e in &p.edges {
                    *usage.entry(*e).or_insert(0) += 1;
                }
            }
        }
        assert!(usage.values().all(|&c| c <= 2));
        // Cost mechanism: total path cost is at most twice the host cost.
        let host_cost: Rational64 = sd.edges().iter().map(|e| inst.graph.cost(*e).unwrap()).sum();
        let mut path_cost = Rational64::zero();
        for p in paths.values().flatten() {
            for e in &p.edges {
                path_cost += inst.graph.cost(*e).unwrap();
            }
        }
        assert!(path_cost <= host_cost * 2);
    }
}
